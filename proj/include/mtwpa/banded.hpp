#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace mtwpa {

// General banded matrix with LU factorization and partial pivoting
// (LAPACK gbtrf-style band storage with kl extra fill rows).
class BandedLU {
 public:
  BandedLU() = default;
  BandedLU(int n, int kl, int ku) { reset(n, kl, ku); }

  void reset(int n, int kl, int ku) {
    n_ = n;
    kl_ = kl;
    ku_ = ku;
    ldab_ = 2 * kl + ku + 1;
    ab_.assign(static_cast<std::size_t>(ldab_) * n, 0.0);
    ipiv_.assign(n, 0);
    factored_ = false;
  }

  void clear() {
    std::fill(ab_.begin(), ab_.end(), 0.0);
    factored_ = false;
  }

  int n() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }

  // Assembly accessor for A(i, j); |i - j| must be within the band.
  double& at(int i, int j) {
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }
  double get(int i, int j) const {
    if (j - i > ku_ || i - j > kl_) return 0.0;
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
  }

  // In-place LU with row partial pivoting. Returns false on exact singularity.
  bool factor() {
    const int kv = kl_ + ku_;  // rows above the diagonal in storage incl. fill
    for (int j = 0; j < n_; ++j) {
      const int km = std::min(kl_, n_ - 1 - j);  // subdiagonal count in column j
      // pivot search in column j, rows j..j+km
      int jp = 0;
      double amax = std::abs(ab_[idx(kv, j)]);
      for (int k = 1; k <= km; ++k) {
        const double v = std::abs(ab_[idx(kv + k, j)]);
        if (v > amax) {
          amax = v;
          jp = k;
        }
      }
      ipiv_[j] = j + jp;
      if (amax == 0.0) return false;
      const int ju = std::min(j + ku_ + kl_, n_ - 1);  // last column touched
      if (jp != 0) {
        // swap rows j and j+jp across columns j..ju
        for (int c = j; c <= ju; ++c) {
          std::swap(ab_[idx(kv + j - c, c)], ab_[idx(kv + j - c + jp, c)]);
        }
      }
      if (km > 0) {
        const double piv = ab_[idx(kv, j)];
        for (int k = 1; k <= km; ++k) ab_[idx(kv + k, j)] /= piv;
        for (int c = j + 1; c <= ju; ++c) {
          const double ujc = ab_[idx(kv + j - c, c)];
          if (ujc != 0.0) {
            for (int k = 1; k <= km; ++k)
              ab_[idx(kv + j - c + k, c)] -= ab_[idx(kv + k, j)] * ujc;
          }
        }
      }
    }
    factored_ = true;
    return true;
  }

  // Solve A x = b with the stored factorization; b is overwritten by x.
  void solve(std::vector<double>& b) const {
    if (!factored_) throw std::logic_error("BandedLU: solve before factor");
    const int kv = kl_ + ku_;
    // L: apply permutations and multipliers
    for (int j = 0; j < n_ - 1; ++j) {
      const int p = ipiv_[j];
      if (p != j) std::swap(b[j], b[p]);
      const int km = std::min(kl_, n_ - 1 - j);
      for (int k = 1; k <= km; ++k) b[j + k] -= ab_[idx(kv + k, j)] * b[j];
    }
    // U: back substitution
    for (int j = n_ - 1; j >= 0; --j) {
      b[j] /= ab_[idx(kv, j)];
      const int top = std::max(0, j - kv);
      for (int i = top; i < j; ++i) b[i] -= ab_[idx(kv + i - j, j)] * b[j];
    }
  }

 private:
  std::size_t idx(int row, int col) const {
    return static_cast<std::size_t>(col) * ldab_ + row;
  }

  int n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 0;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
  bool factored_ = false;
};

}  // namespace mtwpa
