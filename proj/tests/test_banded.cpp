#include <catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "mtwpa/banded.hpp"

using namespace mtwpa;
using Catch::Approx;

namespace {

// dense Gaussian elimination oracle with partial pivoting
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const int n = int(b.size());
  for (int j = 0; j < n; ++j) {
    int p = j;
    for (int i = j + 1; i < n; ++i)
      if (std::abs(a[i][j]) > std::abs(a[p][j])) p = i;
    std::swap(a[j], a[p]);
    std::swap(b[j], b[p]);
    for (int i = j + 1; i < n; ++i) {
      const double m = a[i][j] / a[j][j];
      for (int k = j; k < n; ++k) a[i][k] -= m * a[j][k];
      b[i] -= m * b[j];
    }
  }
  for (int j = n - 1; j >= 0; --j) {
    for (int k = j + 1; k < n; ++k) b[j] -= a[j][k] * b[k];
    b[j] /= a[j][j];
  }
  return b;
}

}  // namespace

TEST_CASE("banded LU matches dense solve on random banded systems") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 5 + int(rng() % 60);
    const int kl = int(rng() % 4) + 1;
    const int ku = int(rng() % 4) + 1;
    BandedLU lu(n, kl, ku);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
        const double v = uni(rng) + (i == j ? 2.0 : 0.0);
        lu.at(i, j) = v;
        dense[i][j] = v;
      }
    }
    std::vector<double> b(n);
    for (double& x : b) x = uni(rng);
    const std::vector<double> ref = dense_solve(dense, b);
    REQUIRE(lu.factor());
    std::vector<double> x = b;
    lu.solve(x);
    for (int i = 0; i < n; ++i) CHECK(x[i] == Approx(ref[i]).margin(1e-9));
  }
}

TEST_CASE("banded LU pivots through a zero diagonal") {
  // constraint-style row with structural zero on the diagonal
  BandedLU lu(3, 2, 2);
  // [0 1 0; 1 0 1; 0 1 1] x = [1; 2; 3]
  lu.at(0, 1) = 1.0;
  lu.at(1, 0) = 1.0;
  lu.at(1, 2) = 1.0;
  lu.at(2, 1) = 1.0;
  lu.at(2, 2) = 1.0;
  REQUIRE(lu.factor());
  std::vector<double> b{1.0, 2.0, 3.0};
  lu.solve(b);
  // x = [0, 1, 2]
  CHECK(b[0] == Approx(0.0).margin(1e-12));
  CHECK(b[1] == Approx(1.0).margin(1e-12));
  CHECK(b[2] == Approx(2.0).margin(1e-12));
}

TEST_CASE("banded LU reports singularity") {
  BandedLU lu(2, 1, 1);
  lu.at(0, 0) = 1.0;
  lu.at(0, 1) = 2.0;
  // second row all zero
  CHECK_FALSE(lu.factor());
}
