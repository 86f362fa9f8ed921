#include <catch_amalgamated.hpp>

#include <complex>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "mtwpa/rf_network.hpp"
#include "mtwpa/touchstone.hpp"

using namespace mtwpa;
using Catch::Approx;

namespace {

// ---------------------------------------------------------------------------
// Independent oracle: complex nodal analysis of the lattice filter built from
// its raw R/L/C elements (plus an ideal transformer), solved by dense Gaussian
// elimination. Shares nothing with the closed-form lattice S-parameters.
// ---------------------------------------------------------------------------
struct NodalCkt {
  int nn = 1;  // node 0 = ground
  struct Elem { int a, b; char kind; double v; };
  std::vector<Elem> elems;
  std::vector<std::array<int, 4>> tfmrs;

  int node() { return nn++; }
  void R(int a, int b, double r) { elems.push_back({a, b, 'R', r}); }
  void L(int a, int b, double l) { elems.push_back({a, b, 'L', l}); }
  void C(int a, int b, double c) { elems.push_back({a, b, 'C', c}); }
  void T(int a, int b, int c, int d) { tfmrs.push_back({a, b, c, d}); }

  // two-port S at ref r0: port nodes p1, p2 with source/load resistors added
  void sparams(double w, int p1, int p2, double r0, cplx& s11, cplx& s21) const {
    const int n = nn - 1 + int(tfmrs.size());
    std::vector<std::vector<cplx>> A(n, std::vector<cplx>(n, 0.0));
    std::vector<cplx> b(n, 0.0);
    auto stamp_y = [&](int a, int bb, cplx y) {
      if (a) A[a - 1][a - 1] += y;
      if (bb) A[bb - 1][bb - 1] += y;
      if (a && bb) {
        A[a - 1][bb - 1] -= y;
        A[bb - 1][a - 1] -= y;
      }
    };
    for (const auto& e : elems) {
      if (e.kind == 'R') stamp_y(e.a, e.b, 1.0 / e.v);
      if (e.kind == 'L') stamp_y(e.a, e.b, 1.0 / cplx(0.0, w * e.v));
      if (e.kind == 'C') stamp_y(e.a, e.b, cplx(0.0, w * e.v));
    }
    for (std::size_t k = 0; k < tfmrs.size(); ++k) {
      const auto& t = tfmrs[k];
      const int col = nn - 1 + int(k);
      auto put = [&](int nd, double s) {
        if (nd) {
          A[nd - 1][col] += s;
          A[col][nd - 1] += s;
        }
      };
      put(t[0], 1.0);
      put(t[1], -1.0);
      put(t[2], -1.0);
      put(t[3], 1.0);
    }
    // source: 1 V EMF behind r0 into p1; load r0 at p2
    stamp_y(p1, 0, 1.0 / r0);
    stamp_y(p2, 0, 1.0 / r0);
    b[p1 - 1] = 1.0 / r0;
    // dense complex solve
    for (int j = 0; j < n; ++j) {
      int piv = j;
      for (int i = j + 1; i < n; ++i)
        if (std::abs(A[i][j]) > std::abs(A[piv][j])) piv = i;
      std::swap(A[j], A[piv]);
      std::swap(b[j], b[piv]);
      for (int i = j + 1; i < n; ++i) {
        const cplx m = A[i][j] / A[j][j];
        for (int k2 = j; k2 < n; ++k2) A[i][k2] -= m * A[j][k2];
        b[i] -= m * b[j];
      }
    }
    for (int j = n - 1; j >= 0; --j) {
      for (int k2 = j + 1; k2 < n; ++k2) b[j] -= A[j][k2] * b[k2];
      b[j] /= A[j][j];
    }
    const cplx v1 = b[p1 - 1], v2 = b[p2 - 1];
    s11 = 2.0 * v1 - 1.0;
    s21 = 2.0 * v2;
  }
};

// lattice section from raw elements (mirrors the time-domain stamping)
void build_lattice_section(NodalCkt& ckt, int in, int out, const MorganElements& e) {
  const int x = ckt.node();
  const int y = ckt.node();
  auto za = [&](int p, int q) {
    const int m = ckt.node();
    ckt.C(p, q, e.c1);
    ckt.L(p, m, e.l2);
    ckt.C(m, q, e.c3);
    ckt.R(m, q, e.rf);
  };
  auto zb = [&](int p, int q) {
    const int m1 = ckt.node(), m2 = ckt.node();
    ckt.L(p, m1, e.l1d);
    ckt.C(m1, q, e.c2d);
    ckt.L(m1, m2, e.l3d);
    ckt.R(m2, q, e.rf);
  };
  za(in, x);
  za(0, y);
  zb(in, y);
  zb(0, x);
  ckt.T(x, y, out, 0);
}

FrequencyGrid test_grid() { return linspace_grid_hz(0.1e9, 20e9, 200); }

}  // namespace

TEST_CASE("frequency grid validation") {
  CHECK_THROWS_AS(FrequencyGrid{}.validate(), std::domain_error);
  FrequencyGrid g;
  g.omega = {1.0, 1.0};
  CHECK_THROWS_AS(g.validate(), std::domain_error);
  g.omega = {2.0, 1.0};
  CHECK_THROWS_AS(g.validate(), std::domain_error);
}

TEST_CASE("cascade basics") {
  const FrequencyGrid grid = test_grid();
  const TwoPortResponse thru = identity_thru(grid);
  const TwoPortResponse att3 = attenuator(3.0, grid);

  const TwoPortResponse same = cascade(att3, thru);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(same.s21[i] - att3.s21[i]) < 1e-12);
    CHECK(std::abs(same.s11[i] - att3.s11[i]) < 1e-12);
  }
  const TwoPortResponse both = cascade(att3, att3);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(20.0 * std::log10(std::abs(both.s21[i])) == Approx(-6.0).margin(1e-9));

  FrequencyGrid other = linspace_grid_hz(0.2e9, 20e9, 200);
  CHECK_THROWS_AS(cascade(att3, identity_thru(other)), std::domain_error);
}

TEST_CASE("cascade matches a nodal oracle for series/shunt sections") {
  // section A: series 30 ohm; section B: shunt 75 ohm to ground
  const FrequencyGrid grid = linspace_grid_hz(1e9, 10e9, 10);
  TwoPortResponse a = identity_thru(grid), b = identity_thru(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    series_impedance_sparams(cplx(30.0, 0.0), 50.0, a.s11[i], a.s21[i]);
    a.s22[i] = a.s11[i];
    a.s12[i] = a.s21[i];
    const cplx y(1.0 / 75.0, 0.0);
    b.s11[i] = -y * 50.0 / (2.0 + y * 50.0);
    b.s21[i] = 2.0 / (2.0 + y * 50.0);
    b.s22[i] = b.s11[i];
    b.s12[i] = b.s21[i];
  }
  const TwoPortResponse chained = cascade(a, b);
  // oracle: direct nodal analysis of [series 30] then [shunt 75]
  NodalCkt ckt;
  const int p1 = ckt.node();
  const int p2 = ckt.node();
  ckt.R(p1, p2, 30.0);
  ckt.R(p2, 0, 75.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cplx s11, s21;
    ckt.sparams(grid.omega[i], p1, p2, 50.0, s11, s21);
    CHECK(std::abs(chained.s21[i] - s21) < 1e-9);
    CHECK(std::abs(chained.s11[i] - s11) < 1e-9);
  }
  // associativity
  const TwoPortResponse left = cascade(cascade(a, b), a);
  const TwoPortResponse right = cascade(a, cascade(b, a));
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(left.s21[i] - right.s21[i]) < 1e-10);
}

TEST_CASE("reflectionless filter model vs nodal-analysis oracle") {
  const double lf = 1.4e-9, cf = 0.7e-12;
  const MorganElements e = morgan_elements(lf, cf);
  const FrequencyGrid grid = test_grid();
  const TwoPortResponse r1 = morgan_highpass(lf, cf, 1, grid);

  NodalCkt ckt;
  const int p1 = ckt.node();
  const int p2 = ckt.node();
  build_lattice_section(ckt, p1, p2, e);
  for (std::size_t i = 0; i < grid.size(); i += 7) {
    cplx s11, s21;
    ckt.sparams(grid.omega[i], p1, p2, e.rf, s11, s21);
    CHECK(std::abs(s11 - r1.s11[i]) < 1e-9);
    CHECK(std::abs(s21 - r1.s21[i]) < 1e-9);
  }
}

TEST_CASE("reflectionless filter properties") {
  const FrequencyGrid grid = test_grid();
  const TwoPortResponse r2 = morgan_highpass(1.4e-9, 0.7e-12, 2, grid);
  const TwoPortResponse r1 = morgan_highpass(1.4e-9, 0.7e-12, 1, grid);

  // ideal-element reflectionless property across 0.1-20 GHz
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(20.0 * std::log10(std::max(std::abs(r2.s11[i]), 1e-300)) < -30.0);

  // reciprocity and passivity
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(r2.s12[i] - r2.s21[i]) < 1e-15);
  CHECK(max_s_magnitude(r2) <= 1.0 + 1e-9);

  // stop-band attenuation monotone increasing below the knee, ~0 dB above 9 GHz
  double prev = -1e9;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double f = grid.omega[i] / (2.0 * kPi);
    const double mag = 20.0 * std::log10(std::abs(r2.s21[i]));
    if (f < 6.5e9) {
      CHECK(mag >= prev);
      prev = mag;
    }
    if (f > 11e9) CHECK(mag > -1.0);
  }
  // two sections double the stop-band dB of one
  for (std::size_t i = 0; i < grid.size(); i += 9) {
    const double one = 20.0 * std::log10(std::abs(r1.s21[i]));
    const double two = 20.0 * std::log10(std::abs(r2.s21[i]));
    CHECK(two == Approx(2.0 * one).margin(1e-9));
  }
  CHECK_THROWS_AS(morgan_highpass(-1e-9, 0.7e-12, 2, grid), std::domain_error);
  CHECK_THROWS_AS(morgan_highpass(1.4e-9, 0.7e-12, 0, grid), std::domain_error);
}

TEST_CASE("behavioral high-pass anchors") {
  BehavioralHighpass m;  // paper defaults: 7.3 GHz, 60 dB/GHz, floor 55, IL 3
  CHECK(m.s21_db_at(7.3e9) == Approx(-3.0));
  CHECK(m.s21_db_at(10e9) == Approx(-3.0));
  CHECK(m.s21_db_at(5.3e9) == Approx(-58.0));  // clamped at floor + IL
  m.stopband_floor_db = 100.0;                 // unclamped: pure roll-off arithmetic
  CHECK(m.s21_db_at(6.3e9) == Approx(-63.0));
  m.stopband_floor_db = 55.0;

  const FrequencyGrid grid = test_grid();
  const TwoPortResponse r = behavioral_highpass(m, grid);
  double prev = -1e9;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double mag = 20.0 * std::log10(std::abs(r.s21[i]));
    CHECK(mag >= prev - 1e-12);
    prev = mag;
    CHECK(std::abs(r.s12[i] - r.s21[i]) < 1e-15);
  }
  CHECK(max_s_magnitude(r) <= 1.0 + 1e-9);
}

TEST_CASE("balanced hybrid composition") {
  const FrequencyGrid grid = test_grid();
  BehavioralHighpass m;
  m.return_loss_db = 0.0;  // worst case: |s11| = 1 at the element filters
  const TwoPortResponse f = behavioral_highpass(m, grid);

  // ideal hybrids: input reflections cancel exactly, s21 equals one filter
  const TwoPortResponse ideal = balanced_compose(3.0102999566, 90.0, f);
  for (std::size_t i = 0; i < grid.size(); i += 11) {
    CHECK(std::abs(ideal.s11[i]) < 1e-9);
    CHECK(std::abs(ideal.s21[i]) == Approx(std::abs(f.s21[i])).margin(1e-9));
  }

  // phase error: residual input leakage = sin(delta) for full-reflection filters
  const TwoPortResponse off = balanced_compose(3.0102999566, 91.0, f);
  for (std::size_t i = 0; i < grid.size(); i += 11)
    CHECK(std::abs(off.s11[i]) == Approx(std::sin(1.0 * kPi / 180.0)).epsilon(1e-3));
  // half-degree per-pass error corresponds to the -41 dB leakage scale
  const TwoPortResponse half = balanced_compose(3.0102999566, 90.5, f);
  CHECK(20.0 * std::log10(std::abs(half.s11[40])) == Approx(-41.2).margin(0.3));

  // 3.5 dB hybrids: ~1 dB extra pass-band loss vs ideal
  const TwoPortResponse lossy = balanced_compose(3.5, 90.0, f);
  const double extra =
      20.0 * std::log10(std::abs(ideal.s21.back())) - 20.0 * std::log10(std::abs(lossy.s21.back()));
  CHECK(extra == Approx(0.98).margin(0.05));
}

TEST_CASE("touchstone export/import round trip") {
  const FrequencyGrid grid = linspace_grid_hz(1e9, 10e9, 21);
  const TwoPortResponse r = morgan_highpass(1.4e-9, 0.7e-12, 2, grid);
  const std::string path = (std::filesystem::temp_directory_path() / "mtwpa_test.s2p").string();
  export_touchstone(r, path);

  // option line is the first non-comment line
  {
    std::ifstream is(path);
    std::string line;
    while (std::getline(is, line) && (line.empty() || line[0] == '!')) {}
    CHECK(line.substr(0, 10) == "# HZ S RI ");
  }
  const TwoPortResponse back = import_touchstone(path);
  REQUIRE(back.grid.size() == grid.size());
  CHECK(back.ref_ohms == Approx(r.ref_ohms));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(back.s11[i] - r.s11[i]) < 1e-8);
    CHECK(std::abs(back.s21[i] - r.s21[i]) < 1e-8);
    CHECK(std::abs(back.s12[i] - r.s12[i]) < 1e-8);
    CHECK(std::abs(back.s22[i] - r.s22[i]) < 1e-8);
    CHECK(back.grid.omega[i] == Approx(grid.omega[i]).epsilon(1e-9));
  }
  // thru line exports unity s21 rows
  const std::string path2 = (std::filesystem::temp_directory_path() / "mtwpa_thru.s2p").string();
  export_touchstone(identity_thru(grid), path2);
  const TwoPortResponse thru = import_touchstone(path2);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(thru.s21[i] - cplx(1.0, 0.0)) < 1e-12);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}
