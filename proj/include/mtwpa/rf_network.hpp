#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mtwpa/constants.hpp"

namespace mtwpa {

using cplx = std::complex<double>;

struct FrequencyGrid {
  std::vector<double> omega;  // rad/s, strictly increasing, all > 0

  void validate() const {
    if (omega.empty()) throw std::domain_error("FrequencyGrid: empty");
    double prev = 0.0;
    for (double w : omega) {
      if (!(w > prev)) throw std::domain_error("FrequencyGrid: must be strictly increasing and positive");
      prev = w;
    }
  }
  std::size_t size() const { return omega.size(); }
};

inline FrequencyGrid linspace_grid_hz(double f_lo, double f_hi, std::size_t n) {
  if (n < 2 || !(f_lo > 0.0) || !(f_hi > f_lo))
    throw std::domain_error("linspace_grid_hz: bad range");
  FrequencyGrid g;
  g.omega.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g.omega[i] = 2.0 * kPi * (f_lo + (f_hi - f_lo) * double(i) / double(n - 1));
  return g;
}

// Complex 2x2 S-matrix sampled on a frequency grid, at reference ref_ohms.
struct TwoPortResponse {
  FrequencyGrid grid;
  std::vector<cplx> s11, s12, s21, s22;
  double ref_ohms = 50.0;

  void validate() const {
    grid.validate();
    const std::size_t n = grid.size();
    if (s11.size() != n || s12.size() != n || s21.size() != n || s22.size() != n)
      throw std::domain_error("TwoPortResponse: array lengths must equal grid length");
  }
};

inline TwoPortResponse identity_thru(const FrequencyGrid& grid, double ref = 50.0) {
  grid.validate();
  TwoPortResponse r;
  r.grid = grid;
  r.ref_ohms = ref;
  const std::size_t n = grid.size();
  r.s11.assign(n, 0.0);
  r.s22.assign(n, 0.0);
  r.s12.assign(n, 1.0);
  r.s21.assign(n, 1.0);
  return r;
}

// Matched attenuator, |s21| = 10^(-att_db/20).
inline TwoPortResponse attenuator(double att_db, const FrequencyGrid& grid, double ref = 50.0) {
  TwoPortResponse r = identity_thru(grid, ref);
  const cplx t = std::pow(10.0, -att_db / 20.0);
  std::fill(r.s21.begin(), r.s21.end(), t);
  std::fill(r.s12.begin(), r.s12.end(), t);
  return r;
}

// S-parameters of a series impedance z in a ref-ohm system.
inline void series_impedance_sparams(cplx z, double ref, cplx& s11, cplx& s21) {
  s11 = z / (z + 2.0 * ref);
  s21 = 2.0 * ref / (z + 2.0 * ref);
}

namespace detail {
struct Abcd {
  cplx a, b, c, d;
};

inline Abcd s_to_abcd(cplx s11, cplx s12, cplx s21, cplx s22, double z0) {
  const cplx den = 2.0 * s21;
  if (std::abs(den) == 0.0) throw std::domain_error("cascade: s21 = 0 has no ABCD form");
  Abcd m;
  m.a = ((1.0 + s11) * (1.0 - s22) + s12 * s21) / den;
  m.b = z0 * ((1.0 + s11) * (1.0 + s22) - s12 * s21) / den;
  m.c = ((1.0 - s11) * (1.0 - s22) - s12 * s21) / (z0 * den);
  m.d = ((1.0 - s11) * (1.0 + s22) + s12 * s21) / den;
  return m;
}

inline void abcd_to_s(const Abcd& m, double z0, cplx& s11, cplx& s12, cplx& s21, cplx& s22) {
  const cplx den = m.a + m.b / z0 + m.c * z0 + m.d;
  s11 = (m.a + m.b / z0 - m.c * z0 - m.d) / den;
  s21 = 2.0 / den;
  s12 = 2.0 * (m.a * m.d - m.b * m.c) / den;
  s22 = (-m.a + m.b / z0 - m.c * z0 + m.d) / den;
}
}  // namespace detail

// Chain two two-ports (a followed by b) via per-point ABCD multiplication.
inline TwoPortResponse cascade(const TwoPortResponse& a, const TwoPortResponse& b) {
  a.validate();
  b.validate();
  if (a.grid.omega != b.grid.omega) throw std::domain_error("cascade: grid mismatch");
  if (a.ref_ohms != b.ref_ohms) throw std::domain_error("cascade: reference impedance mismatch");
  TwoPortResponse out;
  out.grid = a.grid;
  out.ref_ohms = a.ref_ohms;
  const std::size_t n = a.grid.size();
  out.s11.resize(n);
  out.s12.resize(n);
  out.s21.resize(n);
  out.s22.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ma = detail::s_to_abcd(a.s11[i], a.s12[i], a.s21[i], a.s22[i], a.ref_ohms);
    const auto mb = detail::s_to_abcd(b.s11[i], b.s12[i], b.s21[i], b.s22[i], b.ref_ohms);
    detail::Abcd m;
    m.a = ma.a * mb.a + ma.b * mb.c;
    m.b = ma.a * mb.b + ma.b * mb.d;
    m.c = ma.c * mb.a + ma.d * mb.c;
    m.d = ma.c * mb.b + ma.d * mb.d;
    detail::abcd_to_s(m, out.ref_ohms, out.s11[i], out.s12[i], out.s21[i], out.s22[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reflectionless high-pass filter, lumped model.
//
// Symmetric constant-resistance lattice: series arm Za, cross arm Zb = Rf^2/Za,
// which gives S11 = S22 = 0 identically and S21 = (Rf - Za)/(Rf + Za).
// Za is the input impedance of a third-order Butterworth high-pass ladder
// terminated internally in Rf (stop-band energy is dissipated there):
//
//    Za:  o--+----L2----+---o      C1 = C3 = c_f, L2 = l_f, terminated by Rf
//            |          |          (shunt C1 at the input node, then series L2,
//           C1      C3 || Rf        then shunt C3 in parallel with Rf)
//
// with Rf = sqrt(l_f / (2 c_f)) and wc = 2 Rf / l_f; the paper's element values
// (1.4 nH, 0.7 pF) put the -3 dB knee of one section at 7.19 GHz.
// Zb is the exact dual network. Sections cascade multiplicatively (each section
// is matched at both ports), so n_stages doubles the stop-band dB.
// ---------------------------------------------------------------------------
struct MorganElements {
  double rf;    // internal/reference resistance
  double wc;    // prototype cutoff, rad/s
  double c1, l2, c3;        // Za ladder
  double l1d, c2d, l3d;     // Zb = dual ladder: L1d series, then C2d shunt, then L3d + Rf
};

inline MorganElements morgan_elements(double l_f, double c_f) {
  if (!(l_f > 0.0) || !(c_f > 0.0)) throw std::domain_error("morgan_highpass: elements must be > 0");
  MorganElements e;
  e.rf = std::sqrt(l_f / (2.0 * c_f));
  e.wc = 2.0 * e.rf / l_f;
  e.c1 = c_f;
  e.l2 = l_f;
  e.c3 = c_f;
  e.l1d = e.rf * e.rf * e.c1;  // dual of shunt C1
  e.c2d = e.l2 / (e.rf * e.rf);
  e.l3d = e.rf * e.rf * e.c3;
  return e;
}

namespace detail {
inline cplx morgan_za(const MorganElements& e, double w) {
  const cplx jw{0.0, w};
  const cplx y3 = jw * e.c3 + 1.0 / e.rf;          // C3 || Rf
  const cplx z23 = jw * e.l2 + 1.0 / y3;           // L2 in series
  const cplx ya = jw * e.c1 + 1.0 / z23;           // C1 shunt at input
  return 1.0 / ya;
}
}  // namespace detail

// Reflectionless high-pass sections from the paper's lumped element values.
// The response is referenced to the filter's own image resistance Rf.
inline TwoPortResponse morgan_highpass(double l_f, double c_f, int n_stages,
                                       const FrequencyGrid& grid) {
  if (n_stages < 1) throw std::domain_error("morgan_highpass: n_stages must be >= 1");
  grid.validate();
  const MorganElements e = morgan_elements(l_f, c_f);
  TwoPortResponse r;
  r.grid = grid;
  r.ref_ohms = e.rf;
  const std::size_t n = grid.size();
  r.s11.assign(n, 0.0);
  r.s22.assign(n, 0.0);
  r.s12.resize(n);
  r.s21.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx za = detail::morgan_za(e, grid.omega[i]);
    const cplx t = (e.rf - za) / (e.rf + za);
    const cplx tn = std::pow(t, n_stages);
    r.s21[i] = tn;
    r.s12[i] = tn;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Behavioral high-pass model of the measured balanced filter.
// ---------------------------------------------------------------------------
struct BehavioralHighpass {
  double cutoff_hz = 7.3e9;
  double rolloff_db_per_ghz = 60.0;
  double stopband_floor_db = 55.0;   // max isolation beyond the pass-band IL
  double passband_il_db = 3.0;
  double return_loss_db = 15.0;

  void validate() const {
    if (!(cutoff_hz > 0.0)) throw std::domain_error("BehavioralHighpass: cutoff must be > 0");
    if (!(rolloff_db_per_ghz > 0.0)) throw std::domain_error("BehavioralHighpass: rolloff must be > 0");
    if (!(stopband_floor_db >= 0.0)) throw std::domain_error("BehavioralHighpass: floor must be >= 0");
    if (!(passband_il_db >= 0.0)) throw std::domain_error("BehavioralHighpass: passband IL must be >= 0");
  }

  double s21_db_at(double f_hz) const {
    double att = 0.0;
    if (f_hz < cutoff_hz) att = (cutoff_hz - f_hz) / 1e9 * rolloff_db_per_ghz;
    att = std::min(att, stopband_floor_db);
    return -(passband_il_db + att);
  }
};

// Magnitude-only (zero-phase) behavioral response; all paper comparisons are
// magnitude spectra.
inline TwoPortResponse behavioral_highpass(const BehavioralHighpass& m, const FrequencyGrid& grid) {
  m.validate();
  grid.validate();
  TwoPortResponse r;
  r.grid = grid;
  r.ref_ohms = 50.0;
  const std::size_t n = grid.size();
  r.s11.resize(n);
  r.s22.resize(n);
  r.s12.resize(n);
  r.s21.resize(n);
  const double refl = std::pow(10.0, -m.return_loss_db / 20.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = grid.omega[i] / (2.0 * kPi);
    const double t = std::pow(10.0, m.s21_db_at(f) / 20.0);
    r.s21[i] = t;
    r.s12[i] = t;
    r.s11[i] = refl;
    r.s22[i] = refl;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Balanced composition: hybrid -- (two mirrored filters) -- hybrid.
//
// Ideal quadrature hybrids split the input into through (-il, 0 deg) and
// coupled (-il, -90 deg) branches. The two filter paths recombine at OUT with
// equal phase; stop-band reflections recombine at the input hybrid's isolated
// port (internal load) and cancel at IN.
// ---------------------------------------------------------------------------
inline TwoPortResponse balanced_compose(double hybrid_il_db, double hybrid_phase_deg,
                                        const TwoPortResponse& filter) {
  filter.validate();
  TwoPortResponse r;
  r.grid = filter.grid;
  r.ref_ohms = filter.ref_ohms;
  const std::size_t n = filter.grid.size();
  r.s11.resize(n);
  r.s22.resize(n);
  r.s12.resize(n);
  r.s21.resize(n);
  const double amp = std::pow(10.0, -hybrid_il_db / 20.0);
  const cplx j{0.0, 1.0};
  const cplx through = amp;                                                  // port->direct
  const cplx coupled = amp * std::exp(-j * hybrid_phase_deg * kPi / 180.0);  // port->coupled
  for (std::size_t i = 0; i < n; ++i) {
    // Path A: through -> filter 1 -> coupled ; Path B: coupled -> filter 2 -> through.
    r.s21[i] = filter.s21[i] * (through * coupled + coupled * through);
    r.s12[i] = r.s21[i];
    // Reflections return to IN via through^2 and coupled^2: cancel for 90 deg.
    r.s11[i] = filter.s11[i] * (through * through + coupled * coupled);
    r.s22[i] = filter.s22[i] * (through * through + coupled * coupled);
  }
  return r;
}

// max |s_ij| over the grid; passive networks stay <= 1 + 1e-9.
inline double max_s_magnitude(const TwoPortResponse& r) {
  r.validate();
  double m = 0.0;
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    m = std::max({m, std::abs(r.s11[i]), std::abs(r.s12[i]), std::abs(r.s21[i]), std::abs(r.s22[i])});
  }
  return m;
}

}  // namespace mtwpa
