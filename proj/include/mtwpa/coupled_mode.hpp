#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mtwpa/device.hpp"

namespace mtwpa {

using cplx = std::complex<double>;

// Degenerate pump drive. amp_flux is the peak node-flux amplitude A_p of the
// traveling pump wave phi(n,t) = A_p cos(k n - w t).
struct PumpDrive {
  double omega_p = 0.0;  // rad/s
  double power_w = 0.0;  // W
  double amp_flux = 0.0; // Wb
};

// Traveling-wave power of a node-flux wave: P = w^2 |A|^2 / (2 Z0).
inline double pump_amplitude_from_power(double power_w, double omega_p, double z0) {
  if (!(power_w >= 0.0)) throw std::domain_error("pump_amplitude_from_power: power must be >= 0");
  if (!(z0 > 0.0)) throw std::domain_error("pump_amplitude_from_power: z0 must be > 0");
  if (!(omega_p > 0.0)) throw std::domain_error("pump_amplitude_from_power: omega_p must be > 0");
  return std::sqrt(2.0 * z0 * power_w) / omega_p;
}

inline PumpDrive make_pump(double omega_p, double power_w, double z0) {
  return PumpDrive{omega_p, power_w, pump_amplitude_from_power(power_w, omega_p, z0)};
}

struct ModePair {
  cplx a_s{0.0, 0.0};
  cplx a_i{0.0, 0.0};
  double omega_s = 0.0;
  double omega_i = 0.0;
};

// Per-configuration coupled-mode coefficients, all in rad/cell (z in cells).
//   kappa = delta_k + (alpha_s + alpha_i - 2 alpha_p),  g^2 = kappa_s kappa_i - (kappa/2)^2.
struct CmeCoefficients {
  double alpha_s = 0.0;
  double alpha_i = 0.0;
  double alpha_p = 0.0;
  double kappa_s = 0.0;
  double kappa_i = 0.0;
  double delta_k = 0.0;
  double kappa = 0.0;
  double g2 = 0.0;

  cplx g() const { return std::sqrt(cplx(g2, 0.0)); }
};

// SPM/XPM and coupling coefficients of the degenerate 4WM process.
//
// The XPM terms carry k_{s,i}^3 k_p^2: this is the form consistent with the
// couplings below (kappa_s = kappa_i = alpha_p at degeneracy) and with the
// identity alpha_s = 2 alpha_p at w_s = w_p.
inline CmeCoefficients cme_coefficients(const StageGeometry& geom, FluxBias flux,
                                        const PumpDrive& pump, double omega_s) {
  const double omega_i = 2.0 * pump.omega_p - omega_s;
  if (!(omega_s > 0.0) || !(omega_i > 0.0))
    throw std::domain_error("cme_coefficients: signal/idler frequency out of range");
  const LinearParams lp = linear_params(geom, flux);
  const double ks = dispersion_k(omega_s, geom, flux);
  const double ki = dispersion_k(omega_i, geom, flux);
  const double kp = dispersion_k(pump.omega_p, geom, flux);
  const double ap2 = pump.amp_flux * pump.amp_flux;
  const double q = 3.0 * lp.gamma * ap2 / geom.c_gnd;

  CmeCoefficients c;
  c.alpha_s = q * ks * ks * ks * kp * kp / (4.0 * omega_s * omega_s);
  c.alpha_i = q * ki * ki * ki * kp * kp / (4.0 * omega_i * omega_i);
  c.alpha_p = q * std::pow(kp, 5) / (8.0 * pump.omega_p * pump.omega_p);
  c.kappa_s = q * kp * kp * ks * ki * (2.0 * kp - ki) / (8.0 * omega_s * omega_s);
  c.kappa_i = q * kp * kp * ks * ki * (2.0 * kp - ks) / (8.0 * omega_i * omega_i);
  c.delta_k = ks + ki - 2.0 * kp;
  c.kappa = c.delta_k + c.alpha_s + c.alpha_i - 2.0 * c.alpha_p;
  c.g2 = c.kappa_s * c.kappa_i - 0.25 * c.kappa * c.kappa;
  return c;
}

namespace detail {
// sinh(x)/x with a series fallback near x = 0 (works for complex x).
inline cplx sinhc(cplx x) {
  if (std::abs(x) < 1e-6) {
    const cplx x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}
}  // namespace detail

// Analytic solution of the coupled-mode equations over z cells.
// Oscillatory (imaginary-g) regimes are handled by analytic continuation.
inline ModePair evolve_modes(const ModePair& in, const CmeCoefficients& c, double z) {
  if (!(z >= 0.0)) throw std::domain_error("evolve_modes: z must be >= 0");
  const cplx g = c.g();
  const cplx shc = detail::sinhc(g * z);          // sinh(gz)/g / z ... times z below
  const cplx ch = std::cosh(g * z);
  const cplx i{0.0, 1.0};
  const cplx diag = ch - i * (c.kappa / 2.0) * z * shc;
  const cplx phase = std::exp(i * (c.kappa * z / 2.0));
  ModePair out = in;
  out.a_s = (in.a_s * diag + i * c.kappa_s * z * shc * std::conj(in.a_i)) * phase;
  out.a_i = (in.a_i * diag + i * c.kappa_i * z * shc * std::conj(in.a_s)) * phase;
  return out;
}

// Signal (or idler) power gain of one stage, Eq.-8 form: valid for real and
// imaginary g via |cosh(gz) - i (kappa/2) z sinhc(gz)|^2.
inline double power_gain(const CmeCoefficients& c, double z) {
  if (!(z >= 0.0)) throw std::domain_error("power_gain: z must be >= 0");
  const cplx g = c.g();
  const cplx v = std::cosh(g * z) - cplx(0.0, 1.0) * (c.kappa / 2.0) * z * detail::sinhc(g * z);
  return std::norm(v);
}

// |a_i(z)/a_s*(0)|^2 for a_i(0) = 0.
inline double idler_transfer(const CmeCoefficients& c, double z) {
  if (!(z >= 0.0)) throw std::domain_error("idler_transfer: z must be >= 0");
  return std::norm(c.kappa_i * z * detail::sinhc(c.g() * z));
}

// |a_s(z)/a_i*(0)|^2 for a_s(0) = 0.
inline double signal_regen_transfer(const CmeCoefficients& c, double z) {
  if (!(z >= 0.0)) throw std::domain_error("signal_regen_transfer: z must be >= 0");
  return std::norm(c.kappa_s * z * detail::sinhc(c.g() * z));
}

// Stop-band two-stage gain: idler generated over l1, signal regenerated over l3.
// Reduces to kappa_s^2 kappa_i^2 / g^4 sinh^4(g l) for identical stages.
inline double two_stage_gain(const CmeCoefficients& c1, const CmeCoefficients& c3,
                             double l1, double l3) {
  return idler_transfer(c1, l1) * signal_regen_transfer(c3, l3);
}

// Phase-matched asymptotic gain G_s ~ exp(4 |alpha_p| l) / 16.
inline double phase_matched_approx(double alpha_p, double l) {
  return std::exp(4.0 * std::abs(alpha_p) * l) / 16.0;
}

// Fixed-step RK4 integration of the coupled-mode equations
//   da_s/dz = i kappa_s a_i* e^{i kappa z},  da_i/dz = i kappa_i a_s* e^{i kappa z}.
inline ModePair integrate_cme_numeric(const ModePair& in, const CmeCoefficients& c,
                                      double z, double step) {
  if (!(step > 0.0)) throw std::domain_error("integrate_cme_numeric: step must be > 0");
  if (!(z >= 0.0)) throw std::domain_error("integrate_cme_numeric: z must be >= 0");
  const int n = std::max(1, static_cast<int>(std::ceil(z / step)));
  const double h = z / n;
  const cplx i{0.0, 1.0};
  auto rhs = [&](double zz, cplx as, cplx ai, cplx& das, cplx& dai) {
    const cplx e = std::exp(i * c.kappa * zz);
    das = i * c.kappa_s * std::conj(ai) * e;
    dai = i * c.kappa_i * std::conj(as) * e;
  };
  cplx as = in.a_s, ai = in.a_i;
  double zz = 0.0;
  for (int k = 0; k < n; ++k) {
    cplx k1s, k1i, k2s, k2i, k3s, k3i, k4s, k4i;
    rhs(zz, as, ai, k1s, k1i);
    rhs(zz + h / 2, as + h / 2 * k1s, ai + h / 2 * k1i, k2s, k2i);
    rhs(zz + h / 2, as + h / 2 * k2s, ai + h / 2 * k2i, k3s, k3i);
    rhs(zz + h, as + h * k3s, ai + h * k3i, k4s, k4i);
    as += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    ai += h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
    zz += h;
  }
  ModePair out = in;
  out.a_s = as;
  out.a_i = ai;
  return out;
}

// theta_NL = alpha_p1 l1 + alpha_p3 l3 (signed; negative in the inverse-Kerr regime).
inline double nonlinear_phase(const StageGeometry& g1, const StageGeometry& g3,
                              FluxBias f1, FluxBias f3,
                              const PumpDrive& pump1, const PumpDrive& pump3,
                              double l1, double l3) {
  // alpha_p only needs the pump wavenumber; evaluate slightly off degeneracy.
  const double eps = pump1.omega_p * 1e-9;
  const double a1 = cme_coefficients(g1, f1, pump1, pump1.omega_p + eps).alpha_p;
  const double a3 = cme_coefficients(g3, f3, pump3, pump3.omega_p + eps).alpha_p;
  return a1 * l1 + a3 * l3;
}

}  // namespace mtwpa
