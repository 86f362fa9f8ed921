#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "mtwpa/constants.hpp"

namespace mtwpa {

// Fabrication-level parameters of one SQUID transmission-line stage.
struct StageGeometry {
  double i0 = 1.2e-6;          // junction critical current, A
  double r = 6.0;              // large/small junction area ratio
  double c0 = 45e-15;          // junction shunt capacitance, F
  double c_gnd = 110e-15;      // ground capacitance per cell, F
  double tan_delta = 5e-4;     // dielectric loss tangent
  int n_cells = 350;
  double cell_length = 10e-6;  // m
  double flux_period_scale = 1.0;  // applied flux -> this stage's loop flux

  void validate() const {
    if (!(i0 > 0.0)) throw std::domain_error("StageGeometry: i0 must be > 0");
    if (!(r >= 1.0)) throw std::domain_error("StageGeometry: r must be >= 1");
    if (!(c0 > 0.0) || !(c_gnd > 0.0)) throw std::domain_error("StageGeometry: capacitances must be > 0");
    if (!(tan_delta >= 0.0)) throw std::domain_error("StageGeometry: tan_delta must be >= 0");
    if (n_cells < 1) throw std::domain_error("StageGeometry: n_cells must be >= 1");
    if (!(cell_length > 0.0)) throw std::domain_error("StageGeometry: cell_length must be > 0");
    if (!(flux_period_scale > 0.0)) throw std::domain_error("StageGeometry: flux_period_scale must be > 0");
  }
};

// Normalized loop flux Phi/Phi0 of one stage. Everything is 1-periodic and even in it.
struct FluxBias {
  double phi_over_phi0 = 0.0;
};

// Flux-dependent circuit constants of a stage.
struct LinearParams {
  double l_cell;     // H, per-cell series inductance L
  double gamma;      // Kerr constant, A/Wb^3
  double l0;         // single-junction Josephson inductance, H
  double c_gnd;      // F
  double tan_delta;

  // Shunt loss conductance G(w) = w C_gnd tan(delta), S per cell.
  double g_of_omega(double omega) const { return omega * c_gnd * tan_delta; }
};

inline double josephson_inductance(double i0) {
  if (!(i0 > 0.0)) throw std::domain_error("josephson_inductance: i0 must be > 0");
  return kFluxQuantum / (2.0 * kPi * i0);
}

namespace detail {
inline double squid_denominator(const StageGeometry& g, FluxBias flux) {
  return g.r / 2.0 + 2.0 * std::cos(2.0 * kPi * flux.phi_over_phi0);
}
}  // namespace detail

inline LinearParams linear_params(const StageGeometry& geom, FluxBias flux) {
  geom.validate();
  const double l0 = josephson_inductance(geom.i0);
  const double den = detail::squid_denominator(geom, flux);
  if (!(den > 0.0))
    throw std::domain_error("linear_params: stage beyond frustration (r/2 + 2cos <= 0), no propagating mode");
  LinearParams p;
  p.l0 = l0;
  p.l_cell = l0 / den;
  p.gamma = (geom.r / 16.0 + std::cos(2.0 * kPi * flux.phi_over_phi0)) /
            (3.0 * kReducedFluxQuantum * kReducedFluxQuantum * l0);
  p.c_gnd = geom.c_gnd;
  p.tan_delta = geom.tan_delta;
  return p;
}

// Angular frequency where the Eq.-2 denominator vanishes (plasma-like divergence).
inline double cutoff_omega(const StageGeometry& geom, FluxBias flux) {
  const double den = detail::squid_denominator(geom, flux);
  if (!(den > 0.0)) throw std::domain_error("cutoff_omega: stage beyond frustration");
  const double l0 = josephson_inductance(geom.i0);
  return std::sqrt(den / (l0 * geom.c0 * (geom.r / 2.0 + 2.0)));
}

// Linear dispersion k(w, Phi) in rad/cell.
inline double dispersion_k(double omega, const StageGeometry& geom, FluxBias flux) {
  if (!(omega >= 0.0)) throw std::domain_error("dispersion_k: omega must be >= 0");
  const double den = detail::squid_denominator(geom, flux);
  if (!(den > 0.0)) throw std::domain_error("dispersion_k: stage beyond frustration");
  const double l0 = josephson_inductance(geom.i0);
  const double rad = den - omega * omega * l0 * geom.c0 * (geom.r / 2.0 + 2.0);
  if (!(rad > 0.0)) throw std::domain_error("dispersion_k: cutoff exceeded at omega");
  return omega * std::sqrt(l0 * geom.c_gnd) / std::sqrt(rad);
}

// Ladder image impedance in the continuum limit, Z0(w) = k(w)/(w C_gnd).
// At w -> 0 this is sqrt(L/C_gnd); it rises toward the cutoff.
inline double characteristic_impedance(double omega, const StageGeometry& geom, FluxBias flux) {
  if (!(omega > 0.0)) throw std::domain_error("characteristic_impedance: omega must be > 0");
  return dispersion_k(omega, geom, flux) / (omega * geom.c_gnd);
}

// Split a globally applied flux between the two stages via their period scales.
inline std::pair<FluxBias, FluxBias> flux_partition(double applied_flux,
                                                    const StageGeometry& stage1,
                                                    const StageGeometry& stage3) {
  if (!(stage1.flux_period_scale > 0.0) || !(stage3.flux_period_scale > 0.0))
    throw std::domain_error("flux_partition: flux_period_scale must be set on both stages");
  return {FluxBias{applied_flux * stage1.flux_period_scale},
          FluxBias{applied_flux * stage3.flux_period_scale}};
}

// Default period scales: pinned so applied 0.48 maps to stage-1 0.41, with the
// measured 1.26 periodicity ratio between the stages.
inline constexpr double kStage1FluxScale = 41.0 / 48.0;
inline constexpr double kStagePeriodRatio = 1.26;
inline constexpr double kStage3FluxScale = kStage1FluxScale * kStagePeriodRatio;

// Amplitude attenuation rate per cell from G(w): exp(-k tan(delta)/2 per cell).
inline double loss_neper_per_cell(double omega, const StageGeometry& geom, FluxBias flux) {
  return 0.5 * dispersion_k(omega, geom, flux) * geom.tan_delta;
}

}  // namespace mtwpa
