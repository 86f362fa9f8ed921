#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "mtwpa/constants.hpp"

namespace mtwpa {

// Photon-unit convention: N = k_B T / (hbar w). The half-photon vacuum floor
// enters only through the coth source term below, never through this map.
inline double photons_from_temperature(double t_kelvin, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("photons_from_temperature: omega must be > 0");
  if (!(t_kelvin >= 0.0)) throw std::domain_error("photons_from_temperature: temperature must be >= 0");
  return kBoltzmann * t_kelvin / (kHbar * omega);
}

// Emitted source power over bandwidth B: (hbar w / 2) coth(hbar w / 2 k_B T) * B.
inline double quantum_source_power(double t_kelvin, double omega, double bandwidth_hz) {
  if (!(omega > 0.0) || !(bandwidth_hz > 0.0))
    throw std::domain_error("quantum_source_power: omega and bandwidth must be > 0");
  const double half = 0.5 * kHbar * omega;
  if (t_kelvin <= 0.0) return half * bandwidth_hz;  // coth -> 1
  const double x = half / (kBoltzmann * t_kelvin);
  return half / std::tanh(x) * bandwidth_hz;
}

struct YFactorRecord {
  double temperature_k;
  double omega;
  double power_w;
};

struct YFactorDataset {
  std::vector<YFactorRecord> records;
  double bandwidth_hz = 1e6;

  void validate() const {
    if (records.empty()) throw std::domain_error("YFactorDataset: empty");
    if (!(bandwidth_hz > 0.0)) throw std::domain_error("YFactorDataset: bandwidth must be > 0");
    for (const auto& r : records)
      if (!(r.power_w > 0.0)) throw std::domain_error("YFactorDataset: powers must be positive");
  }
};

struct NoiseFitPoint {
  double omega;
  double t_hemt_k;
  double gain_linear;
  double residual_rms;  // rms relative power residual
};

struct NoiseFit {
  std::vector<NoiseFitPoint> points;
};

// Per-frequency least-squares fit of P = [q(T) + k_B T_H] G B to the dataset.
// Weighted by 1/P^2 (relative residuals): spectrum-analyzer noise is multiplicative.
inline NoiseFit fit_y_factor(const YFactorDataset& data) {
  data.validate();
  std::map<double, std::vector<const YFactorRecord*>> by_freq;
  for (const auto& r : data.records) by_freq[r.omega].push_back(&r);

  NoiseFit fit;
  for (auto& [omega, recs] : by_freq) {
    if (recs.size() < 3)
      throw std::domain_error("fit_y_factor: need >= 3 temperature points per frequency");
    double tmin = recs.front()->temperature_k, tmax = tmin;
    // weighted normal equations for P = a q + b
    double sww = 0, swq = 0, swqq = 0, swp = 0, swqp = 0;
    for (const auto* r : recs) {
      tmin = std::min(tmin, r->temperature_k);
      tmax = std::max(tmax, r->temperature_k);
      const double q = quantum_source_power(r->temperature_k, omega, 1.0);  // per Hz
      const double w = 1.0 / (r->power_w * r->power_w);
      sww += w;
      swq += w * q;
      swqq += w * q * q;
      swp += w * r->power_w;
      swqp += w * q * r->power_w;
    }
    const double det = swqq * sww - swq * swq;
    const double scale = swqq * sww;
    if (!(det > 1e-12 * scale) || !(tmax > 1.5 * tmin))
      throw std::domain_error("fit_y_factor: temperatures too close, fit ill-conditioned");
    const double a = (sww * swqp - swq * swp) / det;
    const double b = (swqq * swp - swq * swqp) / det;
    if (!(a > 0.0)) throw std::domain_error("fit_y_factor: non-physical gain");
    NoiseFitPoint p;
    p.omega = omega;
    p.gain_linear = a / data.bandwidth_hz;
    p.t_hemt_k = b / (a * kBoltzmann);
    double ss = 0.0;
    for (const auto* r : recs) {
      const double q = quantum_source_power(r->temperature_k, omega, 1.0);
      const double model = a * q + b;
      const double rel = (r->power_w - model) / r->power_w;
      ss += rel * rel;
    }
    p.residual_rms = std::sqrt(ss / double(recs.size()));
    fit.points.push_back(p);
  }
  return fit;
}

struct SnrNoiseResult {
  double t_sys_k;
  double t_twpa_k;
  bool unphysical = false;  // g_noise < 1
};

// SNR-improvement extraction: T_sys = G_n T_H / G_s, T_TWPA = T_H (G_n - 1) / G_s.
inline SnrNoiseResult snr_improvement_noise(double g_signal, double g_noise, double t_hemt_k,
                                            double /*omega*/) {
  if (!(g_signal > 0.0) || !(g_noise > 0.0))
    throw std::domain_error("snr_improvement_noise: gains must be > 0");
  SnrNoiseResult r;
  r.t_sys_k = g_noise * t_hemt_k / g_signal;
  r.t_twpa_k = t_hemt_k * (g_noise - 1.0) / g_signal;
  r.unphysical = g_noise < 1.0;
  return r;
}

// Input-referred back-action noise: quantum floor plus first-stage-amplified noise
// reflected at the stage/filter interface, N = 1/2 + |Gamma_if|^2 G1 (1 + added).
inline double input_backaction_estimate(double stage1_gain_linear,
                                        double interface_return_loss_db,
                                        double added_noise_photons) {
  if (!(stage1_gain_linear >= 0.0) || !(interface_return_loss_db >= 0.0) ||
      !(added_noise_photons >= 0.0))
    throw std::domain_error("input_backaction_estimate: inputs must be nonnegative");
  const double gamma2 = std::pow(10.0, -interface_return_loss_db / 10.0);
  return 0.5 + gamma2 * stage1_gain_linear * (1.0 + added_noise_photons);
}

}  // namespace mtwpa
