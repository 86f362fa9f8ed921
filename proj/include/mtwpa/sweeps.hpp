#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtwpa/cascade.hpp"
#include "mtwpa/noise.hpp"

namespace mtwpa {

// Length-weighted total mismatch of the two stages at omega_s; its roots are
// the device's phase-matching frequencies.
inline double net_mismatch(const MtwpaConfig& cfg, double omega_s) {
  const CmeCoefficients c1 = cme_coefficients(cfg.stage1, cfg.flux1(), cfg.pump1(), omega_s);
  const CmeCoefficients c3 = cme_coefficients(cfg.stage3, cfg.flux3(), cfg.pump3(), omega_s);
  const double l1 = cfg.stage1.n_cells, l3 = cfg.stage3.n_cells;
  return (c1.kappa * l1 + c3.kappa * l3) / (l1 + l3);
}

// Frequency band where signal and idler propagate in both stages.
inline std::pair<double, double> searchable_band(const MtwpaConfig& cfg) {
  const double wp = 2.0 * kPi * cfg.pump_freq_hz;
  const double wc = std::min(cutoff_omega(cfg.stage1, cfg.flux1()),
                             cutoff_omega(cfg.stage3, cfg.flux3()));
  const double margin = 1e-3 * wp;
  const double floor = 2.0 * kPi * 0.1e9;
  // both w_s and w_i = 2 w_p - w_s must stay positive and below cutoff
  const double lo = std::max(2.0 * wp - wc + margin, floor);
  const double hi = std::min(wc - margin, 2.0 * wp - floor);
  if (!(hi > lo)) throw std::domain_error("searchable_band: pump too close to cutoff");
  return {lo, hi};
}

// All roots of the net mismatch in the searchable band: sign-change bracketing
// on a 1 MHz grid, bisection to 1 kHz. With the pump off the mismatch reduces
// to the chromatic Delta k, whose only (tangential) root is the degeneracy.
inline std::vector<double> find_phase_matching(const MtwpaConfig& cfg) {
  cfg.validate();
  if (!cfg.pump_on || cfg.pump_power_w <= 0.0) return {2.0 * kPi * cfg.pump_freq_hz};
  const auto [lo, hi] = searchable_band(cfg);
  const double step = 2.0 * kPi * 1e6;
  std::vector<double> roots;
  double w_prev = lo;
  double f_prev = net_mismatch(cfg, w_prev);
  for (double w = lo + step; w < hi; w += step) {
    const double f = net_mismatch(cfg, w);
    if (f_prev == 0.0) roots.push_back(w_prev);
    else if (f_prev * f < 0.0) {
      double a = w_prev, b = w;
      while (b - a > 2.0 * kPi * 1e3) {
        const double m = 0.5 * (a + b);
        if (net_mismatch(cfg, a) * net_mismatch(cfg, m) <= 0.0) b = m;
        else a = m;
      }
      roots.push_back(0.5 * (a + b));
    }
    w_prev = w;
    f_prev = f;
  }
  return roots;
}

// Peak of the parametric (Eq.-11-style) spectrum over the operational band:
// the lower (stop-band) lobe, where the mTWPA amplifies through the idler path.
struct ParametricPeak {
  double omega_s;
  double gain_db;
};

inline ParametricPeak peak_two_stage_gain(const MtwpaConfig& cfg, std::size_t coarse_points = 600) {
  auto [lo, hi] = searchable_band(cfg);
  hi = std::min(hi, 2.0 * kPi * cfg.filter.cutoff_hz());
  if (!(hi > lo)) throw std::domain_error("peak_two_stage_gain: empty stop band");
  double best_w = lo, best_g = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < coarse_points; ++i) {
    const double w = lo + (hi - lo) * double(i) / double(coarse_points - 1);
    const double g = two_stage_gain_at(cfg, w);
    if (g > best_g) {
      best_g = g;
      best_w = w;
    }
  }
  // golden-section refinement
  double a = std::max(lo, best_w - (hi - lo) / double(coarse_points));
  double b = std::min(hi, best_w + (hi - lo) / double(coarse_points));
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = two_stage_gain_at(cfg, x1), f2 = two_stage_gain_at(cfg, x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = two_stage_gain_at(cfg, x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = two_stage_gain_at(cfg, x1);
    }
  }
  const double w = 0.5 * (a + b);
  return {w, db_from_power_ratio(two_stage_gain_at(cfg, w))};
}

struct CalibrationResult {
  PumpDrive pump;          // stage-1 input drive
  double power_w;
  double theta_nl_rad;     // signed
  double peak_gain_db;
  double peak_freq_hz;
};

struct CalibrateOptions {
  double tol_db = 0.1;
  double theta_bound_rad = 4.0;  // |theta_NL| ceiling before pump-depletion territory
  double p_lo_w = 1e-14;
  double p_hi_w = 1e-9;
};

inline double config_theta_nl(const MtwpaConfig& cfg) {
  return nonlinear_phase(cfg.stage1, cfg.stage3, cfg.flux1(), cfg.flux3(), cfg.pump1(),
                         cfg.pump3(), cfg.stage1.n_cells, cfg.stage3.n_cells);
}

// Bisection on pump power until the peak two-stage gain hits the target.
inline CalibrationResult calibrate_pump(MtwpaConfig cfg, double target_gain_db,
                                        CalibrateOptions opt = {}) {
  cfg.validate();
  if (target_gain_db <= 0.0) {
    cfg.pump_power_w = 0.0;
    return {PumpDrive{2.0 * kPi * cfg.pump_freq_hz, 0.0, 0.0}, 0.0, 0.0, 0.0, 0.0};
  }
  double lo = opt.p_lo_w, hi = opt.p_hi_w;
  auto peak_at = [&](double p) {
    cfg.pump_power_w = p;
    return peak_two_stage_gain(cfg);
  };
  if (peak_at(hi).gain_db < target_gain_db)
    throw std::domain_error("calibrate_pump: target unreachable below the power ceiling");
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    const ParametricPeak pk = peak_at(mid);
    if (std::abs(pk.gain_db - target_gain_db) < 0.5 * opt.tol_db) break;
    if (pk.gain_db > target_gain_db) hi = mid;
    else lo = mid;
    if (hi / lo < 1.0 + 1e-12) break;
  }
  cfg.pump_power_w = std::sqrt(lo * hi);
  const ParametricPeak pk = peak_two_stage_gain(cfg);
  const double theta = config_theta_nl(cfg);
  if (std::abs(theta) > opt.theta_bound_rad)
    throw std::domain_error("calibrate_pump: target needs |theta_NL| = " + std::to_string(std::abs(theta)) +
                            " rad > bound " + std::to_string(opt.theta_bound_rad) +
                            " (pump-depletion territory)");
  return {cfg.pump1(), cfg.pump_power_w, theta, pk.gain_db, pk.omega_s / (2.0 * kPi)};
}

// ---------------------------------------------------------------------------
// Design sweeps (Appendix-A style), coupled-mode evaluator.
// ---------------------------------------------------------------------------
struct SweepRow {
  double variable;
  double peak_gain_db;
  double return_loss_db;
  double input_noise_photons;
  std::vector<double> phase_match_hz;
};

struct SweepResult {
  std::string variable_name;
  std::vector<SweepRow> rows;
};

// Stage-1 noise gain at the peak: both half-photon bands (signal + idler) are
// amplified into the signal band at the stage-1 output.
inline double stage1_noise_gain(const MtwpaConfig& cfg, double omega_s) {
  const CmeCoefficients c1 = cme_coefficients(cfg.stage1, cfg.flux1(), cfg.pump1(), omega_s);
  const double hs = power_gain(c1, cfg.stage1.n_cells);
  const double treg = signal_regen_transfer(c1, cfg.stage1.n_cells);
  return 0.5 * (hs + treg);
}

inline SweepRow evaluate_design_point(const MtwpaConfig& cfg) {
  SweepRow row{};
  const ParametricPeak pk = peak_two_stage_gain(cfg);
  row.peak_gain_db = pk.gain_db;
  const double ws = pk.omega_s;
  const double z0p = stage1_pumped_impedance(cfg, ws);
  const double gif2 = interface_reflection2(cfg, z0p);
  const double gin = (z0p - cfg.port_z) / (z0p + cfg.port_z);
  const CmeCoefficients c1 = cme_coefficients(cfg.stage1, cfg.flux1(), cfg.pump1(), ws);
  const double g1_power = power_gain(c1, cfg.stage1.n_cells);
  row.return_loss_db = -db_from_power_ratio(std::min(gin * gin + gif2 * g1_power, 1.0));
  row.input_noise_photons =
      input_backaction_estimate(stage1_noise_gain(cfg, ws), -db_from_power_ratio(gif2), 0.0);
  for (double w : find_phase_matching(cfg)) row.phase_match_hz.push_back(w / (2.0 * kPi));
  return row;
}

// Sweep the first-stage length at fixed total length: l3 = total - l1, pump and
// biasing held at the base configuration (the paper's redistribution policy).
inline SweepResult sweep_stage_length(const MtwpaConfig& base, const std::vector<int>& l1_values) {
  SweepResult res;
  res.variable_name = "stage1_length_cells";
  const int total = base.stage1.n_cells + base.stage3.n_cells;
  for (int l1 : l1_values) {
    if (l1 < 1 || l1 >= total)
      throw std::domain_error("sweep_stage_length: l1 out of range");
    MtwpaConfig cfg = base;
    cfg.stage1.n_cells = l1;
    cfg.stage3.n_cells = total - l1;
    SweepRow row = evaluate_design_point(cfg);
    row.variable = l1;
    res.rows.push_back(row);
  }
  return res;
}

inline SweepResult sweep_filter_impedance(const MtwpaConfig& base,
                                          const std::vector<double>& zf_values) {
  SweepResult res;
  res.variable_name = "filter_impedance_ohms";
  for (double zf : zf_values) {
    if (!(zf > 0.0)) throw std::domain_error("sweep_filter_impedance: Z_f must be > 0");
    MtwpaConfig cfg = base;
    cfg.interface_z_f = zf;
    SweepRow row = evaluate_design_point(cfg);
    row.variable = zf;
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace mtwpa
