#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtwpa/cascade.hpp"
#include "mtwpa/sweeps.hpp"
#include "mtwpa/time_domain.hpp"

namespace mtwpa {

using json = nlohmann::json;

struct GridSpec {
  double f_lo_hz = 2.0e9;
  double f_hi_hz = 12.0e9;
  std::size_t points = 1001;

  FrequencyGrid build() const { return linspace_grid_hz(f_lo_hz, f_hi_hz, points); }
};

struct CalibrateSpec {
  double target_gain_db = 20.0;
  double theta_bound_rad = 4.0;
};

struct TimeDomainSpec {
  std::string mode = "gain";  // gain | spm | noise | saturation | linear
  int n_cells = 700;
  double flux = 0.41;         // stage-flux of the uniform line modes
  double pump_freq_hz = 7.4e9;
  double pump_power_w = 1.8e-11;
  double signal_freq_hz = 0.0;  // 0 -> phase-matched pick
  double signal_power_w = 1e-16;
  double duration_s = 0.0;
  double dt_s = 0.0;
  bool with_filter = false;
  int filter_sections = 2;
  double source_ohms = 0.0;  // 0 -> matched to the line at the pump
  double load_ohms = 0.0;
  std::uint64_t seed = 1;
  double noise_temperature_k = 0.010;
  double noise_bandwidth_hz = 50e9;
  double band_lo_hz = 4.5e9;
  double band_hi_hz = 6.0e9;
};

struct SweepCliSpec {
  std::string variable = "stage1_length";  // stage1_length | filter_impedance
  double lo = 50, hi = 350, step = 50;
};

struct RunConfig {
  MtwpaConfig cascade;
  GridSpec grid;
  std::optional<CalibrateSpec> calibrate;
  std::optional<TimeDomainSpec> time_domain;
  std::optional<SweepCliSpec> sweep;
  std::uint64_t seed = 1;
  std::string raw_text;  // verbatim config for the manifest hash
};

namespace cfg_detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& ctx) {
  if (!j.is_object()) throw std::domain_error("config: " + ctx + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::domain_error("config: unknown key '" + it.key() + "' in " + ctx);
  }
}

inline StageGeometry parse_stage(const json& j, const std::string& ctx, double default_scale) {
  check_keys(j, {"i0_ua", "r", "c0_ff", "c_gnd_ff", "tan_delta", "n_cells", "cell_length_um",
                 "flux_period_scale"},
             ctx);
  StageGeometry g;
  g.flux_period_scale = default_scale;
  if (j.contains("i0_ua")) g.i0 = j.at("i0_ua").get<double>() * 1e-6;
  if (j.contains("r")) g.r = j.at("r").get<double>();
  if (j.contains("c0_ff")) g.c0 = j.at("c0_ff").get<double>() * 1e-15;
  if (j.contains("c_gnd_ff")) g.c_gnd = j.at("c_gnd_ff").get<double>() * 1e-15;
  if (j.contains("tan_delta")) g.tan_delta = j.at("tan_delta").get<double>();
  if (j.contains("n_cells")) g.n_cells = j.at("n_cells").get<int>();
  if (j.contains("cell_length_um")) g.cell_length = j.at("cell_length_um").get<double>() * 1e-6;
  if (j.contains("flux_period_scale")) g.flux_period_scale = j.at("flux_period_scale").get<double>();
  g.validate();
  return g;
}

}  // namespace cfg_detail

inline RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::domain_error(std::string("config: JSON parse error: ") + e.what());
  }
  cfg_detail::check_keys(
      j,
      {"stage1", "stage3", "applied_flux", "pump", "calibrate", "stage3_pump_derate_db", "filter",
       "interface_z_f", "port_z", "interface_residual_refl_db", "pump_on_isolation_offset_db",
       "pump_on", "grid", "time_domain", "sweep", "seed"},
      "top level");

  RunConfig rc;
  rc.raw_text = text;
  if (j.contains("stage1"))
    rc.cascade.stage1 = cfg_detail::parse_stage(j.at("stage1"), "stage1", kStage1FluxScale);
  if (j.contains("stage3"))
    rc.cascade.stage3 = cfg_detail::parse_stage(j.at("stage3"), "stage3", kStage3FluxScale);
  if (j.contains("applied_flux")) rc.cascade.applied_flux = j.at("applied_flux").get<double>();
  if (j.contains("pump")) {
    const json& p = j.at("pump");
    cfg_detail::check_keys(p, {"freq_ghz", "power_dbm", "on"}, "pump");
    if (p.contains("freq_ghz")) rc.cascade.pump_freq_hz = p.at("freq_ghz").get<double>() * 1e9;
    if (p.contains("power_dbm"))
      rc.cascade.pump_power_w = watts_from_dbm(p.at("power_dbm").get<double>());
    if (p.contains("on")) rc.cascade.pump_on = p.at("on").get<bool>();
  }
  if (j.contains("stage3_pump_derate_db"))
    rc.cascade.stage3_pump_derate_db = j.at("stage3_pump_derate_db").get<double>();
  if (j.contains("filter")) {
    const json& f = j.at("filter");
    cfg_detail::check_keys(f,
                           {"model", "cutoff_ghz", "rolloff_db_per_ghz", "stopband_floor_db",
                            "passband_il_db", "return_loss_db", "l_f_nh", "c_f_pf", "stages"},
                           "filter");
    const std::string model = f.value("model", "behavioral");
    if (model == "behavioral") rc.cascade.filter.kind = FilterKind::behavioral;
    else if (model == "morgan") rc.cascade.filter.kind = FilterKind::morgan;
    else throw std::domain_error("config: filter.model must be 'behavioral' or 'morgan'");
    auto& b = rc.cascade.filter.behavioral;
    if (f.contains("cutoff_ghz")) b.cutoff_hz = f.at("cutoff_ghz").get<double>() * 1e9;
    if (f.contains("rolloff_db_per_ghz")) b.rolloff_db_per_ghz = f.at("rolloff_db_per_ghz").get<double>();
    if (f.contains("stopband_floor_db")) b.stopband_floor_db = f.at("stopband_floor_db").get<double>();
    if (f.contains("passband_il_db")) b.passband_il_db = f.at("passband_il_db").get<double>();
    if (f.contains("return_loss_db")) b.return_loss_db = f.at("return_loss_db").get<double>();
    if (f.contains("l_f_nh")) rc.cascade.filter.morgan_l_f = f.at("l_f_nh").get<double>() * 1e-9;
    if (f.contains("c_f_pf")) rc.cascade.filter.morgan_c_f = f.at("c_f_pf").get<double>() * 1e-12;
    if (f.contains("stages")) rc.cascade.filter.morgan_stages = f.at("stages").get<int>();
  }
  if (j.contains("interface_z_f")) rc.cascade.interface_z_f = j.at("interface_z_f").get<double>();
  if (j.contains("port_z")) rc.cascade.port_z = j.at("port_z").get<double>();
  if (j.contains("interface_residual_refl_db"))
    rc.cascade.interface_residual_refl2 =
        power_ratio_from_db(-j.at("interface_residual_refl_db").get<double>());
  if (j.contains("pump_on_isolation_offset_db"))
    rc.cascade.pump_on_isolation_offset_db = j.at("pump_on_isolation_offset_db").get<double>();
  if (j.contains("pump_on")) rc.cascade.pump_on = j.at("pump_on").get<bool>();
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    cfg_detail::check_keys(g, {"f_lo_ghz", "f_hi_ghz", "points"}, "grid");
    if (g.contains("f_lo_ghz")) rc.grid.f_lo_hz = g.at("f_lo_ghz").get<double>() * 1e9;
    if (g.contains("f_hi_ghz")) rc.grid.f_hi_hz = g.at("f_hi_ghz").get<double>() * 1e9;
    if (g.contains("points")) rc.grid.points = g.at("points").get<std::size_t>();
    if (rc.grid.points < 2 || !(rc.grid.f_hi_hz > rc.grid.f_lo_hz) || !(rc.grid.f_lo_hz > 0))
      throw std::domain_error("config: invalid grid");
  }
  if (j.contains("calibrate")) {
    const json& c = j.at("calibrate");
    cfg_detail::check_keys(c, {"target_gain_db", "theta_bound_rad"}, "calibrate");
    CalibrateSpec cs;
    if (c.contains("target_gain_db")) cs.target_gain_db = c.at("target_gain_db").get<double>();
    if (c.contains("theta_bound_rad")) cs.theta_bound_rad = c.at("theta_bound_rad").get<double>();
    rc.calibrate = cs;
  }
  if (j.contains("time_domain")) {
    const json& t = j.at("time_domain");
    cfg_detail::check_keys(
        t,
        {"mode", "n_cells", "flux", "pump_freq_ghz", "pump_power_dbm", "signal_freq_ghz",
         "signal_power_dbm", "duration_periods", "dt_inverse_pump_periods", "with_filter",
         "filter_sections", "source_ohms", "load_ohms", "seed", "noise_temperature_k",
         "noise_bandwidth_ghz", "band_lo_ghz", "band_hi_ghz"},
        "time_domain");
    TimeDomainSpec ts;
    if (t.contains("mode")) ts.mode = t.at("mode").get<std::string>();
    if (t.contains("n_cells")) ts.n_cells = t.at("n_cells").get<int>();
    if (t.contains("flux")) ts.flux = t.at("flux").get<double>();
    if (t.contains("pump_freq_ghz")) ts.pump_freq_hz = t.at("pump_freq_ghz").get<double>() * 1e9;
    if (t.contains("pump_power_dbm"))
      ts.pump_power_w = watts_from_dbm(t.at("pump_power_dbm").get<double>());
    if (t.contains("signal_freq_ghz")) ts.signal_freq_hz = t.at("signal_freq_ghz").get<double>() * 1e9;
    if (t.contains("signal_power_dbm"))
      ts.signal_power_w = watts_from_dbm(t.at("signal_power_dbm").get<double>());
    if (t.contains("duration_periods"))
      ts.duration_s = t.at("duration_periods").get<double>() / ts.pump_freq_hz;
    if (t.contains("dt_inverse_pump_periods"))
      ts.dt_s = 1.0 / (t.at("dt_inverse_pump_periods").get<double>() * ts.pump_freq_hz);
    if (t.contains("with_filter")) ts.with_filter = t.at("with_filter").get<bool>();
    if (t.contains("filter_sections")) ts.filter_sections = t.at("filter_sections").get<int>();
    if (t.contains("source_ohms")) ts.source_ohms = t.at("source_ohms").get<double>();
    if (t.contains("load_ohms")) ts.load_ohms = t.at("load_ohms").get<double>();
    if (t.contains("seed")) ts.seed = t.at("seed").get<std::uint64_t>();
    if (t.contains("noise_temperature_k")) ts.noise_temperature_k = t.at("noise_temperature_k").get<double>();
    if (t.contains("noise_bandwidth_ghz"))
      ts.noise_bandwidth_hz = t.at("noise_bandwidth_ghz").get<double>() * 1e9;
    if (t.contains("band_lo_ghz")) ts.band_lo_hz = t.at("band_lo_ghz").get<double>() * 1e9;
    if (t.contains("band_hi_ghz")) ts.band_hi_hz = t.at("band_hi_ghz").get<double>() * 1e9;
    const std::set<std::string> modes{"gain", "spm", "noise", "saturation", "linear"};
    if (!modes.count(ts.mode)) throw std::domain_error("config: unknown time_domain.mode " + ts.mode);
    if (ts.dt_s > 0.0 && ts.signal_freq_hz > 0.0 && !(ts.dt_s < 1.0 / (20.0 * ts.signal_freq_hz)))
      throw std::domain_error("config: time_domain dt too large for the signal tone");
    rc.time_domain = ts;
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    cfg_detail::check_keys(s, {"variable", "lo", "hi", "step"}, "sweep");
    SweepCliSpec sp;
    if (s.contains("variable")) sp.variable = s.at("variable").get<std::string>();
    if (sp.variable != "stage1_length" && sp.variable != "filter_impedance")
      throw std::domain_error("config: sweep.variable must be stage1_length or filter_impedance");
    if (s.contains("lo")) sp.lo = s.at("lo").get<double>();
    if (s.contains("hi")) sp.hi = s.at("hi").get<double>();
    if (s.contains("step")) sp.step = s.at("step").get<double>();
    if (!(sp.step > 0.0) || !(sp.hi >= sp.lo)) throw std::domain_error("config: invalid sweep range");
    rc.sweep = sp;
  }
  if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
  return rc;
}

}  // namespace mtwpa
