// mtwpa: design and simulation toolkit for the three-stage TWPA.
//
// Subcommands: dispersion, gain, isolation, returnloss, timedomain, sweep,
// noisefit, export-touchstone. Config via --config, outputs into --out.
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mtwpa/mtwpa.hpp"

namespace fs = std::filesystem;
using namespace mtwpa;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::domain_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct Ctx {
  std::string config_path;
  std::string out_dir = ".";
  std::string data_path;  // noisefit input

  RunConfig load() const {
    if (config_path.empty()) throw std::domain_error("--config is required");
    RunConfig rc = parse_run_config(read_file(config_path));
    fs::create_directories(out_dir);
    return rc;
  }
  std::string out(const std::string& name) const { return (fs::path(out_dir) / name).string(); }
};

MtwpaConfig calibrated(const RunConfig& rc) {
  MtwpaConfig cfg = rc.cascade;
  if (rc.calibrate) {
    CalibrateOptions opt;
    opt.theta_bound_rad = rc.calibrate->theta_bound_rad;
    const CalibrationResult cal = calibrate_pump(cfg, rc.calibrate->target_gain_db, opt);
    cfg.pump_power_w = cal.power_w;
    std::cout << "calibrated pump: " << format_g9(dbm_from_watts(cal.power_w))
              << " dBm, theta_NL = " << format_g9(cal.theta_nl_rad) << " rad\n";
  }
  return cfg;
}

int cmd_dispersion(const Ctx& ctx) {
  const RunConfig rc = ctx.load();
  const MtwpaConfig& cfg = rc.cascade;
  const FrequencyGrid grid = rc.grid.build();
  std::vector<std::vector<double>> rows;
  const FluxBias f1 = cfg.flux1(), f3 = cfg.flux3();
  for (double w : grid.omega) {
    std::vector<double> row{w / (2.0 * kPi)};
    for (const auto& [g, f] : {std::pair{&cfg.stage1, f1}, std::pair{&cfg.stage3, f3}}) {
      if (w < cutoff_omega(*g, f)) {
        row.push_back(dispersion_k(w, *g, f));
        row.push_back(characteristic_impedance(w, *g, f));
      } else {
        row.push_back(std::nan(""));
        row.push_back(std::nan(""));
      }
    }
    rows.push_back(row);
  }
  write_csv(ctx.out("dispersion.csv"),
            {"freq_hz", "k1_rad_per_cell", "z1_ohm", "k3_rad_per_cell", "z3_ohm"}, rows);

  std::vector<std::vector<double>> frows;
  for (int i = 0; i <= 200; ++i) {
    const double phi = -1.0 + 2.0 * i / 200.0;
    const LinearParams lp1 = linear_params(cfg.stage1, FluxBias{phi});
    frows.push_back({phi, lp1.l_cell, lp1.gamma});
  }
  write_csv(ctx.out("flux_tuning.csv"), {"phi_over_phi0", "l_cell_h", "gamma_a_per_wb3"}, frows);
  write_manifest(ctx.out_dir, "dispersion", rc.raw_text, rc.seed,
                 {"dispersion.csv", "flux_tuning.csv"});
  std::cout << "low-frequency stage-1 impedance at Phi=0: "
            << format_g9(characteristic_impedance(2.0 * kPi * 1e6, cfg.stage1, FluxBias{0.0}))
            << " ohm\n";
  return 0;
}

int cmd_gain(const Ctx& ctx) {
  const RunConfig rc = ctx.load();
  MtwpaConfig cfg = calibrated(rc);
  const FrequencyGrid grid = rc.grid.build();
  const CascadeSpectra sp = forward_gain_spectrum(cfg, grid);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i)
    rows.push_back({grid.omega[i] / (2.0 * kPi), sp.s21_db[i], sp.s12_db[i], sp.s11_db[i],
                    sp.stage1_db[i], sp.stage3_db[i]});
  write_csv(ctx.out("gain_spectrum.csv"),
            {"freq_hz", "s21_db", "s12_db", "s11_db", "stage1_db", "stage3_db"}, rows);

  const ParametricPeak pk = peak_two_stage_gain(cfg);
  std::cout << "parametric peak: " << format_g9(pk.gain_db) << " dB at "
            << format_g9(pk.omega_s / (2.0 * kPi * 1e9)) << " GHz\n";
  const auto it = std::max_element(sp.s21_db.begin(), sp.s21_db.end());
  std::cout << "net s21 peak: " << format_g9(*it) << " dB at "
            << format_g9(grid.omega[std::size_t(it - sp.s21_db.begin())] / (2.0 * kPi * 1e9))
            << " GHz\n";
  // >= 17 dB bandwidth of the parametric lower lobe (-3 dB from the 20 dB target)
  const auto [blo, bhi] = searchable_band(cfg);
  double lo_edge = 0.0, hi_edge = 0.0;
  const int np = 1200;
  bool in_band = false;
  for (int i = 0; i < np; ++i) {
    const double w = blo + (bhi - blo) * i / double(np - 1);
    if (w > 2.0 * kPi * cfg.filter.cutoff_hz()) break;
    const double g = db_from_power_ratio(two_stage_gain_at(cfg, w));
    if (g >= 17.0 && !in_band) {
      lo_edge = w;
      in_band = true;
    }
    if (g >= 17.0 && in_band) hi_edge = w;
  }
  if (in_band)
    std::cout << "lower-lobe >=17 dB bandwidth: "
              << format_g9((hi_edge - lo_edge) / (2.0 * kPi * 1e9)) << " GHz\n";
  std::cout << "phase matching roots (GHz):";
  for (double w : find_phase_matching(cfg)) std::cout << " " << format_g9(w / (2.0 * kPi * 1e9));
  std::cout << "\n";
  write_gnuplot(ctx.out("gain_spectrum.gp"), "gain_spectrum.csv", "mTWPA forward gain",
                "freq (Hz)", "dB", {{2, "s21"}, {3, "s12"}, {4, "s11"}});
  // magnitude-only two-port of the cascade (phases not modeled)
  TwoPortResponse resp;
  resp.grid = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    resp.s21.push_back(std::pow(10.0, sp.s21_db[i] / 20.0));
    resp.s12.push_back(std::pow(10.0, sp.s12_db[i] / 20.0));
    resp.s11.push_back(std::pow(10.0, sp.s11_db[i] / 20.0));
    resp.s22.push_back(std::pow(10.0, sp.s11_db[i] / 20.0));
  }
  export_touchstone(resp, ctx.out("gain_spectrum.s2p"));
  write_manifest(ctx.out_dir, "gain", rc.raw_text, rc.seed,
                 {"gain_spectrum.csv", "gain_spectrum.gp", "gain_spectrum.s2p"});
  return 0;
}

int cmd_isolation(const Ctx& ctx) {
  const RunConfig rc = ctx.load();
  MtwpaConfig cfg = calibrated(rc);
  const FrequencyGrid grid = rc.grid.build();
  const std::vector<double> iso = reverse_isolation_spectrum(cfg, grid);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i)
    rows.push_back({grid.omega[i] / (2.0 * kPi), iso[i]});
  write_csv(ctx.out("reverse_isolation.csv"), {"freq_hz", "isolation_db"}, rows);
  write_manifest(ctx.out_dir, "isolation", rc.raw_text, rc.seed, {"reverse_isolation.csv"});
  if (cfg.pump_on && cfg.pump_on_isolation_offset_db > 0.0)
    std::cout << "note: pump-on isolation includes the empirical offset of "
              << format_g9(cfg.pump_on_isolation_offset_db) << " dB (not a model prediction)\n";
  return 0;
}

int cmd_returnloss(const Ctx& ctx) {
  const RunConfig rc = ctx.load();
  MtwpaConfig cfg = calibrated(rc);
  const FrequencyGrid grid = rc.grid.build();
  const std::vector<double> rl = return_loss_spectrum(cfg, grid);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i)
    rows.push_back({grid.omega[i] / (2.0 * kPi), rl[i]});
  write_csv(ctx.out("return_loss.csv"), {"freq_hz", "return_loss_db"}, rows);
  write_manifest(ctx.out_dir, "returnloss", rc.raw_text, rc.seed, {"return_loss.csv"});
  return 0;
}

int cmd_timedomain(const Ctx& ctx) {
  const RunConfig rc = ctx.load();
  if (!rc.time_domain) throw std::domain_error("timedomain: config needs a time_domain section");
  const TimeDomainSpec& ts = *rc.time_domain;

  StageGeometry geom = rc.cascade.stage1;
  geom.n_cells = ts.n_cells;
  const FluxBias flux{ts.flux};
  const double z0p = characteristic_impedance(2.0 * kPi * ts.pump_freq_hz, geom, flux);
  const double rs = ts.source_ohms > 0.0 ? ts.source_ohms : z0p;
  const double rl = ts.load_ohms > 0.0 ? ts.load_ohms : z0p;

  LadderNetwork net = build_ladder(geom, flux, rs, rl);
  const double fp = ts.pump_freq_hz;
  const double dur = ts.duration_s > 0.0 ? ts.duration_s : 1024.0 / fp;
  std::vector<std::string> outputs;

  if (ts.mode == "linear" || ts.mode == "gain") {
    double fsig = ts.signal_freq_hz;
    if (fsig <= 0.0) {
      // closest on-bin frequency to the single-stage phase-matched lobe
      PumpDrive pd = make_pump(2.0 * kPi * fp, ts.pump_power_w, z0p);
      MtwpaConfig probe;
      probe.stage1 = geom;
      probe.stage3 = geom;
      probe.applied_flux = ts.flux;  // single-stage: identical stages, scale 1
      probe.stage1.flux_period_scale = 1.0;
      probe.stage3.flux_period_scale = 1.0;
      probe.pump_freq_hz = fp;
      probe.pump_power_w = ts.pump_power_w;
      probe.stage3_pump_derate_db = 0.0;
      const auto roots = find_phase_matching(probe);
      fsig = roots.empty() ? 0.7 * fp : roots.front() / (2.0 * kPi);
    }
    const double periods = std::round(dur * fp);
    const double fs_bin = std::round(fsig / fp * periods) / periods * fp;
    DriveSpec d;
    const double vp = 2.0 * std::sqrt(2.0 * rs * ts.pump_power_w);
    const double vs = 2.0 * std::sqrt(2.0 * rs * ts.signal_power_w);
    d.tones = {Tone{fs_bin, vs, 0.0}};
    if (ts.mode == "gain") d.tones.push_back(Tone{fp, vp, 0.0});
    d.duration_s = periods / fp;
    d.dt_s = ts.dt_s > 0.0 ? ts.dt_s : 1.0 / (64.0 * fp);
    TransientRun run = transient(net, d);
    const SparamSample sp = extract_sparams(net, run, d.tones[0]);
    std::cout << "s21(" << format_g9(fs_bin / 1e9) << " GHz) = " << format_g9(std::abs(sp.s21))
              << " /_ " << format_g9(std::arg(sp.s21)) << " rad\n";
    // built-in linear oracle
    if (ts.mode == "linear") {
      const double k = dispersion_k(2.0 * kPi * fs_bin, geom, flux);
      std::cout << "dispersion oracle: k*N = " << format_g9(k * geom.n_cells)
                << " rad; |s21| vs lossless expectation within "
                << format_g9(std::abs(std::abs(sp.s21) - 1.0)) << "\n";
    }
    std::vector<std::vector<double>> rows;
    const auto& vout = run.sim.node_series.at(net.output_node);
    for (std::size_t i = 0; i < vout.size(); ++i)
      rows.push_back({run.sim.t_first_sample + double(i) * run.dt, vout[i]});
    write_csv(ctx.out("timedomain_vout.csv"), {"t_s", "v_out"}, rows);
    outputs.push_back("timedomain_vout.csv");
    // output spectrum at the drive tones and the idler
    std::vector<std::vector<double>> spec;
    std::vector<double> freqs{fs_bin};
    if (ts.mode == "gain") {
      freqs.push_back(fp);
      freqs.push_back(2.0 * fp - fs_bin);
    }
    for (double f : freqs) {
      const cplx ph = extract_phasor(vout, run.dt, run.sim.t_first_sample, f);
      spec.push_back({f, std::abs(ph), std::arg(ph)});
    }
    write_csv(ctx.out("timedomain_spectrum.csv"), {"freq_hz", "v_amp", "v_phase_rad"}, spec);
    outputs.push_back("timedomain_spectrum.csv");
  } else if (ts.mode == "spm") {
    std::vector<double> powers;
    for (int i = 1; i <= 8; ++i) powers.push_back(ts.pump_power_w * i / 8.0);
    const SpmCurve curve = measure_spm_phase(net, fp, powers, dur);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < curve.power_w.size(); ++i)
      rows.push_back({curve.power_w[i], curve.theta_rad[i]});
    write_csv(ctx.out("spm_phase.csv"), {"pump_power_w", "theta_nl_rad"}, rows);
    outputs.push_back("spm_phase.csv");
    if (curve.truncated) std::cout << "warning: curve truncated (solver non-convergence)\n";
  } else if (ts.mode == "noise") {
    NoiseSpec ns;
    ns.enabled = true;
    ns.seed = ts.seed;
    ns.temperature_k = ts.noise_temperature_k;
    ns.bandwidth_hz = ts.noise_bandwidth_hz;
    std::vector<Tone> tones;
    if (ts.pump_power_w > 0.0)
      tones.push_back(Tone{fp, 2.0 * std::sqrt(2.0 * rs * ts.pump_power_w), 0.0});
    const NoiseMeasurement nm = inject_noise_and_measure_input(
        net, tones, ns, ts.band_lo_hz, ts.band_hi_hz, dur, ts.dt_s > 0 ? ts.dt_s : 1.0 / (64.0 * fp));
    std::vector<std::vector<double>> rows{
        {ts.band_lo_hz, ts.band_hi_hz, nm.backward_photons, nm.input_photons, nm.forward_photons}};
    write_csv(ctx.out("input_noise.csv"),
              {"band_lo_hz", "band_hi_hz", "backward_photons", "input_photons", "forward_photons"},
              rows);
    outputs.push_back("input_noise.csv");
    std::cout << "input noise: " << format_g9(nm.input_photons) << " photons\n";
  } else if (ts.mode == "saturation") {
    // full amplifier chain with the lumped filter embedded
    MtwpaConfig mc = rc.cascade;
    mc.pump_power_w = ts.pump_power_w;
    mc.pump_freq_hz = fp;
    mc.stage1.n_cells = ts.n_cells / 2;
    mc.stage3.n_cells = ts.n_cells - ts.n_cells / 2;
    LadderNetwork chain = build_mtwpa_ladder(mc, ts.filter_sections, rs, rl);
    double fsig = ts.signal_freq_hz > 0.0 ? ts.signal_freq_hz : 0.68 * fp;
    const double periods = std::round(dur * fp);
    fsig = std::round(fsig / fp * periods) / periods * fp;
    const Tone pump{fp, 2.0 * std::sqrt(2.0 * rs * ts.pump_power_w), 0.0};
    std::vector<double> powers;
    for (int i = 0; i < 6; ++i)
      powers.push_back(ts.signal_power_w * std::pow(10.0, double(i) * 0.4));
    const SaturationResult sat =
        measure_gain_and_saturation(chain, pump, fsig, powers, periods / fp);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sat.signal_power_w.size(); ++i)
      rows.push_back({sat.signal_power_w[i], sat.gain_db[i]});
    write_csv(ctx.out("saturation.csv"), {"signal_power_w", "gain_db"}, rows);
    outputs.push_back("saturation.csv");
    std::cout << "small-signal gain: " << format_g9(sat.small_signal_gain_db) << " dB\n";
    if (!std::isnan(sat.p1db_w))
      std::cout << "P_1dB: " << format_g9(dbm_from_watts(sat.p1db_w)) << " dBm\n";
  } else {
    throw std::domain_error("timedomain: unknown mode " + ts.mode);
  }
  write_manifest(ctx.out_dir, "timedomain", rc.raw_text, ts.seed, outputs);
  return 0;
}

int cmd_sweep(const Ctx& ctx) {
  const RunConfig rc = ctx.load();
  if (!rc.sweep) throw std::domain_error("sweep: config needs a sweep section");
  MtwpaConfig cfg = calibrated(rc);
  SweepResult res;
  if (rc.sweep->variable == "stage1_length") {
    std::vector<int> vals;
    for (double v = rc.sweep->lo; v <= rc.sweep->hi + 1e-9; v += rc.sweep->step)
      vals.push_back(int(std::lround(v)));
    res = sweep_stage_length(cfg, vals);
  } else {
    std::vector<double> vals;
    for (double v = rc.sweep->lo; v <= rc.sweep->hi + 1e-9; v += rc.sweep->step) vals.push_back(v);
    res = sweep_filter_impedance(cfg, vals);
  }
  std::vector<std::vector<double>> rows;
  for (const auto& r : res.rows) {
    std::vector<double> row{r.variable, r.peak_gain_db, r.return_loss_db, r.input_noise_photons};
    row.push_back(r.phase_match_hz.empty() ? 0.0 : r.phase_match_hz.front());
    row.push_back(r.phase_match_hz.size() > 1 ? r.phase_match_hz.back() : 0.0);
    rows.push_back(row);
  }
  write_csv(ctx.out("sweep.csv"),
            {res.variable_name, "peak_gain_db", "return_loss_db", "input_noise_photons",
             "phase_match_lo_hz", "phase_match_hi_hz"},
            rows);
  write_gnuplot(ctx.out("sweep.gp"), "sweep.csv", "design sweep: " + res.variable_name,
                res.variable_name, "dB / photons",
                {{3, "return loss (dB)"}, {4, "input noise (photons)"}});
  write_manifest(ctx.out_dir, "sweep", rc.raw_text, rc.seed, {"sweep.csv", "sweep.gp"});
  return 0;
}

int cmd_noisefit(const Ctx& ctx) {
  if (ctx.data_path.empty()) throw std::domain_error("noisefit: --data CSV required");
  std::ifstream is(ctx.data_path);
  if (!is) throw std::domain_error("noisefit: cannot open " + ctx.data_path);
  YFactorDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.find("temperature_k") != std::string::npos) continue;
    std::istringstream ss(line);
    YFactorRecord rec{};
    char c1, c2;
    double f_hz;
    if (!(ss >> rec.temperature_k >> c1 >> f_hz >> c2 >> rec.power_w) || c1 != ',' || c2 != ',')
      throw std::domain_error("noisefit: malformed CSV row " + std::to_string(line_no));
    rec.omega = 2.0 * kPi * f_hz;
    data.records.push_back(rec);
  }
  fs::create_directories(ctx.out_dir);
  const NoiseFit fit = fit_y_factor(data);
  std::vector<std::vector<double>> rows;
  for (const auto& p : fit.points)
    rows.push_back({p.omega / (2.0 * kPi), p.t_hemt_k,
                    db_from_power_ratio(p.gain_linear), p.residual_rms,
                    photons_from_temperature(p.t_hemt_k, p.omega)});
  write_csv(ctx.out("noise_fit.csv"),
            {"freq_hz", "t_hemt_k", "gain_db", "residual_rms", "n_hemt_photons"}, rows);
  write_manifest(ctx.out_dir, "noisefit", "datafile: " + ctx.data_path, 0, {"noise_fit.csv"});
  return 0;
}

int cmd_export_touchstone(const Ctx& ctx) {
  const RunConfig rc = ctx.load();
  const FrequencyGrid grid = rc.grid.build();
  TwoPortResponse resp;
  if (rc.cascade.filter.kind == FilterKind::morgan)
    resp = morgan_highpass(rc.cascade.filter.morgan_l_f, rc.cascade.filter.morgan_c_f,
                           rc.cascade.filter.morgan_stages, grid);
  else
    resp = behavioral_highpass(rc.cascade.filter.behavioral, grid);
  export_touchstone(resp, ctx.out("filter.s2p"));
  write_manifest(ctx.out_dir, "export-touchstone", rc.raw_text, rc.seed, {"filter.s2p"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mTWPA simulator and design toolkit"};
  app.require_subcommand(1);
  Ctx ctx;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    if (needs_config) sub->add_option("--config", ctx.config_path, "JSON config file");
    sub->add_option("--out", ctx.out_dir, "output directory");
  };
  auto* c_disp = app.add_subcommand("dispersion", "k(w), Z0(w), L(Phi), gamma(Phi) tables");
  auto* c_gain = app.add_subcommand("gain", "forward gain spectrum");
  auto* c_iso = app.add_subcommand("isolation", "reverse isolation spectrum");
  auto* c_rl = app.add_subcommand("returnloss", "return loss spectrum");
  auto* c_td = app.add_subcommand("timedomain", "nonlinear ladder transient");
  auto* c_sweep = app.add_subcommand("sweep", "design sweeps");
  auto* c_fit = app.add_subcommand("noisefit", "Y-factor noise fit");
  auto* c_ts = app.add_subcommand("export-touchstone", "write filter .s2p");
  for (auto* s : {c_disp, c_gain, c_iso, c_rl, c_td, c_sweep, c_ts}) add_common(s);
  c_fit->add_option("--data", ctx.data_path, "Y-factor CSV (temperature_k,freq_hz,power_w)");
  c_fit->add_option("--out", ctx.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_disp->parsed()) return cmd_dispersion(ctx);
    if (c_gain->parsed()) return cmd_gain(ctx);
    if (c_iso->parsed()) return cmd_isolation(ctx);
    if (c_rl->parsed()) return cmd_returnloss(ctx);
    if (c_td->parsed()) return cmd_timedomain(ctx);
    if (c_sweep->parsed()) return cmd_sweep(ctx);
    if (c_fit->parsed()) return cmd_noisefit(ctx);
    if (c_ts->parsed()) return cmd_export_touchstone(ctx);
  } catch (const TransientError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
