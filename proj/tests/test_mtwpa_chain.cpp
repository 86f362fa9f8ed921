#include <catch_amalgamated.hpp>

#include "mtwpa/ladder.hpp"
#include "mtwpa/sweeps.hpp"

using namespace mtwpa;
using Catch::Approx;

namespace {
MtwpaConfig mini_config() {
  MtwpaConfig cfg;
  cfg.applied_flux = 0.48;
  cfg.pump_freq_hz = 7.4e9;
  cfg.pump_power_w = watts_from_dbm(-74.0);  // hotter pump: short stages
  cfg.stage1.n_cells = 100;
  cfg.stage3.n_cells = 100;
  return cfg;
}
}  // namespace

TEST_CASE("mtwpa ladder assembles stage-filter-stage") {
  MtwpaConfig cfg;
  cfg.applied_flux = 0.48;
  cfg.pump_freq_hz = 7.4e9;
  cfg.pump_power_w = watts_from_dbm(-78.0);
  const LadderNetwork net = build_mtwpa_ladder(cfg, 2, 50.0, 50.0);
  // 1 ground + 351 stage-1 nodes + 2 lattice sections x 9 nodes + 350 stage-3
  CHECK(net.circuit.num_nodes() == 720);
  CHECK(net.circuit.transformers().size() == 2);
  CHECK(net.has_filter);
  CHECK(net.stage1_nodes.size() == 351);
  CHECK(net.stage3_nodes.size() == 351);
  CHECK(net.output_node == net.stage3_nodes.back());
}

TEST_CASE("chain amplifies a stop-band signal through the idler path") {
  MtwpaConfig cfg = mini_config();
  LadderNetwork chain = build_mtwpa_ladder(cfg, 1, 50.0, 50.0);
  const double fp = cfg.pump_freq_hz;
  // stop-band signal on a bin of the recorded half-window
  const double fs = 180.0 / 256.0 * fp;  // ~5.2 GHz
  const Tone pump{fp, 2.0 * std::sqrt(2.0 * 50.0 * cfg.pump_power_w), 0.0};
  auto s21_at = [&](bool pump_on, double ps) {
    DriveSpec d;
    d.tones = {Tone{fs, 2.0 * std::sqrt(2.0 * 50.0 * ps), 0.0}};
    if (pump_on) d.tones.push_back(pump);
    d.duration_s = 512.0 / fp;
    d.dt_s = 1.0 / (64.0 * fp);
    const TransientRun r = transient(chain, d);
    return std::abs(extract_sparams(chain, r, d.tones[0]).s21);
  };
  const double off = s21_at(false, 1e-16);
  const double on = s21_at(true, 1e-16);
  const double gain_db = 20.0 * std::log10(on / off);
  // pump off: the stop-band signal is absorbed by the reflectionless filter
  CHECK(20.0 * std::log10(off) < -6.0);
  // pump on: regeneration through the idler path
  CHECK(gain_db > 4.0);
}

TEST_CASE("gain saturation: flat small-signal region, monotone compression") {
  MtwpaConfig cfg = mini_config();
  LadderNetwork chain = build_mtwpa_ladder(cfg, 1, 50.0, 50.0);
  const double fp = cfg.pump_freq_hz;
  const double fs = 180.0 / 256.0 * fp;
  const Tone pump{fp, 2.0 * std::sqrt(2.0 * 50.0 * cfg.pump_power_w), 0.0};
  const std::vector<double> powers{watts_from_dbm(-120.0), watts_from_dbm(-110.0),
                                   watts_from_dbm(-84.0), watts_from_dbm(-78.0)};
  const SaturationResult sat = measure_gain_and_saturation(chain, pump, fs, powers, 512.0 / fp);
  REQUIRE(sat.gain_db.size() == 4);
  // small-signal flat across the first 10 dB of drive
  CHECK(std::abs(sat.gain_db[1] - sat.gain_db[0]) < 0.1);
  // compression sets in past the 1 dB point and deepens monotonically
  CHECK(sat.gain_db[3] < sat.gain_db[2]);
  CHECK(sat.gain_db[3] < sat.gain_db[1] - 1.0);
}

// Full-scale input-noise measurement on the 700-cell chain (slow; run with
// `test_mtwpa_chain "[slow]"` explicitly). The back-action lands near the
// analytic 0.5 + |Gamma_if|^2 G1 estimate.
TEST_CASE("chain input noise with the pump on", "[.][slow]") {
  MtwpaConfig cfg;
  cfg.applied_flux = 0.48;
  cfg.pump_freq_hz = 7.4e9;
  cfg.pump_power_w = watts_from_dbm(-78.08);
  cfg.interface_z_f = morgan_elements(cfg.filter.morgan_l_f, cfg.filter.morgan_c_f).rf;
  LadderNetwork chain = build_mtwpa_ladder(cfg, 2, 50.0, 50.0);
  NoiseSpec ns;
  ns.seed = 11;
  ns.temperature_k = 0.010;
  ns.bandwidth_hz = 50e9;
  const double fp = cfg.pump_freq_hz;
  const std::vector<Tone> pump{Tone{fp, 2.0 * std::sqrt(2.0 * 50.0 * cfg.pump_power_w), 0.0}};
  const NoiseMeasurement nm = inject_noise_and_measure_input(chain, pump, ns, 4.5e9, 6.0e9,
                                                             1024.0 / fp, 1.0 / (64.0 * fp));
  CHECK(nm.input_photons > 0.45);
  CHECK(nm.input_photons < 1.1);
}
