#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "mtwpa/cascade.hpp"
#include "mtwpa/noise.hpp"
#include "mtwpa/time_domain.hpp"

namespace mtwpa {

// One nonlinear transmission-line stage (with optional embedded filter and a
// second stage) mapped onto a Circuit. Per cell: series branch = nonlinear
// inductor (i = dphi/L - gamma dphi^3) in parallel with C_J = C0 (r/2 + 2);
// shunt = C_gnd in parallel with G at the cell node.
struct LadderNetwork {
  Circuit circuit;
  int input_node = 0;
  int output_node = 0;
  int source_index = -1;
  double source_ohms = 50.0;
  double load_ohms = 50.0;
  std::vector<int> stage1_nodes;  // ladder nodes of stage 1 (input first)
  std::vector<int> stage3_nodes;  // empty when single-stage
  bool has_filter = false;
};

namespace td_detail {

inline std::vector<int> append_stage(Circuit& ckt, int from_node, const StageGeometry& geom,
                                     FluxBias flux, double g_shunt_at_pump) {
  const LinearParams lp = linear_params(geom, flux);
  const double cj = geom.c0 * (geom.r / 2.0 + 2.0);
  std::vector<int> nodes;
  nodes.push_back(from_node);
  int prev = from_node;
  for (int i = 0; i < geom.n_cells; ++i) {
    const int nxt = ckt.add_node();
    ckt.add_inductor(prev, nxt, lp.l_cell, lp.gamma);
    ckt.add_capacitor(prev, nxt, cj);
    ckt.add_capacitor(nxt, 0, geom.c_gnd);
    if (g_shunt_at_pump > 0.0) ckt.add_resistor(nxt, 0, 1.0 / g_shunt_at_pump);
    nodes.push_back(nxt);
    prev = nxt;
  }
  return nodes;
}

// Impedance-scale a constant-resistance section to a new design resistance:
// L and R scale by s, C by 1/s; the transfer shape and knee are unchanged.
inline MorganElements scale_to_impedance(MorganElements e, double z_design) {
  const double s = z_design / e.rf;
  e.rf = z_design;
  e.c1 /= s;
  e.c3 /= s;
  e.c2d /= s;
  e.l2 *= s;
  e.l1d *= s;
  e.l3d *= s;
  return e;
}

// One reflectionless lattice section between `in` and a fresh output node.
// Arms: Za (Butterworth HP ladder into Rf) and the dual Zb = Rf^2/Za; the
// floating output pair is grounded through an ideal 1:1 transformer.
inline int append_lattice_section(Circuit& ckt, int in, const MorganElements& e) {
  const int x = ckt.add_node();
  const int y = ckt.add_node();
  const int out = ckt.add_node();
  auto stamp_za = [&](int p, int q) {
    const int m = ckt.add_node();
    ckt.add_capacitor(p, q, e.c1);
    ckt.add_inductor(p, m, e.l2);
    ckt.add_capacitor(m, q, e.c3);
    ckt.add_resistor(m, q, e.rf);
  };
  auto stamp_zb = [&](int p, int q) {
    const int m1 = ckt.add_node();
    const int m2 = ckt.add_node();
    ckt.add_inductor(p, m1, e.l1d);
    ckt.add_capacitor(m1, q, e.c2d);
    ckt.add_inductor(m1, m2, e.l3d);
    ckt.add_resistor(m2, q, e.rf);
  };
  stamp_za(in, x);
  stamp_za(0, y);
  stamp_zb(in, y);
  stamp_zb(0, x);
  ckt.add_transformer(x, y, out, 0);
  return out;
}

}  // namespace td_detail

// Single uniform stage between resistive ports.
inline LadderNetwork build_ladder(const StageGeometry& geom, FluxBias flux,
                                  double source_ohms = 50.0, double load_ohms = 50.0,
                                  double g_shunt = 0.0) {
  geom.validate();
  LadderNetwork net;
  net.input_node = net.circuit.add_node();
  net.stage1_nodes = td_detail::append_stage(net.circuit, net.input_node, geom, flux, g_shunt);
  net.output_node = net.stage1_nodes.back();
  net.source_index = net.circuit.add_source(net.input_node, source_ohms);
  net.circuit.add_resistor(net.output_node, 0, load_ohms);
  net.source_ohms = source_ohms;
  net.load_ohms = load_ohms;
  return net;
}

// Full mTWPA ladder: stage 1, lumped reflectionless filter, stage 3. The
// filter sections are impedance-scaled to the configured interface Z_f.
inline LadderNetwork build_mtwpa_ladder(const MtwpaConfig& cfg, int filter_sections,
                                        double source_ohms = 50.0, double load_ohms = 50.0) {
  cfg.validate();
  LadderNetwork net;
  net.input_node = net.circuit.add_node();
  net.stage1_nodes =
      td_detail::append_stage(net.circuit, net.input_node, cfg.stage1, cfg.flux1(), 0.0);
  int node = net.stage1_nodes.back();
  const MorganElements e = td_detail::scale_to_impedance(
      morgan_elements(cfg.filter.morgan_l_f, cfg.filter.morgan_c_f), cfg.interface_z_f);
  for (int s = 0; s < filter_sections; ++s)
    node = td_detail::append_lattice_section(net.circuit, node, e);
  net.has_filter = filter_sections > 0;
  net.stage3_nodes = td_detail::append_stage(net.circuit, node, cfg.stage3, cfg.flux3(), 0.0);
  net.output_node = net.stage3_nodes.back();
  net.source_index = net.circuit.add_source(net.input_node, source_ohms);
  net.circuit.add_resistor(net.output_node, 0, load_ohms);
  net.source_ohms = source_ohms;
  net.load_ohms = load_ohms;
  return net;
}

// ---------------------------------------------------------------------------
// Noise synthesis: band-limited Gaussian EMF with the thermal/vacuum spectral
// density S_emf(f) = 4 R (hbar w / 2) coth(hbar w / 2 kB T), single-sided, so a
// matched load absorbs exactly (hbar w / 2) coth per Hz (half a photon at T=0).
// Deterministic for a fixed seed: Box-Muller on mt19937_64, frequency-domain
// synthesis through a radix-2 FFT.
// ---------------------------------------------------------------------------
namespace td_detail {

inline void fft_radix2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / double(len) * (inverse ? 1.0 : -1.0);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& z : a) z /= double(n);
}

struct GaussianDraw {
  std::mt19937_64 rng;
  explicit GaussianDraw(std::uint64_t seed) : rng(seed) {}
  double operator()() {
    // Box-Muller (trig form): platform-independent for a fixed seed.
    const double u1 = (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    const double u2 = (double(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }
};

}  // namespace td_detail

inline std::vector<double> synthesize_noise_emf(const NoiseSpec& spec, double r_source, double dt,
                                                std::size_t nsamples) {
  std::size_t nfft = 1;
  while (nfft < nsamples) nfft <<= 1;
  std::vector<cplx> spec_arr(nfft, cplx{0.0, 0.0});
  const double df = 1.0 / (double(nfft) * dt);
  const double fny = 0.5 / dt;
  const double fmax = std::min(spec.bandwidth_hz, fny);
  td_detail::GaussianDraw gauss(spec.seed);
  for (std::size_t m = 1; m < nfft / 2; ++m) {
    const double f = double(m) * df;
    if (f > fmax) break;
    const double w = 2.0 * kPi * f;
    const double s_emf =
        4.0 * r_source * quantum_source_power(spec.temperature_k, w, 1.0);  // V^2/Hz
    // E|c_m|^2 = S df / 2 so that the real series has variance integral(S df)
    const double sigma = 0.5 * std::sqrt(s_emf * df);
    spec_arr[m] = cplx(sigma * gauss(), sigma * gauss());
    spec_arr[nfft - m] = std::conj(spec_arr[m]);
  }
  td_detail::fft_radix2(spec_arr, false);
  std::vector<double> out(nsamples);
  for (std::size_t i = 0; i < nsamples; ++i) out[i] = spec_arr[i].real();
  return out;
}

// ---------------------------------------------------------------------------
// Drive execution
// ---------------------------------------------------------------------------
struct TransientRun {
  SimOutput sim;
  double dt;
  std::size_t steps;
  std::size_t record_from;
  std::vector<double> noise_emf;  // empty when noise disabled
};

inline TransientRun transient(const LadderNetwork& net, const DriveSpec& drive,
                              std::vector<int> probes = {}, TransientOptions opt = {}) {
  drive.validate();
  double fmax = 0.0, fmin = 0.0;
  for (const auto& t : drive.tones) {
    fmax = std::max(fmax, t.freq_hz);
    fmin = fmin == 0.0 ? t.freq_hz : std::min(fmin, t.freq_hz);
  }
  if (fmax == 0.0) fmax = drive.noise.bandwidth_hz / 4.0;
  const double dt = drive.dt_s > 0.0 ? drive.dt_s : 1.0 / (64.0 * fmax);
  double duration = drive.duration_s;
  if (duration <= 0.0) duration = 4096.0 / fmax;
  if (fmin > 0.0 && duration < 64.0 / fmin)
    throw std::domain_error("transient: duration must cover >= 64 periods of the lowest tone");
  const std::size_t steps = std::size_t(std::llround(duration / dt));
  const std::size_t record_from = std::size_t(double(steps) * drive.settle_fraction);

  std::vector<double> noise;
  if (drive.noise.enabled)
    noise = synthesize_noise_emf(drive.noise, net.source_ohms, dt, steps + 1);

  if (probes.empty()) probes = {net.input_node, net.output_node};
  auto emf = [&](int /*src*/, double t) {
    double v = 0.0;
    for (const auto& tone : drive.tones)
      v += tone.amp_volts * std::cos(2.0 * kPi * tone.freq_hz * t + tone.phase_rad);
    if (!noise.empty()) {
      const std::size_t k = std::min(std::size_t(std::llround(t / dt)), noise.size() - 1);
      v += noise[k];
    }
    return v;
  };

  TransientRun run_out;
  TransientSolver solver(net.circuit, opt);
  run_out.sim = solver.run(emf, dt, steps, record_from, probes);
  run_out.dt = dt;
  run_out.steps = steps;
  run_out.record_from = record_from;
  run_out.noise_emf = std::move(noise);
  return run_out;
}

struct SparamSample {
  cplx s21;
  cplx s11;
};

// S-parameters at a tone frequency from recorded node series.
//   s21 = V_out / (EMF/2) * sqrt(Rs/Rl), s11 from the reflected-wave separation
//   b = V_in - EMF/2 at the source resistor.
inline SparamSample extract_sparams(const LadderNetwork& net, const TransientRun& run,
                                    const Tone& tone) {
  const auto& vin = run.sim.node_series.at(net.input_node);
  const auto& vout = run.sim.node_series.at(net.output_node);
  const cplx a0 =
      0.5 * tone.amp_volts * std::exp(cplx(0.0, tone.phase_rad));  // incident wave EMF/2
  const cplx vi = extract_phasor(vin, run.dt, run.sim.t_first_sample, tone.freq_hz);
  const cplx vo = extract_phasor(vout, run.dt, run.sim.t_first_sample, tone.freq_hz);
  SparamSample s;
  s.s21 = vo / a0 * std::sqrt(net.source_ohms / net.load_ohms);
  s.s11 = (vi - a0) / a0;
  return s;
}

// theta_NL(P): pump transmission phase relative to the zero-power phase, with the
// sign convention that positive theta means phase delay (matches alpha_p l > 0
// for gamma > 0). Truncates with a flag if Newton fails at high amplitude.
struct SpmCurve {
  std::vector<double> power_w;
  std::vector<double> theta_rad;
  bool truncated = false;
};

// The sweep is unwrapped cumulatively, so theta may exceed pi as long as
// consecutive sweep points differ by less than pi.
inline SpmCurve measure_spm_phase(const LadderNetwork& net, double pump_freq_hz,
                                  const std::vector<double>& power_sweep_w,
                                  double duration_s = 0.0) {
  SpmCurve curve;
  auto phase_at = [&](double p_w) {
    const double v_emf = 2.0 * std::sqrt(2.0 * net.source_ohms * p_w);
    DriveSpec d;
    d.tones = {Tone{pump_freq_hz, v_emf, 0.0}};
    d.duration_s = duration_s > 0.0 ? duration_s : 192.0 / pump_freq_hz;
    TransientRun r = transient(net, d);
    return std::arg(extract_sparams(net, r, d.tones[0]).s21);
  };
  const double ref_power = power_sweep_w.empty() ? 1e-18 : power_sweep_w.front() * 1e-6;
  double prev_phase = phase_at(ref_power);
  double theta = 0.0;
  for (double p : power_sweep_w) {
    try {
      const double ph = phase_at(p);
      theta -= std::remainder(ph - prev_phase, 2.0 * kPi);
      prev_phase = ph;
      curve.power_w.push_back(p);
      curve.theta_rad.push_back(theta);
    } catch (const TransientError&) {
      curve.truncated = true;
      break;
    }
  }
  return curve;
}

struct SaturationResult {
  double small_signal_gain_db = 0.0;
  double p1db_w = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> signal_power_w;
  std::vector<double> gain_db;
};

// Forward gain vs signal power; the 1 dB compression point is interpolated from
// the sweep. Gains are pump-on/pump-off ratios, which cancels the passive
// transfer of the chain.
inline SaturationResult measure_gain_and_saturation(const LadderNetwork& net, const Tone& pump,
                                                    double signal_freq_hz,
                                                    const std::vector<double>& signal_powers_w,
                                                    double duration_s) {
  SaturationResult res;
  auto run_once = [&](double ps, bool pump_on) {
    DriveSpec d;
    const double vs = 2.0 * std::sqrt(2.0 * net.source_ohms * ps);
    d.tones = {Tone{signal_freq_hz, vs, 0.0}};
    if (pump_on) d.tones.push_back(pump);
    d.duration_s = duration_s;
    d.dt_s = 1.0 / (64.0 * std::max(pump.freq_hz, signal_freq_hz));
    TransientRun r = transient(net, d);
    return std::abs(extract_sparams(net, r, d.tones[0]).s21);
  };
  for (double ps : signal_powers_w) {
    const double on = run_once(ps, true);
    const double off = run_once(ps, false);
    res.signal_power_w.push_back(ps);
    res.gain_db.push_back(20.0 * std::log10(on / off));
  }
  if (!res.gain_db.empty()) {
    res.small_signal_gain_db = res.gain_db.front();
    const double target = res.small_signal_gain_db - 1.0;
    for (std::size_t i = 1; i < res.gain_db.size(); ++i) {
      if (res.gain_db[i] <= target && res.gain_db[i - 1] > target) {
        const double f = (res.gain_db[i - 1] - target) / (res.gain_db[i - 1] - res.gain_db[i]);
        res.p1db_w = res.signal_power_w[i - 1] *
                     std::pow(res.signal_power_w[i] / res.signal_power_w[i - 1], f);
        break;
      }
    }
  }
  return res;
}

struct NoiseMeasurement {
  double backward_photons = 0.0;  // separated backward wave at the input port
  double input_photons = 0.0;     // 0.5 (port vacuum) + backward
  double forward_photons = 0.0;   // sanity: injected flux in the band (~0.5 at T->0)
};

// Photon flux measured at the input node over [f_lo, f_hi], pump optionally on.
// Deterministic for a fixed seed.
inline NoiseMeasurement inject_noise_and_measure_input(const LadderNetwork& net,
                                                       const std::vector<Tone>& tones,
                                                       const NoiseSpec& noise, double f_lo,
                                                       double f_hi, double duration_s,
                                                       double dt_s) {
  DriveSpec d;
  d.tones = tones;
  d.noise = noise;
  d.noise.enabled = true;
  d.duration_s = duration_s;
  d.dt_s = dt_s;
  TransientRun r = transient(net, d);
  const auto& vin = r.sim.node_series.at(net.input_node);
  const auto& emf = r.sim.source_emf_series.at(0);
  const std::size_t n = vin.size();
  std::vector<double> fwd(n), bwd(n);
  for (std::size_t i = 0; i < n; ++i) {
    fwd[i] = 0.5 * emf[i];
    bwd[i] = vin[i] - 0.5 * emf[i];
  }
  const double df = 1.0 / (r.dt * double(n));
  const std::size_t m_lo = std::size_t(std::ceil(f_lo / df));
  const std::size_t m_hi = std::size_t(std::floor(f_hi / df));
  NoiseMeasurement out;
  double nb = 0.0, nf = 0.0;
  std::size_t count = 0;
  for (std::size_t m = m_lo; m <= m_hi; ++m) {
    const double f = double(m) * df;
    const double w = 2.0 * kPi * f;
    const cplx bf = extract_phasor(bwd, r.dt, r.sim.t_first_sample, f, false);
    const cplx ff = extract_phasor(fwd, r.dt, r.sim.t_first_sample, f, false);
    // bin power (amplitude^2 / 2R) referred to a Delta-f slice -> photon density
    nb += std::norm(bf) / (2.0 * net.source_ohms) / (kHbar * w * df);
    nf += std::norm(ff) / (2.0 * net.source_ohms) / (kHbar * w * df);
    ++count;
  }
  if (count == 0) throw std::domain_error("inject_noise_and_measure_input: empty analysis band");
  out.backward_photons = nb / double(count);
  out.forward_photons = nf / double(count);
  out.input_photons = 0.5 + out.backward_photons;
  return out;
}

}  // namespace mtwpa
