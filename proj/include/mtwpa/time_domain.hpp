#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtwpa/banded.hpp"
#include "mtwpa/constants.hpp"
#include "mtwpa/coupled_mode.hpp"
#include "mtwpa/device.hpp"
#include "mtwpa/rf_network.hpp"

namespace mtwpa {

// ---------------------------------------------------------------------------
// Netlist. Node 0 is ground. State is node flux + node voltage (v = dphi/dt);
// nonlinear inductors follow the cubic constitutive law i = dphi/L - gamma dphi^3
// (the discrete form of the governing wave equation).
// ---------------------------------------------------------------------------
struct Tone {
  double freq_hz;
  double amp_volts;  // EMF amplitude of the Thevenin source
  double phase_rad = 0.0;
};

struct NoiseSpec {
  bool enabled = false;
  double temperature_k = 0.010;
  double bandwidth_hz = 50e9;
  std::uint64_t seed = 1;
};

struct DriveSpec {
  std::vector<Tone> tones;
  NoiseSpec noise{};
  double duration_s = 0.0;  // 0 -> choose from periods
  double dt_s = 0.0;        // 0 -> 1/(64 f_max)
  double settle_fraction = 0.5;

  void validate() const {
    if (tones.empty() && !noise.enabled) throw std::domain_error("DriveSpec: no stimulus");
    for (const auto& t : tones)
      if (!(t.freq_hz > 0.0)) throw std::domain_error("DriveSpec: tone frequency must be > 0");
    if (dt_s > 0.0) {
      double fmax = 0.0;
      for (const auto& t : tones) fmax = std::max(fmax, t.freq_hz);
      if (fmax > 0.0 && !(dt_s < 1.0 / (20.0 * fmax)))
        throw std::domain_error("DriveSpec: dt too large for the highest tone (need dt < 1/(20 f_max))");
    }
    if (!(settle_fraction >= 0.0 && settle_fraction < 1.0))
      throw std::domain_error("DriveSpec: settle_fraction in [0,1)");
  }
};

class Circuit {
 public:
  int add_node() { return num_nodes_++; }
  int num_nodes() const { return num_nodes_; }

  void add_capacitor(int a, int b, double c) { caps_.push_back({a, b, c}); }
  void add_resistor(int a, int b, double r) {
    if (!(r > 0.0)) throw std::domain_error("Circuit: resistance must be > 0");
    res_.push_back({a, b, 1.0 / r});
  }
  void add_inductor(int a, int b, double l, double gamma = 0.0) {
    if (!(l > 0.0)) throw std::domain_error("Circuit: inductance must be > 0");
    inds_.push_back({a, b, 1.0 / l, gamma});
  }
  // Ideal 1:1 transformer: winding (a,b) coupled to (c,d), v_ab = v_cd.
  void add_transformer(int a, int b, int c, int d) { tfmrs_.push_back({a, b, c, d}); }

  // Thevenin source: series resistance into `node`; emf supplied per step.
  int add_source(int node, double r_series) {
    if (!(r_series > 0.0)) throw std::domain_error("Circuit: source resistance must be > 0");
    res_.push_back({node, 0, 1.0 / r_series});
    sources_.push_back({node, r_series});
    return int(sources_.size()) - 1;
  }

  struct Cap { int a, b; double c; };
  struct Res { int a, b; double g; };
  struct Ind { int a, b; double inv_l, gamma; };
  struct Xfmr { int a, b, c, d; };
  struct Src { int node; double r; };

  const std::vector<Cap>& caps() const { return caps_; }
  const std::vector<Res>& resistors() const { return res_; }
  const std::vector<Ind>& inductors() const { return inds_; }
  const std::vector<Xfmr>& transformers() const { return tfmrs_; }
  const std::vector<Src>& sources() const { return sources_; }

 private:
  int num_nodes_ = 1;  // ground pre-allocated
  std::vector<Cap> caps_;
  std::vector<Res> res_;
  std::vector<Ind> inds_;
  std::vector<Xfmr> tfmrs_;
  std::vector<Src> sources_;
};

struct SimOutput {
  double dt = 0.0;
  double t_first_sample = 0.0;  // absolute time of first recorded sample
  std::size_t steps_total = 0;
  std::map<int, std::vector<double>> node_series;      // probe node -> v(t)
  std::vector<std::vector<double>> source_emf_series;  // per source, recorded window
  // Discrete energy audit over the recorded window (midpoint quadrature,
  // consistent with the trapezoidal integrator).
  double energy_source_in = 0.0;   // delivered by sources into their nodes
  double energy_dissipated = 0.0;  // all resistors (incl. source/load)
  double stored_delta = 0.0;       // E(end) - E(record start)
};

namespace td_detail {

// 5-term flat-top window (SRS FW-5); unit coherent gain after normalization.
inline double flattop(double x) {  // x in [0,1)
  constexpr double a0 = 1.0, a1 = 1.93, a2 = 1.29, a3 = 0.388, a4 = 0.028;
  const double t = 2.0 * kPi * x;
  return a0 - a1 * std::cos(t) + a2 * std::cos(2 * t) - a3 * std::cos(3 * t) + a4 * std::cos(4 * t);
}

}  // namespace td_detail

// Complex amplitude of the cos(2 pi f t) component of a recorded series.
// The record must be commensurate: f * T_record within tol of an integer.
inline cplx extract_phasor(const std::vector<double>& v, double dt, double t0, double f_hz,
                           bool flat_top = true, double bin_tol = 1e-3) {
  if (v.empty()) throw std::domain_error("extract_phasor: empty series");
  const double cycles = f_hz * dt * double(v.size());
  if (std::abs(cycles - std::round(cycles)) > bin_tol)
    throw std::domain_error(
        "extract_phasor: tone not on an FFT bin (leakage); choose a commensurate duration");
  const double w = 2.0 * kPi * f_hz;
  cplx acc{0.0, 0.0};
  double wsum = 0.0;
  const std::size_t n = v.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double win = flat_top ? td_detail::flattop(double(j) / double(n)) : 1.0;
    const double t = t0 + double(j) * dt;
    acc += win * v[j] * std::exp(cplx(0.0, -w * t));
    wsum += win;
  }
  return 2.0 * acc / wsum;
}

struct TransientOptions {
  double newton_tol = 1e-12;
  int newton_max_iters = 50;
  int refactor_iter_threshold = 5;  // refactor the Jacobian when Newton gets slow
};

class TransientError : public std::runtime_error {
 public:
  TransientError(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_index(step) {}
  std::size_t step_index;
};

// Implicit-trapezoidal transient of a Circuit. `emf` supplies every source EMF
// at an absolute time; `probes` selects recorded nodes.
class TransientSolver {
 public:
  TransientSolver(const Circuit& ckt, TransientOptions opt = {}) : ckt_(ckt), opt_(opt) {
    n_ = ckt.num_nodes() - 1;
    nt_ = int(ckt.transformers().size());
    nu_ = n_ + nt_;
    bw_ = 1;
    auto track = [&](int a, int b) {
      if (a > 0 && b > 0) bw_ = std::max(bw_, std::abs(a - b));
    };
    for (const auto& c : ckt.caps()) track(c.a, c.b);
    for (const auto& r : ckt.resistors()) track(r.a, r.b);
    for (const auto& l : ckt.inductors()) track(l.a, l.b);
    for (std::size_t k = 0; k < ckt.transformers().size(); ++k) {
      const auto& t = ckt.transformers()[k];
      const int row = n_ + int(k) + 1;  // 1-based pseudo node
      for (int nd : {t.a, t.b, t.c, t.d}) track(row, nd);
    }
  }

  SimOutput run(const std::function<double(int, double)>& emf, double dt, std::size_t steps,
                std::size_t record_from, const std::vector<int>& probes) {
    if (!(dt > 0.0)) throw std::domain_error("TransientSolver: dt must be > 0");
    const double h = dt;
    std::vector<double> phi(n_, 0.0), x(nu_, 0.0), x1(nu_, 0.0), phi1(n_, 0.0);
    std::vector<double> f_prev(nu_, 0.0), resid(nu_, 0.0), rhs(nu_, 0.0);

    BandedLU lu;
    bool lu_valid = false;

    SimOutput out;
    out.dt = dt;
    out.steps_total = steps;
    out.t_first_sample = double(record_from + 1) * h;
    for (int p : probes) out.node_series[p] = {};
    out.source_emf_series.resize(ckt_.sources().size());

    auto eval_f = [&](const std::vector<double>& vv, const std::vector<double>& pp, double t,
                      std::vector<double>& f) {
      std::fill(f.begin(), f.end(), 0.0);
      for (const auto& r : ckt_.resistors()) {
        const double va = r.a ? vv[r.a - 1] : 0.0;
        const double vb = r.b ? vv[r.b - 1] : 0.0;
        const double i = r.g * (va - vb);
        if (r.a) f[r.a - 1] -= i;
        if (r.b) f[r.b - 1] += i;
      }
      for (const auto& l : ckt_.inductors()) {
        const double pa = l.a ? pp[l.a - 1] : 0.0;
        const double pb = l.b ? pp[l.b - 1] : 0.0;
        const double d = pa - pb;
        const double i = d * l.inv_l - l.gamma * d * d * d;
        if (l.a) f[l.a - 1] -= i;
        if (l.b) f[l.b - 1] += i;
      }
      for (std::size_t k = 0; k < ckt_.transformers().size(); ++k) {
        const auto& tf = ckt_.transformers()[k];
        const double j = vv[n_ + k];
        if (tf.a) f[tf.a - 1] -= j;
        if (tf.b) f[tf.b - 1] += j;
        if (tf.c) f[tf.c - 1] += j;
        if (tf.d) f[tf.d - 1] -= j;
      }
      for (std::size_t s = 0; s < ckt_.sources().size(); ++s) {
        const auto& src = ckt_.sources()[s];
        f[src.node - 1] += emf(int(s), t) / src.r;
      }
    };

    auto build_jacobian = [&](const std::vector<double>& pp) {
      lu.reset(nu_, bw_, bw_);
      auto add = [&](int a, int b, double mval, double aval) {
        if (a) {
          lu.at(a - 1, a - 1) += mval + 0.5 * h * aval;
        }
        if (b) {
          lu.at(b - 1, b - 1) += mval + 0.5 * h * aval;
        }
        if (a && b) {
          lu.at(a - 1, b - 1) -= mval + 0.5 * h * aval;
          lu.at(b - 1, a - 1) -= mval + 0.5 * h * aval;
        }
      };
      for (const auto& c : ckt_.caps()) add(c.a, c.b, c.c, 0.0);
      for (const auto& r : ckt_.resistors()) add(r.a, r.b, 0.0, r.g);
      const double q = 0.25 * h * h;
      for (const auto& l : ckt_.inductors()) {
        const double pa = l.a ? pp[l.a - 1] : 0.0;
        const double pb = l.b ? pp[l.b - 1] : 0.0;
        const double d = pa - pb;
        const double gp = l.inv_l - 3.0 * l.gamma * d * d;
        if (l.a) lu.at(l.a - 1, l.a - 1) += q * gp;
        if (l.b) lu.at(l.b - 1, l.b - 1) += q * gp;
        if (l.a && l.b) {
          lu.at(l.a - 1, l.b - 1) -= q * gp;
          lu.at(l.b - 1, l.a - 1) -= q * gp;
        }
      }
      for (std::size_t k = 0; k < ckt_.transformers().size(); ++k) {
        const auto& tf = ckt_.transformers()[k];
        const int col = n_ + int(k);
        auto put = [&](int nd, double sgn) {
          if (nd) {
            lu.at(nd - 1, col) += 0.5 * h * sgn;  // d(R_v)/dJ
            lu.at(col, nd - 1) += sgn;            // constraint row B^T v
          }
        };
        put(tf.a, +1.0);
        put(tf.b, -1.0);
        put(tf.c, -1.0);
        put(tf.d, +1.0);
      }
      if (!lu.factor()) throw std::runtime_error("TransientSolver: singular Jacobian");
      lu_valid = true;
    };

    eval_f(x, phi, 0.0, f_prev);
    double t = 0.0;
    std::vector<double> f1(nu_, 0.0);
    for (std::size_t step = 0; step < steps; ++step) {
      const double t1 = t + h;
      x1 = x;
      bool converged = false;
      bool refactored = false;
      if (!lu_valid) build_jacobian(phi);
      for (int attempt = 0; attempt < 2 && !converged; ++attempt) {
        for (int it = 0; it < opt_.newton_max_iters; ++it) {
          for (int i = 0; i < n_; ++i) phi1[i] = phi[i] + 0.5 * h * (x[i] + x1[i]);
          eval_f(x1, phi1, t1, f1);
          // mass-matrix rows
          std::fill(resid.begin(), resid.end(), 0.0);
          for (const auto& c : ckt_.caps()) {
            const double da = c.a ? (x1[c.a - 1] - x[c.a - 1]) : 0.0;
            const double db = c.b ? (x1[c.b - 1] - x[c.b - 1]) : 0.0;
            const double q = c.c * (da - db);
            if (c.a) resid[c.a - 1] += q;
            if (c.b) resid[c.b - 1] -= q;
          }
          for (int i = 0; i < n_; ++i) resid[i] -= 0.5 * h * (f1[i] + f_prev[i]);
          // transformer constraint rows replace their mass rows
          for (std::size_t k = 0; k < ckt_.transformers().size(); ++k) {
            const auto& tf = ckt_.transformers()[k];
            auto vat = [&](int nd) { return nd ? x1[nd - 1] : 0.0; };
            resid[n_ + k] = vat(tf.a) - vat(tf.b) - vat(tf.c) + vat(tf.d);
          }
          rhs = resid;
          for (double& r : rhs) r = -r;
          lu.solve(rhs);
          double dmax = 0.0, xmax = 0.0;
          for (int i = 0; i < nu_; ++i) {
            x1[i] += rhs[i];
            dmax = std::max(dmax, std::abs(rhs[i]));
            xmax = std::max(xmax, std::abs(x1[i]));
          }
          if (dmax <= opt_.newton_tol * (1.0 + xmax)) {
            converged = true;
            if (it >= opt_.refactor_iter_threshold) build_jacobian(phi1);  // keep future steps fast
            break;
          }
        }
        if (!converged && !refactored) {
          for (int i = 0; i < n_; ++i) phi1[i] = phi[i] + 0.5 * h * (x[i] + x1[i]);
          build_jacobian(phi1);
          refactored = true;
          x1 = x;
        }
      }
      if (!converged) throw TransientError("TransientSolver: Newton did not converge", step);

      if (step == record_from) stored_at_record_start_ = stored_energy(phi, x);
      // energy audit over the recorded window (midpoints, consistent with the
      // trapezoid: for linear networks E_in = E_dissipated + stored_delta exactly)
      if (step >= record_from) {
        for (std::size_t s = 0; s < ckt_.sources().size(); ++s) {
          const auto& src = ckt_.sources()[s];
          const double vm = 0.5 * (x[src.node - 1] + x1[src.node - 1]);
          const double em = 0.5 * (emf(int(s), t) + emf(int(s), t1));
          out.energy_source_in += vm * em / src.r * h;  // Norton injection e/R
        }
        for (const auto& r : ckt_.resistors()) {
          const double va0 = r.a ? x[r.a - 1] : 0.0, vb0 = r.b ? x[r.b - 1] : 0.0;
          const double va1 = r.a ? x1[r.a - 1] : 0.0, vb1 = r.b ? x1[r.b - 1] : 0.0;
          const double vm = 0.5 * ((va0 - vb0) + (va1 - vb1));
          out.energy_dissipated += vm * vm * r.g * h;
        }
      }

      for (int i = 0; i < n_; ++i) phi[i] = phi[i] + 0.5 * h * (x[i] + x1[i]);
      x = x1;
      t = t1;
      eval_f(x, phi, t, f_prev);
      if (step >= record_from) {
        for (auto& [p, vec] : out.node_series) vec.push_back(p ? x[p - 1] : 0.0);
        for (std::size_t s = 0; s < ckt_.sources().size(); ++s)
          out.source_emf_series[s].push_back(emf(int(s), t));
      }
    }
    out.stored_delta = stored_energy(phi, x) - stored_at_record_start_;
    return out;
  }

 private:
  double stored_energy(const std::vector<double>& phi, const std::vector<double>& v) const {
    double e = 0.0;
    for (const auto& c : ckt_.caps()) {
      const double va = c.a ? v[c.a - 1] : 0.0;
      const double vb = c.b ? v[c.b - 1] : 0.0;
      e += 0.5 * c.c * (va - vb) * (va - vb);
    }
    for (const auto& l : ckt_.inductors()) {
      const double pa = l.a ? phi[l.a - 1] : 0.0;
      const double pb = l.b ? phi[l.b - 1] : 0.0;
      const double d = pa - pb;
      e += 0.5 * l.inv_l * d * d - 0.25 * l.gamma * d * d * d * d;
    }
    return e;
  }

  const Circuit& ckt_;
  TransientOptions opt_;
  int n_ = 0, nt_ = 0, nu_ = 0, bw_ = 1;
  double stored_at_record_start_ = 0.0;
};

}  // namespace mtwpa
