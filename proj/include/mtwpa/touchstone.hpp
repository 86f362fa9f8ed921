#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtwpa/rf_network.hpp"

namespace mtwpa {

// Touchstone v1.0 2-port writer: "# HZ S RI R <ref>", '!' comments, 9 significant
// digits (RI format keeps re-import lossless at that precision).
inline void export_touchstone(const TwoPortResponse& resp, const std::string& path) {
  resp.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_touchstone: cannot open " + path);
  os << "! 2-port S-parameters\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "# HZ S RI R %.9g\n", resp.ref_ohms);
  os << buf;
  os << "! freq_hz  re(s11) im(s11)  re(s21) im(s21)  re(s12) im(s12)  re(s22) im(s22)\n";
  for (std::size_t i = 0; i < resp.grid.size(); ++i) {
    const double f = resp.grid.omega[i] / (2.0 * kPi);
    std::snprintf(buf, sizeof(buf),
                  "%.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n", f,
                  resp.s11[i].real(), resp.s11[i].imag(),
                  resp.s21[i].real(), resp.s21[i].imag(),
                  resp.s12[i].real(), resp.s12[i].imag(),
                  resp.s22[i].real(), resp.s22[i].imag());
    os << buf;
  }
  if (!os) throw std::runtime_error("export_touchstone: write failed for " + path);
}

inline TwoPortResponse import_touchstone(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("import_touchstone: cannot open " + path);
  TwoPortResponse r;
  bool have_header = false;
  double funit = 1.0;
  std::string line;
  while (std::getline(is, line)) {
    const auto bang = line.find('!');
    if (bang != std::string::npos) line = line.substr(0, bang);
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    if (first == "#") {
      std::string unit, type, fmt, rtok;
      double ref = 50.0;
      ss >> unit >> type >> fmt >> rtok >> ref;
      for (auto& ch : unit) ch = char(std::toupper(ch));
      if (unit == "HZ") funit = 1.0;
      else if (unit == "KHZ") funit = 1e3;
      else if (unit == "MHZ") funit = 1e6;
      else if (unit == "GHZ") funit = 1e9;
      else throw std::runtime_error("import_touchstone: unsupported unit " + unit);
      if (type != "S" || fmt != "RI")
        throw std::runtime_error("import_touchstone: only 'S RI' supported");
      r.ref_ohms = ref;
      have_header = true;
      continue;
    }
    double f = std::stod(first);
    double v[8];
    for (double& x : v)
      if (!(ss >> x)) throw std::runtime_error("import_touchstone: short data row");
    r.grid.omega.push_back(2.0 * kPi * f * funit);
    r.s11.emplace_back(v[0], v[1]);
    r.s21.emplace_back(v[2], v[3]);
    r.s12.emplace_back(v[4], v[5]);
    r.s22.emplace_back(v[6], v[7]);
  }
  if (!have_header) throw std::runtime_error("import_touchstone: missing option line");
  r.validate();
  return r;
}

}  // namespace mtwpa
