#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mtwpa {

// Fixed formatting: 9 significant digits, C locale, '\n' line ends.
inline std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    os << columns[i] << (i + 1 < columns.size() ? "," : "");
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << format_g9(row[i]) << (i + 1 < row.size() ? "," : "");
    os << "\n";
  }
  if (!os) throw std::runtime_error("write_csv: write failed for " + path);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline constexpr const char* kToolVersion = "0.1.0";

// Every run writes a manifest sufficient to reproduce its outputs bit-exactly.
inline void write_manifest(const std::string& dir, const std::string& command,
                           const std::string& config_text, std::uint64_t seed,
                           const std::vector<std::string>& outputs) {
  std::ofstream os(std::filesystem::path(dir) / "run_manifest.txt");
  if (!os) throw std::runtime_error("write_manifest: cannot open manifest in " + dir);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(config_text)));
  os << "tool: mtwpa " << kToolVersion << "\n";
  os << "command: " << command << "\n";
  os << "config_fnv1a: " << buf << "\n";
  os << "seed: " << seed << "\n";
  os << "outputs:\n";
  for (const auto& f : outputs) os << "  - " << f << "\n";
}

inline void write_gnuplot(const std::string& path, const std::string& csv_name,
                          const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<std::pair<int, std::string>>& series) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_gnuplot: cannot open " + path);
  os << "set datafile separator ','\n";
  os << "set key autotitle columnhead\n";
  os << "set title '" << title << "'\n";
  os << "set xlabel '" << xlabel << "'\nset ylabel '" << ylabel << "'\nset grid\n";
  os << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    os << "'" << csv_name << "' using 1:" << series[i].first << " with lines title '"
       << series[i].second << "'";
    if (i + 1 < series.size()) os << ", \\\n     ";
  }
  os << "\n";
}

}  // namespace mtwpa
