#pragma once

#include <cmath>

namespace mtwpa {

// CODATA 2018 exact/recommended values.
inline constexpr double kFluxQuantum = 2.067833848e-15;  // Wb
inline constexpr double kHbar = 1.054571817e-34;         // J s
inline constexpr double kBoltzmann = 1.380649e-23;       // J/K
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kReducedFluxQuantum = kFluxQuantum / (2.0 * kPi);  // Wb/rad

inline double db_from_power_ratio(double ratio) { return 10.0 * std::log10(ratio); }
inline double power_ratio_from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_from_watts(double w) { return 10.0 * std::log10(w / 1e-3); }
inline double watts_from_dbm(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

}  // namespace mtwpa
