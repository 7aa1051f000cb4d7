#pragma once

// Unit conversions for the CLI boundary. Internally the library stores every
// energy as an angular frequency (rad/s) with hbar = 1; configs and reports
// name their units explicitly and convert here.

namespace tqsim::units {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

// CODATA 2018: e = 1.602176634e-19 C (exact), hbar = 1.054571817e-34 J s.
// 1 eV as an angular frequency is e/hbar.
inline constexpr double ev_as_rad_per_s = 1.5192674488095105e15;
inline constexpr double microev_as_rad_per_s = ev_as_rad_per_s * 1e-6;

constexpr double hz_to_rad_per_s(double f) { return two_pi * f; }
constexpr double rad_per_s_to_hz(double w) { return w / two_pi; }
constexpr double ghz_to_rad_per_s(double f) { return two_pi * f * 1e9; }
constexpr double mhz_to_rad_per_s(double f) { return two_pi * f * 1e6; }
constexpr double microev_to_rad_per_s(double e) { return e * microev_as_rad_per_s; }

} // namespace tqsim::units
