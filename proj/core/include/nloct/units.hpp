#pragma once

namespace nloct {

// All core interfaces work in SI base units (m, s, K, rad/s).
// File formats and the CLI use the conventional lab units (nm, um, mm)
// and convert at the boundary.

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline constexpr double kNm = 1e-9;
inline constexpr double kUm = 1e-6;
inline constexpr double kMm = 1e-3;

inline constexpr double kZeroCelsiusK = 273.15;

/// Vacuum angular frequency of a wavelength.
double angular_frequency(double wavelength_m);

/// Vacuum wavelength of an angular frequency.
double wavelength_of(double omega_rad_s);

}  // namespace nloct
