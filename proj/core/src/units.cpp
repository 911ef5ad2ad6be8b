#include "nloct/units.hpp"

#include <numbers>

namespace nloct {

double angular_frequency(double wavelength_m) {
    return 2.0 * std::numbers::pi * kSpeedOfLight / wavelength_m;
}

double wavelength_of(double omega_rad_s) {
    return 2.0 * std::numbers::pi * kSpeedOfLight / omega_rad_s;
}

}  // namespace nloct
