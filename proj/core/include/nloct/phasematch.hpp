#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nloct/material.hpp"

namespace nloct {

/// Crystal configuration defining one down-conversion setting.
struct SpdcConfig {
    double pump_wavelength_m = 532e-9;
    double poling_period_m = 7.4e-6;   // at the expansion reference temperature
    double temperature_k = 399.0;
    double crystal_length_m = 1e-3;
    std::string material_id = "mgo_cln_5pct";
};

/// Collinear signal/idler pair; signal is the detected (shorter) wavelength.
struct WavelengthPair {
    double signal_m = 0.0;
    double idler_m = 0.0;
};

struct QpmSolution {
    WavelengthPair pair;
    double residual_rad_per_m = 0.0;  // |dk| at the solution
    bool multiple_brackets = false;   // more than one root crossed the window
};

/// Down-conversion intensity spectrum versus frequency detuning.
struct Spectrum {
    std::vector<double> detuning_rad_s;  // uniform, ascending, spans 0
    std::vector<double> intensity;       // >= 0, peak 1 at zero detuning
    double normalization = 0.0;          // integral of intensity over detuning
};

/// Normalized first-order correlation magnitude on a uniform delay grid.
struct CorrelationFunction {
    std::vector<double> delay_s;    // uniform, symmetric about 0
    std::vector<double> magnitude;  // |mu|, 1 at zero delay

    double magnitude_at(double delay_s_value) const;  // linear interp, 0 outside
    double max_delay() const { return delay_s.empty() ? 0.0 : delay_s.back(); }
};

/// Half-max abscissa of sinc^2(x): sinc^2(kSinc2HalfMaxArg) = 1/2.
inline constexpr double kSinc2HalfMaxArg = 1.39155737720690357;

/// Solve the first-order collinear quasi-phase-matching condition
/// k_p = k_s + k_i + 2 pi / Lambda for the signal in [540, 1000] nm.
/// Deterministic: 1 nm bracketing scan, then bisection; if several brackets
/// exist the smallest signal wavelength wins and the solution is flagged.
/// Throws NoSolutionError (with the edge mismatches) when no root exists.
QpmSolution solve_qpm(const SpdcConfig& config, const MaterialDb& db = MaterialDb::builtin());

/// Phase-matching spectrum S(detuning) = sinc^2(dk * L / 2) with dk evaluated
/// from the full dispersion at (omega_s + detuning, omega_i - detuning).
/// span_zero_widths sets the half-span in units of the first sinc zero.
Spectrum spdc_spectrum(const SpdcConfig& config, const WavelengthPair& pair,
                       std::size_t grid_points = 4096, double span_zero_widths = 8.0,
                       const MaterialDb& db = MaterialDb::builtin());

/// Ideal sinc^2(alpha * detuning) spectrum; used for direct (measured-bandwidth)
/// simulation runs and as the analytic Fourier-pair reference.
Spectrum sinc2_spectrum(double alpha_s, std::size_t grid_points = 16384,
                        double span_zero_widths = 128.0);

/// alpha such that sinc^2(alpha*detuning) has the given FWHM expressed as a
/// wavelength bandwidth at the given center wavelength.
double sinc2_alpha_from_bandwidth(double center_wavelength_m, double fwhm_wavelength_m);

/// |mu(dt)| = |FT of the spectrum|, normalized to 1 at zero delay.
CorrelationFunction correlation_function(const Spectrum& spectrum);

/// l_coh = lambda^2 / d_lambda.
double coherence_length(double center_wavelength_m, double fwhm_bandwidth_m);

/// FWHM of the spectrum in detuning units (linear interpolation of the
/// half-max crossings around the peak).
double spectrum_fwhm_detuning(const Spectrum& spectrum);

/// Spectrum FWHM converted to a wavelength bandwidth at a center wavelength
/// (exact frequency-to-wavelength mapping of the two half-max crossings).
double spectrum_fwhm_wavelength(const Spectrum& spectrum, double center_wavelength_m);

}  // namespace nloct
