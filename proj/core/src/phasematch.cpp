#include "nloct/phasematch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "nloct/errors.hpp"
#include "nloct/fft.hpp"
#include "nloct/units.hpp"

namespace nloct {

namespace {

constexpr double kSearchSignalMin = 540e-9;
constexpr double kSearchSignalMax = 1000e-9;
constexpr double kScanStep = 1e-9;

double sinc(double x) {
    if (std::abs(x) < 1e-8) {
        return 1.0 - x * x / 6.0;
    }
    return std::sin(x) / x;
}

// Collinear first-order QPM mismatch as a function of the signal frequency,
// with the pump frequency fixed and the idler tied by energy conservation.
class QpmMismatch {
public:
    QpmMismatch(const SpdcConfig& config, const MaterialDb& db)
        : db_(db), mat_(db.at(config.material_id)), config_(config) {
        omega_p_ = angular_frequency(config.pump_wavelength_m);
        grating_k_ = 2.0 * std::numbers::pi /
                     effective_poling_period(mat_, config.poling_period_m, config.temperature_k);
        k_pump_ = wavevector(config.pump_wavelength_m, mat_.pump_pol);
    }

    double grating_k() const { return grating_k_; }
    double pump_omega() const { return omega_p_; }

    // nullopt where the dispersion model does not cover signal or idler.
    std::optional<double> at_signal_wavelength(double signal_m) const {
        const double inv_idler = 1.0 / config_.pump_wavelength_m - 1.0 / signal_m;
        if (inv_idler <= 0.0) {
            return std::nullopt;
        }
        const double idler_m = 1.0 / inv_idler;
        try {
            return k_pump_ - wavevector(signal_m, mat_.signal_pol) -
                   wavevector(idler_m, mat_.idler_pol) - grating_k_;
        } catch (const RangeError&) {
            return std::nullopt;
        }
    }

    std::optional<double> at_detuning(const WavelengthPair& pair, double detuning) const {
        const double omega_s = angular_frequency(pair.signal_m) + detuning;
        const double omega_i = angular_frequency(pair.idler_m) - detuning;
        if (omega_s <= 0.0 || omega_i <= 0.0) {
            return std::nullopt;
        }
        try {
            return k_pump_ - wavevector(wavelength_of(omega_s), mat_.signal_pol) -
                   wavevector(wavelength_of(omega_i), mat_.idler_pol) - grating_k_;
        } catch (const RangeError&) {
            return std::nullopt;
        }
    }

private:
    double wavevector(double wavelength_m, Polarization pol) const {
        const double n =
            refractive_index(db_, config_.material_id, wavelength_m, config_.temperature_k, pol);
        return 2.0 * std::numbers::pi * n / wavelength_m;
    }

    const MaterialDb& db_;
    const MaterialRecord& mat_;
    SpdcConfig config_;
    double omega_p_ = 0.0;
    double grating_k_ = 0.0;
    double k_pump_ = 0.0;
};

void validate_config(const SpdcConfig& config) {
    if (!(config.pump_wavelength_m > 0.0) || !(config.poling_period_m > 0.0) ||
        !(config.crystal_length_m > 0.0) || !(config.temperature_k > 0.0)) {
        throw ValidationError("spdc config fields must be positive");
    }
}

}  // namespace

double CorrelationFunction::magnitude_at(double t) const {
    if (delay_s.size() < 2) {
        return 0.0;
    }
    const double t0 = delay_s.front();
    const double dt = delay_s[1] - delay_s[0];
    const double pos = (t - t0) / dt;
    if (pos < 0.0 || pos > static_cast<double>(delay_s.size() - 1)) {
        return 0.0;
    }
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= delay_s.size()) {
        return magnitude.back();
    }
    const double frac = pos - static_cast<double>(i);
    return magnitude[i] * (1.0 - frac) + magnitude[i + 1] * frac;
}

QpmSolution solve_qpm(const SpdcConfig& config, const MaterialDb& db) {
    validate_config(config);
    QpmMismatch mismatch(config, db);

    // Bracketing scan on a 1 nm grid, skipping stretches the dispersion model
    // does not cover (the idler sweeps far infrared at the short-signal edge).
    struct Sample {
        double lambda;
        double dk;
    };
    std::vector<Sample> valid;
    std::vector<std::pair<double, double>> brackets;
    std::optional<Sample> prev;
    for (double lam = kSearchSignalMin; lam <= kSearchSignalMax + 0.5 * kScanStep;
         lam += kScanStep) {
        const auto dk = mismatch.at_signal_wavelength(lam);
        if (!dk) {
            prev.reset();
            continue;
        }
        valid.push_back({lam, *dk});
        if (prev && std::signbit(prev->dk) != std::signbit(*dk)) {
            brackets.emplace_back(prev->lambda, lam);
        }
        prev = Sample{lam, *dk};
    }
    if (brackets.empty()) {
        const double lo = valid.empty() ? std::numeric_limits<double>::quiet_NaN() : valid.front().dk;
        const double hi = valid.empty() ? std::numeric_limits<double>::quiet_NaN() : valid.back().dk;
        std::ostringstream msg;
        msg << "no quasi-phase-matched signal in [540, 1000] nm for pump "
            << config.pump_wavelength_m / kNm << " nm, period " << config.poling_period_m / kUm
            << " um, T " << config.temperature_k << " K (dk edges " << lo << ", " << hi
            << " rad/m)";
        throw NoSolutionError(msg.str(), lo, hi);
    }

    // Deterministic tie-breaking: smallest signal wavelength.
    auto [lo, hi] = brackets.front();
    double f_lo = *mismatch.at_signal_wavelength(lo);
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-18; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const auto f_mid = mismatch.at_signal_wavelength(mid);
        if (!f_mid) {
            break;  // should not happen inside a valid bracket
        }
        if (std::signbit(f_lo) == std::signbit(*f_mid)) {
            lo = mid;
            f_lo = *f_mid;
        } else {
            hi = mid;
        }
    }

    QpmSolution sol;
    sol.pair.signal_m = 0.5 * (lo + hi);
    sol.pair.idler_m = 1.0 / (1.0 / config.pump_wavelength_m - 1.0 / sol.pair.signal_m);
    sol.residual_rad_per_m = std::abs(*mismatch.at_signal_wavelength(sol.pair.signal_m));
    sol.multiple_brackets = brackets.size() > 1;
    if (sol.residual_rad_per_m >= 1e-3 * mismatch.grating_k()) {
        throw NoSolutionError("qpm refinement did not converge", sol.residual_rad_per_m,
                              sol.residual_rad_per_m);
    }
    return sol;
}

Spectrum spdc_spectrum(const SpdcConfig& config, const WavelengthPair& pair,
                       std::size_t grid_points, double span_zero_widths, const MaterialDb& db) {
    validate_config(config);
    if (grid_points < 1024) {
        throw ValidationError("spdc_spectrum needs at least 1024 grid points");
    }
    QpmMismatch mismatch(config, db);
    const double half_l = 0.5 * config.crystal_length_m;

    const auto dk0 = mismatch.at_detuning(pair, 0.0);
    if (!dk0 || std::abs(*dk0) >= 1e-3 * mismatch.grating_k()) {
        throw ValidationError("pair does not phase-match the given configuration");
    }

    // First-zero scale from the group-delay mismatch; the grid span only needs
    // this to first order, the intensities use the full dispersion.
    const double probe = 1e-4 * mismatch.pump_omega();
    const auto dk_probe = mismatch.at_detuning(pair, probe);
    if (!dk_probe) {
        throw ValidationError("dispersion model does not cover the spectrum span");
    }
    const double slope = std::abs((*dk_probe - *dk0) / probe);
    if (slope <= 0.0) {
        throw ValidationError("degenerate group-delay mismatch; cannot size the spectrum grid");
    }
    const double first_zero = 2.0 * std::numbers::pi / (config.crystal_length_m * slope);
    const double span = span_zero_widths * first_zero;

    Spectrum s;
    s.detuning_rad_s.resize(grid_points);
    s.intensity.resize(grid_points);
    const double d_omega = 2.0 * span / static_cast<double>(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double omega = -span + d_omega * static_cast<double>(i);
        s.detuning_rad_s[i] = omega;
        const auto dk = mismatch.at_detuning(pair, omega);
        const double x = dk ? (*dk * half_l) : std::numbers::pi;  // zero outside model range
        const double amp = dk ? sinc(x) : 0.0;
        s.intensity[i] = amp * amp;
    }

    // The span must reach past the first zeros on both sides.
    const auto below = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (s.intensity[i] < 1e-3) {
                return true;
            }
        }
        return false;
    };
    if (!below(0, grid_points / 2) || !below(grid_points / 2, grid_points)) {
        std::ostringstream msg;
        msg << "spectrum grid too narrow to contain the first sinc zeros; span at least +/-"
            << first_zero << " rad/s";
        throw ValidationError(msg.str());
    }

    s.normalization = 0.0;
    for (double v : s.intensity) {
        s.normalization += v;
    }
    s.normalization *= d_omega;
    return s;
}

Spectrum sinc2_spectrum(double alpha_s, std::size_t grid_points, double span_zero_widths) {
    if (!(alpha_s > 0.0)) {
        throw ValidationError("sinc2 spectrum needs alpha > 0");
    }
    const double first_zero = std::numbers::pi / alpha_s;
    const double span = span_zero_widths * first_zero;
    Spectrum s;
    s.detuning_rad_s.resize(grid_points);
    s.intensity.resize(grid_points);
    const double d_omega = 2.0 * span / static_cast<double>(grid_points);
    s.normalization = 0.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double omega = -span + d_omega * static_cast<double>(i);
        const double amp = sinc(alpha_s * omega);
        s.detuning_rad_s[i] = omega;
        s.intensity[i] = amp * amp;
        s.normalization += amp * amp;
    }
    s.normalization *= d_omega;
    return s;
}

double sinc2_alpha_from_bandwidth(double center_wavelength_m, double fwhm_wavelength_m) {
    if (!(center_wavelength_m > 0.0) || !(fwhm_wavelength_m > 0.0)) {
        throw ValidationError("bandwidth conversion needs positive wavelengths");
    }
    const double fwhm_omega = 2.0 * std::numbers::pi * kSpeedOfLight * fwhm_wavelength_m /
                              (center_wavelength_m * center_wavelength_m);
    return 2.0 * kSinc2HalfMaxArg / fwhm_omega;
}

CorrelationFunction correlation_function(const Spectrum& spectrum) {
    const std::size_t n = spectrum.detuning_rad_s.size();
    if (n < 4 || spectrum.intensity.size() != n) {
        throw ValidationError("spectrum grid too small");
    }
    const double d_omega = spectrum.detuning_rad_s[1] - spectrum.detuning_rad_s[0];
    if (!(d_omega > 0.0)) {
        throw ValidationError("spectrum grid must be strictly increasing");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(spectrum.detuning_rad_s[i] - spectrum.detuning_rad_s[i - 1] - d_omega) >
            1e-6 * d_omega) {
            throw ValidationError("spectrum grid must be uniform");
        }
    }
    for (double v : spectrum.intensity) {
        if (v < 0.0) {
            throw ValidationError("spectrum intensity must be non-negative");
        }
    }
    // The grid must reach at least +-5 FWHM so the transform captures the
    // line shape, not a truncation artifact.
    const double fwhm = spectrum_fwhm_detuning(spectrum);
    if (spectrum.detuning_rad_s.front() > -5.0 * fwhm ||
        spectrum.detuning_rad_s.back() < 5.0 * fwhm) {
        throw ValidationError("spectrum grid must span at least +-5 FWHM");
    }

    std::vector<std::complex<double>> in(n);
    for (std::size_t i = 0; i < n; ++i) {
        in[i] = spectrum.intensity[i];
    }
    const auto out = detail::fft(in);

    // |FT{S}| is insensitive to the grid's start offset, so the DFT magnitudes
    // are the continuous-transform magnitudes at delays 2 pi k / (N d_omega).
    const double dt = 2.0 * std::numbers::pi / (static_cast<double>(n) * d_omega);
    const double norm = std::abs(out[0]);
    if (!(norm > 0.0)) {
        throw ValidationError("spectrum integrates to zero");
    }

    // Keep a symmetric window around zero delay.
    const std::size_t half = n / 2 - 1;
    CorrelationFunction mu;
    mu.delay_s.resize(2 * half + 1);
    mu.magnitude.resize(2 * half + 1);
    for (std::size_t j = 0; j < mu.delay_s.size(); ++j) {
        const auto k = static_cast<long long>(j) - static_cast<long long>(half);
        mu.delay_s[j] = dt * static_cast<double>(k);
        const std::size_t idx = (k >= 0) ? static_cast<std::size_t>(k)
                                         : n - static_cast<std::size_t>(-k);
        mu.magnitude[j] = std::min(1.0, std::abs(out[idx]) / norm);
    }
    return mu;
}

double coherence_length(double center_wavelength_m, double fwhm_bandwidth_m) {
    if (!(center_wavelength_m > 0.0) || !(fwhm_bandwidth_m > 0.0)) {
        throw ValidationError("coherence_length needs positive inputs");
    }
    return center_wavelength_m * center_wavelength_m / fwhm_bandwidth_m;
}

double spectrum_fwhm_detuning(const Spectrum& spectrum) {
    const auto& w = spectrum.detuning_rad_s;
    const auto& s = spectrum.intensity;
    const auto peak_it = std::max_element(s.begin(), s.end());
    const double half = 0.5 * *peak_it;
    const auto peak = static_cast<std::size_t>(std::distance(s.begin(), peak_it));

    auto crossing = [&](std::size_t from, int step) {
        std::size_t i = from;
        while (true) {
            const std::size_t next = i + static_cast<std::size_t>(step);
            if (next >= s.size()) {
                throw ValidationError("spectrum half-max crossing outside the grid");
            }
            if (s[next] < half) {
                const double frac = (s[i] - half) / (s[i] - s[next]);
                return w[i] + frac * (w[next] - w[i]);
            }
            i = next;
        }
    };
    const double hi = crossing(peak, +1);
    const double lo = crossing(peak, -1);
    return hi - lo;
}

double spectrum_fwhm_wavelength(const Spectrum& spectrum, double center_wavelength_m) {
    const double fwhm = spectrum_fwhm_detuning(spectrum);
    const double omega0 = angular_frequency(center_wavelength_m);
    // Map the two half-max detunings through the exact frequency-wavelength
    // relation; the detuning sign convention cancels in the width.
    const double lam_lo = wavelength_of(omega0 + 0.5 * fwhm);
    const double lam_hi = wavelength_of(omega0 - 0.5 * fwhm);
    return lam_hi - lam_lo;
}

}  // namespace nloct
