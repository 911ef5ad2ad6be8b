#include "nloct/imaging.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "nloct/errors.hpp"
#include "nloct/units.hpp"

namespace nloct {

namespace {

constexpr double kFootprintFwhms = 3.0;

double gaussian_sigma(const BeamProfile& beam) {
    if (!(beam.fwhm_m > 0.0)) {
        throw ValidationError("beam FWHM must be positive");
    }
    return beam.fwhm_m / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

// Integral of the normalized 1-D Gaussian over [a, b].
double gauss_cell(double a, double b, double center, double sigma) {
    const double inv = 1.0 / (sigma * std::numbers::sqrt2);
    return 0.5 * (std::erf((b - center) * inv) - std::erf((a - center) * inv));
}

void validate_mask(const ReflectanceMask& mask) {
    if (mask.width <= 0 || mask.height <= 0 || !(mask.pitch_m > 0.0)) {
        throw ValidationError("mask needs positive dimensions and pitch");
    }
    if (mask.reflectance.size() !=
        static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height)) {
        throw ValidationError("mask grid size mismatch");
    }
    for (double r : mask.reflectance) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw ValidationError("mask reflectance values must lie in [0, 1]");
        }
    }
}

}  // namespace

double effective_reflectance(const ReflectanceMask& mask, const BeamProfile& beam,
                             double cx_m, double cy_m) {
    validate_mask(mask);
    const double sigma = gaussian_sigma(beam);
    const double reach = kFootprintFwhms * beam.fwhm_m;
    if (cx_m + reach < 0.0 || cx_m - reach > mask.extent_x() || cy_m + reach < 0.0 ||
        cy_m - reach > mask.extent_y()) {
        throw RangeError("beam footprint lies entirely outside the mask");
    }

    const double p = mask.pitch_m;
    const int ix_lo = std::max(0, static_cast<int>(std::floor((cx_m - reach) / p)));
    const int ix_hi = std::min(mask.width - 1, static_cast<int>(std::floor((cx_m + reach) / p)));
    const int iy_lo = std::max(0, static_cast<int>(std::floor((cy_m - reach) / p)));
    const int iy_hi = std::min(mask.height - 1, static_cast<int>(std::floor((cy_m + reach) / p)));

    std::vector<double> wx(static_cast<std::size_t>(ix_hi - ix_lo + 1));
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
        wx[static_cast<std::size_t>(ix - ix_lo)] = gauss_cell(ix * p, (ix + 1) * p, cx_m, sigma);
    }
    double r_eff = 0.0;
    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        const double wy = gauss_cell(iy * p, (iy + 1) * p, cy_m, sigma);
        double row = 0.0;
        for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            row += wx[static_cast<std::size_t>(ix - ix_lo)] * std::sqrt(mask.at(ix, iy));
        }
        r_eff += wy * row;
    }
    return r_eff * r_eff;
}

double cover_loss_factor(const SampleStack& cover) {
    double factor = 1.0;
    double n_above = cover.ambient_index;
    for (const auto& layer : cover.layers) {
        const double n = layer_probe_index(layer, cover);
        const double r = fresnel_amplitude(n_above, n);
        factor *= (1.0 - r * r) * layer.amplitude_transmission * layer.amplitude_transmission;
        n_above = n;
    }
    const double r_exit = fresnel_amplitude(n_above, cover.ambient_index);
    factor *= 1.0 - r_exit * r_exit;
    return factor;
}

ReflectanceImage raster_scan(const ReflectanceMask& mask, const BeamProfile& beam,
                             const RasterOptions& options) {
    validate_mask(mask);
    if (!(options.step_m > 0.0)) {
        throw ValidationError("raster step must be positive");
    }
    if (!(options.reference_visibility > 0.0 && options.reference_visibility <= 1.0)) {
        throw ValidationError("reference visibility must be in (0, 1]");
    }

    ReflectanceImage image;
    image.width = std::max(1, static_cast<int>(std::floor(mask.extent_x() / options.step_m)));
    image.height = std::max(1, static_cast<int>(std::floor(mask.extent_y() / options.step_m)));
    image.step_m = options.step_m;
    image.pipeline = options.pipeline;
    image.base_seed = options.base_seed;
    image.pair = options.pair;
    image.beam_fwhm_m = beam.fwhm_m;
    image.mask_label = mask.label;
    image.cover_loss_factor = options.cover ? cover_loss_factor(*options.cover) : 1.0;
    const std::size_t n_px =
        static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
    image.reflectance.assign(n_px, std::numeric_limits<double>::quiet_NaN());
    image.sigma.assign(n_px, 0.0);

    const double denom = options.reference_visibility * image.cover_loss_factor;

    // Flat-envelope fallback keeps the per-pixel scans meaningful when no
    // correlation function is supplied (windows are a few periods wide).
    CorrelationFunction mu = options.mu;
    if (mu.delay_s.empty()) {
        const double period = 2.0 * std::numbers::pi /
                              fringe_wavenumber(options.pair.idler_m, options.convention);
        const double span = 2.0 * (64.0 * period) / kSpeedOfLight;
        mu.delay_s = {-span, 0.0, span};
        mu.magnitude = {1.0, 1.0, 1.0};
    }

    auto pixel_job = [&](std::size_t index) {
        const int ix = static_cast<int>(index) % image.width;
        const int iy = static_cast<int>(index) / image.width;
        const double cx = (ix + 0.5) * options.step_m;
        const double cy = (iy + 0.5) * options.step_m;
        try {
            const double r_region = std::sqrt(effective_reflectance(mask, beam, cx, cy));
            if (options.pipeline == ImagingPipeline::Fast) {
                image.reflectance[index] = r_region * r_region;
                return;
            }
            // Full route: one gated reflection, synthesized and re-fitted.
            EchoList echoes;
            echoes.reference_reflectivity = options.reference_visibility;
            Echo e;
            e.optical_depth_m = options.probe_depth_m;
            e.raw_visibility = r_region * image.cover_loss_factor;
            e.signed_amplitude = -e.raw_visibility;  // dense-side reflection
            e.visibility = options.reference_visibility * e.raw_visibility;
            echoes.echoes.push_back(e);

            const double period = 2.0 * std::numbers::pi /
                                  fringe_wavenumber(options.pair.idler_m, options.convention);
            ScanConfig scan;
            scan.z_start_m = options.probe_depth_m - 8.0 * period;
            scan.z_end_m = options.probe_depth_m + 8.0 * period;
            scan.coarse_step_m = period;
            scan.fine_step_m = options.pair.idler_m / 64.0;
            scan.mean_counts = options.mean_counts;
            scan.noise = options.noise;
            scan.fringe_convention = options.convention;
            scan.rng_seed = options.base_seed ^ static_cast<std::uint64_t>(index);

            const Interferogram trace = synthesize(echoes, mu, options.pair, scan);
            const FringeFit fit =
                fit_fringes(trace, options.probe_depth_m, options.pair.idler_m, 6.0 * period, &mu);
            const double r_est = fit.visibility / denom;
            image.reflectance[index] = r_est * r_est;
            image.sigma[index] = 2.0 * r_est * fit.sigma / denom;
        } catch (const std::exception&) {
            // leave NaN; a failed pixel must not abort the scan
        }
    };

    unsigned n_threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                             : std::thread::hardware_concurrency();
    n_threads = std::clamp(n_threads, 1u, 32u);
    if (n_threads == 1 || n_px < 16) {
        for (std::size_t i = 0; i < n_px; ++i) {
            pixel_job(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n_px; i = next.fetch_add(1)) {
                    pixel_job(i);
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    return image;
}

ReflectanceMask make_bar_target(double bar_width_m, double pitch_m, int n_bars, double gap_m,
                                double field_reflectance, double bar_reflectance,
                                double margin_m) {
    if (!(bar_width_m > 0.0) || !(pitch_m > 0.0) || n_bars < 1) {
        throw ValidationError("bar target needs positive bar width, pitch and count");
    }
    if (gap_m <= 0.0) {
        gap_m = bar_width_m;
    }
    if (margin_m <= 0.0) {
        margin_m = 2.0 * bar_width_m;
    }
    const double group = n_bars * bar_width_m + (n_bars - 1) * gap_m;
    const double extent = group + 2.0 * margin_m;
    ReflectanceMask mask;
    mask.width = static_cast<int>(std::ceil(extent / pitch_m));
    mask.height = mask.width;
    mask.pitch_m = pitch_m;
    mask.reflectance.assign(
        static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height),
        field_reflectance);
    for (int iy = 0; iy < mask.height; ++iy) {
        for (int ix = 0; ix < mask.width; ++ix) {
            const double x = (ix + 0.5) * pitch_m;
            for (int b = 0; b < n_bars; ++b) {
                const double lo = margin_m + b * (bar_width_m + gap_m);
                if (x >= lo && x < lo + bar_width_m) {
                    mask.reflectance[static_cast<std::size_t>(iy) * mask.width + ix] =
                        bar_reflectance;
                    break;
                }
            }
        }
    }
    mask.label = "bar_target";
    return mask;
}

}  // namespace nloct
