#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nloct/forward.hpp"
#include "nloct/inverse.hpp"

namespace nloct {

/// Lateral reflectance map; pixel (ix, iy) covers
/// [ix, ix+1) x [iy, iy+1) times pitch, x to the right, y down.
struct ReflectanceMask {
    int width = 0;
    int height = 0;
    double pitch_m = 0.0;
    std::vector<double> reflectance;  // row-major, values in [0, 1]
    std::string label;

    double at(int ix, int iy) const { return reflectance[static_cast<std::size_t>(iy) * width + ix]; }
    double extent_x() const { return width * pitch_m; }
    double extent_y() const { return height * pitch_m; }
};

struct BeamProfile {
    double fwhm_m = 50e-6;  // Gaussian intensity FWHM
};

enum class ImagingPipeline { Fast, Full };

struct RasterOptions {
    ImagingPipeline pipeline = ImagingPipeline::Fast;
    double step_m = 10e-6;
    std::optional<SampleStack> cover;  // loss-only covering stack
    double reference_visibility = 1.0;
    std::uint64_t base_seed = 20200617;
    int threads = 0;  // 0: hardware concurrency

    // Full-pipeline machinery (per-pixel synthesize + fringe fit).
    WavelengthPair pair{812.2e-9, 1543e-9};
    CorrelationFunction mu;        // may be empty: a flat envelope is assumed
    double mean_counts = 1e4;
    NoiseModel noise = NoiseModel::None;
    FringeConvention convention = FringeConvention::Physical;
    double probe_depth_m = 0.0;    // mask position in mirror displacement
};

struct ReflectanceImage {
    int width = 0;
    int height = 0;
    double step_m = 0.0;
    std::vector<double> reflectance;  // row-major; NaN marks a failed pixel
    std::vector<double> sigma;
    ImagingPipeline pipeline = ImagingPipeline::Fast;
    double cover_loss_factor = 1.0;
    std::uint64_t base_seed = 0;
    WavelengthPair pair;
    double beam_fwhm_m = 0.0;
    std::string mask_label;

    double at(int ix, int iy) const { return reflectance[static_cast<std::size_t>(iy) * width + ix]; }
};

/// Amplitude-weighted reflectance seen by a Gaussian probe centered at
/// (cx, cy): r_eff = sum w(x, y) sqrt(R(x, y)) with normalized Gaussian
/// weights (the coherent mode averages amplitude, not intensity); returns
/// r_eff^2. Pixels are integrated exactly (erf differences); area outside the
/// mask reflects nothing. Throws RangeError if the +-3 FWHM footprint misses
/// the mask entirely.
double effective_reflectance(const ReflectanceMask& mask, const BeamProfile& beam,
                             double cx_m, double cy_m);

/// Double-pass amplitude loss of a covering stack: product of (1 - r^2) over
/// its interfaces and tau^2 over its layers. The cover's own reflections are
/// assumed gated out of the imaging window.
double cover_loss_factor(const SampleStack& cover);

/// Raster the beam over the mask at the given step. The fast pipeline applies
/// the visibility algebra directly; the full pipeline synthesizes a fringe
/// scan per pixel (seed = base_seed xor pixel index) and re-estimates the
/// reflectance through the fringe fit. Pixels run independently in parallel;
/// per-pixel failures become NaN without aborting the scan.
ReflectanceImage raster_scan(const ReflectanceMask& mask, const BeamProfile& beam,
                             const RasterOptions& options);

/// USAF-style three-bar test mask: low-reflectance vertical bars in a
/// high-reflectance field (negative target).
ReflectanceMask make_bar_target(double bar_width_m, double pitch_m, int n_bars = 3,
                                double gap_m = 0.0,  // 0: equal to bar width
                                double field_reflectance = 0.63, double bar_reflectance = 0.0,
                                double margin_m = 0.0);  // 0: 2x bar width

}  // namespace nloct
