#include "doctest.h"
#include "nloct/errors.hpp"
#include "nloct/imaging.hpp"
#include "nloct/units.hpp"

#include <cmath>
#include <numbers>

using namespace nloct;

namespace {

ReflectanceMask uniform_mask(double reflectance, int n = 200, double pitch = 2e-6) {
    ReflectanceMask mask;
    mask.width = n;
    mask.height = n;
    mask.pitch_m = pitch;
    mask.reflectance.assign(static_cast<std::size_t>(n) * n, reflectance);
    mask.label = "uniform";
    return mask;
}

// Brute-force quadrature of the amplitude-weighted average at fine resolution;
// the oracle the implementation is verified against.
double quadrature_reflectance(const ReflectanceMask& mask, const BeamProfile& beam,
                              double cx, double cy, double resolution = 0.5e-6) {
    const double sigma = beam.fwhm_m / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double reach = 5.0 * beam.fwhm_m;
    double acc = 0.0;
    double norm = 0.0;
    for (double y = cy - reach; y <= cy + reach; y += resolution) {
        for (double x = cx - reach; x <= cx + reach; x += resolution) {
            const double w =
                std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * sigma * sigma));
            norm += w;
            if (x >= 0.0 && x < mask.extent_x() && y >= 0.0 && y < mask.extent_y()) {
                const int ix = static_cast<int>(x / mask.pitch_m);
                const int iy = static_cast<int>(y / mask.pitch_m);
                acc += w * std::sqrt(mask.at(ix, iy));
            }
        }
    }
    const double r = acc / norm;
    return r * r;
}

double image_contrast(const ReflectanceImage& image) {
    // Contrast along the central row: max minus min of the estimates.
    const int iy = image.height / 2;
    double lo = 1.0, hi = 0.0;
    for (int ix = 0; ix < image.width; ++ix) {
        const double v = image.at(ix, iy);
        if (std::isnan(v)) {
            continue;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

}  // namespace

TEST_SUITE("imaging") {

TEST_CASE("uniform masks reflect uniformly for any beam") {
    // Mask large enough that even the widest beam's tails stay inside.
    const auto chrome = uniform_mask(0.63, 400);
    const auto dark = uniform_mask(0.0, 400);
    for (double fwhm : {25e-6, 50e-6, 100e-6}) {
        BeamProfile beam{fwhm};
        CHECK(effective_reflectance(chrome, beam, 400e-6, 400e-6) ==
              doctest::Approx(0.63).epsilon(1e-9));
        CHECK(effective_reflectance(dark, beam, 400e-6, 400e-6) == doctest::Approx(0.0));
    }
}

TEST_CASE("stripe reflectance matches the quadrature oracle") {
    // 50 um beam centered on a 60 um dark stripe between chrome fields.
    const auto mask = make_bar_target(60e-6, 1e-6);
    BeamProfile beam{50e-6};
    const double cx = 2.0 * 60e-6 + 0.5 * 60e-6;  // center of the first bar
    const double cy = 0.5 * mask.extent_y();
    const double got = effective_reflectance(mask, beam, cx, cy);
    const double oracle = quadrature_reflectance(mask, beam, cx, cy);
    CHECK(got == doctest::Approx(oracle).epsilon(2e-3));
    // Strictly between the stripe and field values.
    CHECK(got > 0.0);
    CHECK(got < 0.63);
}

TEST_CASE("footprint fully off the mask is a range error") {
    const auto mask = uniform_mask(0.5, 50, 2e-6);
    BeamProfile beam{25e-6};
    CHECK_THROWS_AS(effective_reflectance(mask, beam, -1e-3, 50e-6), RangeError);
    CHECK_NOTHROW(effective_reflectance(mask, beam, -60e-6, 50e-6));  // clipped but touching
}

TEST_CASE("fast and full pipelines agree pixel by pixel") {
    const auto mask = make_bar_target(88e-6, 4e-6);
    BeamProfile beam{50e-6};
    RasterOptions options;
    options.step_m = mask.extent_x() / 16.0;
    options.pipeline = ImagingPipeline::Fast;
    const auto fast = raster_scan(mask, beam, options);
    options.pipeline = ImagingPipeline::Full;
    options.reference_visibility = 0.81;
    const auto full = raster_scan(mask, beam, options);
    REQUIRE(fast.width == full.width);
    REQUIRE(fast.height == full.height);
    for (std::size_t i = 0; i < fast.reflectance.size(); ++i) {
        CHECK(std::abs(fast.reflectance[i] - full.reflectance[i]) < 1e-3);
    }
}

TEST_CASE("wider beams never increase the stripe contrast") {
    const auto mask = make_bar_target(88e-6, 4e-6);
    double previous = 1.0;
    for (double fwhm : {25e-6, 50e-6, 100e-6}) {
        RasterOptions options;
        options.step_m = 8e-6;
        const auto image = raster_scan(mask, BeamProfile{fwhm}, options);
        const double contrast = image_contrast(image);
        CHECK(contrast <= previous + 1e-9);
        previous = contrast;
    }
}

TEST_CASE("88 um stripes are resolved, 60 um stripes lose contrast") {
    BeamProfile beam{50e-6};
    RasterOptions options;
    options.step_m = 4e-6;
    const auto wide = raster_scan(make_bar_target(88e-6, 4e-6), beam, options);
    const auto narrow = raster_scan(make_bar_target(60e-6, 4e-6), beam, options);
    const double c_wide = image_contrast(wide);
    const double c_narrow = image_contrast(narrow);
    CHECK(c_wide > 0.5 * 0.63);
    CHECK(c_narrow < c_wide);
}

TEST_CASE("an ideal cover leaves the image unchanged") {
    const auto mask = make_bar_target(88e-6, 4e-6);
    BeamProfile beam{50e-6};
    RasterOptions options;
    options.step_m = 16e-6;
    const auto bare = raster_scan(mask, beam, options);

    SampleStack ideal;
    ideal.layers.push_back({1080e-6, 1.0, 1.0, 1.0, "ideal_cover"});
    options.cover = ideal;
    const auto covered = raster_scan(mask, beam, options);
    for (std::size_t i = 0; i < bare.reflectance.size(); ++i) {
        CHECK(std::abs(bare.reflectance[i] - covered.reflectance[i]) < 1e-9);
    }
}

TEST_CASE("a lossy cover is corrected out of the recovered reflectance") {
    const auto mask = make_bar_target(88e-6, 4e-6);
    BeamProfile beam{50e-6};
    RasterOptions options;
    options.step_m = 16e-6;
    options.pipeline = ImagingPipeline::Full;
    options.reference_visibility = 0.81;
    const auto bare = raster_scan(mask, beam, options);

    SampleStack lossy;
    lossy.layers.push_back({1080e-6, 1.0, 1.0, 0.9, "lossy_cover"});
    options.cover = lossy;
    const auto covered = raster_scan(mask, beam, options);
    CHECK(covered.cover_loss_factor == doctest::Approx(0.81).epsilon(1e-12));
    for (std::size_t i = 0; i < bare.reflectance.size(); ++i) {
        CHECK(std::abs(bare.reflectance[i] - covered.reflectance[i]) < 1e-6);
    }
}

TEST_CASE("identical seeds give bit-identical noisy images") {
    const auto mask = make_bar_target(88e-6, 8e-6);
    BeamProfile beam{50e-6};
    RasterOptions options;
    options.pipeline = ImagingPipeline::Full;
    options.step_m = 24e-6;
    options.noise = NoiseModel::Poisson;
    options.reference_visibility = 0.81;
    options.base_seed = 4242;
    const auto a = raster_scan(mask, beam, options);
    const auto b = raster_scan(mask, beam, options);
    CHECK(a.reflectance == b.reflectance);
    options.base_seed = 4243;
    const auto c = raster_scan(mask, beam, options);
    CHECK(a.reflectance != c.reflectance);
}

TEST_CASE("bar target geometry") {
    const auto mask = make_bar_target(60e-6, 2e-6);
    // Margin 120 um, bars of 60 um separated by 60 um gaps.
    const int margin_px = static_cast<int>(120e-6 / 2e-6);
    const int bar_px = static_cast<int>(60e-6 / 2e-6);
    CHECK(mask.at(margin_px / 2, mask.height / 2) == doctest::Approx(0.63));
    CHECK(mask.at(margin_px + bar_px / 2, mask.height / 2) == doctest::Approx(0.0));
    CHECK(mask.at(margin_px + bar_px + bar_px / 2, mask.height / 2) == doctest::Approx(0.63));
    CHECK_THROWS_AS(make_bar_target(-1e-6, 1e-6), ValidationError);
}

}  // TEST_SUITE
