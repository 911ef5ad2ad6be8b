#include "doctest.h"
#include "nloct/errors.hpp"
#include "nloct/inverse.hpp"
#include "nloct/units.hpp"

#include <cmath>
#include <random>

using namespace nloct;

namespace {

CorrelationFunction flat_mu(double span_m = 2e-3) {
    CorrelationFunction mu;
    const double t = 2.0 * span_m / kSpeedOfLight;
    for (int i = 0; i < 401; ++i) {
        mu.delay_s.push_back(-t + 2.0 * t * i / 400.0);
        mu.magnitude.push_back(1.0);
    }
    return mu;
}

EchoList single_echo(double visibility, double depth_m = 0.0) {
    EchoList list;
    Echo e;
    e.optical_depth_m = depth_m;
    e.visibility = visibility;
    e.raw_visibility = visibility;
    e.signed_amplitude = visibility;
    list.echoes.push_back(e);
    return list;
}

const WavelengthPair kPair{812.2e-9, 1543e-9};

ScanConfig fine_scan(double lo, double hi, double step = 1543e-9 / 64.0) {
    ScanConfig scan;
    scan.z_start_m = lo;
    scan.z_end_m = hi;
    scan.fine_step_m = step;
    scan.coarse_step_m = 3e-6;
    return scan;
}

CorrelationFunction table_row1_mu() {
    return correlation_function(sinc2_spectrum(sinc2_alpha_from_bandwidth(1543e-9, 29e-9)));
}

}  // namespace

TEST_SUITE("inverse") {

TEST_CASE("flat traces produce an empty report") {
    EchoList none;
    auto scan = fine_scan(-30e-6, 30e-6);
    const auto quiet = synthesize(none, flat_mu(), kPair, scan);
    CHECK(detect_envelopes(quiet).peaks.empty());

    scan.noise = NoiseModel::Poisson;
    const auto noisy = synthesize(none, flat_mu(), kPair, scan);
    CHECK(detect_envelopes(noisy).peaks.empty());
}

TEST_CASE("noiseless fringe fit recovers the visibility to 1e-6 (flat envelope)") {
    const auto trace = synthesize(single_echo(0.33), flat_mu(), kPair, fine_scan(-30e-6, 30e-6));
    const auto fit = fit_fringes(trace, 0.0, kPair.idler_m);
    CHECK(fit.visibility == doctest::Approx(0.33).epsilon(1e-6));
    CHECK_FALSE(fit.degenerate);
}

TEST_CASE("noiseless fit under the real envelope stays accurate to a few 1e-4") {
    const auto mu = table_row1_mu();
    const auto trace = synthesize(single_echo(0.4482), mu, kPair, fine_scan(-60e-6, 60e-6));
    // Fitting against the known source model removes the envelope-shape bias.
    const auto with_model = fit_fringes(trace, 0.0, kPair.idler_m, 0.0, &mu);
    CHECK(std::abs(with_model.visibility - 0.4482) < 2e-4);
    // The measured-envelope fallback carries a small apex-smoothing bias but
    // must stay within about a percent.
    const auto data_driven = fit_fringes(trace, 0.0, kPair.idler_m);
    CHECK(std::abs(data_driven.visibility - 0.4482) < 1.5e-2 * 0.4482);
}

TEST_CASE("visibility estimate is invariant under intensity rescaling") {
    const auto mu = table_row1_mu();
    auto trace = synthesize(single_echo(0.4482), mu, kPair, fine_scan(-60e-6, 60e-6));
    const auto fit1 = fit_fringes(trace, 0.0, kPair.idler_m, 0.0, &mu);
    for (auto& v : trace.intensity) {
        v *= 7.3;
    }
    const auto fit2 = fit_fringes(trace, 0.0, kPair.idler_m, 0.0, &mu);
    CHECK(fit1.visibility == doctest::Approx(fit2.visibility).epsilon(1e-12));
}

TEST_CASE("noisy fit recovers V = 0.20 within 0.015 across seeds") {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto scan = fine_scan(-30e-6, 30e-6);
        scan.noise = NoiseModel::Poisson;
        scan.mean_counts = 1e4;
        scan.rng_seed = seed;
        const auto trace = synthesize(single_echo(0.20), flat_mu(), kPair, scan);
        const auto fit = fit_fringes(trace, 0.0, kPair.idler_m);
        worst = std::max(worst, std::abs(fit.visibility - 0.20));
        CHECK(fit.sigma > 0.0);
    }
    CHECK(worst < 0.015);
}

TEST_CASE("pure DC trace is degenerate with zero visibility") {
    EchoList none;
    const auto trace = synthesize(none, flat_mu(), kPair, fine_scan(-30e-6, 30e-6));
    const auto fit = fit_fringes(trace, 0.0, kPair.idler_m);
    CHECK(fit.degenerate);
    CHECK(fit.visibility == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("detected peak position bias stays below a quarter step") {
    const auto mu = table_row1_mu();
    // Put the apex off the sample grid deliberately.
    const double depth = 13.37e-6;
    const auto trace =
        synthesize(single_echo(0.5, depth), mu, kPair, fine_scan(depth - 50e-6, depth + 50e-6));
    const auto report = detect_envelopes(trace);
    REQUIRE(report.peaks.size() == 1);
    CHECK(std::abs(report.peaks[0].position_m - depth) < trace.step() / 4.0);
    CHECK_FALSE(report.coarse_mode);
}

TEST_CASE("coarse traces fall back to envelope-only detection") {
    const auto mu = table_row1_mu();
    ScanConfig scan;
    scan.z_start_m = -0.4e-3;
    scan.z_end_m = 0.4e-3;
    scan.coarse_step_m = 3e-6;
    scan.fine_step_m = 1543e-9 / 64.0;
    const auto trace = synthesize(single_echo(0.45), mu, kPair, scan, ScanResolution::Coarse);
    const auto report = detect_envelopes(trace);
    CHECK(report.coarse_mode);
    REQUIRE(report.peaks.size() == 1);
    CHECK(std::abs(report.peaks[0].position_m) < 2.0 * scan.coarse_step_m);
}

TEST_CASE("echo classification applies the product rule") {
    DetectOptions options;
    options.reference_visibility = 1.0;

    LayerReport report;
    const double r = 0.553;
    Peak front{0.0, 1e-8, r, 1e-4, PeakClass::Surface};
    Peak back{3.754e-3, 1e-8, r * (1 - r * r), 1e-4, PeakClass::Surface};
    Peak echo{7.508e-3, 1e-8, back.visibility * r * r, 1e-4, PeakClass::Surface};
    report.peaks = {front, back, echo};
    classify_echoes(report, options, 1e-7);
    CHECK(report.peaks[0].classification == PeakClass::Surface);
    CHECK(report.peaks[1].classification == PeakClass::Surface);
    CHECK(report.peaks[2].classification == PeakClass::Echo);

    // A peak at the echo position with the wrong visibility is Unknown.
    report.peaks[2].visibility *= 3.0;
    classify_echoes(report, options, 1e-7);
    CHECK(report.peaks[2].classification == PeakClass::Unknown);

    // Without a reference visibility the product rule cannot be confirmed.
    report.peaks[2].visibility /= 3.0;
    DetectOptions no_ref;
    classify_echoes(report, no_ref, 1e-7);
    CHECK(report.peaks[2].classification == PeakClass::Unknown);
}

TEST_CASE("single-window estimate reproduces the tabulated values") {
    LayerReport report;
    const double r = (3.478 - 1.0) / (3.478 + 1.0);
    const double v_ref = 0.81;
    Peak front{0.0, 1e-8, v_ref * r, 0.0, PeakClass::Surface};
    Peak back{3.478 * 1080e-6, 1e-8, v_ref * r * (1 - r * r), 0.0, PeakClass::Surface};
    report.peaks = {front, back};

    EstimateOptions options;
    options.geometry = Geometry::SingleWindow;
    options.reference_visibility = {v_ref, 0.0};
    const auto est = estimate_material(report, options);
    CHECK(est.reflectance.value == doctest::Approx(r * r).epsilon(1e-9));
    CHECK(est.refractive_index.value == doctest::Approx(3.478).epsilon(1e-9));
    CHECK(est.thickness_m.value == doctest::Approx(1080e-6).epsilon(1e-9));
    CHECK(std::abs(est.eq_consistency_residual) < 1e-12);

    // First-order sigma propagation from the reference uncertainty.
    options.reference_visibility = {v_ref, 0.01};
    const auto with_sigma = estimate_material(report, options);
    const double rel = 0.01 / v_ref;
    CHECK(with_sigma.reflectance.sigma == doctest::Approx(2.0 * r * r * rel).epsilon(1e-6));
    CHECK(with_sigma.refractive_index.sigma ==
          doctest::Approx(2.0 / std::pow(1.0 - r, 2) * r * rel).epsilon(1e-6));
}

TEST_CASE("geometry mismatches name the missing peak") {
    LayerReport report;
    report.peaks.push_back({0.0, 1e-8, 0.4, 1e-3, PeakClass::Surface});
    EstimateOptions options;
    options.geometry = Geometry::SingleWindow;
    options.reference_visibility = {0.81, 0.0};
    try {
        estimate_material(report, options);
        FAIL("expected GeometryError");
    } catch (const GeometryError& e) {
        CHECK(std::string(e.what()).find("back surface") != std::string::npos);
    }

    options.geometry = Geometry::CompoundWaveplate;
    options.plate1_thickness_m = {934e-6, 9e-6};
    options.plate2_thickness_m = {953e-6, 9e-6};
    report.peaks.push_back({1.44e-3, 1e-8, 0.2, 1e-3, PeakClass::Surface});
    report.peaks.push_back({1.56e-3, 1e-8, 0.2, 1e-3, PeakClass::Surface});
    try {
        estimate_material(report, options);
        FAIL("expected GeometryError");
    } catch (const GeometryError& e) {
        CHECK(std::string(e.what()).find("back surface") != std::string::npos);
    }
}

TEST_CASE("reflectance at the unit boundary is rejected") {
    LayerReport report;
    report.peaks.push_back({0.0, 1e-8, 0.81, 0.0, PeakClass::Surface});
    report.peaks.push_back({1e-3, 1e-8, 0.3, 0.0, PeakClass::Surface});
    EstimateOptions options;
    options.reference_visibility = {0.81, 0.0};  // V1 == V_ref -> R = 1
    CHECK_THROWS_AS(estimate_material(report, options), ValidationError);
}

TEST_CASE("waveplate estimate recovers indices and air gap") {
    LayerReport report;
    report.peaks.push_back({0.0, 0.5e-6, 0.21, 1e-3, PeakClass::Surface});
    report.peaks.push_back({1.440228e-3, 0.5e-6, 0.20, 1e-3, PeakClass::Surface});
    report.peaks.push_back({1.563228e-3, 0.5e-6, 0.20, 1e-3, PeakClass::Surface});
    report.peaks.push_back({3.052767e-3, 0.5e-6, 0.19, 1e-3, PeakClass::Surface});

    EstimateOptions options;
    options.geometry = Geometry::CompoundWaveplate;
    options.reference_visibility = {0.81, 0.01};
    options.plate1_thickness_m = {934e-6, 9e-6};
    options.plate2_thickness_m = {953e-6, 9e-6};
    const auto est = estimate_material(report, options);
    REQUIRE(est.birefringence.has_value());
    CHECK(est.birefringence->first.value == doctest::Approx(1.542).epsilon(1e-6));
    CHECK(est.birefringence->second.value == doctest::Approx(1.563).epsilon(1e-6));
    CHECK(est.thickness_m.value == doctest::Approx(123e-6).epsilon(1e-9));
    // The thickness uncertainty of the plates dominates the index sigma.
    CHECK(est.birefringence->first.sigma ==
          doctest::Approx(1.542 * 9.0 / 934.0).epsilon(0.02));
    REQUIRE(est.peak_spacings_m.size() == 3);
    CHECK(est.peak_spacings_m[0] == doctest::Approx(1.440228e-3));
    CHECK(est.peak_spacings_m[1] == doctest::Approx(0.123e-3));
    CHECK(est.peak_spacings_m[2] == doctest::Approx(1.489539e-3));
}

}  // TEST_SUITE
