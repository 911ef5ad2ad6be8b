#include "doctest.h"
#include "nloct/errors.hpp"
#include "nloct/forward.hpp"
#include "nloct/units.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace nloct;

namespace {

// Correlation grid that is flat (|mu| = 1) across +-span_m of displacement.
CorrelationFunction flat_mu(double span_m = 2e-3) {
    CorrelationFunction mu;
    const double t = 2.0 * span_m / kSpeedOfLight;
    const int n = 401;
    for (int i = 0; i < n; ++i) {
        mu.delay_s.push_back(-t + 2.0 * t * i / (n - 1));
        mu.magnitude.push_back(1.0);
    }
    return mu;
}

EchoList single_echo(double visibility, double depth_m = 0.0, bool dense_side = false) {
    EchoList list;
    Echo e;
    e.optical_depth_m = depth_m;
    e.visibility = visibility;
    e.raw_visibility = visibility;
    e.signed_amplitude = dense_side ? -visibility : visibility;
    list.echoes.push_back(e);
    return list;
}

const WavelengthPair kPair{812.2e-9, 1543e-9};

// Scan commensurate with the fringe: samples land exactly on the extremes.
ScanConfig commensurate_scan(double periods = 8.0) {
    ScanConfig scan;
    const double period = 1543e-9 / 2.0;  // physical convention
    scan.z_start_m = -periods * period;
    scan.z_end_m = periods * period;
    scan.fine_step_m = period / 12.0;
    scan.coarse_step_m = 3e-6;
    return scan;
}

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("single-echo fringe visibility is exact with a flat envelope") {
    const auto trace = synthesize(single_echo(0.81), flat_mu(), kPair, commensurate_scan());
    CHECK(fringe_visibility(trace, 0.0) == doctest::Approx(0.81).epsilon(1e-6));
}

TEST_CASE("visibility equals |r| tau^2 for random reflection and loss") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> r_dist(0.05, 0.95);
    std::uniform_real_distribution<double> t_dist(0.2, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double r = r_dist(rng);
        const double tau = t_dist(rng);
        const double v = r * tau * tau;
        const auto trace = synthesize(single_echo(v), flat_mu(), kPair, commensurate_scan());
        CHECK(fringe_visibility(trace, 0.0) == doctest::Approx(v).epsilon(1e-6));
    }
}

TEST_CASE("empty echo list gives a flat baseline") {
    EchoList none;
    const auto trace = synthesize(none, flat_mu(), kPair, commensurate_scan());
    for (double v : trace.intensity) {
        CHECK(v == 1.0);
    }
}

TEST_CASE("time-averaged intensity equals the baseline") {
    const auto trace = synthesize(single_echo(0.6), flat_mu(), kPair, commensurate_scan(64.0));
    double sum = 0.0;
    for (double v : trace.intensity) {
        sum += v;
    }
    CHECK(sum / static_cast<double>(trace.intensity.size()) ==
          doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("fringe period matches the convention in an FFT of a fine scan") {
    for (auto convention : {FringeConvention::Physical, FringeConvention::Paper}) {
        ScanConfig scan;
        scan.z_start_m = -40e-6;
        scan.z_end_m = 40e-6;
        scan.fine_step_m = 1543e-9 / 64.0;
        scan.coarse_step_m = 3e-6;
        scan.fringe_convention = convention;
        const auto trace = synthesize(single_echo(0.5), flat_mu(), kPair, scan);

        const std::size_t n = trace.intensity.size();
        double mean = 0.0;
        for (double v : trace.intensity) {
            mean += v;
        }
        mean /= static_cast<double>(n);
        double best_mag = 0.0;
        std::size_t best_bin = 0;
        for (std::size_t k = 1; k < n / 2; ++k) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                acc += (trace.intensity[i] - mean) *
                       std::polar(1.0, -2.0 * std::numbers::pi *
                                           static_cast<double>(k * i) / static_cast<double>(n));
            }
            if (std::abs(acc) > best_mag) {
                best_mag = std::abs(acc);
                best_bin = k;
            }
        }
        const double span = trace.position_m.back() - trace.position_m.front() + trace.step();
        const double freq = static_cast<double>(best_bin) / span;  // cycles per meter
        const double expected =
            convention == FringeConvention::Physical ? 2.0 / 1543e-9 : 1.0 / 1543e-9;
        CHECK(std::abs(freq - expected) <= 1.0 / span);
    }
}

TEST_CASE("sinc^2 spectrum gives a triangular envelope of the right width") {
    const double alpha = sinc2_alpha_from_bandwidth(1543e-9, 29e-9);
    const auto mu = correlation_function(sinc2_spectrum(alpha));
    ScanConfig scan;
    scan.z_start_m = -80e-6;
    scan.z_end_m = 80e-6;
    scan.fine_step_m = 1543e-9 / 64.0;
    scan.coarse_step_m = 3e-6;
    const auto trace = synthesize(single_echo(0.8), mu, kPair, scan);

    // Envelope FWHM in displacement should be c * alpha (triangle FWHM is
    // half the 4 alpha footprint, mapped through dt = 2 dz / c).
    std::vector<double> upper;
    std::vector<double> z_upper;
    for (std::size_t i = 1; i + 1 < trace.intensity.size(); ++i) {
        if (trace.intensity[i] >= trace.intensity[i - 1] &&
            trace.intensity[i] >= trace.intensity[i + 1] && trace.intensity[i] > 1.0) {
            upper.push_back(trace.intensity[i] - 1.0);
            z_upper.push_back(trace.position_m[i]);
        }
    }
    REQUIRE(upper.size() > 20);
    const double peak = *std::max_element(upper.begin(), upper.end());
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i + 1 < upper.size(); ++i) {
        if (upper[i] < 0.5 * peak && upper[i + 1] >= 0.5 * peak) {
            left = z_upper[i];
        }
        if (upper[i] >= 0.5 * peak && upper[i + 1] < 0.5 * peak) {
            right = z_upper[i + 1];
        }
    }
    const double fwhm = right - left;
    CHECK(fwhm == doctest::Approx(kSpeedOfLight * alpha).epsilon(0.02));
}

TEST_CASE("echoes appear at their configured separations") {
    EchoList list;
    const double depth = 3.476 * 1080e-6;
    for (int i = 0; i < 3; ++i) {
        Echo e;
        e.optical_depth_m = depth * i;
        e.visibility = 0.4 / (1.0 + i);
        e.signed_amplitude = e.visibility;
        list.echoes.push_back(e);
    }
    const double alpha = sinc2_alpha_from_bandwidth(1543e-9, 29e-9);
    const auto mu = correlation_function(sinc2_spectrum(alpha));
    ScanConfig scan;
    scan.z_start_m = -0.2e-3;
    scan.z_end_m = 2.0 * depth + 0.2e-3;
    scan.fine_step_m = 1543e-9 / 20.0;
    scan.coarse_step_m = 3e-6;
    const auto trace = synthesize(list, mu, kPair, scan);

    for (int i = 0; i < 3; ++i) {
        const double target = depth * i;
        double best = -1.0;
        double best_z = 0.0;
        for (std::size_t s = 0; s < trace.position_m.size(); ++s) {
            if (std::abs(trace.position_m[s] - target) < 20e-6 && trace.intensity[s] > best) {
                best = trace.intensity[s];
                best_z = trace.position_m[s];
            }
        }
        CHECK(std::abs(best_z - target) <= scan.fine_step_m);
    }
}

TEST_CASE("poisson noise has unit variance-to-mean ratio and is reproducible") {
    EchoList none;
    ScanConfig scan = commensurate_scan(64.0);
    scan.noise = NoiseModel::Poisson;
    scan.mean_counts = 1e4;
    scan.rng_seed = 99;
    const auto a = synthesize(none, flat_mu(), kPair, scan);
    const auto b = synthesize(none, flat_mu(), kPair, scan);
    CHECK(a.intensity == b.intensity);

    scan.rng_seed = 100;
    const auto c = synthesize(none, flat_mu(), kPair, scan);
    CHECK(a.intensity != c.intensity);

    // Accumulate moments over several seeds to pass 1e4 samples.
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        scan.rng_seed = seed;
        const auto t = synthesize(none, flat_mu(), kPair, scan);
        for (double v : t.intensity) {
            sum += v;
            sum2 += v * v;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sum2 / static_cast<double>(count) - mean * mean;
    CHECK(var / mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("samples_per_point averaging shrinks the variance") {
    EchoList none;
    ScanConfig scan = commensurate_scan(64.0);
    scan.noise = NoiseModel::Poisson;
    scan.samples_per_point = 4;
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        scan.rng_seed = seed;
        const auto t = synthesize(none, flat_mu(), kPair, scan);
        for (double v : t.intensity) {
            sum += v;
            sum2 += v * v;
            ++count;
        }
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sum2 / static_cast<double>(count) - mean * mean;
    CHECK(var / mean == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("raw fringe contrast stays within 0.02 of truth under shot noise") {
    double worst = 0.0;
    double mean_dev = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ScanConfig scan = commensurate_scan();
        scan.noise = NoiseModel::Poisson;
        scan.mean_counts = 1e4;
        scan.rng_seed = seed;
        const auto trace = synthesize(single_echo(0.5), flat_mu(), kPair, scan);
        const double dev = fringe_visibility(trace, 0.0) - 0.5;
        worst = std::max(worst, std::abs(dev));
        mean_dev += dev;
    }
    CHECK(worst < 0.02);
    // The extreme-value estimator has a small positive bias at this noise.
    CHECK(std::abs(mean_dev / 100.0) < 0.01);
}

TEST_CASE("correlation grid must cover the scan or have decayed") {
    CorrelationFunction short_mu;
    short_mu.delay_s = {-1e-13, 0.0, 1e-13};
    short_mu.magnitude = {0.9, 1.0, 0.9};  // not decayed at the edge
    CHECK_THROWS_AS(synthesize(single_echo(0.5), short_mu, kPair, commensurate_scan(100.0)),
                    ValidationError);
    // A decayed grid of the same extent is fine: |mu| is zero-extended.
    short_mu.magnitude = {1e-4, 1.0, 1e-4};
    CHECK_NOTHROW(synthesize(single_echo(0.5), short_mu, kPair, commensurate_scan(100.0)));
}

TEST_CASE("scan validation") {
    ScanConfig scan = commensurate_scan();
    scan.z_end_m = scan.z_start_m - 1.0;
    CHECK_THROWS_AS(synthesize(single_echo(0.5), flat_mu(), kPair, scan), ValidationError);
    scan = commensurate_scan();
    scan.fine_step_m = 1543e-9;  // coarser than lambda_i / 20
    CHECK_THROWS_AS(synthesize(single_echo(0.5), flat_mu(), kPair, scan), ValidationError);
}

TEST_CASE("fringe window validation") {
    const auto trace = synthesize(single_echo(0.5), flat_mu(), kPair, commensurate_scan());
    CHECK_THROWS_AS(fringe_visibility(trace, 1.0), RangeError);
    CHECK_THROWS_AS(fringe_visibility(trace, 0.0, 0.5 * 1543e-9 / 2.0), ValidationError);
}

}  // TEST_SUITE
