#include <benchmark/benchmark.h>

#include "nloct/imaging.hpp"
#include "nloct/pipeline.hpp"
#include "nloct/units.hpp"

namespace {

using namespace nloct;

const WavelengthPair kPair{812.2e-9, 1543e-9};

CorrelationFunction shared_mu() {
    static const CorrelationFunction mu = correlation_function(
        sinc2_spectrum(sinc2_alpha_from_bandwidth(1543e-9, 29e-9)));
    return mu;
}

EchoList silicon_echoes() {
    SampleStack stack;
    stack.reference_reflectivity = 0.81;
    stack.layers.push_back({1080e-6, 3.478, 3.478, 1.0, "silicon"});
    return visibility_chain(stack, 2);
}

void BM_solve_qpm(benchmark::State& state) {
    SpdcConfig config;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_qpm(config));
    }
}
BENCHMARK(BM_solve_qpm);

void BM_spdc_spectrum(benchmark::State& state) {
    SpdcConfig config;
    const auto sol = solve_qpm(config);
    for (auto _ : state) {
        benchmark::DoNotOptimize(spdc_spectrum(config, sol.pair));
    }
}
BENCHMARK(BM_spdc_spectrum);

void BM_correlation_function(benchmark::State& state) {
    const auto spectrum = sinc2_spectrum(sinc2_alpha_from_bandwidth(1543e-9, 29e-9));
    for (auto _ : state) {
        benchmark::DoNotOptimize(correlation_function(spectrum));
    }
}
BENCHMARK(BM_correlation_function);

void BM_visibility_chain(benchmark::State& state) {
    SampleStack wp;
    wp.reference_reflectivity = 0.81;
    wp.layers.push_back({934e-6, 1.542, 1.563, 1.0, "p1", true});
    wp.layers.push_back({123e-6, 1.0, 1.0, 1.0, "gap", true});
    wp.layers.push_back({953e-6, 1.542, 1.563, 1.0, "p2", false});
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(visibility_chain(wp, order));
    }
}
BENCHMARK(BM_visibility_chain)->Arg(1)->Arg(2)->Arg(3);

void BM_synthesize_fine(benchmark::State& state) {
    const auto echoes = silicon_echoes();
    const auto mu = shared_mu();
    ScanConfig scan;
    scan.z_start_m = -50e-6;
    scan.z_end_m = 50e-6;
    scan.coarse_step_m = 3e-6;
    for (auto _ : state) {
        benchmark::DoNotOptimize(synthesize(echoes, mu, kPair, scan));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<long>(100e-6 / (1543e-9 / 64.0)));
}
BENCHMARK(BM_synthesize_fine);

void BM_demodulate_envelope(benchmark::State& state) {
    const auto echoes = silicon_echoes();
    const auto mu = shared_mu();
    ScanConfig scan;
    scan.z_start_m = -50e-6;
    scan.z_end_m = 50e-6;
    scan.coarse_step_m = 3e-6;
    const auto trace = synthesize(echoes, mu, kPair, scan);
    for (auto _ : state) {
        benchmark::DoNotOptimize(demodulate_envelope(trace));
    }
}
BENCHMARK(BM_demodulate_envelope);

void BM_fit_fringes(benchmark::State& state) {
    const auto mu = shared_mu();
    EchoList single;
    Echo e;
    e.visibility = e.raw_visibility = e.signed_amplitude = 0.45;
    single.echoes.push_back(e);
    ScanConfig scan;
    scan.z_start_m = -50e-6;
    scan.z_end_m = 50e-6;
    scan.coarse_step_m = 3e-6;
    const auto trace = synthesize(single, mu, kPair, scan);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_fringes(trace, 0.0, kPair.idler_m, 0.0, &mu));
    }
}
BENCHMARK(BM_fit_fringes);

void BM_effective_reflectance(benchmark::State& state) {
    const auto mask = make_bar_target(88e-6, 2e-6);
    BeamProfile beam{50e-6};
    const double cx = 0.5 * mask.extent_x();
    const double cy = 0.5 * mask.extent_y();
    for (auto _ : state) {
        benchmark::DoNotOptimize(effective_reflectance(mask, beam, cx, cy));
    }
}
BENCHMARK(BM_effective_reflectance);

void BM_raster_fast(benchmark::State& state) {
    const auto mask = make_bar_target(88e-6, 4e-6);
    BeamProfile beam{50e-6};
    RasterOptions options;
    options.step_m = mask.extent_x() / 32.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(raster_scan(mask, beam, options));
    }
}
BENCHMARK(BM_raster_fast);

}  // namespace

BENCHMARK_MAIN();
