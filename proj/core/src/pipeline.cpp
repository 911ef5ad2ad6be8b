#include "nloct/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nloct/errors.hpp"
#include "nloct/units.hpp"

namespace nloct {

double fine_window_halfwidth(const CorrelationFunction& mu, double idler_m,
                             FringeConvention convention) {
    const double period = 2.0 * std::numbers::pi / fringe_wavenumber(idler_m, convention);
    // Cover the whole envelope support, so the coarse scan holds nothing but
    // baseline between fine windows.
    double support_delay = 0.0;
    for (std::size_t i = 0; i < mu.delay_s.size(); ++i) {
        if (mu.magnitude[i] >= 0.02) {
            support_delay = std::max(support_delay, std::abs(mu.delay_s[i]));
        }
    }
    const double support = 0.5 * kSpeedOfLight * support_delay;  // delay -> displacement
    return support + 8.0 * period + 2e-6;
}

SimulatedRun simulate_run(const EchoList& echoes, const CorrelationFunction& mu,
                          const WavelengthPair& pair, const ScanConfig& scan) {
    SimulatedRun run;
    run.coarse = synthesize(echoes, mu, pair, scan, ScanResolution::Coarse);

    const double half = fine_window_halfwidth(mu, pair.idler_m, scan.fringe_convention);
    std::vector<double> depths;
    for (const auto& e : echoes.echoes) {
        if (e.optical_depth_m >= scan.z_start_m - half && e.optical_depth_m <= scan.z_end_m + half) {
            depths.push_back(e.optical_depth_m);
        }
    }
    std::sort(depths.begin(), depths.end());

    // Merge overlapping windows so adjacent reflections share one fine scan.
    std::size_t window_index = 0;
    for (std::size_t i = 0; i < depths.size();) {
        double lo = depths[i] - half;
        double hi = depths[i] + half;
        std::size_t j = i + 1;
        while (j < depths.size() && depths[j] - half <= hi) {
            hi = depths[j] + half;
            ++j;
        }
        ScanConfig window = scan;
        window.z_start_m = lo;
        window.z_end_m = hi;
        window.rng_seed = scan.rng_seed ^ (0x9E3779B97F4A7C15ULL * (window_index + 1));
        run.fine_scans.push_back(synthesize(echoes, mu, pair, window, ScanResolution::Fine));
        ++window_index;
        i = j;
    }
    return run;
}

AnalysisResult analyze_run(const Interferogram& coarse,
                           const std::vector<Interferogram>& fine_scans,
                           const AnalyzeOptions& options) {
    AnalysisResult result;
    result.coarse_report = detect_envelopes(coarse, options.detect);

    for (const auto& fine : fine_scans) {
        const LayerReport local = detect_envelopes(fine, options.detect);
        for (const auto& p : local.peaks) {
            result.report.peaks.push_back(p);
        }
    }
    // Coarse-only regions no fine scan covered still contribute their peaks.
    for (const auto& p : result.coarse_report.peaks) {
        const bool covered = std::any_of(
            fine_scans.begin(), fine_scans.end(), [&](const Interferogram& f) {
                return p.position_m >= f.position_m.front() && p.position_m <= f.position_m.back();
            });
        if (!covered) {
            result.report.peaks.push_back(p);
            result.report.coarse_mode = true;
        }
    }
    std::sort(result.report.peaks.begin(), result.report.peaks.end(),
              [](const Peak& a, const Peak& b) { return a.position_m < b.position_m; });

    const double step = fine_scans.empty() ? coarse.step() : fine_scans.front().step();
    classify_echoes(result.report, options.detect, 2.0 * step);

    if (options.estimate) {
        result.estimate = estimate_material(result.report, *options.estimate);
    }
    return result;
}

}  // namespace nloct
