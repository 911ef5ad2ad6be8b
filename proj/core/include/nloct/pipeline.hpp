#pragma once

#include <optional>
#include <vector>

#include "nloct/forward.hpp"
#include "nloct/inverse.hpp"

namespace nloct {

/// A measurement run mirrors the bench procedure: one coarse scan over the
/// whole range plus a fine scan around each interference region.
struct SimulatedRun {
    Interferogram coarse;
    std::vector<Interferogram> fine_scans;
};

/// Half-width of the fine window placed around an envelope region, from the
/// correlation half-max width and the fringe period.
double fine_window_halfwidth(const CorrelationFunction& mu, double idler_m,
                             FringeConvention convention);

SimulatedRun simulate_run(const EchoList& echoes, const CorrelationFunction& mu,
                          const WavelengthPair& pair, const ScanConfig& scan);

struct AnalyzeOptions {
    DetectOptions detect;
    std::optional<EstimateOptions> estimate;
};

struct AnalysisResult {
    LayerReport report;             // merged, fine-refined peaks
    LayerReport coarse_report;      // envelope-only overview scan
    std::optional<MaterialEstimate> estimate;
};

/// Coarse detection for the overview, fine detection + fringe fits per fine
/// scan, echo classification on the merged report, then the geometry estimate
/// when requested.
AnalysisResult analyze_run(const Interferogram& coarse,
                           const std::vector<Interferogram>& fine_scans,
                           const AnalyzeOptions& options);

}  // namespace nloct
