#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nloct/phasematch.hpp"
#include "nloct/sample.hpp"

namespace nloct {

/// Fringe period in mirror displacement: Physical is lambda_i/2 (the mirror
/// double-passes the common arm), Paper is lambda_i.
enum class FringeConvention { Physical, Paper };

enum class NoiseModel { None, Poisson };

struct ScanConfig {
    double z_start_m = -1e-3;
    double z_end_m = 1e-3;
    double coarse_step_m = 3e-6;
    double fine_step_m = 0.0;  // 0: derived as idler/64 at synthesis time
    int samples_per_point = 1;
    double mean_counts = 1e4;  // detector counts per sample at the baseline
    NoiseModel noise = NoiseModel::None;
    std::uint64_t rng_seed = 20200617;
    FringeConvention fringe_convention = FringeConvention::Physical;
};

enum class ScanResolution { Coarse, Fine };

struct TraceMeta {
    double signal_m = 0.0;
    double idler_m = 0.0;
    FringeConvention convention = FringeConvention::Physical;
    std::uint64_t seed = 0;
    bool noisy = false;
    std::string provenance;  // echo-list / sample label
};

/// Detected-intensity trace versus mirror displacement, baseline-normalized
/// for noiseless runs and in counts for Poisson runs.
struct Interferogram {
    std::vector<double> position_m;  // uniform, ascending
    std::vector<double> intensity;   // >= 0
    TraceMeta meta;

    double step() const { return position_m.size() > 1 ? position_m[1] - position_m[0] : 0.0; }
};

/// Fringe wavenumber (rad per meter of mirror displacement).
double fringe_wavenumber(double idler_m, FringeConvention convention);

/// Step actually used for a resolution choice.
double scan_step(const ScanConfig& scan, double idler_m, ScanResolution res);

/// Synthesize the detected interferogram of an echo list over
/// [z_start, z_end] at the chosen resolution:
///   I(z) = I0 [1 + sum_e V_e |mu(2(z - z_e)/c)| cos(k_f (z - z_e) + phi_e)].
/// Echo depths map one-to-one onto mirror displacement. Throws when the
/// correlation grid ends before its magnitude has decayed inside the scan.
Interferogram synthesize(const EchoList& echoes, const CorrelationFunction& mu,
                         const WavelengthPair& pair, const ScanConfig& scan,
                         ScanResolution resolution = ScanResolution::Fine);

/// Raw fringe contrast (max - min)/(max + min) over a window around center.
/// window_halfwidth_m <= 0 selects 1.5 fringe periods (3 periods total).
double fringe_visibility(const Interferogram& trace, double window_center_m,
                         double window_halfwidth_m = 0.0);

}  // namespace nloct
