#include "nloct/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "nloct/errors.hpp"
#include "nloct/units.hpp"

namespace nloct {

namespace {

void validate_scan(const ScanConfig& scan, double idler_m) {
    if (!(scan.z_start_m < scan.z_end_m)) {
        throw ValidationError("scan needs z_start < z_end");
    }
    if (!(scan.mean_counts > 0.0) || scan.samples_per_point < 1) {
        throw ValidationError("scan needs mean_counts > 0 and samples_per_point >= 1");
    }
    const double fine = scan_step(scan, idler_m, ScanResolution::Fine);
    if (!(fine > 0.0) || !(scan.coarse_step_m > fine)) {
        throw ValidationError("scan needs coarse_step > fine_step > 0");
    }
    if (fine > idler_m / 20.0 + 1e-15) {
        throw ValidationError("fine_step must be at most lambda_i / 20");
    }
}

}  // namespace

double fringe_wavenumber(double idler_m, FringeConvention convention) {
    const double base = 2.0 * std::numbers::pi / idler_m;
    return convention == FringeConvention::Physical ? 2.0 * base : base;
}

double scan_step(const ScanConfig& scan, double idler_m, ScanResolution res) {
    if (res == ScanResolution::Coarse) {
        return scan.coarse_step_m;
    }
    return scan.fine_step_m > 0.0 ? scan.fine_step_m : idler_m / 64.0;
}

Interferogram synthesize(const EchoList& echoes, const CorrelationFunction& mu,
                         const WavelengthPair& pair, const ScanConfig& scan,
                         ScanResolution resolution) {
    validate_scan(scan, pair.idler_m);
    const double step = scan_step(scan, pair.idler_m, resolution);
    const double k_fringe = fringe_wavenumber(pair.idler_m, scan.fringe_convention);

    // The correlation grid may end only where |mu| has already decayed;
    // beyond that it is extended by zero.
    const double mu_edge = mu.magnitude.empty() ? 1.0 : mu.magnitude.back();
    if (mu_edge > 5e-3) {
        for (const auto& e : echoes.echoes) {
            const double worst = std::max(std::abs(scan.z_start_m - e.optical_depth_m),
                                          std::abs(scan.z_end_m - e.optical_depth_m));
            if (2.0 * worst / kSpeedOfLight > mu.max_delay()) {
                std::ostringstream msg;
                msg << "correlation grid covers |dt| <= " << mu.max_delay()
                    << " s but the scan needs " << 2.0 * worst / kSpeedOfLight
                    << " s and the edge magnitude " << mu_edge << " has not decayed";
                throw ValidationError(msg.str());
            }
        }
    }

    const auto n_samples =
        static_cast<std::size_t>(std::floor((scan.z_end_m - scan.z_start_m) / step)) + 1;

    Interferogram trace;
    trace.position_m.resize(n_samples);
    trace.intensity.resize(n_samples);
    trace.meta.signal_m = pair.signal_m;
    trace.meta.idler_m = pair.idler_m;
    trace.meta.convention = scan.fringe_convention;
    trace.meta.seed = scan.rng_seed;
    trace.meta.noisy = scan.noise == NoiseModel::Poisson;

    for (std::size_t i = 0; i < n_samples; ++i) {
        const double z = scan.z_start_m + step * static_cast<double>(i);
        double acc = 1.0;
        for (const auto& e : echoes.echoes) {
            const double dz = z - e.optical_depth_m;
            const double envelope = mu.magnitude_at(2.0 * dz / kSpeedOfLight);
            if (envelope <= 0.0) {
                continue;
            }
            const double phase = e.signed_amplitude < 0.0 ? std::numbers::pi : 0.0;
            acc += e.visibility * envelope * std::cos(k_fringe * dz + phase);
        }
        trace.position_m[i] = z;
        trace.intensity[i] = std::max(0.0, acc);
    }

    if (scan.noise == NoiseModel::Poisson) {
        std::mt19937_64 rng(scan.rng_seed);
        for (auto& v : trace.intensity) {
            const double mean = v * scan.mean_counts;
            double sum = 0.0;
            if (mean > 0.0) {
                std::poisson_distribution<long long> poisson(mean);
                for (int s = 0; s < scan.samples_per_point; ++s) {
                    sum += static_cast<double>(poisson(rng));
                }
            }
            v = sum / static_cast<double>(scan.samples_per_point);
        }
    }
    return trace;
}

double fringe_visibility(const Interferogram& trace, double window_center_m,
                         double window_halfwidth_m) {
    if (trace.position_m.size() < 2) {
        throw ValidationError("trace too short");
    }
    const double period = 2.0 * std::numbers::pi / fringe_wavenumber(trace.meta.idler_m,
                                                                     trace.meta.convention);
    const double half = window_halfwidth_m > 0.0 ? window_halfwidth_m : 1.5 * period;
    if (half < 1.5 * period) {
        throw ValidationError("fringe window must span at least 3 fringe periods");
    }
    const double lo = window_center_m - half;
    const double hi = window_center_m + half;
    if (lo < trace.position_m.front() - 1e-12 || hi > trace.position_m.back() + 1e-12) {
        throw RangeError("fringe window extends outside the trace");
    }
    double v_min = std::numeric_limits<double>::infinity();
    double v_max = -v_min;
    for (std::size_t i = 0; i < trace.position_m.size(); ++i) {
        if (trace.position_m[i] >= lo && trace.position_m[i] <= hi) {
            v_min = std::min(v_min, trace.intensity[i]);
            v_max = std::max(v_max, trace.intensity[i]);
        }
    }
    if (!(v_max >= v_min)) {
        throw RangeError("fringe window contains no samples");
    }
    if (v_max + v_min <= 0.0) {
        return 0.0;
    }
    return (v_max - v_min) / (v_max + v_min);
}

}  // namespace nloct
