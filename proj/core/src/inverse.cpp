#include "nloct/inverse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include "nloct/errors.hpp"
#include "nloct/fft.hpp"
#include "nloct/units.hpp"

namespace nloct {

namespace {

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

// Analytic-signal magnitude of a zero-mean series. The series is reflected at
// both ends out to a power-of-two length, which keeps the periodic extension
// seen by the FFT continuous and confines ringing to mild derivative kinks at
// the junctions.
std::vector<double> analytic_magnitude(const std::vector<double>& ac) {
    const std::size_t n = ac.size();
    const std::size_t padded = next_pow2(std::max<std::size_t>(n + n / 4 + 32, 64));
    const std::size_t front = (padded - n) / 2;
    auto mirrored = [&](long long idx) {
        // Reflect an out-of-range index back into [0, n-1] repeatedly.
        const long long m = static_cast<long long>(n);
        while (idx < 0 || idx >= m) {
            if (idx < 0) {
                idx = -idx;
            }
            if (idx >= m) {
                idx = 2 * (m - 1) - idx;
            }
        }
        return static_cast<std::size_t>(idx);
    };
    std::vector<std::complex<double>> buf(padded);
    for (std::size_t i = 0; i < padded; ++i) {
        buf[i] = ac[mirrored(static_cast<long long>(i) - static_cast<long long>(front))];
    }

    auto spec = detail::fft(buf);
    const std::size_t half = padded / 2;
    for (std::size_t k = 1; k < half; ++k) {
        spec[k] *= 2.0;
    }
    for (std::size_t k = half + 1; k < padded; ++k) {
        spec[k] = 0.0;
    }
    const auto analytic = detail::ifft_unscaled(spec);
    std::vector<double> env(n);
    for (std::size_t i = 0; i < n; ++i) {
        env[i] = std::abs(analytic[front + i]) / static_cast<double>(padded);
    }
    return env;
}

std::vector<double> box_smooth(const std::vector<double>& v, std::size_t halfwidth) {
    if (halfwidth == 0 || v.size() < 3) {
        return v;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i >= halfwidth ? i - halfwidth : 0;
        const std::size_t hi = std::min(v.size() - 1, i + halfwidth);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            acc += v[j];
        }
        out[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

// Fraction of AC amplitude at the expected fringe wavenumber.
double carrier_amplitude_ratio(const std::vector<double>& ac, const std::vector<double>& z,
                               double k_fringe) {
    std::complex<double> corr{0.0, 0.0};
    double power = 0.0;
    for (std::size_t i = 0; i < ac.size(); ++i) {
        corr += ac[i] * std::polar(1.0, -k_fringe * z[i]);
        power += ac[i] * ac[i];
    }
    if (power <= 0.0) {
        return 0.0;
    }
    const double amp = 2.0 * std::abs(corr) / static_cast<double>(ac.size());
    const double rms2 = 2.0 * power / static_cast<double>(ac.size());
    return amp * amp / rms2;
}

struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};
};

Mat3 invert3(const Mat3& a, bool& ok) {
    const auto& m = a.m;
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    Mat3 inv;
    if (!(std::abs(det) > 1e-300)) {
        ok = false;
        return inv;
    }
    const double d = 1.0 / det;
    inv.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * d;
    inv.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d;
    inv.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d;
    inv.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * d;
    inv.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d;
    inv.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d;
    inv.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * d;
    inv.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d;
    inv.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d;
    ok = true;
    return inv;
}

struct LinearFringeFit {
    double a = 0.0, bc = 0.0, bs = 0.0;
    double sse = std::numeric_limits<double>::infinity();
    Mat3 xtx;
    bool ok = false;
};

LinearFringeFit solve_linear(const std::vector<double>& y, const std::vector<double>& u,
                             const std::vector<double>& shape, double k) {
    LinearFringeFit fit;
    Mat3 xtx;
    std::array<double, 3> xty{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double c = shape[i] * std::cos(k * u[i]);
        const double s = shape[i] * std::sin(k * u[i]);
        const std::array<double, 3> row{1.0, c, s};
        for (int r = 0; r < 3; ++r) {
            for (int cc = r; cc < 3; ++cc) {
                xtx.m[r][cc] += row[r] * row[cc];
            }
            xty[r] += row[r] * y[i];
        }
    }
    xtx.m[1][0] = xtx.m[0][1];
    xtx.m[2][0] = xtx.m[0][2];
    xtx.m[2][1] = xtx.m[1][2];

    bool ok = false;
    const Mat3 inv = invert3(xtx, ok);
    if (!ok) {
        return fit;
    }
    std::array<double, 3> beta{0.0, 0.0, 0.0};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            beta[r] += inv.m[r][c] * xty[c];
        }
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double c = shape[i] * std::cos(k * u[i]);
        const double s = shape[i] * std::sin(k * u[i]);
        const double res = y[i] - beta[0] - beta[1] * c - beta[2] * s;
        sse += res * res;
    }
    fit.a = beta[0];
    fit.bc = beta[1];
    fit.bs = beta[2];
    fit.sse = sse;
    fit.xtx = xtx;
    fit.ok = true;
    return fit;
}

std::size_t index_of_position(const Interferogram& trace, double z) {
    const double step = trace.step();
    const double pos = (z - trace.position_m.front()) / step;
    const auto i = static_cast<long long>(std::llround(pos));
    if (i < 0 || i >= static_cast<long long>(trace.position_m.size())) {
        throw RangeError("position outside the trace");
    }
    return static_cast<std::size_t>(i);
}

}  // namespace

EnvelopeTrace demodulate_envelope(const Interferogram& trace) {
    if (trace.position_m.size() < 8) {
        throw ValidationError("trace too short to demodulate");
    }
    EnvelopeTrace env;
    env.position_m = trace.position_m;
    env.baseline = mean(trace.intensity);
    if (!(env.baseline > 0.0)) {
        throw ValidationError("trace baseline is not positive");
    }

    std::vector<double> ac(trace.intensity.size());
    for (std::size_t i = 0; i < ac.size(); ++i) {
        ac[i] = trace.intensity[i] / env.baseline - 1.0;
    }

    const double step = trace.step();
    const double k_fringe = fringe_wavenumber(trace.meta.idler_m, trace.meta.convention);
    bool fine = step <= trace.meta.idler_m / 8.0 + 1e-15;
    if (fine && carrier_amplitude_ratio(ac, trace.position_m, k_fringe) < 0.05) {
        fine = false;  // carrier missing; fall back to envelope-only detection
    }

    if (fine) {
        env.value = analytic_magnitude(ac);
        env.coarse_mode = false;
    } else {
        // Rectified sliding range; the fringe phase is unresolved at this step.
        const std::size_t hw = 3;
        env.value.resize(ac.size());
        for (std::size_t i = 0; i < ac.size(); ++i) {
            const std::size_t lo = i >= hw ? i - hw : 0;
            const std::size_t hi = std::min(ac.size() - 1, i + hw);
            double v_min = ac[lo], v_max = ac[lo];
            for (std::size_t j = lo; j <= hi; ++j) {
                v_min = std::min(v_min, ac[j]);
                v_max = std::max(v_max, ac[j]);
            }
            env.value[i] = 0.5 * (v_max - v_min);
        }
        env.coarse_mode = true;
    }
    return env;
}

LayerReport detect_envelopes(const Interferogram& trace, const DetectOptions& options) {
    LayerReport report;
    if (trace.position_m.size() < 8) {
        return report;
    }
    const EnvelopeTrace env = demodulate_envelope(trace);
    report.coarse_mode = env.coarse_mode;
    const double step = trace.step();

    const double period = 2.0 * std::numbers::pi /
                          fringe_wavenumber(trace.meta.idler_m, trace.meta.convention);
    const std::size_t smooth_hw =
        env.coarse_mode ? 3 : std::max<std::size_t>(1, static_cast<std::size_t>(period / step));
    const std::vector<double> smooth = box_smooth(env.value, smooth_hw);

    struct Candidate {
        std::size_t index;
        double value;
    };
    // Apexes hugging the trace ends are demodulation edge artifacts or
    // unfittable anyway; require a margin of the smoothing width.
    const std::size_t margin = std::max<std::size_t>(2 * smooth_hw, 4);

    // Prominence of a local maximum: height above the highest of the two
    // saddles separating it from higher terrain (or from the trace ends).
    // Noise ripples riding on an envelope flank have tiny prominence and are
    // rejected; a real interference region keeps essentially its full height.
    auto prominence = [&](std::size_t i) {
        const double v = smooth[i];
        double saddle_left = v;
        for (std::size_t j = i; j-- > 0;) {
            saddle_left = std::min(saddle_left, smooth[j]);
            if (smooth[j] > v) {
                break;
            }
        }
        double saddle_right = v;
        for (std::size_t j = i + 1; j < smooth.size(); ++j) {
            saddle_right = std::min(saddle_right, smooth[j]);
            if (smooth[j] > v) {
                break;
            }
        }
        return v - std::max(saddle_left, saddle_right);
    };

    std::vector<Candidate> candidates;
    for (std::size_t i = std::max<std::size_t>(margin, 1);
         i + std::max<std::size_t>(margin, 1) < smooth.size(); ++i) {
        if (smooth[i] >= smooth[i - 1] && smooth[i] > smooth[i + 1] &&
            smooth[i] >= options.min_visibility &&
            prominence(i) >= 0.5 * std::max(smooth[i], options.min_visibility)) {
            candidates.push_back({i, smooth[i]});
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

    const double min_separation =
        env.coarse_mode ? 6.0 * step : std::max(10.0 * period, 6.0 * step);
    std::vector<std::size_t> accepted;
    for (const auto& c : candidates) {
        const double z = trace.position_m[c.index];
        const bool clash = std::any_of(accepted.begin(), accepted.end(), [&](std::size_t j) {
            return std::abs(trace.position_m[j] - z) < min_separation;
        });
        if (!clash) {
            accepted.push_back(c.index);
        }
    }
    std::sort(accepted.begin(), accepted.end());

    for (std::size_t idx : accepted) {
        Peak peak;
        // Sub-sample apex by parabolic interpolation on the smoothed envelope.
        const double y0 = smooth[idx - 1], y1 = smooth[idx], y2 = smooth[idx + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        const double frac = (std::abs(denom) > 1e-300) ? 0.5 * (y0 - y2) / denom : 0.0;
        peak.position_m = trace.position_m[idx] + std::clamp(frac, -0.5, 0.5) * step;
        peak.position_sigma_m = env.coarse_mode ? 0.5 * step : 0.25 * step;

        if (env.coarse_mode) {
            peak.visibility = smooth[idx];
            peak.visibility_sigma = 0.15 * smooth[idx] + 0.01;
        } else {
            try {
                const CorrelationFunction* model =
                    options.source_mu ? &*options.source_mu : nullptr;
                const FringeFit fit =
                    fit_fringes(trace, peak.position_m, trace.meta.idler_m, 0.0, model);
                peak.visibility = fit.visibility;
                peak.visibility_sigma = fit.sigma;
            } catch (const std::exception&) {
                // Peak too close to the trace edge for a fringe fit; keep the
                // envelope value with a generous uncertainty.
                peak.visibility = env.value[idx];
                peak.visibility_sigma = 0.2 * env.value[idx] + 0.01;
            }
        }
        report.peaks.push_back(peak);
    }

    classify_echoes(report, options, 2.0 * step);
    return report;
}

void classify_echoes(LayerReport& report, const DetectOptions& options,
                     double position_tolerance_m) {
    auto& peaks = report.peaks;

    // Interface amplitudes recovered sequentially from the loss chain
    // (non-absorptive assumption): r_m = (V_m / V_ref) |r_ref| / T,
    // T = product of (1 - r^2) over the surfaces above.
    struct Surface {
        std::size_t peak;
        double amplitude;
    };
    std::vector<Surface> surfaces;
    double transmission = 1.0;

    for (std::size_t p = 0; p < peaks.size(); ++p) {
        bool position_match = false;
        bool visibility_match = false;
        for (std::size_t a = 0; a < surfaces.size(); ++a) {
            for (std::size_t b = a + 1; b < surfaces.size(); ++b) {
                const Peak& first = peaks[surfaces[a].peak];
                const Peak& second = peaks[surfaces[b].peak];
                const double predicted =
                    second.position_m + (second.position_m - first.position_m);
                if (std::abs(peaks[p].position_m - predicted) > position_tolerance_m) {
                    continue;
                }
                position_match = true;
                if (!options.reference_visibility) {
                    continue;
                }
                const double v_pred =
                    second.visibility * surfaces[a].amplitude * surfaces[b].amplitude;
                const double rel = std::sqrt(
                    std::pow(first.visibility_sigma / std::max(first.visibility, 1e-12), 2) +
                    4.0 * std::pow(second.visibility_sigma / std::max(second.visibility, 1e-12),
                                   2));
                const double sigma = std::sqrt(std::pow(peaks[p].visibility_sigma, 2) +
                                               std::pow(v_pred * rel, 2)) +
                                     1e-6;
                if (std::abs(peaks[p].visibility - v_pred) <= 3.0 * sigma) {
                    visibility_match = true;
                }
            }
        }
        if (position_match) {
            peaks[p].classification = visibility_match ? PeakClass::Echo : PeakClass::Unknown;
            continue;
        }
        peaks[p].classification = PeakClass::Surface;
        double r = 0.0;
        if (options.reference_visibility && transmission > 1e-6) {
            r = std::clamp(peaks[p].visibility / *options.reference_visibility *
                               options.reference_amplitude / transmission,
                           0.0, 0.999999);
            transmission *= 1.0 - r * r;
        }
        surfaces.push_back({p, r});
    }
}

FringeFit fit_fringes(const Interferogram& trace, double window_center_m, double idler_m,
                      double window_halfwidth_m, const CorrelationFunction* mu_model) {
    const double step = trace.step();
    if (!(step > 0.0)) {
        throw ValidationError("trace needs at least two samples");
    }
    if (step > idler_m / 8.0 + 1e-15) {
        throw ValidationError("fringe carrier unresolved at this step; cannot fit fringes");
    }
    const double k_seed = fringe_wavenumber(idler_m, trace.meta.convention);
    const double period = 2.0 * std::numbers::pi / k_seed;

    // The trace's own envelope guides the window sizing and provides the
    // fallback fit shape. A missing carrier (flat trace) keeps the shape at 1.
    const EnvelopeTrace env = demodulate_envelope(trace);
    const std::size_t center_idx = index_of_position(trace, window_center_m);
    const std::vector<double> env_smooth =
        env.coarse_mode
            ? std::vector<double>(env.value.size(), 0.0)
            : box_smooth(env.value,
                         std::max<std::size_t>(1, static_cast<std::size_t>(period / step)));

    double half = window_halfwidth_m;
    if (half <= 0.0) {
        // Envelope-aware default: most of the half-max region around the
        // center, kept clear of the trace ends.
        const double level = env.coarse_mode ? 0.0 : 0.5 * env_smooth[center_idx];
        std::size_t lo = center_idx, hi = center_idx;
        while (lo > 0 && env_smooth[lo] > level) {
            --lo;
        }
        while (hi + 1 < env_smooth.size() && env_smooth[hi] > level) {
            ++hi;
        }
        const double d_half = std::min(window_center_m - trace.position_m[lo],
                                       trace.position_m[hi] - window_center_m);
        const double edge_guard = 5.0 * period;
        const double to_edges = std::min(window_center_m - trace.position_m.front(),
                                         trace.position_m.back() - window_center_m) -
                                edge_guard;
        half = std::min(std::max(0.8 * d_half, 3.0 * period), to_edges);
        if (!(half > 0.0)) {
            half = std::max(1.5 * period, 3.0 * step);
        }
    }
    if (half < 1.5 * period) {
        throw ValidationError("fringe fit window must span at least 3 fringe periods");
    }
    if (window_center_m - half < trace.position_m.front() - 1e-12 ||
        window_center_m + half > trace.position_m.back() + 1e-12) {
        throw RangeError("fringe fit window extends outside the trace");
    }

    const auto lo_idx = static_cast<std::size_t>(
        std::ceil((window_center_m - half - trace.position_m.front()) / step - 1e-9));
    const auto hi_idx = static_cast<std::size_t>(
        std::floor((window_center_m + half - trace.position_m.front()) / step + 1e-9));
    const std::size_t m_samples = hi_idx - lo_idx + 1;
    if (m_samples < 8) {
        throw ValidationError("fringe fit window contains too few samples");
    }

    // Envelope factor of the fit model. Preference order: the known source
    // correlation (exact, noise-free), the measured envelope normalized at
    // the window center, or 1 when the envelope is flat or absent.
    const double env_center = env.coarse_mode ? 0.0 : env_smooth[center_idx];
    double env_variation = 0.0;
    if (env_center > 1e-12) {
        for (std::size_t i = lo_idx; i <= hi_idx; ++i) {
            env_variation = std::max(env_variation,
                                     std::abs(env_smooth[i] / env_center - 1.0));
        }
    }
    const bool use_measured_env = !mu_model && env_center > 1e-12 && env_variation > 2e-3;

    std::vector<double> y(m_samples), u(m_samples), shape(m_samples);
    for (std::size_t i = 0; i < m_samples; ++i) {
        y[i] = trace.intensity[lo_idx + i];
        u[i] = trace.position_m[lo_idx + i] - window_center_m;
        if (mu_model) {
            shape[i] = mu_model->magnitude_at(2.0 * u[i] / kSpeedOfLight);
        } else if (use_measured_env) {
            shape[i] = std::max(0.0, env_smooth[lo_idx + i] / env_center);
        } else {
            shape[i] = 1.0;
        }
    }

    // Coarse wavenumber sweep, then golden-section refinement.
    const double k_lo = 0.99 * k_seed, k_hi = 1.01 * k_seed;
    double best_k = k_seed;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20; ++i) {
        const double k = k_lo + (k_hi - k_lo) * static_cast<double>(i) / 20.0;
        const auto fit = solve_linear(y, u, shape, k);
        if (fit.ok && fit.sse < best_sse) {
            best_sse = fit.sse;
            best_k = k;
        }
    }
    if (!std::isfinite(best_sse)) {
        throw FitError("fringe fit normal equations are singular", best_sse);
    }
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a_k = std::max(k_lo, best_k - (k_hi - k_lo) / 20.0);
    double b_k = std::min(k_hi, best_k + (k_hi - k_lo) / 20.0);
    double c_k = b_k - gr * (b_k - a_k);
    double d_k = a_k + gr * (b_k - a_k);
    double f_c = solve_linear(y, u, shape, c_k).sse;
    double f_d = solve_linear(y, u, shape, d_k).sse;
    for (int it = 0; it < 60 && (b_k - a_k) > 1e-12 * k_seed; ++it) {
        if (f_c < f_d) {
            b_k = d_k;
            d_k = c_k;
            f_d = f_c;
            c_k = b_k - gr * (b_k - a_k);
            f_c = solve_linear(y, u, shape, c_k).sse;
        } else {
            a_k = c_k;
            c_k = d_k;
            f_c = f_d;
            d_k = a_k + gr * (b_k - a_k);
            f_d = solve_linear(y, u, shape, d_k).sse;
        }
    }
    const double k_best = 0.5 * (a_k + b_k);
    const auto fit = solve_linear(y, u, shape, k_best);
    if (!fit.ok) {
        throw FitError("fringe fit normal equations are singular", best_sse);
    }

    FringeFit out;
    out.wavenumber = k_best;
    out.offset = fit.a;
    const double b_amp = std::hypot(fit.bc, fit.bs);
    out.phase = std::atan2(-fit.bs, fit.bc);
    if (!(fit.a > 0.0)) {
        throw FitError("fringe fit baseline is not positive", fit.sse);
    }
    out.visibility = b_amp / fit.a;

    // First-order propagation from the linear-parameter covariance.
    const double dof = static_cast<double>(m_samples) - 3.0;
    const double s2 = dof > 0.0 ? fit.sse / dof : 0.0;
    bool ok = false;
    const Mat3 cov_unscaled = invert3(fit.xtx, ok);
    if (ok && b_amp > 0.0) {
        const std::array<double, 3> grad{-b_amp / (fit.a * fit.a), fit.bc / (b_amp * fit.a),
                                         fit.bs / (b_amp * fit.a)};
        double var = 0.0;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                var += grad[r] * s2 * cov_unscaled.m[r][c] * grad[c];
            }
        }
        out.sigma = std::sqrt(std::max(0.0, var));
    } else {
        out.sigma = 0.0;
    }

    const double sigma_b = std::sqrt(std::max(
        s2 * (cov_unscaled.m[1][1] + cov_unscaled.m[2][2]), 0.0));
    out.degenerate = b_amp <= std::max(1e-9 * fit.a, 3.0 * sigma_b) || b_amp < 1e-300;
    if (out.degenerate && b_amp < 1e-9 * fit.a) {
        out.visibility = 0.0;
    }
    return out;
}

MaterialEstimate estimate_material(const LayerReport& report, const EstimateOptions& options) {
    const auto& peaks = report.peaks;
    auto surface_indices = [&]() {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            if (peaks[i].classification != PeakClass::Echo) {
                s.push_back(i);
            }
        }
        return s;
    }();

    const double v_ref = options.reference_visibility.value;
    if (!(v_ref > 0.0)) {
        throw ValidationError("reference visibility must be positive");
    }

    MaterialEstimate est;
    if (options.geometry == Geometry::SingleWindow) {
        if (surface_indices.size() < 2) {
            throw GeometryError(surface_indices.empty()
                                    ? "single_window: front surface peak missing"
                                    : "single_window: back surface peak missing");
        }
        const Peak& front = peaks[surface_indices[0]];
        const Peak& back = peaks[surface_indices[1]];

        const double r1 = front.visibility / v_ref * options.reference_amplitude;
        if (!(r1 < 1.0)) {
            throw ValidationError("estimated |r1| >= 1; reflectance must be below 1");
        }
        const double rel_v = std::sqrt(
            std::pow(front.visibility_sigma / front.visibility, 2) +
            std::pow(options.reference_visibility.sigma / v_ref, 2));
        const double sigma_r1 = r1 * rel_v;

        est.reflectance.value = r1 * r1;
        est.reflectance.sigma = 2.0 * r1 * sigma_r1;
        const double n = invert_fresnel(est.reflectance.value, options.ambient_index);
        est.refractive_index.value = n;
        est.refractive_index.sigma =
            2.0 * options.ambient_index / std::pow(1.0 - r1, 2) * sigma_r1;

        const double spacing = back.position_m - front.position_m;
        if (!(spacing > 0.0)) {
            throw GeometryError("single_window: surfaces are not separated");
        }
        const double sigma_sp = std::hypot(front.position_sigma_m, back.position_sigma_m);
        est.thickness_m.value = spacing / n;
        est.thickness_m.sigma =
            est.thickness_m.value *
            std::sqrt(std::pow(sigma_sp / spacing, 2) +
                      std::pow(est.refractive_index.sigma / n, 2));
        est.peak_spacings_m.push_back(spacing);

        // Second-surface consistency per the two-surface loss chain.
        est.eq_consistency_residual =
            back.visibility / v_ref - r1 * (1.0 - r1 * r1) / options.reference_amplitude;
    } else {
        if (surface_indices.size() < 4) {
            static const char* names[] = {"front surface", "first internal interface",
                                          "second internal interface", "back surface"};
            throw GeometryError(std::string("compound_waveplate: ") +
                                names[surface_indices.size()] + " peak missing");
        }
        const Peak& p1 = peaks[surface_indices[0]];
        const Peak& p2 = peaks[surface_indices[1]];
        const Peak& p3 = peaks[surface_indices[2]];
        const Peak& p4 = peaks[surface_indices[3]];
        if (!(options.plate1_thickness_m.value > 0.0) || !(options.plate2_thickness_m.value > 0.0)) {
            throw ValidationError("compound_waveplate needs both plate thicknesses");
        }

        const double s1 = p2.position_m - p1.position_m;
        const double s2 = p3.position_m - p2.position_m;
        const double s3 = p4.position_m - p3.position_m;
        est.peak_spacings_m = {s1, s2, s3};

        auto ratio = [](double num, double num_sigma, const ValueWithSigma& den) {
            ValueWithSigma out;
            out.value = num / den.value;
            out.sigma = out.value * std::sqrt(std::pow(num_sigma / num, 2) +
                                              std::pow(den.sigma / den.value, 2));
            return out;
        };
        const double sig_s1 = std::hypot(p1.position_sigma_m, p2.position_sigma_m);
        const double sig_s3 = std::hypot(p3.position_sigma_m, p4.position_sigma_m);
        const ValueWithSigma n_o = ratio(s1, sig_s1, options.plate1_thickness_m);
        const ValueWithSigma n_e = ratio(s3, sig_s3, options.plate2_thickness_m);
        est.birefringence = std::make_pair(n_o, n_e);
        est.refractive_index = n_o;

        // Air gap: ambient index is 1 to working precision in the lab frame.
        est.thickness_m.value = s2 / options.ambient_index;
        est.thickness_m.sigma = std::hypot(p2.position_sigma_m, p3.position_sigma_m);

        const double r1 = p1.visibility / v_ref * options.reference_amplitude;
        if (r1 < 1.0) {
            est.reflectance.value = r1 * r1;
            const double rel_v = std::sqrt(
                std::pow(p1.visibility_sigma / std::max(p1.visibility, 1e-12), 2) +
                std::pow(options.reference_visibility.sigma / v_ref, 2));
            est.reflectance.sigma = 2.0 * r1 * r1 * rel_v;
        }
    }
    return est;
}

}  // namespace nloct
