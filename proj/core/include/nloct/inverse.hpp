#pragma once

#include <optional>
#include <vector>

#include "nloct/forward.hpp"

namespace nloct {

enum class PeakClass { Surface, Echo, Unknown };

struct Peak {
    double position_m = 0.0;
    double position_sigma_m = 0.0;
    double visibility = 0.0;
    double visibility_sigma = 0.0;
    PeakClass classification = PeakClass::Surface;
};

struct LayerReport {
    std::vector<Peak> peaks;   // sorted by ascending position
    bool coarse_mode = false;  // fringe carrier unresolved, envelope-only detection
};

struct DetectOptions {
    double min_visibility = 0.05;
    // Needed for the echo product-rule check during classification; without it
    // position-matching echo candidates are classified Unknown.
    std::optional<double> reference_visibility;
    double reference_amplitude = 1.0;
    // Known source correlation model. When present, per-peak fringe fits use
    // it as the envelope factor of the fit model (the measured envelope is the
    // fallback, which carries a small smoothing bias at sharp apexes).
    std::optional<CorrelationFunction> source_mu;
};

/// Demodulated envelope of a trace: analytic-signal magnitude when the fringe
/// carrier is resolved, rectified sliding max-min otherwise. Values are on the
/// absolute visibility scale (baseline-normalized).
struct EnvelopeTrace {
    std::vector<double> position_m;
    std::vector<double> value;
    bool coarse_mode = false;
    double baseline = 1.0;  // estimated I0
};

EnvelopeTrace demodulate_envelope(const Interferogram& trace);

/// Locate envelope peaks above min_visibility with sub-sample (parabolic)
/// localization; per-peak visibility comes from fit_fringes when the carrier
/// is resolved. No peaks is an empty report, not an error.
LayerReport detect_envelopes(const Interferogram& trace, const DetectOptions& options = {});

/// Label peaks that sit at a surface-spacing sum AND obey the echo visibility
/// product rule (within 3 sigma) as Echo; position matches without a
/// confirmable visibility stay Unknown.
void classify_echoes(LayerReport& report, const DetectOptions& options,
                     double position_tolerance_m);

struct FringeFit {
    double visibility = 0.0;
    double sigma = 0.0;
    double phase = 0.0;      // rad, of cos(k (z - center) + phase)
    double offset = 0.0;     // fitted baseline
    double wavenumber = 0.0; // refined k, rad/m
    bool degenerate = false; // no significant fringe amplitude
};

/// Least-squares fringe fit around window_center:
///   I(z) = a (1 + v m(z) cos(k (z - center) + phase)).
/// m is the envelope factor: the source correlation model when mu_model is
/// given (centered on window_center), otherwise the trace's own normalized
/// envelope, or identically 1 when the envelope is flat — the plain offset
/// cosine fit. k is seeded from idler_m and the trace convention, then
/// refined. Deterministic. window_halfwidth_m <= 0 picks an envelope-aware
/// default.
FringeFit fit_fringes(const Interferogram& trace, double window_center_m, double idler_m,
                      double window_halfwidth_m = 0.0,
                      const CorrelationFunction* mu_model = nullptr);

struct ValueWithSigma {
    double value = 0.0;
    double sigma = 0.0;
};

enum class Geometry { SingleWindow, CompoundWaveplate };

struct EstimateOptions {
    Geometry geometry = Geometry::SingleWindow;
    ValueWithSigma reference_visibility{1.0, 0.0};
    double reference_amplitude = 1.0;  // |r_ref| of the calibration mirror itself
    double ambient_index = 1.0;
    // Known plate thicknesses for the waveplate geometry.
    ValueWithSigma plate1_thickness_m{0.0, 0.0};
    ValueWithSigma plate2_thickness_m{0.0, 0.0};
};

struct MaterialEstimate {
    ValueWithSigma reflectance;        // R of the first surface
    ValueWithSigma refractive_index;   // n from Fresnel inversion (or n_o)
    ValueWithSigma thickness_m;        // window thickness / air gap
    std::optional<std::pair<ValueWithSigma, ValueWithSigma>> birefringence;  // n_o, n_e
    double eq_consistency_residual = 0.0;  // second-surface visibility check
    std::vector<double> peak_spacings_m;
};

/// Recover material quantities from a layer report:
///  - SingleWindow: |r1| = (V1/V_ref) |r_ref|, R = r1^2, n by Fresnel
///    inversion, thickness = spacing / n; the second-surface visibility is
///    checked against the loss chain and reported as a residual.
///  - CompoundWaveplate: n_o = s1/d1, n_e = s3/d2, air gap = s2.
/// First-order uncertainty propagation throughout. Throws GeometryError
/// naming the missing peak when the report does not fit the geometry.
MaterialEstimate estimate_material(const LayerReport& report, const EstimateOptions& options);

}  // namespace nloct
