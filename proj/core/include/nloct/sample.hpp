#pragma once

#include <string>
#include <vector>

#include "nloct/material.hpp"

namespace nloct {

/// One physical layer of a layered sample at the probing wavelength.
struct Layer {
    double thickness_m = 0.0;
    double index_o = 1.0;                 // index along the layer's fast axis
    double index_e = 1.0;                 // index along the layer's slow axis
    double amplitude_transmission = 1.0;  // |tau| per single pass, loss only
    std::string label;
    bool fast_axis_along_probe = true;    // false when the layer is rotated 90 deg
};

enum class ProbePolarization { AlongFast, AlongSlow, CustomAngle };

/// Ordered layer stack in a surrounding medium. An empty layer list denotes
/// the calibration configuration (reference mirror only).
struct SampleStack {
    std::vector<Layer> layers;
    double ambient_index = 1.0;
    ProbePolarization probe_polarization = ProbePolarization::AlongFast;
    double probe_angle_rad = 0.0;  // used with CustomAngle, from the fast axis
    // Effective amplitude reflectivity of the calibration mirror; apparatus
    // losses are folded in, so the calibration run's fringe visibility equals
    // this number.
    double reference_reflectivity = 1.0;
    std::string label;
};

/// One interferogram contribution: a reflection path through the stack.
struct Echo {
    double optical_depth_m = 0.0;  // mirror displacement from the front surface
    double visibility = 0.0;       // absolute fringe visibility (reference applied)
    double raw_visibility = 0.0;   // |r| chain before the reference factor
    int order = 0;                 // number of internal re-reflections
    std::vector<int> surface_path; // interfaces where the path reflected
    double signed_amplitude = 0.0; // carries the accumulated pi phase flips
};

struct EchoList {
    std::vector<Echo> echoes;  // sorted by ascending optical depth
    double reference_reflectivity = 1.0;
};

/// Normal-incidence amplitude reflection coefficient n1 -> n2 (signed).
double fresnel_amplitude(double n1, double n2);

/// Dense-medium inverse of the normal-incidence power reflectance:
/// n = ambient (1 + sqrt(R)) / (1 - sqrt(R)).
double invert_fresnel(double reflectance, double ambient_index = 1.0);

/// Index seen by the probe polarization in one layer.
double layer_probe_index(const Layer& layer, const SampleStack& stack);

/// n_pol * d for one layer.
double optical_thickness(const Layer& layer, Polarization pol);

/// Enumerate reflection paths (direct reflections plus multi-bounce echoes up
/// to max_echo_order internal re-reflections) and their fringe visibilities.
/// Entries below visibility_floor (raw) are pruned.
EchoList visibility_chain(const SampleStack& stack, int max_echo_order = 2,
                          double visibility_floor = 1e-4);

}  // namespace nloct
