#include "nloct/sample.hpp"

#include <algorithm>
#include <cmath>

#include "nloct/errors.hpp"

namespace nloct {

namespace {

void validate_stack(const SampleStack& stack) {
    if (!(stack.ambient_index >= 1.0)) {
        throw ValidationError("ambient index must be >= 1");
    }
    if (!(stack.reference_reflectivity > 0.0 && stack.reference_reflectivity <= 1.0)) {
        throw ValidationError("reference reflectivity must be in (0, 1]");
    }
    for (const auto& layer : stack.layers) {
        if (!(layer.thickness_m > 0.0)) {
            throw ValidationError("layer '" + layer.label + "': thickness must be > 0");
        }
        if (!(layer.index_o >= 1.0) || !(layer.index_e >= 1.0)) {
            throw ValidationError("layer '" + layer.label + "': indices must be >= 1");
        }
        if (!(layer.amplitude_transmission > 0.0 && layer.amplitude_transmission <= 1.0)) {
            throw ValidationError("layer '" + layer.label + "': tau must be in (0, 1]");
        }
    }
}

// Bounded path enumeration over the interface set. Regions are numbered
// 0..L+1 (ambient, layers, ambient); interface j sits between regions j
// and j+1. Amplitudes carry the Fresnel sign; each region traversal applies
// its optical thickness and single-pass loss.
class PathEnumerator {
public:
    PathEnumerator(const SampleStack& stack, int max_order) : max_order_(max_order) {
        const std::size_t n_layers = stack.layers.size();
        index_.resize(n_layers + 2, stack.ambient_index);
        optical_.resize(n_layers + 2, 0.0);
        tau_.resize(n_layers + 2, 1.0);
        for (std::size_t i = 0; i < n_layers; ++i) {
            const double n = layer_probe_index(stack.layers[i], stack);
            index_[i + 1] = n;
            optical_[i + 1] = n * stack.layers[i].thickness_m;
            tau_[i + 1] = stack.layers[i].amplitude_transmission;
        }
        const std::size_t n_ifaces = n_layers + 1;
        refl_.resize(n_ifaces);
        trans_down_.resize(n_ifaces);
        trans_up_.resize(n_ifaces);
        for (std::size_t j = 0; j < n_ifaces; ++j) {
            refl_[j] = fresnel_amplitude(index_[j], index_[j + 1]);
            trans_down_[j] = 2.0 * index_[j] / (index_[j] + index_[j + 1]);
            trans_up_[j] = 2.0 * index_[j + 1] / (index_[j] + index_[j + 1]);
        }
    }

    std::vector<Echo> run() {
        route_.clear();
        echoes_.clear();
        descend(0, 1.0, 0.0, 0);
        return std::move(echoes_);
    }

private:
    int last_interface() const { return static_cast<int>(refl_.size()) - 1; }

    // Moving down in region r, about to hit interface r. amp/path include the
    // downward traversal of region r.
    void descend(int r, double amp, double path, int bounces) {
        route_.push_back(r);
        ascend(r, amp * refl_[static_cast<std::size_t>(r)] * tau_[static_cast<std::size_t>(r)],
               path + optical_[static_cast<std::size_t>(r)], bounces);
        route_.pop_back();
        if (r + 1 <= last_interface()) {
            descend(r + 1,
                    amp * trans_down_[static_cast<std::size_t>(r)] *
                        tau_[static_cast<std::size_t>(r) + 1],
                    path + optical_[static_cast<std::size_t>(r) + 1], bounces);
        }
    }

    // Moving up in region r; amp/path include the upward traversal of region r.
    void ascend(int r, double amp, double path, int bounces) {
        if (r == 0) {
            Echo e;
            e.optical_depth_m = 0.5 * path;
            e.signed_amplitude = amp;
            e.raw_visibility = std::abs(amp);
            e.order = bounces;
            e.surface_path = route_;
            echoes_.push_back(std::move(e));
            return;
        }
        const auto above = static_cast<std::size_t>(r - 1);
        ascend(r - 1, amp * trans_up_[above] * tau_[above], path + optical_[above], bounces);
        if (bounces + 1 <= max_order_) {
            route_.push_back(r - 1);
            descend(r, amp * (-refl_[above]) * tau_[static_cast<std::size_t>(r)],
                    path + optical_[static_cast<std::size_t>(r)], bounces + 1);
            route_.pop_back();
        }
    }

    int max_order_;
    std::vector<double> index_, optical_, tau_;
    std::vector<double> refl_, trans_down_, trans_up_;
    std::vector<int> route_;
    std::vector<Echo> echoes_;
};

}  // namespace

double fresnel_amplitude(double n1, double n2) {
    if (!(n1 >= 1.0) || !(n2 >= 1.0)) {
        throw ValidationError("fresnel_amplitude expects non-absorbing indices >= 1");
    }
    return (n1 - n2) / (n1 + n2);
}

double invert_fresnel(double reflectance, double ambient_index) {
    if (!(reflectance >= 0.0) || reflectance >= 1.0) {
        throw ValidationError("invert_fresnel needs reflectance in [0, 1)");
    }
    const double r = std::sqrt(reflectance);
    return ambient_index * (1.0 + r) / (1.0 - r);
}

double layer_probe_index(const Layer& layer, const SampleStack& stack) {
    const double n_along_probe = layer.fast_axis_along_probe ? layer.index_o : layer.index_e;
    const double n_across_probe = layer.fast_axis_along_probe ? layer.index_e : layer.index_o;
    switch (stack.probe_polarization) {
        case ProbePolarization::AlongFast:
            return n_along_probe;
        case ProbePolarization::AlongSlow:
            return n_across_probe;
        case ProbePolarization::CustomAngle: {
            // Effective index of the field component at probe_angle_rad from
            // the stack's fast reference (index ellipsoid, normal incidence).
            const double c = std::cos(stack.probe_angle_rad);
            const double s = std::sin(stack.probe_angle_rad);
            const double inv2 = c * c / (n_along_probe * n_along_probe) +
                                s * s / (n_across_probe * n_across_probe);
            return 1.0 / std::sqrt(inv2);
        }
    }
    throw ValidationError("unknown probe polarization");
}

double optical_thickness(const Layer& layer, Polarization pol) {
    if (!(layer.thickness_m > 0.0)) {
        throw ValidationError("optical_thickness: layer thickness must be > 0");
    }
    return (pol == Polarization::Ordinary ? layer.index_o : layer.index_e) * layer.thickness_m;
}

EchoList visibility_chain(const SampleStack& stack, int max_echo_order, double visibility_floor) {
    validate_stack(stack);
    if (max_echo_order < 0) {
        throw ValidationError("max_echo_order must be >= 0");
    }

    EchoList list;
    list.reference_reflectivity = stack.reference_reflectivity;

    if (stack.layers.empty()) {
        // Calibration mirror: a single reflection at the path-length origin.
        Echo e;
        e.optical_depth_m = 0.0;
        e.raw_visibility = 1.0;
        e.signed_amplitude = 1.0;
        e.order = 0;
        list.echoes.push_back(std::move(e));
    } else {
        PathEnumerator enumerate(stack, max_echo_order);
        list.echoes = enumerate.run();
    }

    std::erase_if(list.echoes, [&](const Echo& e) { return e.raw_visibility < visibility_floor; });
    for (auto& e : list.echoes) {
        e.visibility = stack.reference_reflectivity * e.raw_visibility;
    }
    std::sort(list.echoes.begin(), list.echoes.end(), [](const Echo& a, const Echo& b) {
        if (a.optical_depth_m != b.optical_depth_m) {
            return a.optical_depth_m < b.optical_depth_m;
        }
        if (a.order != b.order) {
            return a.order < b.order;
        }
        return a.surface_path < b.surface_path;
    });
    return list;
}

}  // namespace nloct
