#pragma once

#include "qru/qcore.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qru {

struct Dataset;

/// Gate layout of one feature block: outer(theta) - middle(encoded x) - closing(theta).
/// Sandwich layouts repeat the outer axis as the closing axis; triplet layouts use
/// three distinct axes.
struct EncodingScheme {
    RotationAxis outer = RotationAxis::X;
    RotationAxis middle = RotationAxis::Y;
    RotationAxis closing = RotationAxis::X;
    int params_per_input = 3;
    bool triplet = false;

    static EncodingScheme sandwich(RotationAxis outer, RotationAxis middle, int params_per_input = 3);
    static EncodingScheme triplet_layout(RotationAxis outer, RotationAxis middle, RotationAxis closing,
                                         int params_per_input = 3);
    /// "xyx" is a sandwich, "xyz" a triplet.
    static EncodingScheme parse(std::string_view axes, int params_per_input);

    std::string axes() const;
    void validate() const;

    /// Trainable values feeding the middle gate angle: 0, 0, 1, 2, 3 for ppi 1..5.
    int middle_param_count() const;
    bool has_closing_gate() const { return params_per_input >= 2; }
};

struct CircuitSpec {
    int depth = 1;
    int n_features = 1;
    EncodingScheme scheme;

    void validate() const;
};

using ParamVector = std::vector<double>;

std::size_t param_count(const CircuitSpec& spec);

/// Middle-gate angle for one feature value. theta_slice holds the middle_param_count()
/// values: ppi 3 scales x, ppi 4 adds a bias, ppi 5 adds a quadratic-in-theta term.
double encoded_angle(const EncodingScheme& scheme, std::span<const double> theta_slice, double x);

PureState output_state(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x);

/// h(x) = <0| U^dagger Z U |0>
double forward(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x);

struct ForwardGradient {
    double value = 0.0;
    std::vector<double> grad;
};

/// Exact dh/dtheta via the parameter-shift rule on every gate angle, chained
/// through encoded_angle for the data-carrying gates.
ForwardGradient forward_and_gradient(const CircuitSpec& spec, std::span<const double> params,
                                     std::span<const double> x);

std::vector<double> gradient(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x);

/// Evenly spaced class targets -1 + 2k/(n-1); a single class maps to 0.
std::vector<double> default_targets(int n_classes);

/// Index of the nearest target; ties go to the lower index.
int predict_class(double h, std::span<const double> targets);

/// Fraction of records whose decoded prediction equals the label.
double evaluate(const CircuitSpec& spec, std::span<const double> params, const Dataset& ds,
                std::span<const double> targets);

} // namespace qru
