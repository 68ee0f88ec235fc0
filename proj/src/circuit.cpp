#include "qru/circuit.hpp"

#include "qru/dataio.hpp"
#include "qru/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace qru {

namespace {

struct Gate {
    RotationAxis axis;
    double angle;
    // Owning parameter for outer/closing gates; -1 for the data-carrying gate.
    int param = -1;
    // For the data-carrying gate: first middle parameter and d(angle)/d(theta).
    int middle_offset = 0;
    int middle_count = 0;
    std::array<double, 3> chain{};
};

// 2x2 Hermitian observable, row-major.
using Observable = Unitary2;

Observable conjugate(const Observable& o, const Unitary2& g) { return g.adjoint() * o * g; }

double expectation(const PureState& s, const Observable& o) {
    const Amplitude v0 = o(0, 0) * s.a0 + o(0, 1) * s.a1;
    const Amplitude v1 = o(1, 0) * s.a0 + o(1, 1) * s.a1;
    return (std::conj(s.a0) * v0 + std::conj(s.a1) * v1).real();
}

void check_layout(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x) {
    spec.validate();
    if (params.size() != param_count(spec)) {
        throw LayoutError("parameter vector has " + std::to_string(params.size()) + " entries, circuit expects " +
                          std::to_string(param_count(spec)));
    }
    if (x.size() != static_cast<std::size_t>(spec.n_features)) {
        throw LayoutError("feature vector has " + std::to_string(x.size()) + " entries, circuit expects " +
                          std::to_string(spec.n_features));
    }
}

std::vector<Gate> build_gates(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x) {
    const auto& sc = spec.scheme;
    const int ppi = sc.params_per_input;
    const int m = sc.middle_param_count();
    std::vector<Gate> gates;
    gates.reserve(static_cast<std::size_t>(spec.depth * spec.n_features * 3));
    int offset = 0;
    for (int layer = 0; layer < spec.depth; ++layer) {
        for (int j = 0; j < spec.n_features; ++j) {
            const double xj = x[static_cast<std::size_t>(j)];
            gates.push_back({sc.outer, params[static_cast<std::size_t>(offset)], offset});

            Gate mid{sc.middle, encoded_angle(sc, params.subspan(static_cast<std::size_t>(offset + 1),
                                                                 static_cast<std::size_t>(m)),
                                              xj)};
            mid.middle_offset = offset + 1;
            mid.middle_count = m;
            if (m == 1) {
                mid.chain = {xj, 0.0, 0.0};
            } else if (m == 2) {
                mid.chain = {xj, 1.0, 0.0};
            } else if (m == 3) {
                mid.chain = {2.0 * params[static_cast<std::size_t>(offset + 1)] * xj, xj, 1.0};
            }
            gates.push_back(mid);

            if (sc.has_closing_gate()) {
                const int idx = offset + ppi - 1;
                gates.push_back({sc.closing, params[static_cast<std::size_t>(idx)], idx});
            }
            offset += ppi;
        }
    }
    return gates;
}

} // namespace

EncodingScheme EncodingScheme::sandwich(RotationAxis outer, RotationAxis middle, int params_per_input) {
    EncodingScheme s{outer, middle, outer, params_per_input, false};
    s.validate();
    return s;
}

EncodingScheme EncodingScheme::triplet_layout(RotationAxis outer, RotationAxis middle, RotationAxis closing,
                                              int params_per_input) {
    EncodingScheme s{outer, middle, closing, params_per_input, true};
    s.validate();
    return s;
}

EncodingScheme EncodingScheme::parse(std::string_view axes, int params_per_input) {
    if (axes.size() != 3) {
        throw InvalidInput("encoding axes must be three letters such as 'xyx' or 'xyz', got '" + std::string(axes) +
                           "'");
    }
    const RotationAxis a = axis_from_letter(axes[0]);
    const RotationAxis b = axis_from_letter(axes[1]);
    const RotationAxis c = axis_from_letter(axes[2]);
    return a == c ? sandwich(a, b, params_per_input) : triplet_layout(a, b, c, params_per_input);
}

std::string EncodingScheme::axes() const { return {axis_letter(outer), axis_letter(middle), axis_letter(closing)}; }

void EncodingScheme::validate() const {
    if (params_per_input < 1 || params_per_input > 5) {
        throw InvalidInput("params_per_input must be in 1..5, got " + std::to_string(params_per_input));
    }
    if (triplet) {
        if (outer == middle || middle == closing || outer == closing) {
            throw InvalidInput("triplet layout needs three distinct axes, got " + axes());
        }
    } else if (outer != closing || outer == middle) {
        throw InvalidInput("sandwich layout needs outer == closing != middle, got " + axes());
    }
}

int EncodingScheme::middle_param_count() const {
    static constexpr std::array<int, 6> kCounts{0, 0, 0, 1, 2, 3};
    return kCounts.at(static_cast<std::size_t>(params_per_input));
}

void CircuitSpec::validate() const {
    if (depth < 1) {
        throw InvalidInput("circuit depth must be >= 1");
    }
    if (n_features < 1) {
        throw InvalidInput("circuit needs at least one feature");
    }
    scheme.validate();
}

std::size_t param_count(const CircuitSpec& spec) {
    return static_cast<std::size_t>(spec.depth) * static_cast<std::size_t>(spec.n_features) *
           static_cast<std::size_t>(spec.scheme.params_per_input);
}

double encoded_angle(const EncodingScheme& scheme, std::span<const double> theta_slice, double x) {
    const int m = scheme.middle_param_count();
    if (theta_slice.size() != static_cast<std::size_t>(m)) {
        throw LayoutError("encoded_angle: ppi " + std::to_string(scheme.params_per_input) + " expects " +
                          std::to_string(m) + " middle parameters, got " + std::to_string(theta_slice.size()));
    }
    switch (m) {
    case 0: return x;
    case 1: return theta_slice[0] * x;
    case 2: return theta_slice[0] * x + theta_slice[1];
    default: return theta_slice[0] * theta_slice[0] * x + theta_slice[1] * x + theta_slice[2];
    }
}

PureState output_state(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x) {
    check_layout(spec, params, x);
    PureState state = PureState::zero();
    for (const Gate& g : build_gates(spec, params, x)) {
        state = apply_gate(state, rotation_matrix(g.axis, g.angle));
    }
    return state;
}

double forward(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x) {
    return expectation_z(output_state(spec, params, x));
}

ForwardGradient forward_and_gradient(const CircuitSpec& spec, std::span<const double> params,
                                     std::span<const double> x) {
    check_layout(spec, params, x);
    const std::vector<Gate> gates = build_gates(spec, params, x);

    // states[k] is the state before gate k.
    std::vector<PureState> states;
    std::vector<Unitary2> mats;
    states.reserve(gates.size() + 1);
    mats.reserve(gates.size());
    states.push_back(PureState::zero());
    for (const Gate& g : gates) {
        mats.push_back(rotation_matrix(g.axis, g.angle));
        states.push_back(apply_gate(states.back(), mats.back()));
    }

    ForwardGradient out;
    out.value = expectation_z(states.back());
    out.grad.assign(params.size(), 0.0);

    // Walk backwards carrying the Heisenberg-picture observable of everything after gate k.
    Observable obs{{Amplitude{1.0}, Amplitude{0.0}, Amplitude{0.0}, Amplitude{-1.0}}};
    constexpr double kShift = std::numbers::pi / 2.0;
    for (std::size_t k = gates.size(); k-- > 0;) {
        const Gate& g = gates[k];
        const PureState& before = states[k];
        const double plus = expectation(apply_gate(before, rotation_matrix(g.axis, g.angle + kShift)), obs);
        const double minus = expectation(apply_gate(before, rotation_matrix(g.axis, g.angle - kShift)), obs);
        const double dh_dangle = 0.5 * (plus - minus);

        if (g.param >= 0) {
            out.grad[static_cast<std::size_t>(g.param)] += dh_dangle;
        } else {
            for (int i = 0; i < g.middle_count; ++i) {
                out.grad[static_cast<std::size_t>(g.middle_offset + i)] +=
                    dh_dangle * g.chain[static_cast<std::size_t>(i)];
            }
        }
        obs = conjugate(obs, mats[k]);
    }
    return out;
}

std::vector<double> gradient(const CircuitSpec& spec, std::span<const double> params, std::span<const double> x) {
    return forward_and_gradient(spec, params, x).grad;
}

std::vector<double> default_targets(int n_classes) {
    if (n_classes < 1) {
        throw InvalidInput("need at least one class");
    }
    if (n_classes == 1) {
        return {0.0};
    }
    std::vector<double> t(static_cast<std::size_t>(n_classes));
    for (int k = 0; k < n_classes; ++k) {
        t[static_cast<std::size_t>(k)] = -1.0 + 2.0 * k / (n_classes - 1);
    }
    return t;
}

int predict_class(double h, std::span<const double> targets) {
    if (targets.empty()) {
        throw InvalidInput("predict_class: empty target list");
    }
    int best = 0;
    double best_dist = std::abs(h - targets[0]);
    for (std::size_t k = 1; k < targets.size(); ++k) {
        const double d = std::abs(h - targets[k]);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(k);
        }
    }
    return best;
}

double evaluate(const CircuitSpec& spec, std::span<const double> params, const Dataset& ds,
                std::span<const double> targets) {
    if (ds.empty()) {
        throw InvalidInput("evaluate: empty dataset");
    }
    std::size_t correct = 0;
    for (const Record& r : ds.records) {
        if (predict_class(forward(spec, params, r.features), targets) == r.label) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

} // namespace qru
