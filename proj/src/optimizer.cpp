#include "qru/training.hpp"

#include "qru/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace qru {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool uses_first_moment(OptimizerType t) {
    return t == OptimizerType::Adam || t == OptimizerType::Adamax || t == OptimizerType::Nadam ||
           t == OptimizerType::AdamW;
}

bool uses_second_moment(OptimizerType t) {
    return t != OptimizerType::SGD && t != OptimizerType::Adamax;
}

bool uses_third_buffer(OptimizerType t) { return t == OptimizerType::Adamax || t == OptimizerType::Adadelta; }

} // namespace

std::string optimizer_name(OptimizerType type) {
    switch (type) {
    case OptimizerType::SGD: return "sgd";
    case OptimizerType::RMSProp: return "rmsprop";
    case OptimizerType::Adam: return "adam";
    case OptimizerType::Adamax: return "adamax";
    case OptimizerType::Nadam: return "nadam";
    case OptimizerType::Adagrad: return "adagrad";
    case OptimizerType::Adadelta: return "adadelta";
    case OptimizerType::AdamW: return "adamw";
    }
    return "unknown";
}

OptimizerKind OptimizerKind::parse(std::string_view name) {
    const std::string key = lowercase(name);
    for (OptimizerType t : kAllOptimizers) {
        if (optimizer_name(t) == key) {
            return of(t);
        }
    }
    throw InvalidInput("unknown optimizer '" + std::string(name) + "'");
}

std::string OptimizerKind::name() const { return optimizer_name(type); }

void OptimizerKind::validate() const {
    const auto in_unit = [](double r) { return r > 0.0 && r < 1.0; };
    if (!in_unit(beta1) || !in_unit(beta2) || !in_unit(rms_decay) || !in_unit(rho)) {
        throw InvalidInput("optimizer decay rates must lie in (0, 1)");
    }
    if (!(eps > 0.0)) {
        throw InvalidInput("optimizer eps must be positive");
    }
    if (!(weight_decay >= 0.0)) {
        throw InvalidInput("weight decay must be non-negative");
    }
}

OptimizerState OptimizerState::init(const OptimizerKind& kind, std::size_t n_params) {
    OptimizerState s;
    s.type = kind.type;
    if (uses_first_moment(kind.type)) {
        s.m.assign(n_params, 0.0);
    }
    if (uses_second_moment(kind.type)) {
        s.v.assign(n_params, 0.0);
    }
    if (uses_third_buffer(kind.type)) {
        s.u.assign(n_params, 0.0);
    }
    return s;
}

void optimizer_step(const OptimizerKind& kind, OptimizerState& state, std::span<double> params,
                    std::span<const double> grads, double lr) {
    if (state.type != kind.type) {
        throw InvalidInput("optimizer state was initialised for " + optimizer_name(state.type) + ", not " +
                           kind.name());
    }
    const std::size_t n = params.size();
    if (grads.size() != n || (uses_first_moment(kind.type) && state.m.size() != n) ||
        (uses_second_moment(kind.type) && state.v.size() != n) ||
        (uses_third_buffer(kind.type) && state.u.size() != n)) {
        throw LayoutError("optimizer_step: parameter, gradient and state sizes disagree");
    }
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double b1 = kind.beta1;
    const double b2 = kind.beta2;
    const double bc1 = kind.bias_correction ? 1.0 - std::pow(b1, t) : 1.0;
    const double bc2 = kind.bias_correction ? 1.0 - std::pow(b2, t) : 1.0;

    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads[i];
        double& p = params[i];
        switch (kind.type) {
        case OptimizerType::SGD:
            p -= lr * g;
            break;
        case OptimizerType::RMSProp:
            state.v[i] = kind.rms_decay * state.v[i] + (1.0 - kind.rms_decay) * g * g;
            p -= lr * g / std::sqrt(state.v[i] + kind.eps);
            break;
        case OptimizerType::AdamW:
            p -= lr * kind.weight_decay * p;
            [[fallthrough]];
        case OptimizerType::Adam: {
            state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
            state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
            const double m_hat = state.m[i] / bc1;
            const double v_hat = state.v[i] / bc2;
            p -= lr * m_hat / (std::sqrt(v_hat) + kind.eps);
            break;
        }
        case OptimizerType::Adamax:
            state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
            state.u[i] = std::max(b2 * state.u[i], std::abs(g));
            p -= (lr / bc1) * state.m[i] / (state.u[i] + kind.eps);
            break;
        case OptimizerType::Nadam: {
            state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
            state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
            // Nesterov look-ahead: blend the corrected moment with the current gradient.
            const double m_bar = b1 * state.m[i] / bc1 + (1.0 - b1) * g / bc1;
            p -= lr * m_bar / (std::sqrt(state.v[i] / bc2) + kind.eps);
            break;
        }
        case OptimizerType::Adagrad:
            state.v[i] += g * g;
            p -= lr * g / (std::sqrt(state.v[i]) + kind.eps);
            break;
        case OptimizerType::Adadelta: {
            state.v[i] = kind.rho * state.v[i] + (1.0 - kind.rho) * g * g;
            const double delta = -std::sqrt(state.u[i] + kind.eps) / std::sqrt(state.v[i] + kind.eps) * g;
            state.u[i] = kind.rho * state.u[i] + (1.0 - kind.rho) * delta * delta;
            p += delta;
            break;
        }
        }
    }
}

} // namespace qru
