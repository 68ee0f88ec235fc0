#pragma once

// Two optimizer steps written out by hand for a toy quadratic
// L(a, b) = a^2/2 + 2 b^2, gradient (a, 4b), starting at (0.5, -1.0).

#include "qru/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace oracle {

inline constexpr double kLr = 0.1;
inline constexpr std::array<double, 2> kStart{0.5, -1.0};

inline std::array<double, 2> toy_grad(const std::array<double, 2>& p) { return {p[0], 4.0 * p[1]}; }

// Hand recurrences with the library's default hyperparameters.
inline double hand_two_steps(qru::OptimizerType type, double x0, double scale) {
    using T = qru::OptimizerType;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8, alpha = 0.9, lam = 0.01, rho = 0.9, lr = kLr;
    const double g1 = scale * x0;
    switch (type) {
    case T::SGD: {
        const double x1 = x0 - lr * g1;
        return x1 - lr * scale * x1;
    }
    case T::RMSProp: {
        const double v1 = (1 - alpha) * g1 * g1;
        const double x1 = x0 - lr * g1 / std::sqrt(v1 + eps);
        const double g2 = scale * x1;
        const double v2 = alpha * v1 + (1 - alpha) * g2 * g2;
        return x1 - lr * g2 / std::sqrt(v2 + eps);
    }
    case T::Adam:
    case T::AdamW: {
        const double decay = type == T::AdamW ? 1 - lr * lam : 1.0;
        // step 1: bias-corrected moments are g1 and g1^2
        const double x1 = x0 * decay - lr * g1 / (std::abs(g1) + eps);
        const double g2 = scale * x1;
        const double m2 = b1 * (1 - b1) * g1 + (1 - b1) * g2;
        const double v2 = b2 * (1 - b2) * g1 * g1 + (1 - b2) * g2 * g2;
        const double mh = m2 / (1 - b1 * b1);
        const double vh = v2 / (1 - b2 * b2);
        return x1 * decay - lr * mh / (std::sqrt(vh) + eps);
    }
    case T::Adamax: {
        const double x1 = x0 - lr * g1 / (std::abs(g1) + eps);
        const double g2 = scale * x1;
        const double m2 = b1 * (1 - b1) * g1 + (1 - b1) * g2;
        const double u2 = std::max(b2 * std::abs(g1), std::abs(g2));
        return x1 - lr / (1 - b1 * b1) * m2 / (u2 + eps);
    }
    case T::Nadam: {
        // m_bar = b1 * m_hat + (1 - b1) * g / (1 - b1^t)
        const double m1 = (1 - b1) * g1;
        const double mbar1 = b1 * m1 / (1 - b1) + (1 - b1) * g1 / (1 - b1);
        const double x1 = x0 - lr * mbar1 / (std::abs(g1) + eps);
        const double g2 = scale * x1;
        const double m2 = b1 * m1 + (1 - b1) * g2;
        const double v2 = b2 * (1 - b2) * g1 * g1 + (1 - b2) * g2 * g2;
        const double mbar2 = b1 * m2 / (1 - b1 * b1) + (1 - b1) * g2 / (1 - b1 * b1);
        return x1 - lr * mbar2 / (std::sqrt(v2 / (1 - b2 * b2)) + eps);
    }
    case T::Adagrad: {
        const double x1 = x0 - lr * g1 / (std::abs(g1) + eps);
        const double g2 = scale * x1;
        return x1 - lr * g2 / (std::sqrt(g1 * g1 + g2 * g2) + eps);
    }
    case T::Adadelta: {
        const double e1 = (1 - rho) * g1 * g1;
        const double d1 = -std::sqrt(eps) / std::sqrt(e1 + eps) * g1;
        const double s1 = (1 - rho) * d1 * d1;
        const double x1 = x0 + d1;
        const double g2 = scale * x1;
        const double e2 = rho * e1 + (1 - rho) * g2 * g2;
        const double d2 = -std::sqrt(s1 + eps) / std::sqrt(e2 + eps) * g2;
        return x1 + d2;
    }
    }
    return 0.0;
}

// Largest |library - hand| over both coordinates after two steps.
inline double optimizer_two_step_error(qru::OptimizerType type) {
    const qru::OptimizerKind kind = qru::OptimizerKind::of(type);
    qru::OptimizerState state = qru::OptimizerState::init(kind, 2);
    std::array<double, 2> p = kStart;
    for (int step = 0; step < 2; ++step) {
        const auto g = toy_grad(p);
        qru::optimizer_step(kind, state, p, g, kLr);
    }
    return std::max(std::abs(p[0] - hand_two_steps(type, kStart[0], 1.0)),
                    std::abs(p[1] - hand_two_steps(type, kStart[1], 4.0)));
}

} // namespace oracle
