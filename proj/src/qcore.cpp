#include "qru/qcore.hpp"

#include "qru/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qru {

namespace {

constexpr double kRenormalizeThreshold = 1e-13;

Amplitude trace(const Unitary2& u) { return u(0, 0) + u(1, 1); }

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a == -std::numbers::pi ? std::numbers::pi : a;
}

} // namespace

char axis_letter(RotationAxis axis) {
    switch (axis) {
    case RotationAxis::X: return 'x';
    case RotationAxis::Y: return 'y';
    case RotationAxis::Z: return 'z';
    }
    return '?';
}

RotationAxis axis_from_letter(char c) {
    switch (c) {
    case 'x': case 'X': return RotationAxis::X;
    case 'y': case 'Y': return RotationAxis::Y;
    case 'z': case 'Z': return RotationAxis::Z;
    default: throw InvalidInput(std::string("unknown rotation axis '") + c + "'");
    }
}

Unitary2 Unitary2::adjoint() const {
    return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
}

Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
    Unitary2 r;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
        }
    }
    return r;
}

Unitary2 rotation_matrix(RotationAxis axis, double angle) {
    if (!std::isfinite(angle)) {
        throw InvalidInput("rotation angle must be finite");
    }
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    switch (axis) {
    case RotationAxis::X:
        return {{Amplitude{c, 0.0}, Amplitude{0.0, -s}, Amplitude{0.0, -s}, Amplitude{c, 0.0}}};
    case RotationAxis::Y:
        return {{Amplitude{c, 0.0}, Amplitude{-s, 0.0}, Amplitude{s, 0.0}, Amplitude{c, 0.0}}};
    case RotationAxis::Z:
        return {{Amplitude{c, -s}, Amplitude{0.0}, Amplitude{0.0}, Amplitude{c, s}}};
    }
    throw InvalidInput("unknown rotation axis");
}

PureState apply_gate(const PureState& state, const Unitary2& u) {
    PureState out{u(0, 0) * state.a0 + u(0, 1) * state.a1, u(1, 0) * state.a0 + u(1, 1) * state.a1};
    const double n2 = out.norm_squared();
    if (std::abs(n2 - 1.0) > kRenormalizeThreshold) {
        const double inv = 1.0 / std::sqrt(n2);
        out.a0 *= inv;
        out.a1 *= inv;
    }
    return out;
}

double expectation_z(const PureState& state) { return std::norm(state.a0) - std::norm(state.a1); }

double state_fidelity(const PureState& s1, const PureState& s2) {
    return std::norm(std::conj(s1.a0) * s2.a0 + std::conj(s1.a1) * s2.a1);
}

PureState haar_state(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Amplitude a0{gauss(rng), gauss(rng)};
    Amplitude a1{gauss(rng), gauss(rng)};
    const double inv = 1.0 / std::sqrt(std::norm(a0) + std::norm(a1));
    return {a0 * inv, a1 * inv};
}

PureState haar_state(std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    return haar_state(rng);
}

double unitarity_defect(const Unitary2& u) {
    const Unitary2 p = u.adjoint() * u;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            worst = std::max(worst, std::abs(p(i, j) - Amplitude{i == j ? 1.0 : 0.0}));
        }
    }
    return worst;
}

double phase_invariant_distance(const Unitary2& a, const Unitary2& b) {
    const Amplitude overlap = trace(a.adjoint() * b);
    const Amplitude phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Amplitude{1.0};
    double worst = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        worst = std::max(worst, std::abs(a.m[k] * phase - b.m[k]));
    }
    return worst;
}

Unitary2 euler_zyx_compose(const EulerZYX& e) {
    return rotation_matrix(RotationAxis::Z, e.phi) * rotation_matrix(RotationAxis::Y, e.theta) *
           rotation_matrix(RotationAxis::X, e.psi);
}

EulerZYX euler_zyx_decompose(const Unitary2& u) {
    for (const auto& a : u.m) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw InvalidInput("euler_zyx_decompose: non-finite matrix entry");
        }
    }
    if (unitarity_defect(u) > 1e-10) {
        throw InvalidInput("euler_zyx_decompose: matrix is not unitary");
    }
    // Strip the global phase so u = q0 I - i (q1 X + q2 Y + q3 Z).
    const Amplitude det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    const Amplitude phase = std::sqrt(det);
    Unitary2 v = u;
    for (auto& a : v.m) {
        a /= phase;
    }
    const double q0 = 0.5 * (v(0, 0).real() + v(1, 1).real());
    const double q1 = -0.5 * (v(0, 1).imag() + v(1, 0).imag());
    const double q2 = 0.5 * (v(1, 0).real() - v(0, 1).real());
    const double q3 = 0.5 * (v(1, 1).imag() - v(0, 0).imag());

    // Half-angle combinations: (q0 - q2, q1 + q3) carries (phi + psi)/2 with weight
    // cos(theta/2) - sin(theta/2), (q0 + q2, q3 - q1) carries (phi - psi)/2 with weight
    // cos(theta/2) + sin(theta/2). Both weights vanish only linearly at gimbal lock.
    const double w_sum = std::hypot(q0 - q2, q1 + q3);
    const double w_diff = std::hypot(q0 + q2, q3 - q1);
    const double half_sum = std::atan2(q1 + q3, q0 - q2);
    const double half_diff = std::atan2(q3 - q1, q0 + q2);
    const double theta = 2.0 * std::atan2(w_diff, w_sum) - 0.5 * std::numbers::pi;
    return {wrap_angle(half_sum + half_diff), theta, wrap_angle(half_sum - half_diff)};
}

} // namespace qru
