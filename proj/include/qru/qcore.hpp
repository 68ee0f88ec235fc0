#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace qru {

using Amplitude = std::complex<double>;

enum class RotationAxis { X, Y, Z };

char axis_letter(RotationAxis axis);
RotationAxis axis_from_letter(char c);

/// Single-qubit pure state a0|0> + a1|1>, kept at unit norm.
struct PureState {
    Amplitude a0{1.0, 0.0};
    Amplitude a1{0.0, 0.0};

    static PureState zero() { return {}; }
    static PureState one() { return {{0.0, 0.0}, {1.0, 0.0}}; }

    double norm_squared() const { return std::norm(a0) + std::norm(a1); }
};

/// Row-major 2x2 complex matrix; every gate produced by this module is unitary.
struct Unitary2 {
    std::array<Amplitude, 4> m{Amplitude{1.0}, Amplitude{0.0}, Amplitude{0.0}, Amplitude{1.0}};

    Amplitude operator()(int row, int col) const { return m[static_cast<std::size_t>(2 * row + col)]; }
    Amplitude& operator()(int row, int col) { return m[static_cast<std::size_t>(2 * row + col)]; }

    static Unitary2 identity() { return {}; }
    Unitary2 adjoint() const;
};

Unitary2 operator*(const Unitary2& a, const Unitary2& b);

/// R_a(angle) = exp(-i angle sigma_a / 2). Throws InvalidInput on a non-finite angle.
Unitary2 rotation_matrix(RotationAxis axis, double angle);

/// U|state>; renormalizes when the norm drifts by more than 1e-13.
PureState apply_gate(const PureState& state, const Unitary2& u);

double expectation_z(const PureState& state);

/// |<s1|s2>|^2
double state_fidelity(const PureState& s1, const PureState& s2);

/// Haar-random state: two standard complex Gaussians, normalized.
PureState haar_state(std::uint64_t rng_seed);
PureState haar_state(std::mt19937_64& rng);

/// Largest entrywise deviation of U^dagger U from the identity.
double unitarity_defect(const Unitary2& u);

/// Entrywise distance between a and b after removing the best global phase.
double phase_invariant_distance(const Unitary2& a, const Unitary2& b);

struct EulerZYX {
    double phi = 0.0;   // outer R_z
    double theta = 0.0; // middle R_y, in [-pi/2, pi/2]
    double psi = 0.0;   // inner R_x
};

/// Angles with R_z(phi) R_y(theta) R_x(psi) = u up to global phase.
/// Throws InvalidInput if u is not unitary within 1e-10.
EulerZYX euler_zyx_decompose(const Unitary2& u);

Unitary2 euler_zyx_compose(const EulerZYX& angles);

} // namespace qru
