#pragma once

// Independent reference arithmetic for the tests: dense Eigen matrices built
// straight from the Pauli exponentials, no code shared with the library.

#include "qru/circuit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using M2 = Eigen::Matrix2cd;

inline M2 pauli(char a) {
    M2 m;
    switch (a) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, C(0, -1), C(0, 1), 0; break;
    default: m << 1, 0, 0, -1; break;
    }
    return m;
}

// exp(-i t s/2) = cos(t/2) I - i sin(t/2) s
inline M2 rot(char a, double t) {
    return std::cos(t / 2) * M2::Identity() - C(0, 1) * std::sin(t / 2) * pauli(a);
}

inline char letter(qru::RotationAxis a) {
    return a == qru::RotationAxis::X ? 'x' : a == qru::RotationAxis::Y ? 'y' : 'z';
}

inline M2 to_eigen(const qru::Unitary2& u) {
    M2 m;
    m << u(0, 0), u(0, 1), u(1, 0), u(1, 1);
    return m;
}

// Reference h(x): walks the documented layout with dense products.
inline double forward(const qru::CircuitSpec& spec, const std::vector<double>& p, const std::vector<double>& x) {
    const auto& s = spec.scheme;
    const int ppi = s.params_per_input;
    Eigen::Vector2cd psi(1, 0);
    std::size_t k = 0;
    for (int l = 0; l < spec.depth; ++l) {
        for (int j = 0; j < spec.n_features; ++j) {
            const double* b = &p[k];
            double angle = x[static_cast<std::size_t>(j)];
            if (ppi == 3) angle = b[1] * angle;
            if (ppi == 4) angle = b[1] * angle + b[2];
            if (ppi == 5) angle = b[1] * b[1] * angle + b[2] * angle + b[3];
            psi = rot(letter(s.outer), b[0]) * psi;
            psi = rot(letter(s.middle), angle) * psi;
            if (ppi >= 2) psi = rot(letter(s.closing), b[ppi - 1]) * psi;
            k += static_cast<std::size_t>(ppi);
        }
    }
    return std::norm(psi(0)) - std::norm(psi(1));
}

inline std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& e : v) e = d(rng);
    return v;
}

} // namespace oracle
