#include "helpers.hpp"

#include "qru/error.hpp"
#include "qru/qcore.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace qru;
using std::numbers::pi;

namespace {

constexpr RotationAxis kAxes[] = {RotationAxis::X, RotationAxis::Y, RotationAxis::Z};

Unitary2 random_unitary(std::mt19937_64& rng, int n_gates) {
    std::uniform_real_distribution<double> angle(-2 * pi, 2 * pi);
    std::uniform_int_distribution<int> axis(0, 2);
    Unitary2 u = Unitary2::identity();
    for (int i = 0; i < n_gates; ++i) {
        u = rotation_matrix(kAxes[axis(rng)], angle(rng)) * u;
    }
    return u;
}

PureState random_state(std::mt19937_64& rng) { return haar_state(rng); }

} // namespace

TEST_SUITE("qcore") {

TEST_CASE("rotation matrices match the Pauli exponential") {
    std::mt19937_64 rng(3);
    for (RotationAxis a : kAxes) {
        for (double t : oracle::uniform(rng, 20, -7.0, 7.0)) {
            const auto ref = oracle::rot(oracle::letter(a), t);
            CHECK((oracle::to_eigen(rotation_matrix(a, t)) - ref).norm() < 1e-14);
        }
    }
    const Unitary2 id = rotation_matrix(RotationAxis::X, 0.0);
    CHECK(phase_invariant_distance(id, Unitary2::identity()) == doctest::Approx(0.0));
    CHECK(id(0, 0) == Amplitude(1.0));
    CHECK(id(0, 1) == Amplitude(0.0));
}

TEST_CASE("rotation determinant is one") {
    for (RotationAxis a : kAxes) {
        const Unitary2 u = rotation_matrix(a, 1.234);
        const Amplitude det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
        CHECK(std::abs(det - 1.0) < 1e-12);
    }
}

TEST_CASE("non-finite angles are rejected") {
    CHECK_THROWS_AS(rotation_matrix(RotationAxis::X, std::numeric_limits<double>::quiet_NaN()), InvalidInput);
    CHECK_THROWS_AS(rotation_matrix(RotationAxis::Z, std::numeric_limits<double>::infinity()), InvalidInput);
}

TEST_CASE("bit flips") {
    CHECK(expectation_z(apply_gate(PureState::zero(), rotation_matrix(RotationAxis::Y, pi))) ==
          doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(expectation_z(apply_gate(PureState::zero(), rotation_matrix(RotationAxis::X, pi))) ==
          doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("apply_gate") {
    const PureState s = apply_gate(PureState::zero(), Unitary2::identity());
    CHECK(s.a0 == Amplitude(1.0));
    CHECK(s.a1 == Amplitude(0.0));
    // Bloch vector (0,0,1) rotated by 0.3 about x has z = cos 0.3.
    CHECK(std::abs(expectation_z(apply_gate(PureState::zero(), rotation_matrix(RotationAxis::X, 0.3))) -
                   std::cos(0.3)) < 1e-15);
}

TEST_CASE("expectation_z") {
    CHECK(expectation_z(PureState::zero()) == 1.0);
    CHECK(expectation_z(PureState::one()) == -1.0);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(expectation_z(PureState{{r, 0.0}, {r, 0.0}})) < 1e-15);
}

TEST_CASE("state_fidelity") {
    std::mt19937_64 rng(11);
    const PureState psi = random_state(rng);
    CHECK(state_fidelity(psi, psi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(state_fidelity(PureState::zero(), PureState::one()) == 0.0);
    // R_y(pi/2)|0> = (|0> + |1>)/sqrt2
    const PureState plus = apply_gate(PureState::zero(), rotation_matrix(RotationAxis::Y, pi / 2));
    CHECK(std::abs(state_fidelity(PureState::zero(), plus) - 0.5) < 1e-15);
}

TEST_CASE("haar_state is seed deterministic") {
    const PureState a = haar_state(std::uint64_t{77});
    const PureState b = haar_state(std::uint64_t{77});
    CHECK(a.a0 == b.a0);
    CHECK(a.a1 == b.a1);
    CHECK(std::abs(a.norm_squared() - 1.0) < 1e-12);
    const PureState c = haar_state(std::uint64_t{78});
    CHECK(c.a0 != a.a0);
}

TEST_CASE("haar states have zero mean polarisation") {
    std::mt19937_64 rng(2024);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        sum += expectation_z(haar_state(rng));
    }
    CHECK(std::abs(sum / 10000.0) < 0.05);
}

TEST_CASE("haar pair fidelities are uniform on [0,1]") {
    // chi-square goodness of fit, 20 bins, 19 dof, alpha 0.01 critical value 36.191
    std::mt19937_64 rng(99);
    constexpr int kBins = 20;
    constexpr int kPairs = 10000;
    std::array<int, kBins> counts{};
    for (int i = 0; i < kPairs; ++i) {
        const double f = state_fidelity(haar_state(rng), haar_state(rng));
        counts[static_cast<std::size_t>(std::min(kBins - 1, static_cast<int>(f * kBins)))]++;
    }
    const double expected = static_cast<double>(kPairs) / kBins;
    double chi2 = 0.0;
    for (int c : counts) {
        chi2 += (c - expected) * (c - expected) / expected;
    }
    CHECK(chi2 < 36.191);
}

TEST_CASE("gates preserve norm") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int i = 0; i < 200; ++i) {
        const Unitary2 u = random_unitary(rng, 4);
        Eigen::Vector2cd v(oracle::C(n(rng), n(rng)), oracle::C(n(rng), n(rng)));
        CHECK(std::abs((oracle::to_eigen(u) * v).norm() - v.norm()) < 1e-12 * v.norm());
        CHECK(unitarity_defect(u) < 1e-12);
    }
}

TEST_CASE("rotation additivity") {
    std::mt19937_64 rng(6);
    for (RotationAxis a : kAxes) {
        for (int i = 0; i < 50; ++i) {
            const auto ab = oracle::uniform(rng, 2, -5.0, 5.0);
            const Unitary2 lhs = rotation_matrix(a, ab[0]) * rotation_matrix(a, ab[1]);
            CHECK(phase_invariant_distance(lhs, rotation_matrix(a, ab[0] + ab[1])) < 1e-12);
        }
    }
}

TEST_CASE("R_z leaves the Z projection alone") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const PureState s = random_state(rng);
        const double alpha = oracle::uniform(rng, 1, -7.0, 7.0)[0];
        CHECK(std::abs(expectation_z(apply_gate(s, rotation_matrix(RotationAxis::Z, alpha))) - expectation_z(s)) <
              1e-14);
    }
}

TEST_CASE("euler decomposition of simple gates") {
    const EulerZYX id = euler_zyx_decompose(Unitary2::identity());
    CHECK(std::abs(id.phi) < 1e-12);
    CHECK(std::abs(id.theta) < 1e-12);
    CHECK(std::abs(id.psi) < 1e-12);

    const EulerZYX y = euler_zyx_decompose(rotation_matrix(RotationAxis::Y, 0.9));
    CHECK(std::abs(y.phi) < 1e-12);
    CHECK(std::abs(y.theta - 0.9) < 1e-12);
    CHECK(std::abs(y.psi) < 1e-12);

    const Unitary2 x = rotation_matrix(RotationAxis::X, 0.7);
    CHECK(phase_invariant_distance(euler_zyx_compose(euler_zyx_decompose(x)), x) < 1e-10);
}

TEST_CASE("euler round trip on random unitaries") {
    std::mt19937_64 rng(42);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Unitary2 u = random_unitary(rng, i < 200 ? 5 : 3);
        const EulerZYX e = euler_zyx_decompose(u);
        CHECK(e.theta >= -pi / 2 - 1e-12);
        CHECK(e.theta <= pi / 2 + 1e-12);
        // compose through the reference matrices, not the library
        const oracle::M2 ref = oracle::rot('z', e.phi) * oracle::rot('y', e.theta) * oracle::rot('x', e.psi);
        const oracle::M2 target = oracle::to_eigen(u);
        const oracle::C overlap = (ref.adjoint() * target).trace();
        const oracle::C phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : oracle::C(1.0);
        worst = std::max(worst, (ref * phase - target).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("euler near gimbal lock") {
    for (double t : {pi / 2, -pi / 2, pi / 2 - 1e-9, -pi / 2 + 1e-7, pi / 2 - 1e-4}) {
        const Unitary2 u =
            rotation_matrix(RotationAxis::Z, 0.4) * rotation_matrix(RotationAxis::Y, t) * rotation_matrix(RotationAxis::X, -1.1);
        CHECK(phase_invariant_distance(euler_zyx_compose(euler_zyx_decompose(u)), u) < 1e-10);
    }
}

TEST_CASE("euler rejects non-unitary input") {
    Unitary2 u = Unitary2::identity();
    u(0, 0) = 2.0;
    CHECK_THROWS_AS(euler_zyx_decompose(u), InvalidInput);
    u(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(euler_zyx_decompose(u), InvalidInput);
}

TEST_CASE("axis letters") {
    CHECK(axis_letter(RotationAxis::Y) == 'y');
    CHECK(axis_from_letter('Z') == RotationAxis::Z);
    CHECK_THROWS_AS(axis_from_letter('w'), InvalidInput);
}

}
