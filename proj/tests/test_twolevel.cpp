#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "berryphase/twolevel.hpp"
#include "oracles/oracles.hpp"

using namespace berryphase;
using namespace berryphase::twolevel;

TEST(PlanarHamiltonian, MatrixAndSpectrum) {
    const SymmetricMatrix h0 = planar_hamiltonian(0.0, 1.0);
    EXPECT_DOUBLE_EQ(h0(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(h0(1, 1), -1.0);
    EXPECT_DOUBLE_EQ(h0(0, 1), 0.0);
    const SymmetricMatrix hx = planar_hamiltonian(kPi / 2.0, 1.0);
    EXPECT_NEAR(hx(0, 0), 0.0, 1e-16);
    EXPECT_DOUBLE_EQ(hx(0, 1), 1.0);
    for (double theta : {0.3, 1.7, 4.0}) {
        const EigenSystem es = eig_sym(planar_hamiltonian(theta, 1.0));
        EXPECT_NEAR(es.values[0], -1.0, 1e-14);
        EXPECT_NEAR(es.values[1], 1.0, 1e-14);
    }
    EXPECT_THROW(planar_hamiltonian(0.1, 0.0), DegeneracyError);
}

TEST(PlanarEigenstate, DoubleValuedBranch) {
    Vector v = planar_eigenstate(0.0);
    EXPECT_DOUBLE_EQ(v[0], 1.0);
    EXPECT_DOUBLE_EQ(v[1], 0.0);
    v = planar_eigenstate(2.0 * kPi);
    EXPECT_NEAR(v[0], -1.0, 1e-15);
    EXPECT_NEAR(v[1], 0.0, 1e-15);
    v = planar_eigenstate(kPi);
    EXPECT_NEAR(v[0], 0.0, 1e-15);
    EXPECT_NEAR(v[1], 1.0, 1e-15);
    for (double theta : {0.2, 1.1, -2.5})
        EXPECT_LE((planar_eigenstate(theta + 4.0 * kPi) - planar_eigenstate(theta)).cwiseAbs().maxCoeff(),
                  1e-14);
}

TEST(LoopPhaseFactor, WindingSigns) {
    EXPECT_LT(loop_phase_factor({1, 1.0, 256, 0.0}), 0.0);
    EXPECT_GT(loop_phase_factor({2, 1.0, 256, 0.0}), 0.0);
    EXPECT_EQ(loop_phase_factor({0, 1.0, 256, 0.0}), 1.0);
    for (int k = -3; k <= 4; ++k)
        for (int n : {8, 9, 64, 257})
            EXPECT_EQ(loop_phase_factor({k, 1.0, n, 0.3}) < 0.0, k % 2 != 0) << k << " " << n;
}

TEST(LoopPhaseFactor, MagnitudeMatchesCosineProductAndGrows) {
    double previous = 0.0;
    for (int n = 32; n <= 1024; n *= 2) {
        const double m = std::abs(loop_phase_factor({1, 1.0, n, 0.0}));
        EXPECT_NEAR(m, std::pow(std::cos(kPi / n), n), 1e-12);
        EXPECT_GT(m, previous);
        previous = m;
    }
}

TEST(LoopPhaseFactor, InteriorSignFlipsCancel) {
    const PlanarLoop loop{1, 1.0, 256, 0.0};
    std::vector<Vector> states = planar_loop_states(loop);
    const double base = overlap_loop_product(states);
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> pick(0, loop.samples - 1);
    for (int i = 0; i < 20; ++i) states[static_cast<std::size_t>(pick(rng))] *= -1.0;
    EXPECT_EQ(overlap_loop_product(states), base);
}

TEST(LoopPhaseFactor, RejectsBadLoops) {
    EXPECT_THROW(loop_phase_factor({1, 1.0, 7, 0.0}), InputError);
    EXPECT_THROW(loop_phase_factor({1, 0.0, 64, 0.0}), InputError);
}

TEST(GaugePhase, ClosedFormAndIntegration) {
    for (int k = 0; k <= 5; ++k) {
        const PlanarLoop loop{1, 1.0, 256, 0.0};
        EXPECT_EQ(gauge_phase({0.5, k}, loop), -k * kPi);
        EXPECT_NEAR(gauge_phase_by_integration({0.5, k}, loop), -k * kPi, 1e-6);
    }
    EXPECT_EQ(gauge_phase({0.5, 3}, {1, 2.0, 64, 1.0}), -3.0 * kPi);
    EXPECT_EQ(gauge_phase({1.5, 1}, {2, 1.0, 64, 0.0}), -6.0 * kPi);
}

TEST(BerryFieldReal, VanishesOnPlanarFamily) {
    const MatrixFamily family = planar_family();
    const Eigen::Vector3d at_one(std::sin(1.0), 0.0, std::cos(1.0));
    EXPECT_LE(berry_field_real(family, at_one, 0).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(berry_field_real(family, Eigen::Vector3d::Zero(), 0, 1e-5), DegeneracyError);
}

TEST(BerryFieldReal, VanishesOnRandomRealThreeLevelFamily) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::array<Matrix, 4> basis;
    for (Matrix& b : basis) {
        b = Matrix(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j <= i; ++j) b(i, j) = b(j, i) = u(rng);
    }
    const MatrixFamily family = [basis](const Eigen::Vector3d& r) {
        Matrix h = basis[0] + r[0] * basis[1] + r[1] * basis[2] + std::sin(r[2]) * basis[3];
        return SymmetricMatrix(h);
    };
    for (int i = 0; i < 20; ++i) {
        const Eigen::Vector3d p(u(rng), u(rng), u(rng));
        for (int level = 0; level < 3; ++level)
            EXPECT_LE(berry_field_real(family, p, level).cwiseAbs().maxCoeff(), 1e-12);
    }
}

// The transformed connection A'(R) = i<n'|grad n'> of the planar model with
// |n'> = exp(i k theta / 2)|n> is a pure gradient, so its curl vanishes away
// from R = 0. Checked by nested central differences in the (R1, R3) plane.
TEST(BerryFieldReal, CurlOfTransformedConnectionVanishes) {
    using C = std::complex<double>;
    const int k = 1;
    const auto state = [&](double r1, double r3) {
        const double theta = std::atan2(r1, r3);
        const C phase = std::polar(1.0, 0.5 * k * theta);
        return Eigen::Vector2cd(phase * std::cos(theta / 2.0), phase * std::sin(theta / 2.0));
    };
    const double h = 1e-4;
    const auto connection = [&](double r1, double r3, int axis) {
        const double d1 = axis == 0 ? h : 0.0, d3 = axis == 1 ? h : 0.0;
        const Eigen::Vector2cd psi = state(r1, r3);
        const Eigen::Vector2cd dpsi = (state(r1 + d1, r3 + d3) - state(r1 - d1, r3 - d3)) / (2.0 * h);
        return (C(0.0, 1.0) * psi.dot(dpsi)).real();
    };
    const double H = 1e-3;
    for (double theta : {0.4, 1.3, 2.2}) {
        const double r1 = 0.8 * std::sin(theta), r3 = 0.8 * std::cos(theta);
        const double d1_a3 = (connection(r1 + H, r3, 1) - connection(r1 - H, r3, 1)) / (2.0 * H);
        const double d3_a1 = (connection(r1, r3 + H, 0) - connection(r1, r3 - H, 0)) / (2.0 * H);
        EXPECT_NEAR(d1_a3 - d3_a1, 0.0, 1e-5);
        EXPECT_GT(std::abs(connection(r1, r3, 0)) + std::abs(connection(r1, r3, 1)), 0.1);
    }
}

TEST(MonopolePhase, SolidAngleOracle) {
    for (double cone : {kPi / 4.0, kPi / 2.0, 2.0 * kPi / 3.0})
        EXPECT_NEAR(monopole_phase(cone, 2048), oracle::monopole_reference(cone), 1e-3);
    EXPECT_EQ(monopole_phase(0.0, 64), 0.0);
    EXPECT_EQ(monopole_phase(kPi, 64), -2.0 * kPi);
    EXPECT_NEAR(monopole_phase(1e-3, 256), 0.0, 1e-5);
    EXPECT_THROW(monopole_phase(-0.1, 64), InputError);
    EXPECT_THROW(monopole_phase(1.0, 4), InputError);
}
