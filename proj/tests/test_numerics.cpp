#include <random>

#include <gtest/gtest.h>

#include "berryphase/numerics.hpp"
#include "oracles/oracles.hpp"

using namespace berryphase;

namespace {

Matrix random_symmetric(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
    return m;
}

oracle::Dense to_dense(const Matrix& m) {
    oracle::Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

}  // namespace

TEST(SymmetricMatrix, RejectsAsymmetricAndNonFinite) {
    Matrix m = Matrix::Identity(3, 3);
    m(0, 1) = 1e-17;
    EXPECT_THROW(SymmetricMatrix{m}, InputError);
    Matrix nan = Matrix::Identity(2, 2);
    nan(1, 1) = std::nan("");
    EXPECT_THROW(SymmetricMatrix{nan}, InputError);
    EXPECT_THROW(SymmetricMatrix{Matrix::Zero(2, 3)}, InputError);
}

TEST(EigSym, IdentityAndDiagonal) {
    const EigenSystem id = eig_sym(SymmetricMatrix(Matrix::Identity(3, 3)));
    EXPECT_EQ(id.values, Vector::Ones(3));

    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 3.0, 1.0, 2.0;
    const EigenSystem es = eig_sym(SymmetricMatrix(d));
    EXPECT_DOUBLE_EQ(es.values[0], 1.0);
    EXPECT_DOUBLE_EQ(es.values[1], 2.0);
    EXPECT_DOUBLE_EQ(es.values[2], 3.0);
    EXPECT_DOUBLE_EQ(es.vectors(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(es.vectors(2, 1), 1.0);
    EXPECT_DOUBLE_EQ(es.vectors(0, 2), 1.0);
}

TEST(EigSym, PauliXWithSignConvention) {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    const EigenSystem es = eig_sym(SymmetricMatrix(x));
    EXPECT_NEAR(es.values[0], -1.0, 1e-15);
    EXPECT_NEAR(es.values[1], 1.0, 1e-15);
    const double r = 1.0 / std::sqrt(2.0);
    // Equal magnitudes: the first index is made positive.
    EXPECT_NEAR(es.vectors(0, 0), r, 1e-15);
    EXPECT_NEAR(es.vectors(1, 0), -r, 1e-15);
    EXPECT_NEAR(es.vectors(0, 1), r, 1e-15);
    EXPECT_NEAR(es.vectors(1, 1), r, 1e-15);
}

TEST(EigSym, ReconstructionOrthonormalityAndJacobiAgreement) {
    std::mt19937_64 rng(11);
    for (int n : {2, 5, 16, 32}) {
        const Matrix m = random_symmetric(n, rng);
        const EigenSystem es = eig_sym(SymmetricMatrix(m));
        const double scale = m.cwiseAbs().maxCoeff();
        const Matrix rec = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
        EXPECT_LE((rec - m).cwiseAbs().maxCoeff(), 1e-10 * scale) << n;
        const Matrix gram = es.vectors.transpose() * es.vectors;
        EXPECT_LE((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12) << n;
        for (int i = 1; i < n; ++i) EXPECT_LE(es.values[i - 1], es.values[i]);
        for (int i = 0; i < n; ++i) {
            const Vector resid = m * es.vectors.col(i) - es.values[i] * es.vectors.col(i);
            EXPECT_LE(resid.norm(), 1e-10 * scale);
            Eigen::Index arg;
            es.vectors.col(i).cwiseAbs().maxCoeff(&arg);
            EXPECT_GT(es.vectors(arg, i), 0.0);
        }
        const std::vector<double> ref = oracle::jacobi_eigenvalues(to_dense(m));
        for (int i = 0; i < n; ++i) EXPECT_NEAR(es.values[i], ref[static_cast<std::size_t>(i)], 1e-10) << n;
    }
}

TEST(EigSym, BitwiseDeterministic) {
    std::mt19937_64 rng(3);
    const SymmetricMatrix m(random_symmetric(32, rng));
    const EigenSystem a = eig_sym(m);
    const EigenSystem b = eig_sym(m);
    EXPECT_TRUE(a.values == b.values);
    EXPECT_TRUE(a.vectors == b.vectors);
}

TEST(Det, IdentitySwapAndCofactorOracle) {
    EXPECT_DOUBLE_EQ(det(Matrix::Identity(4, 4)), 1.0);
    Matrix swap = Matrix::Identity(4, 4);
    swap.row(0).swap(swap.row(2));
    EXPECT_DOUBLE_EQ(det(swap), -1.0);
    EXPECT_THROW(det(Matrix::Zero(2, 3)), InputError);
    EXPECT_DOUBLE_EQ(det(Matrix(0, 0)), 1.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m(5, 5);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
        EXPECT_NEAR(det(m), oracle::cofactor_det(to_dense(m)), 1e-10);
    }
}

TEST(Det, Multiplicative) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 1; n <= 8; ++n) {
        Matrix a(n, n), b(n, n);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a.data()[i] = u(rng);
            b.data()[i] = u(rng);
        }
        EXPECT_NEAR(det(a * b), det(a) * det(b), 1e-10);
    }
}

TEST(OccupiedOverlap, IdentityNegationAndDotOracle) {
    std::mt19937_64 rng(2);
    const oracle::Dense orbs = oracle::random_orthonormal(2, 4, rng);
    OrbitalSet a(4, 2);
    for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 4; ++r) a(r, c) = orbs[c][r];
    EXPECT_LE((occupied_overlap(a, a) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);

    OrbitalSet flipped = a;
    flipped.col(1) *= -1.0;
    Matrix expect = Matrix::Identity(2, 2);
    expect(1, 1) = -1.0;
    EXPECT_LE((occupied_overlap(a, flipped) - expect).cwiseAbs().maxCoeff(), 1e-15);

    const oracle::Dense other = oracle::random_orthonormal(2, 4, rng);
    OrbitalSet b(4, 2);
    for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 4; ++r) b(r, c) = other[c][r];
    const Matrix s = occupied_overlap(a, b);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double dot = 0.0;
            for (int r = 0; r < 4; ++r) dot += orbs[i][r] * other[j][r];
            EXPECT_NEAR(s(i, j), dot, 1e-15);
        }

    EXPECT_THROW(occupied_overlap(a, OrbitalSet(4, 3)), InputError);
    EXPECT_THROW(occupied_overlap(a, OrbitalSet(5, 2)), InputError);
}
