#pragma once

// Dense real linear algebra used throughout: symmetric eigendecomposition
// with a reproducible sign convention, determinants and orbital overlaps.

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "berryphase/error.hpp"

namespace berryphase {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Orbital set: one orbital per column, rows index the single-particle basis.
using OrbitalSet = Eigen::MatrixXd;

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

/// Real symmetric matrix. Symmetry is checked exactly on construction.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;

    explicit SymmetricMatrix(Matrix entries) : entries_(std::move(entries)) {
        if (entries_.rows() != entries_.cols())
            throw InputError("SymmetricMatrix: matrix is not square");
        if (!all_finite(entries_))
            throw InputError("SymmetricMatrix: non-finite entry");
        for (Eigen::Index i = 0; i < entries_.rows(); ++i)
            for (Eigen::Index j = i + 1; j < entries_.cols(); ++j)
                if (entries_(i, j) != entries_(j, i))
                    throw InputError("SymmetricMatrix: entries are not symmetric");
    }

    static SymmetricMatrix zero(Eigen::Index dim) { return SymmetricMatrix(Matrix::Zero(dim, dim)); }

    Eigen::Index dim() const noexcept { return entries_.rows(); }
    const Matrix& matrix() const noexcept { return entries_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

    /// Adds v to (i,j) and (j,i) (once on the diagonal), keeping symmetry exact.
    void add_symmetric(Eigen::Index i, Eigen::Index j, double v) {
        entries_(i, j) += v;
        if (i != j) entries_(j, i) += v;
    }

    friend bool operator==(const SymmetricMatrix& a, const SymmetricMatrix& b) {
        return a.entries_.rows() == b.entries_.rows() && a.entries_ == b.entries_;
    }

private:
    Matrix entries_;
};

/// Ascending eigenvalues and matching orthonormal eigenvectors (columns).
struct EigenSystem {
    Vector values;
    Matrix vectors;
};

/// Flips a vector so its largest-magnitude component is positive.
/// The first index wins on exact ties.
inline void canonicalize_sign(Eigen::Ref<Vector> v) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    if (v[best] < 0.0) v = -v;
}

/// Symmetric eigendecomposition. Output is a pure function of the input bits.
///
/// Vectors inside a degenerate eigenspace carry no canonical rotation; only the
/// spanned subspace is meaningful there.
inline EigenSystem eig_sym(const SymmetricMatrix& m) {
    if (!all_finite(m.matrix()))
        throw InputError("eig_sym: non-finite entry");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw InputError("eig_sym: eigensolver failed");
    EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
    for (Eigen::Index c = 0; c < out.vectors.cols(); ++c)
        canonicalize_sign(out.vectors.col(c));
    return out;
}

inline double det(const Matrix& m) {
    if (m.rows() != m.cols())
        throw InputError("det: matrix is not square");
    if (m.size() == 0) return 1.0;
    return m.partialPivLu().determinant();
}

/// Overlap matrix S(a,b) = <bra_a|ket_b> between two orbital sets of equal shape.
inline Matrix occupied_overlap(const OrbitalSet& bra, const OrbitalSet& ket) {
    if (bra.rows() != ket.rows() || bra.cols() != ket.cols())
        throw InputError("occupied_overlap: orbital sets differ in shape");
    return bra.transpose() * ket;
}

}  // namespace berryphase
