#pragma once

#include <cmath>

#include "perron/core.hpp"

namespace perron {

/// Constant invariant splitting X = E + F given by a projection P onto E
/// along F. The factor norms (and through them the product norm on X)
/// are Euclidean norms of coordinates in orthonormal bases of E and F.
class Splitting {
public:
    Splitting(StateMat projection, int dim_E) : P_(std::move(projection)) {
        const int n = static_cast<int>(P_.rows());
        if (P_.cols() != n) throw ConstraintError("splitting: projection must be square");
        if (dim_E <= 0 || dim_E >= n)
            throw ConstraintError("splitting: dim_E must be in (0, dim)");
        dim_E_ = dim_E;
        dim_F_ = n - dim_E;

        if ((P_ * P_ - P_).cwiseAbs().maxCoeff() > 1e-12)
            throw ConstraintError("splitting: projection is not idempotent (P*P != P)");

        Q_ = StateMat::Identity(n, n) - P_;

        basis_E_ = range_basis(P_, dim_E_);
        basis_F_ = range_basis(Q_, dim_F_);
    }

    /// Coordinate splitting: E = first dim_E coordinates, F = the rest.
    static Splitting coordinate(int dim_E, int dim_F) {
        const int n = dim_E + dim_F;
        StateMat P = StateMat::Zero(n, n);
        for (int i = 0; i < dim_E; ++i) P(i, i) = 1.0;
        return Splitting(P, dim_E);
    }

    int dim() const { return dim_E_ + dim_F_; }
    int dim_E() const { return dim_E_; }
    int dim_F() const { return dim_F_; }
    const StateMat& P() const { return P_; }
    const StateMat& Q() const { return Q_; }
    const StateMat& basis_E() const { return basis_E_; }
    const StateMat& basis_F() const { return basis_F_; }

    /// E-coordinates of the E-component of v.
    StateVec coords_E(const StateVec& v) const { return basis_E_.transpose() * (P_ * v); }

    /// F-coordinates of the F-component of v.
    StateVec coords_F(const StateVec& v) const { return basis_F_.transpose() * (Q_ * v); }

    StateVec embed_E(const StateVec& xi) const { return basis_E_ * xi; }
    StateVec embed_F(const StateVec& eta) const { return basis_F_ * eta; }

    StateVec assemble(const StateVec& xi, const StateVec& eta) const {
        return basis_E_ * xi + basis_F_ * eta;
    }

    /// Product norm |v| = |E-part| + |F-part| with Euclidean factor norms.
    double product_norm(const StateVec& v) const {
        return coords_E(v).norm() + coords_F(v).norm();
    }

private:
    // Orthonormal basis of range(M) extracted by column-pivoted QR.
    static StateMat range_basis(const StateMat& M, int rank) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
        qr.setThreshold(1e-10);
        if (qr.rank() != rank)
            throw ConstraintError("splitting: projection rank does not match declared dimension");
        Eigen::MatrixXd Qfull = qr.householderQ();
        return Qfull.leftCols(rank);
    }

    StateMat P_, Q_, basis_E_, basis_F_;
    int dim_E_ = 0, dim_F_ = 0;
};

} // namespace perron
