#pragma once

// Dense symmetric-matrix helpers used by every estimator. Header-only and
// templated on the scalar type; the rest of the library instantiates double.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tyshrink/error.hpp"

namespace tyshrink {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Square matrix whose storage is exactly symmetric. Any input is replaced by
/// (m + m^T) / 2, so entry (i, j) and (j, i) are bitwise equal.
template <typename Scalar>
class SymMatrix {
public:
    using Dense = DenseMatrix<Scalar>;

    template <typename Derived>
    explicit SymMatrix(const Eigen::MatrixBase<Derived>& m) {
        if (m.rows() != m.cols() || m.rows() < 1) {
            throw Error(ErrorCode::DimensionMismatch,
                        "SymMatrix needs a non-empty square matrix, got " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()));
        }
        const Dense tmp = m;
        data_ = (tmp + tmp.transpose()) * Scalar(0.5);
    }

    static SymMatrix identity(Eigen::Index p) { return SymMatrix(Dense::Identity(p, p)); }
    static SymMatrix zero(Eigen::Index p) { return SymMatrix(Dense::Zero(p, p)); }

    Eigen::Index dim() const noexcept { return data_.rows(); }
    const Dense& dense() const noexcept { return data_; }
    Scalar operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }
    Scalar trace() const { return data_.trace(); }

private:
    Dense data_;
};

using SymMatrixd = SymMatrix<double>;

/// Lower-triangular factor L with L L^T = source.
template <typename Scalar>
class SpdFactorization {
public:
    SpdFactorization(SymMatrix<Scalar> source, DenseMatrix<Scalar> factor)
        : source_(std::move(source)), factor_(std::move(factor)) {}

    const SymMatrix<Scalar>& source() const noexcept { return source_; }
    const DenseMatrix<Scalar>& factor() const noexcept { return factor_; }
    Eigen::Index dim() const noexcept { return factor_.rows(); }

    auto lower() const { return factor_.template triangularView<Eigen::Lower>(); }

private:
    SymMatrix<Scalar> source_;
    DenseMatrix<Scalar> factor_;
};

/// Cholesky factorization. A pivot at or below 1e-14 * max(diag) counts as
/// not positive definite.
template <typename Scalar>
SpdFactorization<Scalar> spd_factorize(const SymMatrix<Scalar>& m) {
    const auto& a = m.dense();
    const Scalar max_diag = a.diagonal().maxCoeff();
    if (!(max_diag > Scalar(0))) {
        throw Error(ErrorCode::NotPositiveDefinite, "non-positive diagonal");
    }
    Eigen::LLT<DenseMatrix<Scalar>> llt(a);
    DenseMatrix<Scalar> factor = llt.matrixL();
    const Scalar floor = Scalar(1e-14) * max_diag;
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::NotPositiveDefinite, "Cholesky pivot <= 0");
    }
    for (Eigen::Index i = 0; i < factor.rows(); ++i) {
        const Scalar pivot = factor(i, i) * factor(i, i);
        if (!(pivot > floor)) {
            throw Error(ErrorCode::NotPositiveDefinite,
                        "Cholesky pivot " + std::to_string(double(pivot)) + " at row " +
                            std::to_string(i) + " below threshold");
        }
    }
    return SpdFactorization<Scalar>(m, std::move(factor));
}

/// v^T source^{-1} v, computed as ||L^{-1} v||^2 with one triangular solve.
template <typename Scalar, typename Derived>
Scalar quad_form(const SpdFactorization<Scalar>& f, const Eigen::MatrixBase<Derived>& v) {
    if (v.size() != f.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "quad_form: vector length " + std::to_string(v.size()) + " vs dim " +
                        std::to_string(f.dim()));
    }
    DenseVector<Scalar> w = v;
    f.lower().solveInPlace(w);
    return w.squaredNorm();
}

/// Solves source * x = b.
template <typename Scalar, typename Derived>
DenseVector<Scalar> spd_solve(const SpdFactorization<Scalar>& f, const Eigen::MatrixBase<Derived>& b) {
    if (b.size() != f.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "spd_solve: dimension mismatch");
    }
    DenseVector<Scalar> x = b;
    f.lower().solveInPlace(x);
    f.factor().transpose().template triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
}

template <typename Scalar>
Scalar frobenius_dist_sq(const SymMatrix<Scalar>& a, const SymMatrix<Scalar>& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "frobenius_dist_sq: dims " + std::to_string(a.dim()) +
                                                      " vs " + std::to_string(b.dim()));
    }
    return (a.dense() - b.dense()).squaredNorm();
}

template <typename Scalar>
struct SymEigen {
    DenseVector<Scalar> values;   // descending
    DenseMatrix<Scalar> vectors;  // column k pairs with values(k)
};

template <typename Scalar>
SymEigen<Scalar> eigen_sym(const SymMatrix<Scalar>& m) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(m.dense());
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver did not converge");
    }
    // Eigen returns ascending order.
    const Eigen::Index p = m.dim();
    SymEigen<Scalar> out{DenseVector<Scalar>(p), DenseMatrix<Scalar>(p, p)};
    for (Eigen::Index k = 0; k < p; ++k) {
        out.values(k) = solver.eigenvalues()(p - 1 - k);
        out.vectors.col(k) = solver.eigenvectors().col(p - 1 - k);
    }
    return out;
}

/// Rescales m so that its trace equals its dimension.
template <typename Scalar>
SymMatrix<Scalar> trace_normalized(const SymMatrix<Scalar>& m) {
    const Scalar tr = m.trace();
    if (!(tr > Scalar(0))) {
        throw Error(ErrorCode::DegenerateData, "cannot trace-normalize a matrix with trace <= 0");
    }
    return SymMatrix<Scalar>(m.dense() * (Scalar(m.dim()) / tr));
}

}  // namespace tyshrink
