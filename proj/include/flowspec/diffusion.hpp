#ifndef FLOWSPEC_DIFFUSION_HPP
#define FLOWSPEC_DIFFUSION_HPP

// Diffusion maps: heat kernel W, row-stochastic P = D^-1 W, spectrum of P
// through its symmetric conjugate, and the lambda^t psi embedding.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "flowspec/linalg.hpp"

namespace flowspec {

namespace detail {

// Plain index-order accumulation so callers (and tests) can reproduce the
// value bit-for-bit.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_distance(const Eigen::MatrixBase<DerivedA> &a,
                                           const Eigen::MatrixBase<DerivedB> &b) {
    using Scalar = typename DerivedA::Scalar;
    Scalar s = 0;
    for (Index i = 0; i < a.size(); ++i) {
        const Scalar d = a(i) - b(i);
        s += d * d;
    }
    return s;
}

} // namespace detail

/// Symmetric n x n matrix of squared Euclidean distances between columns.
template <typename Derived>
Matrix<typename Derived::Scalar> pairwise_sq_distances(const Eigen::MatrixBase<Derived> &y) {
    using Scalar = typename Derived::Scalar;
    const Index n = y.cols();
    Matrix<Scalar> d2 = Matrix<Scalar>::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < j; ++i) {
            d2(i, j) = d2(j, i) = detail::squared_distance(y.col(i), y.col(j));
        }
    }
    return d2;
}

/// Largest squared distance between any two observations.
template <typename Derived>
typename Derived::Scalar default_epsilon(const Eigen::MatrixBase<Derived> &y) {
    if (y.cols() < 2) {
        throw DimensionError("default_epsilon: need at least 2 observations");
    }
    const auto eps = pairwise_sq_distances(y).maxCoeff();
    if (!(eps > 0)) {
        throw DataError("default_epsilon: all observations are identical, bandwidth would be 0");
    }
    return eps;
}

/// W_ij = exp(-||y_i - y_j||^2 / epsilon), computed from precomputed squared distances.
template <typename Scalar>
Matrix<Scalar> heat_kernel(const Matrix<Scalar> &sq_distances, Scalar epsilon) {
    if (!(epsilon > Scalar(0)) || !std::isfinite(epsilon)) {
        throw DataError("kernel_matrix: epsilon must be positive and finite, got " +
                        std::to_string(epsilon));
    }
    const Index n = sq_distances.rows();
    Matrix<Scalar> w(n, n);
    for (Index j = 0; j < n; ++j) {
        w(j, j) = Scalar(1);
        for (Index i = 0; i < j; ++i) {
            w(i, j) = w(j, i) = std::exp(-sq_distances(i, j) / epsilon);
        }
    }
    return w;
}

template <typename Derived>
Matrix<typename Derived::Scalar> kernel_matrix(const Eigen::MatrixBase<Derived> &y,
                                               typename Derived::Scalar epsilon) {
    return heat_kernel(pairwise_sq_distances(y), epsilon);
}

template <typename Scalar>
struct Transition {
    Matrix<Scalar> p;      // row-stochastic
    Vector<Scalar> degree; // D_ii = sum_j W_ij
};

namespace detail {

template <typename Scalar>
Vector<Scalar> checked_degree(const Matrix<Scalar> &w) {
    if (w.rows() < 1 || w.rows() != w.cols()) {
        throw DimensionError("diffusion_matrix: kernel must be square, got " +
                             shape_string(w.rows(), w.cols()));
    }
    if (!w.allFinite() || (w.array() < Scalar(0)).any()) {
        throw DataError("diffusion_matrix: kernel has negative or non-finite entries");
    }
    const Scalar asym = (w - w.transpose()).cwiseAbs().maxCoeff();
    if (asym > Scalar(1e-12) * std::max(Scalar(1), w.cwiseAbs().maxCoeff())) {
        throw DataError("diffusion_matrix: kernel is not symmetric, max |w_ij - w_ji| = " +
                        std::to_string(asym));
    }
    Vector<Scalar> degree = w.rowwise().sum();
    for (Index i = 0; i < degree.size(); ++i) {
        if (!(degree(i) > Scalar(0))) {
            throw DataError("diffusion_matrix: row " + std::to_string(i) + " has zero sum");
        }
    }
    return degree;
}

} // namespace detail

/// P = D^-1 W.
template <typename Scalar>
Transition<Scalar> diffusion_matrix(const Matrix<Scalar> &w) {
    Transition<Scalar> out;
    out.degree = detail::checked_degree(w);
    out.p = out.degree.cwiseInverse().asDiagonal() * w;
    return out;
}

template <typename Scalar>
struct Spectrum {
    Vector<Scalar> eigenvalues; // nonincreasing, eigenvalues(0) = 1
    Matrix<Scalar> psi;         // right eigenvectors of P, column i pairs with eigenvalues(i)
};

/// Eigenpairs of P via S = D^-1/2 W D^-1/2: if S v = lambda v then
/// psi = D^-1/2 v satisfies P psi = lambda psi.
template <typename Scalar>
Spectrum<Scalar> spectral(const Matrix<Scalar> &w, const Vector<Scalar> &degree) {
    const Index n = w.rows();
    if (degree.size() != n) {
        throw DimensionError("spectral: degree vector length " + std::to_string(degree.size()) +
                             " does not match kernel size " + std::to_string(n));
    }
    const Vector<Scalar> inv_sqrt = degree.array().rsqrt();
    Matrix<Scalar> s(n, n);
    for (Index j = 0; j < n; ++j) {
        s(j, j) = w(j, j) * inv_sqrt(j) * inv_sqrt(j);
        for (Index i = 0; i < j; ++i) {
            s(i, j) = s(j, i) = w(i, j) * inv_sqrt(i) * inv_sqrt(j);
        }
    }
    EigResult<Scalar> eig = sym_eig(s);
    Spectrum<Scalar> out;
    out.eigenvalues = std::move(eig.values);
    out.psi = inv_sqrt.asDiagonal() * eig.vectors;
    return out;
}

template <typename Scalar>
struct DiffusionModel {
    Scalar epsilon = 0;
    Vector<Scalar> eigenvalues;
    Matrix<Scalar> psi;    // n x n, right eigenvectors of P
    Matrix<Scalar> kernel; // W
    Vector<Scalar> degree; // diag(D)
    int t = 2;

    Index size() const { return psi.rows(); }
    Matrix<Scalar> transition() const { return degree.cwiseInverse().asDiagonal() * kernel; }
};

using DiffusionModelXd = DiffusionModel<double>;

/// Builds the full diffusion model for observations in the columns of y.
/// Without epsilon, the largest pairwise squared distance is used.
template <typename Derived>
DiffusionModel<typename Derived::Scalar>
fit_diffusion(const Eigen::MatrixBase<Derived> &y,
              std::optional<typename Derived::Scalar> epsilon = std::nullopt, int t = 2) {
    using Scalar = typename Derived::Scalar;
    if (y.cols() < 2) {
        throw DimensionError("fit_diffusion: need at least 2 observations");
    }
    if (t < 1) {
        throw DimensionError("fit_diffusion: scale t must be a positive integer");
    }
    const Matrix<Scalar> d2 = pairwise_sq_distances(y);
    DiffusionModel<Scalar> model;
    if (epsilon) {
        model.epsilon = *epsilon;
    } else {
        model.epsilon = d2.maxCoeff();
        if (!(model.epsilon > Scalar(0))) {
            throw DataError(
                "fit_diffusion: all observations are identical, bandwidth would be 0");
        }
    }
    model.kernel = heat_kernel(d2, model.epsilon);
    model.degree = detail::checked_degree(model.kernel);
    Spectrum<Scalar> spec = spectral(model.kernel, model.degree);
    model.eigenvalues = std::move(spec.eigenvalues);
    model.psi = std::move(spec.psi);
    model.t = t;
    return model;
}

template <typename Scalar>
struct Embedding {
    Matrix<Scalar> coords; // n x q, row j is the embedded observation j
    int t = 0;

    Index q() const { return coords.cols(); }
};

/// Row j = (lambda_1^t psi_1(j), ..., lambda_q^t psi_q(j)); the trivial
/// lambda_0 = 1 pair is skipped.
template <typename Scalar>
Embedding<Scalar> embed(const DiffusionModel<Scalar> &model, Index q, int t) {
    const Index n = model.size();
    if (q < 1 || q > n - 1) {
        throw DimensionError("embed: q = " + std::to_string(q) + " outside [1, " +
                             std::to_string(n - 1) + "]");
    }
    if (t < 1) {
        throw DimensionError("embed: scale t must be a positive integer, got " +
                             std::to_string(t));
    }
    Embedding<Scalar> out;
    out.t = t;
    out.coords.resize(n, q);
    for (Index i = 0; i < q; ++i) {
        const Scalar weight = std::pow(model.eigenvalues(i + 1), t);
        out.coords.col(i) = weight * model.psi.col(i + 1);
    }
    return out;
}

template <typename Scalar>
struct DecayCurve {
    Vector<Scalar> values;
    bool truncated = false; // fewer values were available than requested
};

/// First `count` values (after dropping `skip` leading entries) divided by the
/// first retained value.
template <typename Scalar>
DecayCurve<Scalar> eigen_decay(const Vector<Scalar> &values, Index count, Index skip = 0) {
    if (count < 1) {
        throw DimensionError("eigen_decay: count must be >= 1");
    }
    if (values.size() <= skip) {
        throw DimensionError("eigen_decay: no values left after skipping " +
                             std::to_string(skip));
    }
    const Index available = values.size() - skip;
    DecayCurve<Scalar> out;
    out.truncated = available < count;
    const Index len = std::min(available, count);
    const Vector<Scalar> kept = values.segment(skip, len);
    for (Index i = 1; i < len; ++i) {
        if (kept(i) > kept(i - 1)) {
            throw DataError("eigen_decay: values are not sorted nonincreasing at index " +
                            std::to_string(i));
        }
    }
    if (!(kept(0) > Scalar(0))) {
        throw DataError("eigen_decay: reference value must be positive");
    }
    out.values = kept / kept(0);
    return out;
}

} // namespace flowspec

#endif // FLOWSPEC_DIFFUSION_HPP
