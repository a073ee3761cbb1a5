#ifndef FLOWSPEC_PCA_HPP
#define FLOWSPEC_PCA_HPP

#include <optional>
#include <string>
#include <string_view>

#include "flowspec/linalg.hpp"
#include "flowspec/rsvd.hpp"

namespace flowspec {

enum class PcaMethod { exact, stochastic };

inline std::string to_string(PcaMethod m) {
    return m == PcaMethod::exact ? "exact" : "stochastic";
}

inline PcaMethod parse_pca_method(std::string_view s) {
    if (s == "exact") {
        return PcaMethod::exact;
    }
    if (s == "stochastic") {
        return PcaMethod::stochastic;
    }
    throw DataError("unknown PCA method '" + std::string(s) + "' (expected exact|stochastic)");
}

template <typename Scalar>
struct Centered {
    Matrix<Scalar> x;
    Vector<Scalar> mean;
};

/// Subtracts the column average from every column (observations are columns).
template <typename Derived>
Centered<typename Derived::Scalar> mean_center(const Eigen::MatrixBase<Derived> &y) {
    using Scalar = typename Derived::Scalar;
    if (y.cols() < 2) {
        throw DimensionError("mean_center: need at least 2 observations, got " +
                             std::to_string(y.cols()));
    }
    Centered<Scalar> out;
    out.mean = y.rowwise().mean();
    out.x = y.colwise() - out.mean;
    return out;
}

template <typename Scalar>
struct PcaModel {
    Vector<Scalar> mean;       // p
    Matrix<Scalar> components; // p x q, orthonormal columns
    Vector<Scalar> sigma;      // q leading singular values of the centered data
    Vector<Scalar> spectrum;   // every singular value the factorization produced
    Index n_samples = 0;
    PcaMethod method = PcaMethod::exact;
    std::optional<RsvdConfig> rsvd;

    Index dim() const { return components.rows(); }
    Index rank() const { return components.cols(); }
};

using PcaModelXd = PcaModel<double>;

/// Fits q principal components. The stochastic path requires an RsvdConfig;
/// its target rank is overridden with q.
template <typename Derived>
PcaModel<typename Derived::Scalar> fit_pca(const Eigen::MatrixBase<Derived> &y, Index q,
                                           PcaMethod method,
                                           std::optional<RsvdConfig> cfg = std::nullopt) {
    using Scalar = typename Derived::Scalar;
    const Index p = y.rows();
    const Index n = y.cols();
    if (n < 2) {
        throw DimensionError("fit_pca: need at least 2 observations, got " + std::to_string(n));
    }
    const Index limit = std::min(p, n - 1);
    if (q < 1 || q > limit) {
        throw DimensionError("fit_pca: q = " + std::to_string(q) + " outside [1, " +
                             std::to_string(limit) + "] for " + shape_string(p, n) + " data");
    }
    if (method == PcaMethod::stochastic && !cfg) {
        throw DataError("fit_pca: stochastic method needs an RsvdConfig");
    }

    Centered<Scalar> centered = mean_center(y);
    SvdResult<Scalar> f;
    PcaModel<Scalar> model;
    if (method == PcaMethod::exact) {
        f = svd_exact(centered.x);
    } else {
        RsvdConfig c = *cfg;
        c.target_rank = q;
        f = rsvd_untruncated(centered.x, c);
        model.rsvd = c;
    }
    model.mean = std::move(centered.mean);
    model.components = f.u.leftCols(q);
    model.sigma = f.sigma.head(q);
    model.spectrum = std::move(f.sigma);
    model.n_samples = n;
    model.method = method;
    return model;
}

/// alpha = U_q^T (y - mean)
template <typename Scalar, typename Derived>
Vector<Scalar> project(const PcaModel<Scalar> &model, const Eigen::MatrixBase<Derived> &y) {
    if (y.rows() != model.dim() || y.cols() != 1) {
        throw DimensionError("project: expected a vector of length " +
                             std::to_string(model.dim()) + ", got " +
                             shape_string(y.rows(), y.cols()));
    }
    return model.components.transpose() * (y - model.mean);
}

/// Projects every column; result is q x n.
template <typename Scalar, typename Derived>
Matrix<Scalar> project_all(const PcaModel<Scalar> &model, const Eigen::MatrixBase<Derived> &y) {
    if (y.rows() != model.dim()) {
        throw DimensionError("project_all: expected " + std::to_string(model.dim()) +
                             " rows, got " + std::to_string(y.rows()));
    }
    return model.components.transpose() * (y.colwise() - model.mean);
}

/// mean + U_q alpha
template <typename Scalar, typename Derived>
Vector<Scalar> reconstruct(const PcaModel<Scalar> &model,
                           const Eigen::MatrixBase<Derived> &alpha) {
    if (alpha.rows() != model.rank() || alpha.cols() != 1) {
        throw DimensionError("reconstruct: expected " + std::to_string(model.rank()) +
                             " coordinates, got " + shape_string(alpha.rows(), alpha.cols()));
    }
    return model.mean + model.components * alpha;
}

/// Covariance eigenvalues sigma_i^2 / (n - 1) of the retained components.
template <typename Scalar>
Vector<Scalar> explained_variance(const PcaModel<Scalar> &model) {
    return model.sigma.array().square() / static_cast<Scalar>(model.n_samples - 1);
}

} // namespace flowspec

#endif // FLOWSPEC_PCA_HPP
