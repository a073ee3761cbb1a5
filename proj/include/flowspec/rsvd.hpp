#ifndef FLOWSPEC_RSVD_HPP
#define FLOWSPEC_RSVD_HPP

// Randomized SVD: sample the range of A with a Gaussian test matrix,
// orthonormalize, project, and factor the small projected matrix exactly.

#include <cstdint>
#include <string>

#include "flowspec/linalg.hpp"

namespace flowspec {

struct RsvdConfig {
    Index target_rank = 3;
    Index oversampling = 10;
    Index power_iterations = 0;
    std::uint64_t seed = 0;

    Index sample_size() const { return target_rank + oversampling; }
};

namespace detail {

template <typename Derived>
void check_rsvd_config(const Eigen::MatrixBase<Derived> &a, const RsvdConfig &cfg) {
    if (cfg.target_rank < 1) {
        throw DimensionError("rsvd: target rank must be >= 1, got " +
                             std::to_string(cfg.target_rank));
    }
    if (cfg.oversampling < 0 || cfg.power_iterations < 0) {
        throw DimensionError("rsvd: oversampling and power iterations must be >= 0");
    }
    const Index limit = std::min(a.rows(), a.cols());
    if (cfg.sample_size() > limit) {
        throw DimensionError("rsvd: sample size l = " + std::to_string(cfg.sample_size()) +
                             " exceeds min(m, n) = " + std::to_string(limit) + " for a " +
                             shape_string(a.rows(), a.cols()) + " matrix");
    }
}

template <typename Scalar>
Matrix<Scalar> orthonormal_range(const Matrix<Scalar> &y) {
    QrResult<Scalar> qr = qr_thin(y);
    if (qr.rank() == 0) {
        throw DataError("rsvd: sampled range is numerically zero (achieved rank 0 of " +
                        std::to_string(y.cols()) + ")");
    }
    return std::move(qr.q);
}

} // namespace detail

/// Orthonormal m x l basis Q for the sampled range of a, with optional power
/// iterations (A A^T)^s A Omega, re-orthonormalized after every product.
template <typename Derived>
Matrix<typename Derived::Scalar> rsvd_range(const Eigen::MatrixBase<Derived> &a,
                                            const RsvdConfig &cfg) {
    using Scalar = typename Derived::Scalar;
    detail::check_rsvd_config(a, cfg);
    const Matrix<Scalar> omega = gaussian_matrix<Scalar>(a.cols(), cfg.sample_size(), cfg.seed);
    Matrix<Scalar> q = detail::orthonormal_range<Scalar>(matmul(a, omega));
    for (Index s = 0; s < cfg.power_iterations; ++s) {
        const Matrix<Scalar> z = detail::orthonormal_range<Scalar>(matmul(a.transpose(), q));
        q = detail::orthonormal_range<Scalar>(matmul(a, z));
    }
    return q;
}

/// All l = k + oversampling triplets of the projected factorization, before
/// truncation to the target rank.
template <typename Derived>
SvdResult<typename Derived::Scalar> rsvd_untruncated(const Eigen::MatrixBase<Derived> &a,
                                                     const RsvdConfig &cfg) {
    using Scalar = typename Derived::Scalar;
    const Matrix<Scalar> q = rsvd_range(a, cfg);
    SvdResult<Scalar> small = svd_exact(matmul(q.transpose(), a));
    small.u = matmul(q, small.u);
    for (Index k = 0; k < small.sigma.size(); ++k) {
        if (detail::canonical_sign(small.u.col(k))) {
            small.v.col(k) *= Scalar(-1);
        }
    }
    return small;
}

/// Approximate leading-k SVD of a.
template <typename Derived>
SvdResult<typename Derived::Scalar> rsvd(const Eigen::MatrixBase<Derived> &a,
                                         const RsvdConfig &cfg) {
    using Scalar = typename Derived::Scalar;
    SvdResult<Scalar> full = rsvd_untruncated(a, cfg);
    const Index k = cfg.target_rank;
    SvdResult<Scalar> out;
    out.u = full.u.leftCols(k);
    out.sigma = full.sigma.head(k);
    out.v = full.v.leftCols(k);
    return out;
}

} // namespace flowspec

#endif // FLOWSPEC_RSVD_HPP
