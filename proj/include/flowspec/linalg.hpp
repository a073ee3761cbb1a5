#ifndef FLOWSPEC_LINALG_HPP
#define FLOWSPEC_LINALG_HPP

// Dense factorizations used by the randomized and spectral algorithms.
//
// Storage is plain Eigen. The factorizations themselves (Householder QR,
// one-sided Jacobi SVD, cyclic Jacobi eigensolver) are implemented here so
// their conventions are fixed: sorted spectra, nonnegative R diagonal, and
// a deterministic column sign (first significant entry >= 0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flowspec/error.hpp"

namespace flowspec {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

inline std::string shape_string(Index rows, Index cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived> &a) {
    return a.allFinite();
}

/// Matrix product with an explicit shape check. Eigen's GEMM kernel does the
/// cache blocking; it runs single-threaded here so results do not depend on
/// the thread count.
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> matmul(const Eigen::MatrixBase<DerivedA> &a,
                                         const Eigen::MatrixBase<DerivedB> &b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: shapes " + shape_string(a.rows(), a.cols()) + " and " +
                             shape_string(b.rows(), b.cols()) + " are not aligned");
    }
    Matrix<typename DerivedA::Scalar> out(a.rows(), b.cols());
    out.noalias() = a * b;
    return out;
}

namespace detail {

// Flip v so its first significant entry is nonnegative. Returns true if flipped.
template <typename Derived>
bool canonical_sign(Eigen::MatrixBase<Derived> &&v) {
    using Scalar = typename Derived::Scalar;
    const Scalar scale = v.cwiseAbs().maxCoeff();
    if (scale == Scalar(0)) {
        return false;
    }
    const Scalar threshold = std::sqrt(std::numeric_limits<Scalar>::epsilon()) * scale;
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > threshold) {
            if (v(i) < Scalar(0)) {
                v = -v;
                return true;
            }
            return false;
        }
    }
    return false;
}

// Replace the listed columns of q with unit vectors orthogonal to every other
// column. Candidates are the standard basis vectors, tried in order.
template <typename Scalar>
void complete_orthonormal(Matrix<Scalar> &q, const std::vector<Index> &columns) {
    if (columns.empty()) {
        return;
    }
    std::vector<bool> good(static_cast<std::size_t>(q.cols()), true);
    for (Index c : columns) {
        good[static_cast<std::size_t>(c)] = false;
    }
    Index candidate = 0;
    for (Index c : columns) {
        for (; candidate < q.rows(); ++candidate) {
            Vector<Scalar> v = Vector<Scalar>::Unit(q.rows(), candidate);
            for (int pass = 0; pass < 2; ++pass) {
                for (Index j = 0; j < q.cols(); ++j) {
                    if (good[static_cast<std::size_t>(j)]) {
                        v -= q.col(j).dot(v) * q.col(j);
                    }
                }
            }
            const Scalar norm = v.norm();
            if (norm > Scalar(0.5)) {
                q.col(c) = v / norm;
                good[static_cast<std::size_t>(c)] = true;
                ++candidate;
                break;
            }
        }
        if (!good[static_cast<std::size_t>(c)]) {
            throw DataError("complete_orthonormal: ran out of candidate directions");
        }
    }
}

} // namespace detail

template <typename Scalar>
struct QrResult {
    Matrix<Scalar> q;            // m x n, orthonormal columns
    Matrix<Scalar> r;            // n x n, upper triangular, diagonal >= 0
    std::vector<Index> degenerate; // columns whose R diagonal is numerically zero

    Index rank() const { return r.cols() - static_cast<Index>(degenerate.size()); }
};

/// Thin Householder QR of a tall matrix. Rank-deficient input is allowed: Q
/// still has orthonormal columns and the collapsed columns are listed in
/// `degenerate`.
template <typename Derived>
QrResult<typename Derived::Scalar> qr_thin(const Eigen::MatrixBase<Derived> &a) {
    using Scalar = typename Derived::Scalar;
    const Index m = a.rows();
    const Index n = a.cols();
    if (m < 1 || n < 1) {
        throw DimensionError("qr_thin: empty matrix " + shape_string(m, n));
    }
    if (m < n) {
        throw DimensionError("qr_thin: need rows >= cols, got " + shape_string(m, n));
    }

    Matrix<Scalar> work = a;
    Matrix<Scalar> reflectors = Matrix<Scalar>::Zero(m, n);
    Vector<Scalar> tau = Vector<Scalar>::Zero(n);

    for (Index j = 0; j < n; ++j) {
        const Index len = m - j;
        auto x = work.col(j).tail(len);
        const Scalar alpha = x.norm();
        if (alpha == Scalar(0)) {
            continue;
        }
        const Scalar beta = x(0) >= Scalar(0) ? -alpha : alpha;
        Vector<Scalar> v = x;
        v(0) -= beta;
        const Scalar vnorm2 = v.squaredNorm();
        if (vnorm2 == Scalar(0)) {
            continue;
        }
        tau(j) = Scalar(2) / vnorm2;
        auto block = work.block(j, j, len, n - j);
        const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> vt_block = v.transpose() * block;
        block.noalias() -= (tau(j) * v) * vt_block;
        reflectors.col(j).tail(len) = v;
    }

    QrResult<Scalar> out;
    out.r = work.topRows(n).template triangularView<Eigen::Upper>();
    out.q = Matrix<Scalar>::Identity(m, n);
    for (Index j = n - 1; j >= 0; --j) {
        if (tau(j) == Scalar(0)) {
            continue;
        }
        const Index len = m - j;
        auto v = reflectors.col(j).tail(len);
        auto block = out.q.block(j, j, len, n - j);
        const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> vt_block = v.transpose() * block;
        block.noalias() -= (tau(j) * v) * vt_block;
    }

    for (Index j = 0; j < n; ++j) {
        if (out.r(j, j) < Scalar(0)) {
            out.r.row(j) *= Scalar(-1);
            out.q.col(j) *= Scalar(-1);
        }
    }

    const Scalar max_diag = out.r.diagonal().cwiseAbs().maxCoeff();
    const Scalar tol = std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(m) * max_diag;
    for (Index j = 0; j < n; ++j) {
        if (max_diag == Scalar(0) || std::abs(out.r(j, j)) <= tol) {
            out.degenerate.push_back(j);
        }
    }
    return out;
}

template <typename Scalar>
struct SvdResult {
    Matrix<Scalar> u;     // m x k
    Vector<Scalar> sigma; // k, nonincreasing, >= 0
    Matrix<Scalar> v;     // n x k

    Index rank() const { return sigma.size(); }
    Matrix<Scalar> reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

namespace detail {

// One-sided Jacobi on a tall matrix (m >= n). Orthogonalizes the columns of
// g in place; v accumulates the right rotations.
template <typename Scalar>
void hestenes_jacobi(Matrix<Scalar> &g, Matrix<Scalar> &v, int max_sweeps) {
    const Index n = g.cols();
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar tol = eps * static_cast<Scalar>(std::max<Index>(g.rows(), 1));
    v = Matrix<Scalar>::Identity(n, n);

    Scalar worst = 0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        worst = 0;
        for (Index p = 0; p + 1 < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const Scalar alpha = g.col(p).squaredNorm();
                const Scalar beta = g.col(q).squaredNorm();
                if (alpha == Scalar(0) || beta == Scalar(0)) {
                    continue;
                }
                const Scalar gamma = g.col(p).dot(g.col(q));
                const Scalar coupling = std::abs(gamma) / std::sqrt(alpha * beta);
                worst = std::max(worst, coupling);
                if (coupling <= tol) {
                    continue;
                }
                rotated = true;
                const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
                const Scalar t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                                 (std::abs(zeta) + std::hypot(Scalar(1), zeta));
                const Scalar c = Scalar(1) / std::hypot(Scalar(1), t);
                const Scalar s = c * t;
                for (Matrix<Scalar> *mat : {&g, &v}) {
                    const Vector<Scalar> colp = mat->col(p);
                    mat->col(p) = c * colp - s * mat->col(q);
                    mat->col(q) = s * colp + c * mat->col(q);
                }
            }
        }
        if (!rotated) {
            return;
        }
    }
    throw ConvergenceError("svd_exact: no convergence after " + std::to_string(max_sweeps) +
                               " sweeps, residual off-diagonal coupling " + std::to_string(worst),
                           static_cast<double>(worst));
}

template <typename Scalar>
SvdResult<Scalar> svd_tall(const Matrix<Scalar> &a, int max_sweeps) {
    const Index m = a.rows();
    const Index n = a.cols();
    // Tall inputs are first reduced to their n x n triangular factor.
    Matrix<Scalar> left;
    Matrix<Scalar> g;
    if (m > n) {
        QrResult<Scalar> qr = qr_thin(a);
        left = std::move(qr.q);
        g = std::move(qr.r);
    } else {
        g = a;
    }
    Matrix<Scalar> v;
    hestenes_jacobi(g, v, max_sweeps);

    Vector<Scalar> norms = g.colwise().norm().transpose();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return norms(i) > norms(j); });

    SvdResult<Scalar> out;
    out.sigma.resize(n);
    Matrix<Scalar> ug(g.rows(), n);
    out.v.resize(n, n);
    const Scalar sigma_max = n > 0 ? norms.maxCoeff() : Scalar(0);
    const Scalar floor = std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(n) * sigma_max;
    std::vector<Index> weak;
    for (Index k = 0; k < n; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        out.sigma(k) = norms(src);
        out.v.col(k) = v.col(src);
        if (norms(src) > floor && norms(src) > Scalar(0)) {
            ug.col(k) = g.col(src) / norms(src);
        } else {
            ug.col(k).setZero();
            weak.push_back(k);
        }
    }
    complete_orthonormal(ug, weak);
    out.u = m > n ? Matrix<Scalar>(left * ug) : ug;

    for (Index k = 0; k < n; ++k) {
        if (canonical_sign(out.u.col(k))) {
            out.v.col(k) *= Scalar(-1);
        }
    }
    return out;
}

} // namespace detail

/// Thin SVD, a = U diag(sigma) V^T with k = min(m, n), by one-sided Jacobi
/// rotations (QR-preconditioned when m > n). Deterministic.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd_exact(const Eigen::MatrixBase<Derived> &a,
                                              int max_sweeps = 50) {
    using Scalar = typename Derived::Scalar;
    if (a.rows() < 1 || a.cols() < 1) {
        throw DimensionError("svd_exact: empty matrix " + shape_string(a.rows(), a.cols()));
    }
    if (!a.allFinite()) {
        throw DataError("svd_exact: input contains NaN or Inf");
    }
    if (a.rows() >= a.cols()) {
        return detail::svd_tall<Scalar>(a, max_sweeps);
    }
    SvdResult<Scalar> t = detail::svd_tall<Scalar>(a.transpose(), max_sweeps);
    SvdResult<Scalar> out;
    out.sigma = std::move(t.sigma);
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    for (Index k = 0; k < out.sigma.size(); ++k) {
        if (detail::canonical_sign(out.u.col(k))) {
            out.v.col(k) *= Scalar(-1);
        }
    }
    return out;
}

template <typename Scalar>
struct EigResult {
    Vector<Scalar> values;  // nonincreasing
    Matrix<Scalar> vectors; // orthonormal columns
};

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
template <typename Derived>
EigResult<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived> &input,
                                            typename Derived::Scalar symmetry_tol = 1e-10,
                                            int max_sweeps = 50) {
    using Scalar = typename Derived::Scalar;
    const Index n = input.rows();
    if (n < 1 || input.cols() != n) {
        throw DimensionError("sym_eig: need a square matrix, got " +
                             shape_string(input.rows(), input.cols()));
    }
    if (!input.allFinite()) {
        throw DataError("sym_eig: input contains NaN or Inf");
    }
    const Scalar asym = (input - input.transpose()).cwiseAbs().maxCoeff();
    const Scalar scale = std::max(Scalar(1), input.cwiseAbs().maxCoeff());
    if (asym > symmetry_tol * scale) {
        throw DataError("sym_eig: matrix is not symmetric, max |a_ij - a_ji| = " +
                        std::to_string(asym));
    }

    Matrix<Scalar> a = (input + input.transpose()) / Scalar(2);
    Matrix<Scalar> vec = Matrix<Scalar>::Identity(n, n);
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    const Scalar norm = a.norm();

    auto off_norm = [&] {
        Scalar s = 0;
        for (Index j = 0; j < n; ++j) {
            s += a.col(j).head(j).squaredNorm();
        }
        return std::sqrt(Scalar(2) * s);
    };

    bool converged = norm == Scalar(0);
    Scalar off = 0;
    Vector<Scalar> cp(n);
    Vector<Scalar> cq(n);
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        off = off_norm();
        if (off <= eps * norm) {
            converged = true;
            break;
        }
        const Scalar skip = eps * norm / static_cast<Scalar>(n);
        for (Index p = 0; p + 1 < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const Scalar apq = a(p, q);
                if (std::abs(apq) <= skip) {
                    a(p, q) = a(q, p) = 0;
                    continue;
                }
                const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
                const Scalar t = (theta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                                 (std::abs(theta) + std::hypot(Scalar(1), theta));
                const Scalar c = Scalar(1) / std::hypot(Scalar(1), t);
                const Scalar s = c * t;

                // Columns of A*J; rows follow by symmetry.
                cp = c * a.col(p) - s * a.col(q);
                cq = s * a.col(p) + c * a.col(q);
                const Scalar app = a(p, p) - t * apq;
                const Scalar aqq = a(q, q) + t * apq;
                a.col(p) = cp;
                a.col(q) = cq;
                a.row(p) = cp.transpose();
                a.row(q) = cq.transpose();
                a(p, p) = app;
                a(q, q) = aqq;
                a(p, q) = a(q, p) = 0;

                cp = c * vec.col(p) - s * vec.col(q);
                vec.col(q) = s * vec.col(p) + c * vec.col(q);
                vec.col(p) = cp;
            }
        }
    }
    if (!converged) {
        off = off_norm();
        if (off > eps * norm) {
            throw ConvergenceError("sym_eig: no convergence after " + std::to_string(max_sweeps) +
                                       " sweeps, off-diagonal norm " + std::to_string(off),
                                   static_cast<double>(off));
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return a(i, i) > a(j, j); });
    EigResult<Scalar> out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src);
        out.vectors.col(k) = vec.col(src);
        detail::canonical_sign(out.vectors.col(k));
    }
    return out;
}

/// Source of i.i.d. standard normal draws: mt19937_64 words turned into
/// normals by the Box-Muller transform. The sequence is fully specified, so a
/// seed reproduces bit-identical output on every platform.
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        constexpr double two_pi = 6.283185307179586476925286766559;
        constexpr double unit = 1.0 / 9007199254740992.0; // 2^-53
        const double u1 = static_cast<double>((engine_() >> 11) + 1) * unit; // (0, 1]
        const double u2 = static_cast<double>(engine_() >> 11) * unit;       // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(two_pi * u2);
        has_spare_ = true;
        return radius * std::cos(two_pi * u2);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline std::uint64_t entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

/// rows x cols matrix of standard normal entries, filled column-major.
/// Without a seed, one is drawn from OS entropy.
template <typename Scalar = double>
Matrix<Scalar> gaussian_matrix(Index rows, Index cols,
                               std::optional<std::uint64_t> seed = std::nullopt) {
    if (rows < 1 || cols < 1) {
        throw DimensionError("gaussian_matrix: invalid shape " + shape_string(rows, cols));
    }
    NormalStream normal(seed.value_or(entropy_seed()));
    Matrix<Scalar> out(rows, cols);
    Scalar *data = out.data();
    for (Index i = 0; i < rows * cols; ++i) {
        data[i] = static_cast<Scalar>(normal());
    }
    return out;
}

} // namespace flowspec

#endif // FLOWSPEC_LINALG_HPP
