#ifndef FLOWSPEC_SUBSPACE_HPP
#define FLOWSPEC_SUBSPACE_HPP

// Principal angles and the sin(theta_max) distance between subspaces, plus
// the repeated-run stability study for stochastic PCA.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <numbers>
#include <vector>

#include "flowspec/linalg.hpp"
#include "flowspec/pca.hpp"

namespace flowspec {

template <typename Scalar>
class SubspaceBasis {
  public:
    static constexpr double orthonormality_tol = 1e-8;

    /// Wraps a basis that must already have orthonormal columns.
    template <typename Derived>
    explicit SubspaceBasis(const Eigen::MatrixBase<Derived> &basis) : basis_(basis) {
        if (basis_.rows() < 1 || basis_.cols() < 1 || basis_.cols() > basis_.rows()) {
            throw DimensionError("SubspaceBasis: invalid basis shape " +
                                 shape_string(basis_.rows(), basis_.cols()));
        }
        const Matrix<Scalar> gram = basis_.transpose() * basis_;
        const Scalar err =
            (gram - Matrix<Scalar>::Identity(basis_.cols(), basis_.cols())).cwiseAbs().maxCoeff();
        if (!(err <= Scalar(orthonormality_tol))) {
            throw DataError("SubspaceBasis: columns are not orthonormal, max |B^T B - I| = " +
                            std::to_string(err));
        }
    }

    /// Orthonormal basis for the column span of a (which must have full column rank).
    template <typename Derived>
    static SubspaceBasis span_of(const Eigen::MatrixBase<Derived> &a) {
        QrResult<Scalar> qr = qr_thin(a);
        if (!qr.degenerate.empty()) {
            throw DataError("SubspaceBasis::span_of: columns are linearly dependent");
        }
        return SubspaceBasis(qr.q);
    }

    const Matrix<Scalar> &matrix() const { return basis_; }
    Index ambient() const { return basis_.rows(); }
    Index dim() const { return basis_.cols(); }

  private:
    Matrix<Scalar> basis_;
};

namespace detail {

template <typename Scalar>
bool basis_less(const Matrix<Scalar> &a, const Matrix<Scalar> &b) {
    if (a.cols() != b.cols()) {
        return a.cols() < b.cols();
    }
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
}

} // namespace detail

/// theta_1 <= ... <= theta_q for dim(f) >= dim(g) = q. Angles below pi/4 come
/// from the sines (singular values of (I - F F^T) G), the rest from the
/// cosines (singular values of F^T G); both are clamped to [0, 1].
template <typename Scalar>
Vector<Scalar> principal_angles(const SubspaceBasis<Scalar> &f, const SubspaceBasis<Scalar> &g) {
    if (f.ambient() != g.ambient()) {
        throw DimensionError("principal_angles: ambient dimensions differ (" +
                             std::to_string(f.ambient()) + " vs " + std::to_string(g.ambient()) +
                             ")");
    }
    if (f.dim() < g.dim()) {
        throw DimensionError("principal_angles: need dim(f) >= dim(g), got " +
                             std::to_string(f.dim()) + " < " + std::to_string(g.dim()));
    }
    const Matrix<Scalar> &qf = f.matrix();
    const Matrix<Scalar> &qg = g.matrix();
    const Matrix<Scalar> cross = qf.transpose() * qg;
    const Vector<Scalar> cosines = svd_exact(cross).sigma;
    const Matrix<Scalar> residual = qg - qf * cross;
    const Vector<Scalar> sines = svd_exact(residual).sigma;

    const Index q = g.dim();
    const Scalar quarter = std::numbers::pi_v<Scalar> / Scalar(4);
    Vector<Scalar> angles(q);
    for (Index i = 0; i < q; ++i) {
        const Scalar c = std::clamp(cosines(i), Scalar(0), Scalar(1));
        const Scalar s = std::clamp(sines(q - 1 - i), Scalar(0), Scalar(1));
        const Scalar from_sine = std::asin(s);
        angles(i) = from_sine < quarter ? from_sine : std::acos(c);
    }
    std::sort(angles.data(), angles.data() + q);
    return angles;
}

/// sin of the largest principal angle between equal-dimension subspaces.
/// Symmetric in its arguments bit-for-bit.
template <typename Scalar>
Scalar distance(const SubspaceBasis<Scalar> &f, const SubspaceBasis<Scalar> &g) {
    if (f.dim() != g.dim()) {
        throw DimensionError("distance: subspace dimensions differ (" + std::to_string(f.dim()) +
                             " vs " + std::to_string(g.dim()) + ")");
    }
    if (f.ambient() != g.ambient()) {
        throw DimensionError("distance: ambient dimensions differ (" +
                             std::to_string(f.ambient()) + " vs " + std::to_string(g.ambient()) +
                             ")");
    }
    const bool swap = detail::basis_less(g.matrix(), f.matrix());
    const Matrix<Scalar> &qf = swap ? g.matrix() : f.matrix();
    const Matrix<Scalar> &qg = swap ? f.matrix() : g.matrix();

    const Matrix<Scalar> cross = qf.transpose() * qg;
    const Scalar sigma_min = std::clamp(svd_exact(cross).sigma.minCoeff(), Scalar(0), Scalar(1));
    const Scalar from_cosine = std::sqrt(Scalar(1) - sigma_min * sigma_min);
    if (from_cosine >= std::sqrt(Scalar(0.5))) {
        return from_cosine;
    }
    const Matrix<Scalar> residual = qg - qf * cross;
    return std::clamp(svd_exact(residual).sigma(0), Scalar(0), Scalar(1));
}

struct StabilityReport {
    Index runs = 0;
    Index q = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> pairwise_distances; // (0,1), (0,2), ..., (runs-2, runs-1)
    double mean = 0.0;
    double std_dev = 0.0; // sample (n - 1) estimator
};

inline void summarize(StabilityReport &report) {
    const auto &d = report.pairwise_distances;
    double sum = 0.0;
    for (double x : d) {
        sum += x;
    }
    report.mean = d.empty() ? 0.0 : sum / static_cast<double>(d.size());
    double ss = 0.0;
    for (double x : d) {
        ss += (x - report.mean) * (x - report.mean);
    }
    report.std_dev = d.size() < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(d.size() - 1));
}

/// Fits stochastic PCA `runs` times with seeds base.seed + i and reports every
/// pairwise subspace distance between the q-dimensional component spans.
template <typename Derived>
StabilityReport stability_study(const Eigen::MatrixBase<Derived> &y, Index q, Index runs,
                                const RsvdConfig &base) {
    using Scalar = typename Derived::Scalar;
    if (runs < 2) {
        throw DimensionError("stability_study: need at least 2 runs, got " + std::to_string(runs));
    }
    const Matrix<Scalar> data = y;

    std::vector<std::future<PcaModel<Scalar>>> pending;
    StabilityReport report;
    report.runs = runs;
    report.q = q;
    for (Index r = 0; r < runs; ++r) {
        RsvdConfig cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(r);
        report.seeds.push_back(cfg.seed);
        pending.push_back(std::async(std::launch::async, [&data, q, cfg] {
            return fit_pca(data, q, PcaMethod::stochastic, cfg);
        }));
    }
    std::vector<SubspaceBasis<Scalar>> bases;
    for (auto &job : pending) {
        bases.emplace_back(job.get().components);
    }
    for (Index i = 0; i < runs; ++i) {
        for (Index j = i + 1; j < runs; ++j) {
            report.pairwise_distances.push_back(
                static_cast<double>(distance(bases[static_cast<std::size_t>(i)],
                                             bases[static_cast<std::size_t>(j)])));
        }
    }
    summarize(report);
    return report;
}

} // namespace flowspec

#endif // FLOWSPEC_SUBSPACE_HPP
