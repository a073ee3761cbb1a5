#ifndef FLOWSPEC_TEST_SYNTHETIC_HPP
#define FLOWSPEC_TEST_SYNTHETIC_HPP

// Test-only data generators and oracles. Orthonormal factors come from
// Eigen's HouseholderQR so they do not share code with the library's QR.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flowspec/ingestion.hpp"
#include "flowspec/linalg.hpp"

namespace synthetic {

using flowspec::Index;
using flowspec::MatrixXd;
using flowspec::VectorXd;

inline MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
    return flowspec::gaussian_matrix(rows, cols, seed);
}

inline MatrixXd random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
    const MatrixXd g = random_matrix(rows, cols, seed);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    return qr.householderQ() * MatrixXd::Identity(rows, cols);
}

/// U diag(sigma) V^T with random orthonormal U (m x r) and V (n x r).
inline MatrixXd low_rank(Index m, Index n, const VectorXd &sigma, std::uint64_t seed) {
    const Index r = sigma.size();
    const MatrixXd u = random_orthonormal(m, r, seed);
    const MatrixXd v = random_orthonormal(n, r, seed + 7919);
    return u * sigma.asDiagonal() * v.transpose();
}

inline MatrixXd random_symmetric(Index n, std::uint64_t seed) {
    const MatrixXd g = random_matrix(n, n, seed);
    return (g + g.transpose()) / 2.0;
}

/// p x n frames: constant background 0.5 plus a rank-`rank` signal with
/// geometrically decaying strengths, plus Gaussian noise of relative size
/// `noise` (measured against the signal's RMS entry).
inline MatrixXd noisy_low_rank_frames(Index p, Index n, Index rank, double noise,
                                      std::uint64_t seed) {
    VectorXd sigma(rank);
    for (Index i = 0; i < rank; ++i) {
        sigma(i) = std::pow(0.7, static_cast<double>(i));
    }
    MatrixXd signal = low_rank(p, n, sigma, seed);
    const double rms = std::sqrt(signal.squaredNorm() / static_cast<double>(signal.size()));
    signal /= rms * 10.0; // entries ~ 0.1
    const MatrixXd eps = random_matrix(p, n, seed + 104729);
    return (signal + noise * 0.1 * eps).array() + 0.5;
}

/// Gaussian bump of radius `width / 10` translating left to right across a
/// dark background; one frame per column, row-major pixels in [0, 1].
inline MatrixXd translating_bump(Index width, Index height, Index frames) {
    MatrixXd data(width * height, frames);
    const double radius = static_cast<double>(width) / 10.0;
    for (Index f = 0; f < frames; ++f) {
        const double cx = static_cast<double>(width) *
                          (0.15 + 0.7 * static_cast<double>(f) / static_cast<double>(frames - 1));
        const double cy = static_cast<double>(height) / 2.0;
        for (Index row = 0; row < height; ++row) {
            for (Index col = 0; col < width; ++col) {
                const double dx = static_cast<double>(col) + 0.5 - cx;
                const double dy = static_cast<double>(row) + 0.5 - cy;
                data(row * width + col, f) =
                    0.1 + 0.8 * std::exp(-(dx * dx + dy * dy) / (2.0 * radius * radius));
            }
        }
    }
    return data;
}

/// Writes each column as `dir/NNNN.pgm` (8-bit). Returns the quantized data
/// exactly as it will be read back.
inline MatrixXd write_frames(const std::filesystem::path &dir, const MatrixXd &data, Index width,
                             Index height) {
    std::filesystem::create_directories(dir);
    MatrixXd quantized(data.rows(), data.cols());
    for (Index i = 0; i < data.cols(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04ld.pgm", static_cast<long>(i));
        flowspec::Frame f{width, height, data.col(i)};
        flowspec::write_pgm(dir / name, f, 255);
        quantized.col(i) = (data.col(i).array().max(0.0).min(1.0) * 255.0).round() / 255.0;
    }
    return quantized;
}

inline double psnr(const MatrixXd &reference, const MatrixXd &estimate) {
    const double mse = (reference - estimate).squaredNorm() / static_cast<double>(reference.size());
    return 10.0 * std::log10(1.0 / mse);
}

/// Largest sine of the principal angles via Eigen's SVD of the residual
/// (I - A A^T) B, for orthonormal A, B of equal width.
inline double oracle_distance(const MatrixXd &a, const MatrixXd &b) {
    const MatrixXd residual = b - a * (a.transpose() * b);
    Eigen::JacobiSVD<MatrixXd> svd(residual);
    return svd.singularValues()(0);
}

inline MatrixXd orthonormal_columns(const MatrixXd &a) {
    Eigen::HouseholderQR<MatrixXd> qr(a);
    return qr.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
}

inline std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("flowspec_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace synthetic

#endif // FLOWSPEC_TEST_SYNTHETIC_HPP
