#ifndef FLOWSPEC_INGESTION_HPP
#define FLOWSPEC_INGESTION_HPP

// Grayscale frame loading (Netpbm PGM) and assembly of the p x n data matrix,
// one column per frame.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flowspec/error.hpp"
#include "flowspec/linalg.hpp"

namespace flowspec {

using DataMatrix = MatrixXd;

/// Grayscale image, row-major (top-left first), values in [0, 1].
struct Frame {
    Index width = 0;
    Index height = 0;
    VectorXd pixels;
};

enum class PgmErrorKind { io, bad_magic, bad_header, bad_maxval, bad_value, truncated };

class PgmError : public DataError {
  public:
    PgmError(PgmErrorKind kind, const std::string &what) : DataError(what), kind_(kind) {}
    PgmErrorKind kind() const noexcept { return kind_; }

  private:
    PgmErrorKind kind_;
};

/// Decodes a P2 or P5 image; `name` is used in error messages.
Frame parse_pgm(std::string_view bytes, const std::string &name = "<memory>");
Frame load_pgm(const std::filesystem::path &path);

/// Writes a binary P5 image, quantizing [0, 1] to 0..maxval. Values outside
/// [0, 1] are clamped; the number of clamped pixels is returned.
std::size_t write_pgm(const std::filesystem::path &path, const Frame &frame, int maxval = 255);

/// Luma 0.299 r + 0.587 g + 0.114 b. Inputs outside [0, 1] are clamped and counted.
class LumaConverter {
  public:
    double operator()(double r, double g, double b);
    std::size_t clamped() const { return clamped_; }

  private:
    std::size_t clamped_ = 0;
};

/// Non-overlapping factor x factor block averages.
Frame downsample(const Frame &frame, Index factor);

struct FrameSequence {
    Index width = 0;
    Index height = 0;
    std::vector<Frame> frames;
    std::vector<std::string> source_names;
};

/// Loads every *.pgm in `dir` in lexicographic file-name order, optionally
/// downsampled.
FrameSequence load_frames(const std::filesystem::path &dir, Index downsample_factor = 1);

/// p x n matrix with column i = frame i. All frames must share dimensions.
DataMatrix assemble(const FrameSequence &seq);

/// Column `i` of `data` reshaped back into a width x height frame.
Frame frame_from_column(const DataMatrix &data, Index i, Index width, Index height);

} // namespace flowspec

#endif // FLOWSPEC_INGESTION_HPP
