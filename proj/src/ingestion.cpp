#include "flowspec/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace flowspec {

namespace {

class HeaderReader {
  public:
    HeaderReader(std::string_view bytes, const std::string &name) : bytes_(bytes), name_(name) {}

    std::size_t position() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                return;
            }
        }
    }

    // Unsigned decimal; `truncated_kind` is raised when input ends first.
    unsigned long next_uint(const char *field, PgmErrorKind truncated_kind) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) {
            throw PgmError(truncated_kind,
                           name_ + ": unexpected end of file reading " + std::string(field));
        }
        unsigned long value = 0;
        const char *first = bytes_.data() + pos_;
        const char *last = bytes_.data() + bytes_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr == first) {
            throw PgmError(truncated_kind == PgmErrorKind::truncated ? PgmErrorKind::bad_value
                                                                     : PgmErrorKind::bad_header,
                           name_ + ": malformed " + std::string(field));
        }
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    void expect_single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw PgmError(PgmErrorKind::bad_header,
                           name_ + ": expected whitespace after maxval");
        }
        ++pos_;
    }

  private:
    std::string_view bytes_;
    const std::string &name_;
    std::size_t pos_ = 0;
};

} // namespace

Frame parse_pgm(std::string_view bytes, const std::string &name) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
        throw PgmError(PgmErrorKind::bad_magic, name + ": not a PGM file (magic must be P2 or P5)");
    }
    const bool binary = bytes[1] == '5';
    HeaderReader reader(bytes.substr(2), name);
    const unsigned long width = reader.next_uint("width", PgmErrorKind::bad_header);
    const unsigned long height = reader.next_uint("height", PgmErrorKind::bad_header);
    const unsigned long maxval = reader.next_uint("maxval", PgmErrorKind::bad_header);
    if (width == 0 || height == 0) {
        throw PgmError(PgmErrorKind::bad_header, name + ": zero image dimension");
    }
    if (maxval == 0 || maxval > 65535) {
        throw PgmError(PgmErrorKind::bad_maxval,
                       name + ": maxval " + std::to_string(maxval) + " outside [1, 65535]");
    }

    Frame frame;
    frame.width = static_cast<Index>(width);
    frame.height = static_cast<Index>(height);
    const Index count = frame.width * frame.height;
    frame.pixels.resize(count);
    const double scale = 1.0 / static_cast<double>(maxval);

    auto check = [&](unsigned long v, Index i) {
        if (v > maxval) {
            throw PgmError(PgmErrorKind::bad_value, name + ": pixel " + std::to_string(i) +
                                                        " value " + std::to_string(v) +
                                                        " exceeds maxval");
        }
    };

    if (binary) {
        reader.expect_single_whitespace();
        const std::string_view raster = bytes.substr(2 + reader.position());
        const std::size_t bpp = maxval > 255 ? 2 : 1;
        const std::size_t needed = static_cast<std::size_t>(count) * bpp;
        if (raster.size() < needed) {
            throw PgmError(PgmErrorKind::truncated,
                           name + ": raster has " + std::to_string(raster.size()) +
                               " bytes, expected " + std::to_string(needed));
        }
        for (Index i = 0; i < count; ++i) {
            const auto at = static_cast<std::size_t>(i) * bpp;
            unsigned long v = static_cast<unsigned char>(raster[at]);
            if (bpp == 2) {
                v = (v << 8) | static_cast<unsigned char>(raster[at + 1]);
            }
            check(v, i);
            frame.pixels(i) = static_cast<double>(v) * scale;
        }
    } else {
        for (Index i = 0; i < count; ++i) {
            const unsigned long v = reader.next_uint("pixel", PgmErrorKind::truncated);
            check(v, i);
            frame.pixels(i) = static_cast<double>(v) * scale;
        }
    }
    return frame;
}

Frame load_pgm(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PgmError(PgmErrorKind::io, path.string() + ": cannot open");
    }
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_pgm(bytes, path.string());
}

std::size_t write_pgm(const std::filesystem::path &path, const Frame &frame, int maxval) {
    if (maxval < 1 || maxval > 65535) {
        throw DataError("write_pgm: maxval must be in [1, 65535]");
    }
    if (frame.pixels.size() != frame.width * frame.height) {
        throw DimensionError("write_pgm: pixel count does not match " +
                             shape_string(frame.height, frame.width));
    }
    std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) +
                      "\n" + std::to_string(maxval) + "\n";
    std::size_t clamped = 0;
    for (Index i = 0; i < frame.pixels.size(); ++i) {
        double v = frame.pixels(i);
        if (!(v >= 0.0 && v <= 1.0)) {
            ++clamped;
            v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        }
        const auto q = static_cast<unsigned>(std::lround(v * maxval));
        if (maxval > 255) {
            out.push_back(static_cast<char>(q >> 8));
        }
        out.push_back(static_cast<char>(q & 0xFF));
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file || !file.write(out.data(), static_cast<std::streamsize>(out.size()))) {
        throw IoError(path.string() + ": cannot write");
    }
    return clamped;
}

double LumaConverter::operator()(double r, double g, double b) {
    auto clamp = [this](double v) {
        if (!(v >= 0.0 && v <= 1.0)) {
            ++clamped_;
            return std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        }
        return v;
    };
    return 0.299 * clamp(r) + 0.587 * clamp(g) + 0.114 * clamp(b);
}

Frame downsample(const Frame &frame, Index factor) {
    if (factor < 1) {
        throw DimensionError("downsample: factor must be >= 1");
    }
    if (frame.width % factor != 0 || frame.height % factor != 0) {
        throw DimensionError("downsample: factor " + std::to_string(factor) +
                             " does not divide " + std::to_string(frame.width) + "x" +
                             std::to_string(frame.height));
    }
    if (factor == 1) {
        return frame;
    }
    Frame out;
    out.width = frame.width / factor;
    out.height = frame.height / factor;
    out.pixels = VectorXd::Zero(out.width * out.height);
    const double inv = 1.0 / static_cast<double>(factor * factor);
    for (Index row = 0; row < out.height; ++row) {
        for (Index col = 0; col < out.width; ++col) {
            double sum = 0.0;
            for (Index dy = 0; dy < factor; ++dy) {
                for (Index dx = 0; dx < factor; ++dx) {
                    sum += frame.pixels((row * factor + dy) * frame.width + col * factor + dx);
                }
            }
            out.pixels(row * out.width + col) = sum * inv;
        }
    }
    return out;
}

FrameSequence load_frames(const std::filesystem::path &dir, Index downsample_factor) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw IoError(dir.string() + ": not a directory");
    }
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path &a, const fs::path &b) {
                  return a.filename().string() < b.filename().string();
              });
    if (files.empty()) {
        throw DataError(dir.string() + ": no .pgm frames found");
    }

    FrameSequence seq;
    for (const auto &file : files) {
        seq.frames.push_back(downsample(load_pgm(file), downsample_factor));
        seq.source_names.push_back(file.filename().string());
    }
    seq.width = seq.frames.front().width;
    seq.height = seq.frames.front().height;
    return seq;
}

DataMatrix assemble(const FrameSequence &seq) {
    if (seq.frames.empty()) {
        throw DataError("assemble: empty frame sequence");
    }
    const Index p = seq.width * seq.height;
    DataMatrix data(p, static_cast<Index>(seq.frames.size()));
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const Frame &f = seq.frames[i];
        if (f.width != seq.width || f.height != seq.height || f.pixels.size() != p) {
            const std::string name =
                i < seq.source_names.size() ? seq.source_names[i] : "frame " + std::to_string(i);
            throw DataError("assemble: " + name + " is " + std::to_string(f.width) + "x" +
                            std::to_string(f.height) + ", expected " + std::to_string(seq.width) +
                            "x" + std::to_string(seq.height));
        }
        data.col(static_cast<Index>(i)) = f.pixels;
    }
    return data;
}

Frame frame_from_column(const DataMatrix &data, Index i, Index width, Index height) {
    if (width * height != data.rows()) {
        throw DimensionError("frame_from_column: " + std::to_string(width) + "x" +
                             std::to_string(height) + " does not match " +
                             std::to_string(data.rows()) + " rows");
    }
    return Frame{width, height, data.col(i)};
}

} // namespace flowspec
