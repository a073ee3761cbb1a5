#include "flowspec/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace flowspec::io {

namespace {

using json = nlohmann::json;

constexpr char dataset_magic[8] = {'F', 'L', 'O', 'W', 'D', 'A', 'T', 'A'};
constexpr char pca_magic[8] = {'F', 'L', 'O', 'W', 'P', 'C', 'A', '\0'};

template <typename UInt>
void put_le(std::string &out, UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_f64(std::string &out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <typename Derived>
void put_f64s(std::string &out, const Eigen::DenseBase<Derived> &m) {
    // Column-major traversal.
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            put_f64(out, m(i, j));
        }
    }
}

class ByteReader {
  public:
    ByteReader(const std::string &bytes, std::string name) : bytes_(bytes), name_(std::move(name)) {}

    template <typename UInt>
    UInt get_le() {
        need(sizeof(UInt));
        UInt v = 0;
        for (std::size_t i = 0; i < sizeof(UInt); ++i) {
            v |= static_cast<UInt>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(UInt);
        return v;
    }

    double get_f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

    void get_f64s(MatrixXd &m) {
        need(static_cast<std::size_t>(m.size()) * 8);
        for (Index j = 0; j < m.cols(); ++j) {
            for (Index i = 0; i < m.rows(); ++i) {
                m(i, j) = get_f64();
            }
        }
    }

    void expect_magic(const char (&magic)[8]) {
        need(8);
        if (std::memcmp(bytes_.data() + pos_, magic, 8) != 0) {
            throw DataError(name_ + ": bad magic");
        }
        pos_ += 8;
    }

    void expect_end() const {
        if (pos_ != bytes_.size()) {
            throw DataError(name_ + ": " + std::to_string(bytes_.size() - pos_) +
                            " trailing bytes");
        }
    }

  private:
    void need(std::size_t count) const {
        if (bytes_.size() - pos_ < count) {
            throw DataError(name_ + ": truncated file");
        }
    }

    const std::string &bytes_;
    std::string name_;
    std::size_t pos_ = 0;
};

std::string payload_bytes(const DataMatrix &data) {
    std::string out;
    out.reserve(static_cast<std::size_t>(data.size()) * 8);
    put_f64s(out, data);
    return out;
}

// Indented JSON, no trailing whitespace, newline-terminated.
std::string dump(const json &j) { return j.dump(2) + "\n"; }

json parse_json(const std::string &text, const std::string &name) {
    try {
        return json::parse(text);
    } catch (const json::exception &e) {
        throw DataError(name + ": invalid JSON (" + e.what() + ")");
    }
}

std::vector<std::string> split(const std::string &line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string &s, const std::string &name) {
    double v = 0.0;
    const char *first = s.data();
    const char *last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw DataError(name + ": cannot parse number '" + s + "'");
    }
    return v;
}

std::vector<std::vector<std::string>> csv_rows(const std::string &text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line != "\r") {
            rows.push_back(split(line, ','));
        }
    }
    return rows;
}

} // namespace

std::string fnv1a_hex(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string encode_dataset(const Dataset &ds) {
    std::string out(dataset_magic, 8);
    put_le<std::uint32_t>(out, format_version);
    put_le<std::uint32_t>(out, 0);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.data.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.data.cols()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.width));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.height));
    out += payload_bytes(ds.data);
    return out;
}

Dataset decode_dataset(const std::string &bytes, const std::string &name) {
    ByteReader in(bytes, name);
    in.expect_magic(dataset_magic);
    const auto version = in.get_le<std::uint32_t>();
    if (version != format_version) {
        throw DataError(name + ": unsupported dataset version " + std::to_string(version));
    }
    in.get_le<std::uint32_t>();
    const auto p = static_cast<Index>(in.get_le<std::uint64_t>());
    const auto n = static_cast<Index>(in.get_le<std::uint64_t>());
    Dataset ds;
    ds.width = static_cast<Index>(in.get_le<std::uint64_t>());
    ds.height = static_cast<Index>(in.get_le<std::uint64_t>());
    if (p < 1 || n < 1 || ds.width * ds.height != p) {
        throw DataError(name + ": inconsistent header (p=" + std::to_string(p) +
                        ", n=" + std::to_string(n) + ")");
    }
    if ((bytes.size() - 48) / 8 != static_cast<std::size_t>(p * n)) {
        throw DataError(name + ": payload size does not match header");
    }
    ds.data.resize(p, n);
    in.get_f64s(ds.data);
    in.expect_end();
    return ds;
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path.string() + ": cannot open");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw IoError(path.string() + ": cannot write");
    }
}

void write_dataset(const std::filesystem::path &path, const Dataset &ds) {
    write_text(path, encode_dataset(ds));
}

Dataset read_dataset(const std::filesystem::path &path) {
    return decode_dataset(read_text(path), path.string());
}

std::string payload_checksum(const Dataset &ds) { return fnv1a_hex(payload_bytes(ds.data)); }

std::string manifest_json(const Manifest &m) {
    json j;
    j["format"] = "flowspec-dataset";
    j["version"] = format_version;
    j["p"] = m.p;
    j["n"] = m.n;
    j["width"] = m.width;
    j["height"] = m.height;
    j["downsample"] = m.downsample;
    j["files"] = m.files;
    j["checksum"] = m.checksum;
    return dump(j);
}

Manifest read_manifest(const std::filesystem::path &path) {
    const json j = parse_json(read_text(path), path.string());
    Manifest m;
    try {
        m.p = j.at("p").get<Index>();
        m.n = j.at("n").get<Index>();
        m.width = j.at("width").get<Index>();
        m.height = j.at("height").get<Index>();
        m.downsample = j.at("downsample").get<Index>();
        m.files = j.at("files").get<std::vector<std::string>>();
        m.checksum = j.at("checksum").get<std::string>();
    } catch (const json::exception &e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return m;
}

std::string encode_pca_binary(const PcaModelXd &model) {
    std::string out(pca_magic, 8);
    put_le<std::uint32_t>(out, format_version);
    put_le<std::uint32_t>(out, 0);
    put_f64s(out, model.mean);
    put_f64s(out, model.sigma);
    put_f64s(out, model.components);
    return out;
}

std::string pca_sidecar_json(const PcaFile &file) {
    const PcaModelXd &m = file.model;
    json j;
    j["format"] = "flowspec-pca";
    j["version"] = format_version;
    j["p"] = m.dim();
    j["q"] = m.rank();
    j["n_samples"] = m.n_samples;
    j["method"] = to_string(m.method);
    j["width"] = file.width;
    j["height"] = file.height;
    if (m.rsvd) {
        j["seed"] = m.rsvd->seed;
        j["oversampling"] = m.rsvd->oversampling;
        j["power_iterations"] = m.rsvd->power_iterations;
    } else {
        j["seed"] = nullptr;
    }
    j["spectrum"] = std::vector<double>(m.spectrum.data(), m.spectrum.data() + m.spectrum.size());
    return dump(j);
}

void write_pca(const std::filesystem::path &bin, const std::filesystem::path &sidecar,
               const PcaFile &file) {
    write_text(bin, encode_pca_binary(file.model));
    write_text(sidecar, pca_sidecar_json(file));
}

PcaFile read_pca(const std::filesystem::path &bin, const std::filesystem::path &sidecar) {
    const json j = parse_json(read_text(sidecar), sidecar.string());
    PcaFile file;
    PcaModelXd &m = file.model;
    Index p = 0;
    Index q = 0;
    try {
        p = j.at("p").get<Index>();
        q = j.at("q").get<Index>();
        m.n_samples = j.at("n_samples").get<Index>();
        m.method = parse_pca_method(j.at("method").get<std::string>());
        file.width = j.at("width").get<Index>();
        file.height = j.at("height").get<Index>();
        if (!j.at("seed").is_null()) {
            RsvdConfig cfg;
            cfg.target_rank = q;
            cfg.seed = j.at("seed").get<std::uint64_t>();
            cfg.oversampling = j.at("oversampling").get<Index>();
            cfg.power_iterations = j.at("power_iterations").get<Index>();
            m.rsvd = cfg;
        }
        const auto spectrum = j.at("spectrum").get<std::vector<double>>();
        m.spectrum = Eigen::Map<const VectorXd>(spectrum.data(), static_cast<Index>(spectrum.size()));
    } catch (const json::exception &e) {
        throw DataError(sidecar.string() + ": " + e.what());
    }
    if (p < 1 || q < 1 || q > p) {
        throw DataError(sidecar.string() + ": invalid p/q");
    }

    const std::string bytes = read_text(bin);
    ByteReader in(bytes, bin.string());
    in.expect_magic(pca_magic);
    if (in.get_le<std::uint32_t>() != format_version) {
        throw DataError(bin.string() + ": unsupported model version");
    }
    in.get_le<std::uint32_t>();
    MatrixXd mean(p, 1);
    MatrixXd sigma(q, 1);
    m.components.resize(p, q);
    in.get_f64s(mean);
    in.get_f64s(sigma);
    in.get_f64s(m.components);
    in.expect_end();
    m.mean = mean.col(0);
    m.sigma = sigma.col(0);
    return file;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string coords_csv(const MatrixXd &coords) {
    std::string out = "frame";
    for (Index c = 0; c < coords.cols(); ++c) {
        out += ",c" + std::to_string(c + 1);
    }
    out += "\n";
    for (Index r = 0; r < coords.rows(); ++r) {
        out += std::to_string(r);
        for (Index c = 0; c < coords.cols(); ++c) {
            out += "," + format_double(coords(r, c));
        }
        out += "\n";
    }
    return out;
}

MatrixXd parse_coords_csv(const std::string &text, const std::string &name) {
    const auto rows = csv_rows(text);
    if (rows.empty() || rows.front().empty() || rows.front().front() != "frame") {
        throw DataError(name + ": missing 'frame,c1,...' header");
    }
    const auto q = static_cast<Index>(rows.front().size()) - 1;
    if (q < 1) {
        throw DataError(name + ": no coordinate columns");
    }
    MatrixXd coords(static_cast<Index>(rows.size()) - 1, q);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (static_cast<Index>(rows[r].size()) != q + 1) {
            throw DataError(name + ": row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " fields, expected " +
                            std::to_string(q + 1));
        }
        for (Index c = 0; c < q; ++c) {
            coords(static_cast<Index>(r) - 1, c) =
                parse_double(rows[r][static_cast<std::size_t>(c) + 1], name);
        }
    }
    return coords;
}

std::string eigenvalues_csv(const VectorXd &values) {
    std::string out = "index,value\n";
    for (Index i = 0; i < values.size(); ++i) {
        out += std::to_string(i) + "," + format_double(values(i)) + "\n";
    }
    return out;
}

VectorXd parse_eigenvalues_csv(const std::string &text, const std::string &name) {
    const auto rows = csv_rows(text);
    if (rows.empty() || rows.front() != std::vector<std::string>{"index", "value"}) {
        throw DataError(name + ": missing 'index,value' header");
    }
    VectorXd values(static_cast<Index>(rows.size()) - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) {
            throw DataError(name + ": malformed row " + std::to_string(r));
        }
        values(static_cast<Index>(r) - 1) = parse_double(rows[r][1], name);
    }
    return values;
}

std::string stability_json(const StabilityReport &r) {
    json j;
    j["runs"] = r.runs;
    j["q"] = r.q;
    j["seeds"] = r.seeds;
    j["pairing"] = "all pairs";
    j["pairwise_distances"] = r.pairwise_distances;
    j["mean"] = r.mean;
    j["std_dev"] = r.std_dev;
    return dump(j);
}

std::string stability_csv_header() { return "group,mean,std\n"; }

std::string stability_csv_row(const std::string &group, const StabilityReport &r) {
    return group + "," + format_double(r.mean) + "," + format_double(r.std_dev) + "\n";
}

std::string decay_csv(const std::vector<DecaySeries> &series) {
    std::string out = "index,relative_value,method\n";
    for (const auto &s : series) {
        for (Index i = 0; i < s.values.size(); ++i) {
            out += std::to_string(i + 1) + "," + format_double(s.values(i)) + "," + s.method + "\n";
        }
    }
    return out;
}

} // namespace flowspec::io
