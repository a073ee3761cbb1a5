#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <sstream>

#include "flowspec/commands.hpp"
#include "flowspec/io.hpp"
#include "json.hpp"
#include "support/synthetic.hpp"

using namespace flowspec;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Writes a dataset container straight into `dir`, bypassing frame quantization.
fs::path stage_dataset(const std::string &name, const MatrixXd &data, Index width, Index height) {
    const fs::path dir = synthetic::scratch_dir(name);
    io::Dataset ds;
    ds.data = data;
    ds.width = width;
    ds.height = height;
    io::write_dataset(dir / files::dataset, ds);
    return dir;
}

RunConfig in_place(const fs::path &dir) {
    RunConfig cfg;
    cfg.input_dir = dir;
    cfg.output_dir = dir;
    cfg.seed = 7;
    return cfg;
}

MatrixXd rank3(Index p, Index n, std::uint64_t seed) {
    VectorXd sigma(3);
    sigma << 4.0, 2.0, 1.0;
    return synthetic::low_rank(p, n, sigma, seed).array() + 0.5;
}

// Residual of the best orthogonal alignment of a onto b, relative to |b|.
double procrustes_residual(const MatrixXd &a, const MatrixXd &b) {
    Eigen::JacobiSVD<MatrixXd> svd(a.transpose() * b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd r = svd.matrixU() * svd.matrixV().transpose();
    return (a * r - b).norm() / b.norm();
}

std::string read(const fs::path &p) { return io::read_text(p); }

} // namespace

TEST_CASE("ingest") {
    const fs::path frames = synthetic::scratch_dir("cmd_frames");
    const MatrixXd quantized =
        synthetic::write_frames(frames, synthetic::translating_bump(8, 4, 6), 8, 4);
    const fs::path out = synthetic::scratch_dir("cmd_ingest");
    RunConfig cfg;
    cfg.input_dir = frames;
    cfg.output_dir = out;
    cmd_ingest(cfg);

    const io::Dataset ds = io::read_dataset(out / files::dataset);
    CHECK((ds.data - quantized).cwiseAbs().maxCoeff() <= 1e-15);
    const io::Manifest m = io::read_manifest(out / files::manifest);
    CHECK(m.files.size() == 6);
    CHECK(m.p == 32);
    CHECK(m.checksum == io::payload_checksum(ds));
    CHECK(fs::exists(out / "ingest_log.json"));

    CHECK_THROWS_AS(cmd_ingest(cfg), IoError);
    cfg.force = true;
    CHECK_NOTHROW(cmd_ingest(cfg));

    cfg.input_dir = synthetic::scratch_dir("cmd_no_frames");
    CHECK_THROWS_AS(cmd_ingest(cfg), DataError);
}

TEST_CASE("pca") {
    const fs::path dir = stage_dataset("cmd_pca", rank3(24, 30, 501), 6, 4);
    RunConfig cfg = in_place(dir);
    cmd_pca(cfg);

    const MatrixXd stochastic = io::parse_coords_csv(read(dir / files::pca_coords));
    CHECK(stochastic.rows() == 30);
    CHECK(stochastic.cols() == 3);
    const std::string first = read(dir / files::pca_coords);
    const std::string first_model = read(dir / files::pca_model);
    CHECK(first.substr(0, first.find('\n')) == "frame,c1,c2,c3");
    const json log = json::parse(read(dir / "pca_log.json"));
    CHECK(log["seed"] == 7);
    CHECK(log["method"] == "stochastic");

    SUBCASE("same seed, same bytes") {
        cfg.force = true;
        cmd_pca(cfg);
        CHECK(read(dir / files::pca_coords) == first);
        CHECK(read(dir / files::pca_model) == first_model);
    }
    SUBCASE("exact and stochastic coordinates agree on rank-3 data") {
        cfg.force = true;
        cfg.method = PcaMethod::exact;
        cmd_pca(cfg);
        const MatrixXd exact = io::parse_coords_csv(read(dir / files::pca_coords));
        CHECK(procrustes_residual(stochastic, exact) <= 1e-6);
        CHECK(json::parse(read(dir / files::pca_sidecar))["seed"].is_null());
    }
    SUBCASE("missing dataset") {
        RunConfig bad = in_place(synthetic::scratch_dir("cmd_pca_empty"));
        try {
            cmd_pca(bad);
            FAIL("expected IoError");
        } catch (const IoError &e) {
            CHECK(std::string(e.what()).find("flowspec ingest") != std::string::npos);
        }
    }
}

TEST_CASE("dmap") {
    const MatrixXd y = synthetic::random_matrix(5, 25, 502);
    const fs::path dir = stage_dataset("cmd_dmap", y, 5, 1);
    RunConfig cfg = in_place(dir);
    cmd_dmap(cfg);

    double expected_eps = 0.0;
    for (Index i = 0; i < 25; ++i) {
        for (Index j = 0; j < 25; ++j) {
            expected_eps = std::max(expected_eps, (y.col(i) - y.col(j)).squaredNorm());
        }
    }
    const json log = json::parse(read(dir / "dmap_log.json"));
    CHECK(log["epsilon"].get<double>() == doctest::Approx(expected_eps).epsilon(1e-14));

    const VectorXd lambdas = io::parse_eigenvalues_csv(read(dir / files::dmap_eigenvalues));
    CHECK(lambdas.size() == 25);
    CHECK(std::abs(lambdas(0) - 1.0) <= 1e-8);
    const MatrixXd coords = io::parse_coords_csv(read(dir / files::dmap_coords));
    CHECK(coords.rows() == 25);
    CHECK(coords.cols() == 3);
    CHECK(fs::exists(dir / files::dmap_scatter));

    cfg.force = true;
    cfg.max_frames = 10;
    CHECK_THROWS_AS(cmd_dmap(cfg), DataError);

    RunConfig dup = in_place(stage_dataset("cmd_dmap_dup", MatrixXd::Ones(4, 5), 2, 2));
    try {
        cmd_dmap(dup);
        FAIL("expected DataError");
    } catch (const DataError &e) {
        CHECK(std::string(e.what()).find(files::manifest) != std::string::npos);
    }
}

TEST_CASE("stability") {
    const fs::path dir = stage_dataset("cmd_stability", rank3(40, 30, 503), 8, 5);
    RunConfig cfg = in_place(dir);
    cfg.runs = 3;
    cfg.group = "rank three";
    cmd_stability(cfg);
    const json report = json::parse(read(dir / files::stability_json));
    CHECK(report["pairwise_distances"].size() == 3);
    CHECK(report["mean"].get<double>() <= 1e-6);

    cfg.force = true;
    cfg.group = "again";
    cmd_stability(cfg);
    const std::string table = read(dir / files::stability_csv);
    CHECK(table.rfind("group,mean,std\nrank three,", 0) == 0);
    CHECK(table.find("\nagain,") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}

TEST_CASE("decay") {
    const fs::path dir = stage_dataset("cmd_decay", synthetic::random_matrix(6, 20, 504), 3, 2);
    RunConfig cfg = in_place(dir);

    try {
        cmd_decay(cfg);
        FAIL("expected IoError");
    } catch (const IoError &e) {
        CHECK(std::string(e.what()).find("flowspec pca") != std::string::npos);
    }
    cfg.method = PcaMethod::exact;
    cmd_pca(cfg);
    try {
        cmd_decay(cfg);
        FAIL("expected IoError");
    } catch (const IoError &e) {
        CHECK(std::string(e.what()).find("flowspec dmap") != std::string::npos);
    }
    cmd_dmap(cfg);
    cfg.decay_count = 10;
    cmd_decay(cfg);

    const std::string csv = read(dir / files::decay_csv);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,relative_value,method");
    std::map<std::string, std::vector<double>> curves;
    while (std::getline(in, line)) {
        const auto a = line.find(',');
        const auto b = line.rfind(',');
        curves[line.substr(b + 1)].push_back(std::stod(line.substr(a + 1, b - a - 1)));
    }
    REQUIRE(curves.size() == 2);
    CHECK(curves["pca"].size() == 6); // min(p, n) singular values
    CHECK(curves["dmap"].size() == 10);
    for (const auto &[name, values] : curves) {
        CHECK(values.front() == 1.0);
        for (std::size_t i = 1; i < values.size(); ++i) {
            CHECK(values[i] <= values[i - 1]);
        }
    }
    CHECK(fs::exists(dir / files::decay_svg));
}

TEST_CASE("reconstruct") {
    const MatrixXd y = synthetic::random_matrix(12, 10, 505) * 0.1;
    const fs::path dir = stage_dataset("cmd_reconstruct", y.array() + 0.5, 4, 3);
    RunConfig cfg = in_place(dir);
    cfg.method = PcaMethod::exact;
    cmd_pca(cfg);

    const ReconstructSummary summary = cmd_reconstruct(cfg);
    CHECK(summary.frames == 10);
    CHECK(summary.clamped == 0);
    CHECK(fs::exists(dir / files::reconstructed_dir / "0000.pgm"));
    CHECK(fs::exists(dir / files::reconstructed_dir / "0009.pgm"));
    CHECK_THROWS_AS(cmd_reconstruct(cfg), IoError);

    SUBCASE("zero coordinates give the mean frame") {
        const fs::path coords = dir / "zero.csv";
        io::write_text(coords, io::coords_csv(MatrixXd::Zero(1, 3)));
        cfg.coords = coords;
        cfg.force = true;
        cmd_reconstruct(cfg);
        const Frame f = load_pgm(dir / files::reconstructed_dir / "0000.pgm");
        const VectorXd mean = y.rowwise().mean().array() + 0.5;
        CHECK((f.pixels - mean).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-12);
    }
    SUBCASE("out-of-range pixels are clamped and counted") {
        const fs::path coords = dir / "far.csv";
        io::write_text(coords, io::coords_csv(MatrixXd::Constant(2, 3, 100.0)));
        cfg.coords = coords;
        cfg.force = true;
        CHECK(cmd_reconstruct(cfg).clamped > 0);
        const json log = json::parse(read(dir / "reconstruct_log.json"));
        CHECK(log["clamped_pixels"].get<std::size_t>() > 0);
    }
    SUBCASE("coordinate width must match q") {
        const fs::path coords = dir / "narrow.csv";
        io::write_text(coords, io::coords_csv(MatrixXd::Zero(1, 2)));
        cfg.coords = coords;
        cfg.force = true;
        CHECK_THROWS_AS(cmd_reconstruct(cfg), DimensionError);
    }
}
