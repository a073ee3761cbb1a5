#include "flowspec/commands.hpp"

#include <algorithm>
#include <fstream>

#include "flowspec/diffusion.hpp"
#include "flowspec/io.hpp"
#include "flowspec/svg.hpp"
#include "json.hpp"

namespace flowspec {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class OutputDir {
  public:
    OutputDir(const fs::path &root, bool force) : root_(root), force_(force) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec || !fs::is_directory(root_)) {
            throw IoError(root_.string() + ": cannot create output directory");
        }
    }

    fs::path claim(const std::string &name) const {
        fs::path path = root_ / name;
        if (fs::exists(path) && !force_) {
            throw IoError(path.string() + " already exists (pass --force to overwrite)");
        }
        return path;
    }

    const fs::path &root() const { return root_; }

  private:
    fs::path root_;
    bool force_;
};

void write_log(const OutputDir &out, const std::string &command, json log) {
    log["command"] = command;
    io::write_text(out.claim(command + "_log.json"), log.dump(2) + "\n");
}

io::Dataset load_dataset(const fs::path &dir) {
    const fs::path path = dir / files::dataset;
    if (!fs::exists(path)) {
        throw IoError(path.string() + " not found (run `flowspec ingest` first)");
    }
    return io::read_dataset(path);
}

io::PcaFile load_pca(const fs::path &dir) {
    const fs::path bin = dir / files::pca_model;
    const fs::path sidecar = dir / files::pca_sidecar;
    if (!fs::exists(bin) || !fs::exists(sidecar)) {
        throw IoError(bin.string() + " not found (run `flowspec pca` first)");
    }
    return io::read_pca(bin, sidecar);
}

RsvdConfig rsvd_config(const RunConfig &cfg, std::uint64_t seed) {
    RsvdConfig r;
    r.target_rank = cfg.q;
    r.oversampling = cfg.oversampling;
    r.power_iterations = cfg.power_iterations;
    r.seed = seed;
    return r;
}

std::string group_label(const RunConfig &cfg) {
    if (cfg.group) {
        return *cfg.group;
    }
    fs::path p = cfg.input_dir;
    if (p.filename().empty()) {
        p = p.parent_path();
    }
    const std::string name = p.filename().string();
    return name.empty() ? "group" : name;
}

} // namespace

void cmd_ingest(const RunConfig &cfg) {
    const FrameSequence seq = load_frames(cfg.input_dir, cfg.downsample);
    if (seq.frames.size() < 2) {
        throw DataError(cfg.input_dir.string() + ": need at least 2 frames, found " +
                        std::to_string(seq.frames.size()));
    }
    io::Dataset ds;
    ds.data = assemble(seq);
    ds.width = seq.width;
    ds.height = seq.height;

    io::Manifest m;
    m.files = seq.source_names;
    m.downsample = cfg.downsample;
    m.width = ds.width;
    m.height = ds.height;
    m.p = ds.data.rows();
    m.n = ds.data.cols();
    m.checksum = io::payload_checksum(ds);

    const OutputDir out(cfg.output_dir, cfg.force);
    io::write_dataset(out.claim(files::dataset), ds);
    io::write_text(out.claim(files::manifest), io::manifest_json(m));
    write_log(out, "ingest",
              {{"input", cfg.input_dir.string()},
               {"downsample", cfg.downsample},
               {"p", m.p},
               {"n", m.n},
               {"checksum", m.checksum}});
}

void cmd_pca(const RunConfig &cfg) {
    const io::Dataset ds = load_dataset(cfg.input_dir);
    const std::uint64_t seed = cfg.seed.value_or(entropy_seed());
    std::optional<RsvdConfig> rcfg;
    if (cfg.method == PcaMethod::stochastic) {
        rcfg = rsvd_config(cfg, seed);
    }
    io::PcaFile file{fit_pca(ds.data, cfg.q, cfg.method, rcfg), ds.width, ds.height};
    const MatrixXd coords = project_all(file.model, ds.data).transpose();

    const OutputDir out(cfg.output_dir, cfg.force);
    io::write_pca(out.claim(files::pca_model), out.claim(files::pca_sidecar), file);
    io::write_text(out.claim(files::pca_coords), io::coords_csv(coords));
    io::write_text(out.claim(files::pca_scatter),
                   svg::scatter(coords, "PCA projection (" + to_string(cfg.method) + ", q=" +
                                            std::to_string(cfg.q) + ")"));
    json log = {{"method", to_string(cfg.method)},
                {"q", cfg.q},
                {"p", ds.data.rows()},
                {"n", ds.data.cols()}};
    if (rcfg) {
        log["seed"] = rcfg->seed;
        log["seed_source"] = cfg.seed ? "user" : "entropy";
        log["oversampling"] = rcfg->oversampling;
        log["power_iterations"] = rcfg->power_iterations;
    }
    write_log(out, "pca", log);
}

void cmd_dmap(const RunConfig &cfg) {
    const io::Dataset ds = load_dataset(cfg.input_dir);
    const Index n = ds.data.cols();
    if (n > cfg.max_frames) {
        throw DataError("dmap: " + std::to_string(n) + " frames exceeds the dense-kernel cap of " +
                        std::to_string(cfg.max_frames) + " (raise --max-frames)");
    }
    DiffusionModelXd model;
    try {
        model = fit_diffusion(ds.data, cfg.epsilon, cfg.t);
    } catch (const DataError &e) {
        throw DataError(std::string(e.what()) + "; check the ingested frames listed in " +
                        (cfg.input_dir / files::manifest).string());
    }
    const Embedding<double> emb = embed(model, cfg.q, cfg.t);

    const OutputDir out(cfg.output_dir, cfg.force);
    io::write_text(out.claim(files::dmap_eigenvalues), io::eigenvalues_csv(model.eigenvalues));
    io::write_text(out.claim(files::dmap_coords), io::coords_csv(emb.coords));
    io::write_text(out.claim(files::dmap_scatter),
                   svg::scatter(emb.coords, "Diffusion map (t=" + std::to_string(cfg.t) +
                                                ", q=" + std::to_string(cfg.q) + ")"));
    write_log(out, "dmap",
              {{"epsilon", model.epsilon},
               {"epsilon_source", cfg.epsilon ? "user" : "auto (max pairwise squared distance)"},
               {"t", cfg.t},
               {"q", cfg.q},
               {"n", n},
               {"lambda0", model.eigenvalues(0)}});
}

void cmd_stability(const RunConfig &cfg) {
    const io::Dataset ds = load_dataset(cfg.input_dir);
    const std::uint64_t seed = cfg.seed.value_or(entropy_seed());
    const StabilityReport report = stability_study(ds.data, cfg.q, cfg.runs, rsvd_config(cfg, seed));

    const OutputDir out(cfg.output_dir, cfg.force);
    io::write_text(out.claim(files::stability_json), io::stability_json(report));
    const fs::path table = out.root() / files::stability_csv;
    const bool fresh = !fs::exists(table);
    std::ofstream csv(table, std::ios::binary | std::ios::app);
    if (!csv) {
        throw IoError(table.string() + ": cannot open for append");
    }
    if (fresh) {
        csv << io::stability_csv_header();
    }
    csv << io::stability_csv_row(group_label(cfg), report);
    write_log(out, "stability",
              {{"runs", cfg.runs},
               {"q", cfg.q},
               {"base_seed", seed},
               {"seed_source", cfg.seed ? "user" : "entropy"},
               {"oversampling", cfg.oversampling},
               {"power_iterations", cfg.power_iterations},
               {"group", group_label(cfg)}});
}

void cmd_decay(const RunConfig &cfg) {
    const io::PcaFile pca = load_pca(cfg.input_dir);
    const fs::path eig_path = cfg.input_dir / files::dmap_eigenvalues;
    if (!fs::exists(eig_path)) {
        throw IoError(eig_path.string() + " not found (run `flowspec dmap` first)");
    }
    const VectorXd lambdas = io::parse_eigenvalues_csv(io::read_text(eig_path), eig_path.string());

    const DecayCurve<double> pca_curve = eigen_decay(pca.model.spectrum, cfg.decay_count);
    const DecayCurve<double> dmap_curve = eigen_decay(lambdas, cfg.decay_count, 1);

    const OutputDir out(cfg.output_dir, cfg.force);
    io::write_text(out.claim(files::decay_csv),
                   io::decay_csv({{"pca", pca_curve.values}, {"dmap", dmap_curve.values}}));
    io::write_text(out.claim(files::decay_svg),
                   svg::line_chart({{"PCA (" + to_string(pca.model.method) + ")", pca_curve.values},
                                    {"diffusion map", dmap_curve.values}},
                                   "Eigenvalue decay relative to the largest",
                                   "relative value"));
    write_log(out, "decay",
              {{"decay_count", cfg.decay_count},
               {"pca_values", pca_curve.values.size()},
               {"pca_truncated", pca_curve.truncated},
               {"dmap_values", dmap_curve.values.size()},
               {"dmap_truncated", dmap_curve.truncated}});
}

ReconstructSummary cmd_reconstruct(const RunConfig &cfg) {
    const io::PcaFile pca = load_pca(cfg.input_dir);
    const fs::path coords_path = cfg.coords.value_or(cfg.input_dir / files::pca_coords);
    const MatrixXd coords = io::parse_coords_csv(io::read_text(coords_path), coords_path.string());
    if (coords.cols() != pca.model.rank()) {
        throw DimensionError(coords_path.string() + ": has " + std::to_string(coords.cols()) +
                             " coordinates per row, model has q = " +
                             std::to_string(pca.model.rank()));
    }

    const OutputDir out(cfg.output_dir, cfg.force);
    const OutputDir frames(out.root() / files::reconstructed_dir, cfg.force);
    const std::size_t digits = std::max<std::size_t>(4, std::to_string(coords.rows()).size());
    ReconstructSummary summary;
    for (Index i = 0; i < coords.rows(); ++i) {
        Frame f{pca.width, pca.height, reconstruct(pca.model, coords.row(i).transpose())};
        std::string name = std::to_string(i);
        name.insert(0, digits - name.size(), '0');
        name += ".pgm";
        summary.clamped += write_pgm(frames.claim(name), f, 255);
        ++summary.frames;
    }
    write_log(out, "reconstruct",
              {{"coords", coords_path.string()},
               {"frames", summary.frames},
               {"clamped_pixels", summary.clamped}});
    return summary;
}

} // namespace flowspec
