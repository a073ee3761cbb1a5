// flowspec: frame-sequence dimensionality reduction from the command line.
//
//   flowspec ingest      --input frames/ --output work/
//   flowspec pca         --input work/   --output work/ [--method exact|stochastic] [--seed N]
//   flowspec dmap        --input work/   --output work/ [--t 2] [--epsilon auto|<float>]
//   flowspec stability   --input work/   --output work/ [--runs 5]
//   flowspec decay       --input work/   --output work/ [--decay-count 100]
//   flowspec reconstruct --input work/   --output out/  [--coords file.csv]
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "flowspec/commands.hpp"

namespace {

constexpr int exit_usage = 1;
constexpr int exit_data = 2;

struct Options {
    std::string input;
    std::string output;
    long q = 3;
    int t = 2;
    std::string epsilon = "auto";
    std::string method = "stochastic";
    long oversampling = 10;
    long power_iterations = 0;
    std::optional<std::uint64_t> seed;
    long runs = 5;
    long decay_count = 100;
    long downsample = 1;
    long max_frames = 5000;
    std::optional<std::string> group;
    std::optional<std::string> coords;
    bool force = false;
};

flowspec::RunConfig resolve(const Options &o) {
    flowspec::RunConfig cfg;
    cfg.input_dir = o.input;
    cfg.output_dir = o.output;
    cfg.q = o.q;
    cfg.t = o.t;
    if (o.epsilon != "auto") {
        std::size_t used = 0;
        double eps = 0.0;
        try {
            eps = std::stod(o.epsilon, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != o.epsilon.size() || !(eps > 0.0)) {
            throw CLI::ValidationError("--epsilon", "expected 'auto' or a positive number");
        }
        cfg.epsilon = eps;
    }
    cfg.method = o.method == "exact" ? flowspec::PcaMethod::exact : flowspec::PcaMethod::stochastic;
    cfg.oversampling = o.oversampling;
    cfg.power_iterations = o.power_iterations;
    cfg.seed = o.seed;
    cfg.runs = o.runs;
    cfg.decay_count = o.decay_count;
    cfg.downsample = o.downsample;
    cfg.max_frames = o.max_frames;
    cfg.group = o.group;
    if (o.coords) {
        cfg.coords = *o.coords;
    }
    cfg.force = o.force;
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"flowspec: reduce frame sequences with stochastic PCA and diffusion maps"};
    app.require_subcommand(1);

    Options opt;
    const char *names[] = {"ingest", "pca", "dmap", "stability", "decay", "reconstruct"};
    const char *help[] = {
        "decode PGM frames into a binary dataset",
        "fit PCA and export per-frame coordinates",
        "build a diffusion map and export its embedding",
        "repeat stochastic PCA and measure subspace spread",
        "compare normalized PCA and diffusion spectra",
        "map reduced coordinates back to PGM frames",
    };
    for (std::size_t i = 0; i < std::size(names); ++i) {
        CLI::App *sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--input", opt.input, "input directory")->required();
        sub->add_option("--output", opt.output, "output directory")->required();
        sub->add_option("--q", opt.q, "reduced dimension")->check(CLI::PositiveNumber);
        sub->add_option("--t", opt.t, "diffusion scale")->check(CLI::PositiveNumber);
        sub->add_option("--epsilon", opt.epsilon, "kernel bandwidth: auto or a positive number");
        sub->add_option("--method", opt.method, "PCA factorization")
            ->check(CLI::IsMember({"exact", "stochastic"}));
        sub->add_option("--oversampling", opt.oversampling, "extra random samples")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--power-iterations", opt.power_iterations, "power iterations")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", opt.seed, "random seed (default: OS entropy)");
        sub->add_option("--runs", opt.runs, "stability runs")->check(CLI::Range(2L, 1000000L));
        sub->add_option("--decay-count", opt.decay_count, "spectrum length")
            ->check(CLI::PositiveNumber);
        sub->add_option("--downsample", opt.downsample, "block-average factor")
            ->check(CLI::PositiveNumber);
        sub->add_option("--max-frames", opt.max_frames, "diffusion map frame cap")
            ->check(CLI::PositiveNumber);
        sub->add_option("--group", opt.group, "stability table row label");
        sub->add_option("--coords", opt.coords, "coordinates CSV for reconstruct");
        sub->add_flag("--force", opt.force, "overwrite existing outputs");
    }

    flowspec::RunConfig cfg;
    try {
        app.parse(argc, argv);
        cfg = resolve(opt);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "ingest") {
            flowspec::cmd_ingest(cfg);
        } else if (command == "pca") {
            flowspec::cmd_pca(cfg);
        } else if (command == "dmap") {
            flowspec::cmd_dmap(cfg);
        } else if (command == "stability") {
            flowspec::cmd_stability(cfg);
        } else if (command == "decay") {
            flowspec::cmd_decay(cfg);
        } else {
            const auto summary = flowspec::cmd_reconstruct(cfg);
            if (summary.clamped > 0) {
                std::cerr << "reconstruct: clamped " << summary.clamped
                          << " pixel values to [0, 1]\n";
            }
        }
    } catch (const std::exception &e) {
        std::cerr << "flowspec " << command << ": " << e.what() << "\n";
        return exit_data;
    }
    std::cerr << "flowspec " << command << ": wrote " << cfg.output_dir.string() << "\n";
    return 0;
}
