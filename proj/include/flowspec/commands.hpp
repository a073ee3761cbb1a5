#ifndef FLOWSPEC_COMMANDS_HPP
#define FLOWSPEC_COMMANDS_HPP

// The flowspec subcommands as library calls. Each reads its inputs from
// cfg.input_dir and writes into cfg.output_dir; existing files are only
// replaced with cfg.force (stability.csv is appended to).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "flowspec/linalg.hpp"
#include "flowspec/pca.hpp"

namespace flowspec {

struct RunConfig {
    std::filesystem::path input_dir;
    std::filesystem::path output_dir;
    Index q = 3;
    int t = 2;
    std::optional<double> epsilon; // nullopt = largest pairwise squared distance
    PcaMethod method = PcaMethod::stochastic;
    Index oversampling = 10;
    Index power_iterations = 0;
    std::optional<std::uint64_t> seed; // nullopt = OS entropy, recorded in the run log
    Index runs = 5;
    Index decay_count = 100;
    Index downsample = 1;
    Index max_frames = 5000;
    std::optional<std::string> group;                // stability row label
    std::optional<std::filesystem::path> coords;     // reconstruct input
    bool force = false;
};

namespace files {
inline constexpr const char *dataset = "dataset.bin";
inline constexpr const char *manifest = "manifest.json";
inline constexpr const char *pca_model = "pca_model.bin";
inline constexpr const char *pca_sidecar = "pca_model.json";
inline constexpr const char *pca_coords = "pca_coords.csv";
inline constexpr const char *pca_scatter = "pca_scatter.svg";
inline constexpr const char *dmap_eigenvalues = "dmap_eigenvalues.csv";
inline constexpr const char *dmap_coords = "dmap_coords.csv";
inline constexpr const char *dmap_scatter = "dmap_scatter.svg";
inline constexpr const char *stability_json = "stability.json";
inline constexpr const char *stability_csv = "stability.csv";
inline constexpr const char *decay_csv = "decay.csv";
inline constexpr const char *decay_svg = "decay.svg";
inline constexpr const char *reconstructed_dir = "frames";
} // namespace files

void cmd_ingest(const RunConfig &cfg);
void cmd_pca(const RunConfig &cfg);
void cmd_dmap(const RunConfig &cfg);
void cmd_stability(const RunConfig &cfg);
void cmd_decay(const RunConfig &cfg);

struct ReconstructSummary {
    Index frames = 0;
    std::size_t clamped = 0;
};
ReconstructSummary cmd_reconstruct(const RunConfig &cfg);

} // namespace flowspec

#endif // FLOWSPEC_COMMANDS_HPP
