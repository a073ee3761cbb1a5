#ifndef FLOWSPEC_IO_HPP
#define FLOWSPEC_IO_HPP

// On-disk formats: binary dataset + manifest, PCA model container + sidecar,
// CSV tables, stability reports.
//
// Binary layouts are little-endian regardless of host:
//
//   dataset.bin   "FLOWDATA" | u32 version | u32 0 | u64 p | u64 n | u64 width | u64 height
//                 | p*n f64, column-major
//   pca_model.bin "FLOWPCA\0" | u32 version | u32 0
//                 | mean (p f64) | sigma (q f64) | components (p*q f64, column-major)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowspec/ingestion.hpp"
#include "flowspec/linalg.hpp"
#include "flowspec/pca.hpp"
#include "flowspec/subspace.hpp"

namespace flowspec::io {

inline constexpr std::uint32_t format_version = 1;

struct Dataset {
    DataMatrix data;
    Index width = 0;
    Index height = 0;
};

struct Manifest {
    std::vector<std::string> files;
    Index downsample = 1;
    Index width = 0;
    Index height = 0;
    Index p = 0;
    Index n = 0;
    std::string checksum; // FNV-1a 64 of the payload, hex
};

/// FNV-1a 64-bit over raw bytes, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string &bytes);

std::string encode_dataset(const Dataset &ds);
Dataset decode_dataset(const std::string &bytes, const std::string &name = "<memory>");
void write_dataset(const std::filesystem::path &path, const Dataset &ds);
Dataset read_dataset(const std::filesystem::path &path);
std::string payload_checksum(const Dataset &ds);

std::string manifest_json(const Manifest &m);
Manifest read_manifest(const std::filesystem::path &path);

struct PcaFile {
    PcaModelXd model;
    Index width = 0;
    Index height = 0;
};

std::string encode_pca_binary(const PcaModelXd &model);
std::string pca_sidecar_json(const PcaFile &file);
void write_pca(const std::filesystem::path &bin, const std::filesystem::path &sidecar,
               const PcaFile &file);
PcaFile read_pca(const std::filesystem::path &bin, const std::filesystem::path &sidecar);

/// Round-trip decimal text for a double.
std::string format_double(double v);

/// `frame,c1,...,cq` with one row per observation (coords is n x q).
std::string coords_csv(const MatrixXd &coords);
MatrixXd parse_coords_csv(const std::string &text, const std::string &name = "<memory>");

/// `index,value` with 0-based index.
std::string eigenvalues_csv(const VectorXd &values);
VectorXd parse_eigenvalues_csv(const std::string &text, const std::string &name = "<memory>");

std::string stability_json(const StabilityReport &r);
std::string stability_csv_header();
std::string stability_csv_row(const std::string &group, const StabilityReport &r);

struct DecaySeries {
    std::string method;
    VectorXd values;
};

/// `index,relative_value,method`, index starting at 1.
std::string decay_csv(const std::vector<DecaySeries> &series);

std::string read_text(const std::filesystem::path &path);
void write_text(const std::filesystem::path &path, const std::string &text);

} // namespace flowspec::io

#endif // FLOWSPEC_IO_HPP
