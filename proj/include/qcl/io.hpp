#pragma once

// CSV / JSON serialization: phase functions (CSV plus grid sidecar),
// operator matrices, van Hove kernels and chart atlases. Floats are
// written with 17 significant digits so save/load round-trips are
// bit-exact.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qcl/charts.hpp"
#include "qcl/vanhove.hpp"
#include "qcl/weylwigner.hpp"

namespace qcl {

// File-system failures (open/read/write); malformed content throws
// std::invalid_argument instead.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV with header `axis0,...,re,im`, one row per node in row-major
// order, plus a sidecar at csv_path + ".json" carrying
// {mins, maxs, counts, periodic, hbar}.
void save_phase_function(const PhaseFunction& f, const std::string& csv_path, double hbar = 1);
PhaseFunction load_phase_function(const std::string& csv_path, double* hbar = nullptr);

// JSON {dim, dq, origin, hbar, entries: [[re, im], ...] row-major}.
void save_operator(const OperatorMatrix& op, const std::string& path);
OperatorMatrix load_operator(const std::string& path);

// JSON {omega_max, count, charts, m_dim, hbar, singular, regular} with
// complex entries as [re, im].
void save_vanhove(const VanHoveKernel& k, const std::string& path);
VanHoveKernel load_vanhove(const std::string& path);

// JSON {epsilon, hbar, action_scale, charts: [{id, box, epsilon,
// constants: [csv refs]}]}; the constants are written as phase-function
// CSVs next to the atlas file and referenced by name.
void save_atlas(const Atlas& atlas, const std::string& path);
Atlas load_atlas(const std::string& path);

// FNV-1a 64 over the file bytes; for output manifests.
std::uint64_t file_checksum(const std::string& path);

}  // namespace qcl
