#pragma once

#include "mlescape/nonlocal_solver.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mlescape {

/// Write through a temporary sibling and rename into place. Throws IoError.
void write_text_atomic(const std::filesystem::path& file, const std::string& contents);

std::string read_text(const std::filesystem::path& file);

/// Field CSV: header `v,w,value`, one row per interior node with w slow and v
/// fast, 6 significant digits.
std::string field_csv(const ScalarField& field);
void write_field_csv(const std::filesystem::path& file, const ScalarField& field);

/// Values recovered from a field CSV, in file order, with the node lattice
/// inferred from the distinct coordinates.
struct FieldTable {
    std::vector<double> v;     ///< distinct v, ascending (n_v entries)
    std::vector<double> w;     ///< distinct w, ascending (n_w entries)
    std::vector<double> values; ///< index = k * n_v + i

    int n_v() const { return static_cast<int>(v.size()); }
    int n_w() const { return static_cast<int>(w.size()); }
    double at(int i, int k) const { return values[static_cast<std::size_t>(k) * v.size() + i]; }
};

/// Throws IoError on unreadable or malformed files.
FieldTable read_field_csv(const std::filesystem::path& file);

/// Sidecar metadata (JSON): region, target, alpha, sigma1, sigma2, grid,
/// scheme, tolerance, residual, iterations, wall time, plus free-form extras.
std::string field_metadata(const ScalarField& field, const NoiseSpec& noise, const SolverConfig& config,
                           const std::map<std::string, std::string>& extras = {});

} // namespace mlescape
