#pragma once

#include "mlescape/basin_metrics.hpp"
#include "mlescape/geometry.hpp"
#include "mlescape/ml_model.hpp"
#include "mlescape/monte_carlo.hpp"
#include "mlescape/nonlocal_operator.hpp"
#include "mlescape/stable_noise.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mlescape {

/// Everything one CLI run reads. Serialized as flat `section.key = value`
/// lines; missing keys keep the defaults below.
struct RunConfig {
    std::string drift = "morris_lecar"; ///< morris_lecar | zero
    MLParams model;
    ScalingMap scaling;
    NoiseSpec noise;
    Region region;
    TargetStrip target;
    std::optional<State> point; ///< evaluation point; unset means the model equilibrium

    SolverConfig solver;
    SimConfig mc;
    bool mc_dump = false;       ///< also write per-path outcomes

    SweepSpec sweep;
    int sweep_workers = 0;
    bool sweep_cache = true;

    std::string output_dir = "out";
    bool render = true;
    int cell_px = 2;

    /// Every constituent invariant; throws ConfigError naming the key.
    void validate() const;

    DriftField drift_field() const;
    /// Canonical text of the drift inputs, for cache keys.
    std::string drift_key() const;
    State evaluation_point() const;
    SweepProblem sweep_problem() const;

    bool operator==(const RunConfig&) const = default;
};

/// Parse config text, then apply `key=value` overrides in order. Throws
/// ConfigError naming the offending key.
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});

/// Same, reading the file first when a path is given. Throws IoError when the
/// file cannot be read.
RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::vector<std::string>& overrides = {});

/// Apply one `key = value` assignment without validating.
void set_key(RunConfig& config, const std::string& key, const std::string& value);

/// Every key with its current value; parse_config_text(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

std::vector<std::string> config_keys();

} // namespace mlescape
