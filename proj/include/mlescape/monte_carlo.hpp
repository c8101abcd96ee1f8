#pragma once

#include "mlescape/geometry.hpp"
#include "mlescape/ml_model.hpp"
#include "mlescape/stable_noise.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mlescape {

struct SimConfig {
    double dt = 1e-3;
    double t_max = 1e4;
    std::size_t paths = 100000;
    std::uint64_t seed = 20240501;
    bool antithetic = false;  ///< odd paths mirror the CMS angles of the preceding even path
    int workers = 0;          ///< 0 selects std::thread::hardware_concurrency()
    bool validation = true;   ///< enforce the censoring limit
    double censor_limit = 0.01;
    /// alpha = 2 only: also end a path when the Brownian bridge between two
    /// in-D states crosses the boundary, which removes the O(sqrt(dt)) bias of
    /// checking for exits at the step times alone.
    bool bridge = true;

    /// Throws ConfigError: dt > 0, t_max >= 100 dt, paths >= 100.
    void validate() const;
    int worker_count() const;

    bool operator==(const SimConfig&) const = default;
};

struct PathOutcome {
    double exit_time = 0.0;  ///< t_max when censored
    State exit_point;        ///< last state when censored
    bool reached_E = false;
    bool censored = false;
    bool non_finite = false; ///< the state left the floating-point range; also censored
};

struct PathEstimate {
    double mean = 0.0;
    double half_width = 0.0;        ///< 95% normal-approximation half-width
    std::size_t effective = 0;      ///< uncensored paths entering the estimate
    std::size_t total = 0;
    double censored_fraction = 0.0;
    std::size_t non_finite = 0;

    bool covers(double value) const { return std::abs(value - mean) <= half_width; }
};

/// One Euler-Maruyama step of dX = f(X) dt + sigma dL with independent
/// streams per channel.
State step(State state, const DriftField& drift, const IncrementSampler& noise, double dt, Engine& channel1,
           Engine& channel2, bool negate = false);

/// Single path from `start` until the first post-step exit from D or the horizon.
/// A start outside D exits at time 0.
PathOutcome simulate_path(State start, const Region& region, const TargetStrip& target, const DriftField& drift,
                          const NoiseSpec& noise, const SimConfig& config, std::uint64_t path_id);

/// All paths of `config`, in path-id order. Identical output for any worker count.
std::vector<PathOutcome> simulate(State start, const Region& region, const TargetStrip& target,
                                  const DriftField& drift, const NoiseSpec& noise, const SimConfig& config);

/// Reductions over simulated outcomes. Throw HorizonTooShort in validation
/// mode when the censored fraction exceeds the limit.
PathEstimate fep_from(std::span<const PathOutcome> outcomes, const SimConfig& config);
PathEstimate mfet_from(std::span<const PathOutcome> outcomes, const SimConfig& config);

PathEstimate estimate_fep(State start, const Region& region, const TargetStrip& target, const DriftField& drift,
                          const NoiseSpec& noise, const SimConfig& config);
PathEstimate estimate_mfet(State start, const Region& region, const DriftField& drift, const NoiseSpec& noise,
                           const SimConfig& config);

/// Order-independent sum used by every reduction.
double pairwise_sum(std::span<const double> values);

/// `path_id,exit_time,exit_v,exit_w,reached_E,censored`. Throws IoError.
void write_outcomes_csv(const std::filesystem::path& file, std::span<const PathOutcome> outcomes);

} // namespace mlescape
