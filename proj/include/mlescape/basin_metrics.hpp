#pragma once

#include "mlescape/nonlocal_solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mlescape {

struct ThresholdSpec {
    double p_star = 0.8;
    double u_star = 10.0;

    /// ConfigError unless 0 < p_star < 1 and u_star > 0.
    void validate() const;

    bool operator==(const ThresholdSpec&) const = default;
};

/// Fraction of interior nodes whose value strictly exceeds `threshold`. Each
/// node stands for one cell of area |D| / (n_v n_w).
double area_fraction(std::span<const double> values, double threshold);

double r_fep(const ScalarField& field, double p_star);
double r_mfet(const ScalarField& field, double u_star);

/// Abscissae where successive differences of `ys` change sign (interior
/// extrema of a sampled curve). Zero differences are skipped.
std::vector<double> turning_points(std::span<const double> xs, std::span<const double> ys);

/// Which noise intensities move along the sigma axis.
enum class SweepMode {
    diagonal,   ///< sigma1 = sigma2 = sigma
    fix_sigma1, ///< sigma1 = fixed, sigma2 = sigma
    fix_sigma2, ///< sigma1 = sigma, sigma2 = fixed
};

std::string_view to_string(SweepMode m);
SweepMode parse_sweep_mode(std::string_view text);

struct SweepSpec {
    std::vector<double> alphas{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75};
    std::vector<double> sigmas{0.25, 0.5, 0.75, 1.0};
    SweepMode mode = SweepMode::diagonal;
    double fixed_sigma = 0.5;
    bool brownian = true;        ///< append the alpha = 2 series after the stable one
    bool want_fep = true;
    bool want_mfet = true;
    bool fields = true;          ///< compute R_FEP / R_MFET over the whole field
    ThresholdSpec thresholds;

    /// ConfigError unless each alpha lies in (0,2) and each sigma is >= 0.
    void validate() const;

    /// alpha from `lo` to `hi` with step `step` (the dense figure protocol).
    static std::vector<double> range(double lo, double hi, double step);

    bool operator==(const SweepSpec&) const = default;
};

struct SweepPoint {
    double alpha = 0.0;
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

/// Parameter tuples in output order: alpha-major over the stable grid, then
/// the alpha = 2 series.
std::vector<SweepPoint> expand(const SweepSpec& spec);

/// Everything a sweep point needs besides the noise.
struct SweepProblem {
    DriftField drift;
    std::string drift_key;   ///< canonical description of `drift`, part of the cache key
    Region region;
    TargetStrip target;
    State point;             ///< where FEP and MFET are reported (s* by default)
    SolverConfig solver;
    JumpNormalization normalization = JumpNormalization::fractional_laplacian;
};

struct SweepRow {
    SweepPoint point;
    double fep_at_star = std::numeric_limits<double>::quiet_NaN();
    double mfet_at_star = std::numeric_limits<double>::quiet_NaN();
    double r_fep = std::numeric_limits<double>::quiet_NaN();
    double r_mfet = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok"; ///< "ok" or "<ErrorKind>: message"
    bool cached = false;

    bool ok() const { return status == "ok"; }
};

struct SweepOptions {
    int workers = 0; ///< 0 selects hardware concurrency
    std::optional<std::filesystem::path> cache_dir;
};

/// Content-addressed key over every input of one point.
std::string cache_key(const SweepProblem& problem, const SweepSpec& spec, const SweepPoint& point);

/// One solver invocation per tuple; failures are recorded per row, never thrown.
SweepRow evaluate_point(const SweepProblem& problem, const SweepSpec& spec, const SweepPoint& point);

std::vector<SweepRow> sweep(const SweepSpec& spec, const SweepProblem& problem, const SweepOptions& options = {});

/// `alpha,sigma1,sigma2,fep_at_star,mfet_at_star,r_fep,r_mfet,status`.
std::string sweep_csv(std::span<const SweepRow> rows);

/// Heatmap layout for ratio sweeps: one line per alpha (ascending), one column
/// per value of the varying sigma; first line is the header of sigma values.
/// `column` is one of fep_at_star, mfet_at_star, r_fep, r_mfet.
std::string sweep_matrix_csv(std::span<const SweepRow> rows, const SweepSpec& spec, std::string_view column);

double row_value(const SweepRow& row, std::string_view column);

} // namespace mlescape
