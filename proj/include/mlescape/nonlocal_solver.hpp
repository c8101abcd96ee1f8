#pragma once

#include "mlescape/geometry.hpp"
#include "mlescape/krylov.hpp"
#include "mlescape/nonlocal_operator.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace mlescape {

enum class FieldKind { fep, mfet };

/// Solution sampled on the interior nodes of D together with the exterior
/// data that completes it: 0 off D, except 1 on the target strip for FEP.
struct ScalarField {
    FieldKind kind = FieldKind::fep;
    Grid grid;
    Region region;
    std::optional<TargetStrip> target;
    std::vector<double> values; ///< index = k * n_v + i

    // Solve record, carried into the metadata sidecar.
    double residual = 0.0;
    int iterations = 0;
    double seconds = 0.0;

    double at(int i, int k) const { return values[grid.index(i, k)]; }
    State node(int i, int k) const { return from_unit(region, {grid.s(i), grid.k(k)}); }

    /// Exterior value at a point of the complement of D.
    double exterior(State p) const;

    /// Bilinear interpolation inside D (boundary nodes take the exterior value
    /// at the boundary point); exterior data outside D.
    double evaluate(State p) const;

    double max() const;
    double min() const;
};

/// FEP right-hand side: minus the jump rate from each node into E along the v
/// axis, -(sigma1^alpha K/alpha) [(a'-v)^{-alpha} - (b'-v)^{-alpha}]. Zero for
/// alpha = 2, where E enters as boundary data. Throws GeometryError if a' < b.
Eigen::VectorXd fep_source(const NoiseSpec& noise, const Region& region, const TargetStrip& target,
                           const Grid& grid);

/// Assembled operator plus its factored preconditioner; solve many right-hand
/// sides against the same discrete generator.
class LinearSystem {
public:
    LinearSystem(OperatorMatrix op, const SolverConfig& config);

    const OperatorMatrix& op() const { return *op_; }
    const SolverConfig& config() const { return config_; }

    /// Throws LinearSolveFailure with the final residual when the iteration
    /// cap is hit.
    KrylovResult solve(const Eigen::VectorXd& rhs) const;

    ScalarField solve_fep(const TargetStrip& target) const;
    ScalarField solve_mfet() const;

private:
    std::shared_ptr<const OperatorMatrix> op_;
    SolverConfig config_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> preconditioner_;
};

ScalarField solve_fep(const DriftField& drift, const NoiseSpec& noise, const Region& region,
                      const TargetStrip& target, const SolverConfig& config);

ScalarField solve_mfet(const DriftField& drift, const NoiseSpec& noise, const Region& region,
                       const SolverConfig& config);

struct ConvergenceRow {
    double h = 0.0;              ///< unit-square spacing of the finer grid of the pair
    double delta_full = 0.0;     ///< max |difference| over all common nodes
    double delta_core = 0.0;     ///< same, restricted to |s|, |k| <= core
    double delta_probe = 0.0;    ///< |difference| at the probe point
    double order_full = 0.0;     ///< log2 of successive delta ratios (0 for the first row)
    double order_core = 0.0;
    double order_probe = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool monotone_core = false;
};

/// Solve on nested grids (each refining the last by 2 in both axes: n' + 1 = 2(n + 1))
/// and compare at common nodes. Needs at least three grids.
ConvergenceTable convergence_study(const std::function<ScalarField(const Grid&)>& solve,
                                   std::span<const Grid> grids, State probe, double core = 0.5);

} // namespace mlescape
