#pragma once

#include "mlescape/geometry.hpp"
#include "mlescape/ml_model.hpp"
#include "mlescape/stable_noise.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <string_view>

namespace mlescape {

enum class DriftScheme { upwind, central };

/// Treatment of the singular cell of the principal-value integral.
/// `zeta`: trapezoid on all grid points except the node itself, corrected by
/// -zeta(alpha-1) h^{2-alpha} u''. `taylor`: u'' h^{2-alpha}/(2-alpha) on |y| < h
/// and a trapezoid from h outwards.
enum class Quadrature { zeta, taylor };

std::string_view to_string(DriftScheme s);
std::string_view to_string(Quadrature q);
DriftScheme parse_drift_scheme(std::string_view text);
Quadrature parse_quadrature(std::string_view text);

struct SolverConfig {
    Grid grid;
    DriftScheme drift_scheme = DriftScheme::upwind;
    Quadrature quadrature = Quadrature::zeta;
    double tolerance = 1e-10;
    int max_iterations = 0; ///< 0 selects 10 * unknowns
    int restart = 60;

    void validate() const;
    int iteration_cap() const;

    bool operator==(const SolverConfig&) const = default;
};

/// Generator restricted to one axis of the unit square, acting on the n
/// interior nodes. Exterior values at the two endpoints s = -1, s = +1 enter
/// through `low_edge` and `high_edge`.
struct AxisOperator {
    Eigen::MatrixXd interior;
    Eigen::VectorXd low_edge;
    Eigen::VectorXd high_edge;
    Eigen::VectorXd exit_rate; ///< rate of jumps leaving the closed interval
};

/// Nonlocal part along one axis. `intensity` is sigma^alpha K (L/2)^{-alpha},
/// the jump-measure density in unit-square coordinates.
AxisOperator nonlocal_axis(int n, double alpha, double intensity, Quadrature quadrature);

/// Second-difference part along one axis with coefficient sigma^2/2 (2/L)^2.
AxisOperator diffusion_axis(int n, double coefficient);

enum class Edge { left = 0, right = 1, bottom = 2, top = 3 };

/**
 * Discrete generator on the interior nodes of D.
 *
 * The operator is the Kronecker sum of the two axis operators plus a sparse
 * drift stencil, stored in that factored form: a product costs two dense
 * matrix products instead of touching O(N (n_v + n_w)) explicit entries.
 * Coefficients that multiply exterior values (the endpoints of each node's row
 * and column, and drift neighbours outside D) are kept per node and per edge.
 * Immutable after assembly.
 */
class OperatorMatrix {
public:
    OperatorMatrix(Grid grid, Region region, NoiseSpec noise, AxisOperator v_axis, AxisOperator w_axis,
                   std::array<Eigen::VectorXd, 5> drift);

    const Grid& grid() const { return grid_; }
    const Region& region() const { return region_; }
    const NoiseSpec& noise() const { return noise_; }
    std::size_t size() const { return grid_.size(); }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;

    /// Per-node coefficient of the exterior value on the given edge, taken at
    /// the node's own w (left/right) or v (bottom/top).
    const Eigen::VectorXd& edge(Edge e) const { return edges_[static_cast<int>(e)]; }

    /// Total rate of jumps from each node to outside the closed rectangle.
    Eigen::VectorXd exit_rate() const;

    /// Diagonal plus nearest-neighbour entries, used to build the preconditioner.
    Eigen::SparseMatrix<double> local_part() const;

    /// Every nonzero; intended for small grids and tests.
    Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse() const;

    double entry(std::size_t row, std::size_t col) const;
    double diagonal(std::size_t row) const;

    const AxisOperator& v_axis() const { return v_axis_; }
    const AxisOperator& w_axis() const { return w_axis_; }

    bool operator==(const OperatorMatrix& other) const;

private:
    enum DriftSlot { kDiag = 0, kLeft, kRight, kDown, kUp };

    Grid grid_;
    Region region_;
    NoiseSpec noise_;
    AxisOperator v_axis_;
    AxisOperator w_axis_;
    std::array<Eigen::VectorXd, 5> drift_;
    std::array<Eigen::VectorXd, 4> edges_;
};

/// Assemble the generator of dX = f dt + sigma dL on D. alpha = 2 uses the
/// Brownian generator with the 5-point stencil. Zero intensities are accepted
/// here (pure advection); the solvers reject them.
OperatorMatrix assemble(const DriftField& drift, const NoiseSpec& noise, const Region& region,
                        const SolverConfig& config);

} // namespace mlescape
