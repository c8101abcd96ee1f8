#include "mlescape/nonlocal_solver.hpp"

#include "mlescape/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace mlescape {

double ScalarField::exterior(State p) const
{
    if (kind == FieldKind::fep && target && target->contains(p, region))
        return 1.0;
    return 0.0;
}

double ScalarField::evaluate(State p) const
{
    if (!region.contains(p))
        return exterior(p);

    const UnitPoint u = to_unit(region, p);
    // Fractional node coordinates; -1 and n are the boundary lines.
    const double x = (u.s + 1.0) / grid.h_s() - 1.0;
    const double y = (u.k + 1.0) / grid.h_k() - 1.0;
    const int i0 = std::clamp(static_cast<int>(std::floor(x)), -1, grid.n_v - 1);
    const int k0 = std::clamp(static_cast<int>(std::floor(y)), -1, grid.n_w - 1);
    const double tx = x - i0;
    const double ty = y - k0;

    auto node_value = [&](int i, int k) {
        if (i >= 0 && i < grid.n_v && k >= 0 && k < grid.n_w)
            return at(i, k);
        const double s = -1.0 + (i + 1) * grid.h_s();
        const double kk = -1.0 + (k + 1) * grid.h_k();
        return exterior(from_unit(region, {s, kk}));
    };

    return (1 - tx) * (1 - ty) * node_value(i0, k0) + tx * (1 - ty) * node_value(i0 + 1, k0)
           + (1 - tx) * ty * node_value(i0, k0 + 1) + tx * ty * node_value(i0 + 1, k0 + 1);
}

double ScalarField::max() const
{
    return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double ScalarField::min() const
{
    return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

Eigen::VectorXd fep_source(const NoiseSpec& noise, const Region& region, const TargetStrip& target,
                           const Grid& grid)
{
    target.validate(region);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    if (noise.brownian() || noise.sigma1 == 0.0)
        return psi;

    const double alpha = noise.alpha;
    const double rate = std::pow(noise.sigma1, alpha) * noise.jump_constant() / alpha;
    for (int i = 0; i < grid.n_v; ++i) {
        const double v = from_unit(region, {grid.s(i), 0.0}).v;
        double value = std::pow(target.a_p - v, -alpha);
        if (std::isfinite(target.b_p))
            value -= std::pow(target.b_p - v, -alpha);
        for (int k = 0; k < grid.n_w; ++k)
            psi(static_cast<Eigen::Index>(grid.index(i, k))) = -rate * value;
    }
    return psi;
}

LinearSystem::LinearSystem(OperatorMatrix op, const SolverConfig& config)
    : op_(std::make_shared<const OperatorMatrix>(std::move(op)))
    , config_(config)
    , preconditioner_(std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>())
{
    const Eigen::SparseMatrix<double> local = op_->local_part();
    preconditioner_->analyzePattern(local);
    preconditioner_->factorize(local);
    if (preconditioner_->info() != Eigen::Success)
        throw Error(ErrorKind::LinearSolveFailure, "preconditioner factorization failed");
}

KrylovResult LinearSystem::solve(const Eigen::VectorXd& rhs) const
{
    const OperatorMatrix& a = *op_;
    auto& lu = *preconditioner_;
    const LinearMap apply = [&a](const Eigen::VectorXd& x, Eigen::VectorXd& y) { a.apply(x, y); };
    const LinearMap precondition = [&lu](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = lu.solve(x); };

    KrylovResult result = gmres(apply, precondition, rhs, Eigen::VectorXd::Zero(rhs.size()),
                                config_.tolerance, config_.iteration_cap(), config_.restart);
    if (!result.converged) {
        std::ostringstream msg;
        msg << "GMRES stopped after " << result.iterations << " iterations with relative residual "
            << result.relative_residual;
        throw Error(ErrorKind::LinearSolveFailure, msg.str());
    }
    return result;
}

namespace {

/// Move the known exterior values on the four edges to the right-hand side.
void subtract_edges(const OperatorMatrix& op, const ScalarField& field, Eigen::VectorXd& rhs)
{
    const Grid& g = op.grid();
    const Region& r = op.region();
    for (int k = 0; k < g.n_w; ++k) {
        for (int i = 0; i < g.n_v; ++i) {
            const auto p = static_cast<Eigen::Index>(g.index(i, k));
            const State node = from_unit(r, {g.s(i), g.k(k)});
            rhs(p) -= op.edge(Edge::left)(p) * field.exterior({r.a, node.w})
                      + op.edge(Edge::right)(p) * field.exterior({r.b, node.w})
                      + op.edge(Edge::bottom)(p) * field.exterior({node.v, r.c})
                      + op.edge(Edge::top)(p) * field.exterior({node.v, r.d});
        }
    }
}

ScalarField blank_field(FieldKind kind, const OperatorMatrix& op)
{
    ScalarField f;
    f.kind = kind;
    f.grid = op.grid();
    f.region = op.region();
    return f;
}

void check_stochastic(const NoiseSpec& noise)
{
    noise.validate(/*stochastic=*/true);
}

} // namespace

ScalarField LinearSystem::solve_fep(const TargetStrip& target) const
{
    const auto start = std::chrono::steady_clock::now();
    check_stochastic(op_->noise());
    ScalarField field = blank_field(FieldKind::fep, *op_);
    field.target = target;

    Eigen::VectorXd rhs = fep_source(op_->noise(), op_->region(), target, op_->grid());
    subtract_edges(*op_, field, rhs);
    const KrylovResult sol = solve(rhs);

    field.values.assign(sol.x.data(), sol.x.data() + sol.x.size());
    field.residual = sol.relative_residual;
    field.iterations = sol.iterations;
    field.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double slack = 10.0 * config_.tolerance;
    if (!(field.min() >= -slack && field.max() <= 1.0 + slack) || !std::isfinite(field.max()))
        throw Error(ErrorKind::NonFiniteSolution,
                    "FEP outside [0,1]: min " + std::to_string(field.min()) + ", max " + std::to_string(field.max()));
    return field;
}

ScalarField LinearSystem::solve_mfet() const
{
    const auto start = std::chrono::steady_clock::now();
    check_stochastic(op_->noise());
    ScalarField field = blank_field(FieldKind::mfet, *op_);

    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(op_->size()), -1.0);
    const KrylovResult sol = solve(rhs);

    field.values.assign(sol.x.data(), sol.x.data() + sol.x.size());
    field.residual = sol.relative_residual;
    field.iterations = sol.iterations;
    field.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double slack = 10.0 * config_.tolerance * std::max(1.0, field.max());
    if (!(field.min() >= -slack) || !std::isfinite(field.max()))
        throw Error(ErrorKind::NonFiniteSolution, "MFET has negative entries: min " + std::to_string(field.min()));
    return field;
}

ScalarField solve_fep(const DriftField& drift, const NoiseSpec& noise, const Region& region,
                      const TargetStrip& target, const SolverConfig& config)
{
    check_stochastic(noise);
    target.validate(region);
    return LinearSystem(assemble(drift, noise, region, config), config).solve_fep(target);
}

ScalarField solve_mfet(const DriftField& drift, const NoiseSpec& noise, const Region& region,
                       const SolverConfig& config)
{
    check_stochastic(noise);
    return LinearSystem(assemble(drift, noise, region, config), config).solve_mfet();
}

ConvergenceTable convergence_study(const std::function<ScalarField(const Grid&)>& solve,
                                   std::span<const Grid> grids, State probe, double core)
{
    if (grids.size() < 3)
        throw Error(ErrorKind::ConfigError, "convergence study needs at least three grids");
    for (std::size_t g = 1; g < grids.size(); ++g) {
        if (grids[g].n_v + 1 != 2 * (grids[g - 1].n_v + 1) || grids[g].n_w + 1 != 2 * (grids[g - 1].n_w + 1))
            throw Error(ErrorKind::ConfigError, "convergence study grids must refine by 2: n' + 1 = 2 (n + 1)");
    }

    std::vector<ScalarField> fields;
    for (const Grid& g : grids)
        fields.push_back(solve(g));

    ConvergenceTable table;
    for (std::size_t g = 1; g < fields.size(); ++g) {
        const ScalarField& coarse = fields[g - 1];
        const ScalarField& fine = fields[g];
        ConvergenceRow row;
        row.h = fine.grid.h_s();
        for (int k = 0; k < coarse.grid.n_w; ++k) {
            for (int i = 0; i < coarse.grid.n_v; ++i) {
                const double d = std::abs(coarse.at(i, k) - fine.at(2 * i + 1, 2 * k + 1));
                row.delta_full = std::max(row.delta_full, d);
                if (std::abs(coarse.grid.s(i)) <= core && std::abs(coarse.grid.k(k)) <= core)
                    row.delta_core = std::max(row.delta_core, d);
            }
        }
        row.delta_probe = std::abs(coarse.evaluate(probe) - fine.evaluate(probe));
        if (!table.rows.empty()) {
            const ConvergenceRow& prev = table.rows.back();
            auto order = [](double a, double b) { return (a > 0.0 && b > 0.0) ? std::log2(a / b) : 0.0; };
            row.order_full = order(prev.delta_full, row.delta_full);
            row.order_core = order(prev.delta_core, row.delta_core);
            row.order_probe = order(prev.delta_probe, row.delta_probe);
        }
        table.rows.push_back(row);
    }
    table.monotone_core = true;
    for (std::size_t r = 1; r < table.rows.size(); ++r)
        table.monotone_core = table.monotone_core && table.rows[r].delta_core < table.rows[r - 1].delta_core;
    return table;
}

} // namespace mlescape
