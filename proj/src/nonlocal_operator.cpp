#include "mlescape/nonlocal_operator.hpp"

#include "mlescape/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace mlescape {

std::string_view to_string(DriftScheme s)
{
    return s == DriftScheme::central ? "central" : "upwind";
}

std::string_view to_string(Quadrature q)
{
    return q == Quadrature::taylor ? "taylor" : "zeta";
}

DriftScheme parse_drift_scheme(std::string_view text)
{
    if (text == "upwind") return DriftScheme::upwind;
    if (text == "central") return DriftScheme::central;
    throw Error(ErrorKind::ConfigError, "solver.drift must be upwind or central, got " + std::string(text));
}

Quadrature parse_quadrature(std::string_view text)
{
    if (text == "zeta") return Quadrature::zeta;
    if (text == "taylor") return Quadrature::taylor;
    throw Error(ErrorKind::ConfigError, "solver.quadrature must be zeta or taylor, got " + std::string(text));
}

void SolverConfig::validate() const
{
    grid.validate();
    if (!(tolerance > 0.0 && tolerance <= 1e-6))
        throw Error(ErrorKind::ConfigError, "solver.tolerance must lie in (0, 1e-6]");
    if (max_iterations < 0)
        throw Error(ErrorKind::ConfigError, "solver.max_iterations must be >= 0");
    if (restart < 1)
        throw Error(ErrorKind::ConfigError, "solver.restart must be >= 1");
}

int SolverConfig::iteration_cap() const
{
    return max_iterations > 0 ? max_iterations : static_cast<int>(10 * grid.size());
}

AxisOperator nonlocal_axis(int n, double alpha, double intensity, Quadrature quadrature)
{
    const int last = n + 1; // grid points 0..last, endpoints at s = -1, +1
    const double h = 2.0 / last;

    AxisOperator axis;
    axis.interior = Eigen::MatrixXd::Zero(n, n);
    axis.low_edge = Eigen::VectorXd::Zero(n);
    axis.high_edge = Eigen::VectorXd::Zero(n);
    axis.exit_rate = Eigen::VectorXd::Zero(n);
    if (intensity == 0.0)
        return axis;

    std::vector<double> kernel(last + 1, 0.0); // (d h)^{-1-alpha}
    for (int d = 1; d <= last; ++d)
        kernel[d] = std::pow(d * h, -1.0 - alpha);

    const double second_difference =
        quadrature == Quadrature::zeta ? -std::riemann_zeta(alpha - 1.0) * std::pow(h, -alpha)
                                       : std::pow(h, -alpha) / (2.0 - alpha);

    for (int r = 0; r < n; ++r) {
        const int j = r + 1;
        const double s = -1.0 + j * h;
        const double exit = intensity / alpha * (std::pow(1.0 + s, -alpha) + std::pow(1.0 - s, -alpha));
        axis.exit_rate(r) = exit;
        double diag = -exit;

        auto couple = [&](int m, double c) {
            diag -= c;
            if (m == 0)
                axis.low_edge(r) += c;
            else if (m == last)
                axis.high_edge(r) += c;
            else
                axis.interior(r, m - 1) += c;
        };

        for (int m = 0; m <= last; ++m) {
            if (m == j)
                continue;
            const int d = std::abs(m - j);
            const bool endpoint = m == 0 || m == last;
            double weight = endpoint ? 0.5 * h : h;
            if (quadrature == Quadrature::taylor && d == 1)
                weight = endpoint ? 0.0 : 0.5 * h; // trapezoid starts at |y| = h
            if (weight != 0.0)
                couple(m, intensity * weight * kernel[d]);
        }
        couple(j - 1, intensity * second_difference);
        couple(j + 1, intensity * second_difference);

        axis.interior(r, r) += diag;
    }
    return axis;
}

AxisOperator diffusion_axis(int n, double coefficient)
{
    const double h = 2.0 / (n + 1);
    const double c = coefficient / (h * h);
    AxisOperator axis;
    axis.interior = Eigen::MatrixXd::Zero(n, n);
    axis.low_edge = Eigen::VectorXd::Zero(n);
    axis.high_edge = Eigen::VectorXd::Zero(n);
    axis.exit_rate = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < n; ++r) {
        axis.interior(r, r) = -2.0 * c;
        if (r > 0) axis.interior(r, r - 1) = c; else axis.low_edge(r) = c;
        if (r < n - 1) axis.interior(r, r + 1) = c; else axis.high_edge(r) = c;
    }
    return axis;
}

OperatorMatrix::OperatorMatrix(Grid grid, Region region, NoiseSpec noise, AxisOperator v_axis,
                               AxisOperator w_axis, std::array<Eigen::VectorXd, 5> drift)
    : grid_(grid)
    , region_(region)
    , noise_(noise)
    , v_axis_(std::move(v_axis))
    , w_axis_(std::move(w_axis))
    , drift_(std::move(drift))
{
    const auto n = static_cast<Eigen::Index>(size());
    for (auto& e : edges_)
        e = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < grid_.n_w; ++k) {
        for (int i = 0; i < grid_.n_v; ++i) {
            const auto p = static_cast<Eigen::Index>(grid_.index(i, k));
            edges_[0](p) = v_axis_.low_edge(i) + (i == 0 ? drift_[kLeft](p) : 0.0);
            edges_[1](p) = v_axis_.high_edge(i) + (i == grid_.n_v - 1 ? drift_[kRight](p) : 0.0);
            edges_[2](p) = w_axis_.low_edge(k) + (k == 0 ? drift_[kDown](p) : 0.0);
            edges_[3](p) = w_axis_.high_edge(k) + (k == grid_.n_w - 1 ? drift_[kUp](p) : 0.0);
        }
    }
}

void OperatorMatrix::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const
{
    using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstRowMajorMap =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    const int nv = grid_.n_v;
    const int nw = grid_.n_w;
    y.resize(x.size());

    // Rows of the map are lines of constant w.
    ConstRowMajorMap xs(x.data(), nw, nv);
    RowMajorMap ys(y.data(), nw, nv);
    ys.noalias() = xs * v_axis_.interior.transpose();
    ys.noalias() += w_axis_.interior * xs;

    const double* dd = drift_[kDiag].data();
    const double* dl = drift_[kLeft].data();
    const double* dr = drift_[kRight].data();
    const double* dn = drift_[kDown].data();
    const double* du = drift_[kUp].data();
    for (int k = 0; k < nw; ++k) {
        for (int i = 0; i < nv; ++i) {
            const std::size_t p = grid_.index(i, k);
            double acc = dd[p] * x[p];
            if (i > 0) acc += dl[p] * x[p - 1];
            if (i < nv - 1) acc += dr[p] * x[p + 1];
            if (k > 0) acc += dn[p] * x[p - nv];
            if (k < nw - 1) acc += du[p] * x[p + nv];
            y[p] += acc;
        }
    }
}

Eigen::VectorXd OperatorMatrix::operator*(const Eigen::VectorXd& x) const
{
    Eigen::VectorXd y;
    apply(x, y);
    return y;
}

Eigen::VectorXd OperatorMatrix::exit_rate() const
{
    Eigen::VectorXd rate(static_cast<Eigen::Index>(size()));
    for (int k = 0; k < grid_.n_w; ++k)
        for (int i = 0; i < grid_.n_v; ++i)
            rate(grid_.index(i, k)) = v_axis_.exit_rate(i) + w_axis_.exit_rate(k);
    return rate;
}

double OperatorMatrix::diagonal(std::size_t row) const
{
    const int i = static_cast<int>(row % grid_.n_v);
    const int k = static_cast<int>(row / grid_.n_v);
    return v_axis_.interior(i, i) + w_axis_.interior(k, k) + drift_[kDiag](row);
}

double OperatorMatrix::entry(std::size_t row, std::size_t col) const
{
    const int nv = grid_.n_v;
    const int i = static_cast<int>(row % nv), k = static_cast<int>(row / nv);
    const int ic = static_cast<int>(col % nv), kc = static_cast<int>(col / nv);
    if (row == col)
        return diagonal(row);
    double value = 0.0;
    if (k == kc) {
        value += v_axis_.interior(i, ic);
        if (ic == i - 1) value += drift_[kLeft](row);
        if (ic == i + 1) value += drift_[kRight](row);
    }
    if (i == ic) {
        value += w_axis_.interior(k, kc);
        if (kc == k - 1) value += drift_[kDown](row);
        if (kc == k + 1) value += drift_[kUp](row);
    }
    return value;
}

Eigen::SparseMatrix<double> OperatorMatrix::local_part() const
{
    const int nv = grid_.n_v;
    const int nw = grid_.n_w;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(5 * size());
    for (int k = 0; k < nw; ++k) {
        for (int i = 0; i < nv; ++i) {
            const auto p = static_cast<int>(grid_.index(i, k));
            t.emplace_back(p, p, diagonal(p));
            if (i > 0) t.emplace_back(p, p - 1, v_axis_.interior(i, i - 1) + drift_[kLeft](p));
            if (i < nv - 1) t.emplace_back(p, p + 1, v_axis_.interior(i, i + 1) + drift_[kRight](p));
            if (k > 0) t.emplace_back(p, p - nv, w_axis_.interior(k, k - 1) + drift_[kDown](p));
            if (k < nw - 1) t.emplace_back(p, p + nv, w_axis_.interior(k, k + 1) + drift_[kUp](p));
        }
    }
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> OperatorMatrix::to_sparse() const
{
    const int nv = grid_.n_v;
    const int nw = grid_.n_w;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(size() * static_cast<std::size_t>(nv + nw + 3));
    for (int k = 0; k < nw; ++k) {
        for (int i = 0; i < nv; ++i) {
            const auto p = static_cast<int>(grid_.index(i, k));
            for (int ic = 0; ic < nv; ++ic)
                if (v_axis_.interior(i, ic) != 0.0)
                    t.emplace_back(p, static_cast<int>(grid_.index(ic, k)), v_axis_.interior(i, ic));
            for (int kc = 0; kc < nw; ++kc)
                if (w_axis_.interior(k, kc) != 0.0)
                    t.emplace_back(p, static_cast<int>(grid_.index(i, kc)), w_axis_.interior(k, kc));
            t.emplace_back(p, p, drift_[kDiag](p));
            if (i > 0) t.emplace_back(p, p - 1, drift_[kLeft](p));
            if (i < nv - 1) t.emplace_back(p, p + 1, drift_[kRight](p));
            if (k > 0) t.emplace_back(p, p - nv, drift_[kDown](p));
            if (k < nw - 1) t.emplace_back(p, p + nv, drift_[kUp](p));
        }
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(size()),
                                                   static_cast<Eigen::Index>(size()));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

namespace {

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same(const AxisOperator& a, const AxisOperator& b)
{
    return same(a.interior, b.interior) && same(a.low_edge, b.low_edge) && same(a.high_edge, b.high_edge)
           && same(a.exit_rate, b.exit_rate);
}

} // namespace

bool OperatorMatrix::operator==(const OperatorMatrix& other) const
{
    if (!(grid_ == other.grid_ && region_ == other.region_ && noise_ == other.noise_))
        return false;
    if (!same(v_axis_, other.v_axis_) || !same(w_axis_, other.w_axis_))
        return false;
    for (std::size_t s = 0; s < drift_.size(); ++s)
        if (!same(drift_[s], other.drift_[s]))
            return false;
    return true;
}

OperatorMatrix assemble(const DriftField& drift, const NoiseSpec& noise, const Region& region,
                        const SolverConfig& config)
{
    config.validate();
    region.validate();
    noise.validate(/*stochastic=*/false);

    const Grid& g = config.grid;
    const double len_v = region.b - region.a;
    const double len_w = region.d - region.c;

    auto make_axis = [&](int n, double sigma, double length) {
        if (noise.brownian())
            return diffusion_axis(n, 0.5 * sigma * sigma * std::pow(2.0 / length, 2));
        const double intensity =
            sigma == 0.0 ? 0.0 : std::pow(sigma, noise.alpha) * noise.jump_constant() * std::pow(0.5 * length, -noise.alpha);
        return nonlocal_axis(n, noise.alpha, intensity, config.quadrature);
    };
    AxisOperator v_axis = make_axis(g.n_v, noise.sigma1, len_v);
    AxisOperator w_axis = make_axis(g.n_w, noise.sigma2, len_w);

    const auto n = static_cast<Eigen::Index>(g.size());
    std::array<Eigen::VectorXd, 5> coeffs;
    for (auto& c : coeffs)
        c = Eigen::VectorXd::Zero(n);

    // Transport along one axis; `speed` already carries 2/L and 1/h.
    auto transport = [&](Eigen::Index p, double speed, int lower, int upper) {
        if (config.drift_scheme == DriftScheme::upwind) {
            if (speed > 0.0) {
                coeffs[0](p) -= speed;
                coeffs[upper](p) += speed;
            } else {
                coeffs[0](p) += speed;
                coeffs[lower](p) -= speed;
            }
        } else {
            coeffs[upper](p) += 0.5 * speed;
            coeffs[lower](p) -= 0.5 * speed;
        }
    };

    for (int k = 0; k < g.n_w; ++k) {
        for (int i = 0; i < g.n_v; ++i) {
            const auto p = static_cast<Eigen::Index>(g.index(i, k));
            const State f = drift(from_unit(region, {g.s(i), g.k(k)}));
            transport(p, 2.0 / len_v * f.v / g.h_s(), 1, 2);
            transport(p, 2.0 / len_w * f.w / g.h_k(), 3, 4);
        }
    }

    return OperatorMatrix(g, region, noise, std::move(v_axis), std::move(w_axis), std::move(coeffs));
}

} // namespace mlescape
