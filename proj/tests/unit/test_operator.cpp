#include "mlescape/error.hpp"
#include "mlescape/nonlocal_operator.hpp"
#include "mlescape/nonlocal_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mlescape;

namespace {

SolverConfig small(int n_v, int n_w)
{
    SolverConfig c;
    c.grid = {n_v, n_w};
    return c;
}

// Row sums of A plus every exterior coefficient: zero for a conservative generator.
double conservation_defect(const OperatorMatrix& a)
{
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(a.size()));
    Eigen::VectorXd total = a * ones + a.exit_rate();
    for (Edge e : {Edge::left, Edge::right, Edge::bottom, Edge::top})
        total += a.edge(e);
    return total.lpNorm<Eigen::Infinity>();
}

double getoor(double alpha)
{
    return std::sqrt(std::numbers::pi)
           / (std::pow(2.0, alpha) * std::tgamma(1.0 + alpha / 2.0) * std::tgamma((1.0 + alpha) / 2.0));
}

} // namespace

TEST_SUITE("operator") {

TEST_CASE("parsers")
{
    CHECK(parse_drift_scheme("central") == DriftScheme::central);
    CHECK(parse_quadrature("taylor") == Quadrature::taylor);
    CHECK(to_string(Quadrature::zeta) == "zeta");
    CHECK_THROWS_AS(parse_drift_scheme("downwind"), Error);
    SolverConfig c;
    c.tolerance = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    CHECK(c.iteration_cap() == 10 * 201 * 201);
}

TEST_CASE("zero-drift generator conserves probability")
{
    const Region d;
    for (double alpha : {0.5, 1.25, 2.0}) {
        CAPTURE(alpha);
        const OperatorMatrix a = assemble(zero_field(), {alpha, 0.7, 0.4}, d, small(21, 17));
        CHECK(conservation_defect(a) < 1e-9);
        for (std::size_t n = 0; n < a.size(); ++n)
            CHECK_UNARY(a.diagonal(n) < 0.0);
    }
}

TEST_CASE("Morris-Lecar generator conserves probability")
{
    const OperatorMatrix a = assemble(morris_lecar_field(), {1.25, 0.5, 0.5}, Region{}, small(31, 31));
    CHECK(conservation_defect(a) < 1e-8);

    const OperatorMatrix c = [&] {
        SolverConfig cfg = small(31, 31);
        cfg.drift_scheme = DriftScheme::central;
        return assemble(morris_lecar_field(), {1.25, 0.5, 0.5}, Region{}, cfg);
    }();
    CHECK(conservation_defect(c) < 1e-8);

    // Matrix-free product agrees with the explicit sparse form.
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(a.size()), -1.0, 3.0);
    const Eigen::VectorXd y = a.to_sparse() * x;
    CHECK((a * x - y).lpNorm<Eigen::Infinity>() < 1e-9 * y.lpNorm<Eigen::Infinity>());
    CHECK(a.entry(5, 5) == a.diagonal(5));
}

TEST_CASE("zero noise leaves pure upwind advection")
{
    const DriftField east = [](State) { return State{1.0, 0.0}; };
    const Region d{0.0, 2.0, 0.0, 2.0};
    const OperatorMatrix a = assemble(east, {1.0, 0.0, 0.0}, d, small(9, 9));
    const auto s = a.to_sparse();
    const double h = d.b / 10.0;
    for (int r = 0; r < s.rows(); ++r) {
        int nonzeros = 0;
        for (decltype(s)::InnerIterator it(s, r); it; ++it)
            nonzeros += it.value() != 0.0;
        CHECK(nonzeros <= 2);
        CHECK(a.diagonal(r) == doctest::Approx(-1.0 / h));
    }
    CHECK(a.exit_rate().norm() == 0.0);
    CHECK(a.edge(Edge::left).norm() == 0.0);
    CHECK(a.edge(Edge::right).sum() == doctest::Approx(9.0 / h));
}

TEST_CASE("Brownian stencil is exact on quadratics")
{
    const Region d{-1.0, 3.0, 0.0, 2.0};
    const NoiseSpec noise{2.0, 0.8, 0.3};
    const SolverConfig cfg = small(15, 11);
    const OperatorMatrix a = assemble(zero_field(), noise, d, cfg);
    const Grid& g = cfg.grid;

    // u = (v - a)(b - v)(w - c)(d - w) vanishes on the boundary; its generator value is
    // -sigma1^2 (w - c)(d - w) - sigma2^2 (v - a)(b - v).
    Eigen::VectorXd u(static_cast<Eigen::Index>(g.size())), lu(u.size());
    for (int j = 0; j < g.n_w; ++j)
        for (int i = 0; i < g.n_v; ++i) {
            const State p = from_unit(d, {g.s(i), g.k(j)});
            const double pv = (p.v - d.a) * (d.b - p.v), pw = (p.w - d.c) * (d.d - p.w);
            u(g.index(i, j)) = pv * pw;
            lu(g.index(i, j)) = -noise.sigma1 * noise.sigma1 * pw - noise.sigma2 * noise.sigma2 * pv;
        }
    CHECK((a * u - lu).lpNorm<Eigen::Infinity>() < 1e-10);

    const LinearSystem system(a, cfg);
    const KrylovResult r = system.solve(lu);
    CHECK(r.converged);
    CHECK((r.x - u).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("fractional Laplacian of the Getoor profile")
{
    // (-Delta)^{alpha/2} (1 - s^2)_+^{alpha/2} is the constant 1 / getoor(alpha) on (-1, 1).
    const int n = 401;
    const double h = 2.0 / (n + 1);
    for (double alpha : {0.5, 1.0, 1.5}) {
        for (Quadrature q : {Quadrature::zeta, Quadrature::taylor}) {
            CAPTURE(alpha);
            const AxisOperator ax = nonlocal_axis(n, alpha, fractional_laplacian_constant(alpha), q);
            Eigen::VectorXd u(n);
            for (int i = 0; i < n; ++i) {
                const double s = -1.0 + (i + 1) * h;
                u(i) = std::pow(1.0 - s * s, alpha / 2.0);
            }
            const Eigen::VectorXd lu = ax.interior * u;
            CHECK(-lu(n / 2) * getoor(alpha) == doctest::Approx(1.0).epsilon(0.03));
            // Constants are annihilated once edges and exits are counted.
            const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
            const Eigen::VectorXd defect = ax.interior * ones + ax.low_edge + ax.high_edge + ax.exit_rate;
            CHECK(defect.lpNorm<Eigen::Infinity>() < 1e-8 * ax.interior.diagonal().cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("axis intensity and symmetry")
{
    const AxisOperator ax = nonlocal_axis(51, 1.25, 1.0, Quadrature::zeta);
    CHECK((ax.interior - ax.interior.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const AxisOperator twice = nonlocal_axis(51, 1.25, 2.0, Quadrature::zeta);
    CHECK((twice.interior - 2.0 * ax.interior).cwiseAbs().maxCoeff() < 1e-9);
    const AxisOperator none = nonlocal_axis(51, 1.25, 0.0, Quadrature::zeta);
    CHECK(none.interior.norm() == 0.0);

    const AxisOperator diff = diffusion_axis(9, 3.0);
    CHECK(diff.interior(4, 4) == doctest::Approx(-2.0 * 3.0 * 25.0));
    CHECK(diff.low_edge(0) == doctest::Approx(3.0 * 25.0));
    CHECK(diff.low_edge(1) == 0.0);
}

TEST_CASE("FEP source term")
{
    // One node at v = 0.0723, distance 1 from the target edge.
    const Region d{-0.9277, 1.0723, -1.0, 1.0};
    const Grid g{1, 1};
    const TargetStrip e;
    const auto psi_planar = fep_source({1.0, 1.0, 1.0, JumpNormalization::planar}, d, e, g);
    CHECK(psi_planar(0) == doctest::Approx(-0.159155).epsilon(1e-5));
    const auto psi = fep_source({1.0, 1.0, 1.0}, d, e, g);
    CHECK(psi(0) == doctest::Approx(-1.0 / std::numbers::pi).epsilon(1e-12));

    const Grid row{41, 3};
    const auto grow = fep_source({1.25, 0.5, 0.5}, Region{}, e, row);
    for (int i = 1; i < row.n_v; ++i)
        CHECK(std::abs(grow(row.index(i, 1))) > std::abs(grow(row.index(i - 1, 1))));
    CHECK(fep_source({1.25, 0.0, 0.5}, Region{}, e, row).norm() == 0.0);
    CHECK(fep_source({2.0, 0.5, 0.5}, Region{}, e, row).norm() == 0.0);

    TargetStrip bounded;
    bounded.b_p = 2.0723;
    const auto finite = fep_source({1.0, 1.0, 1.0}, d, bounded, g);
    CHECK(finite(0) == doctest::Approx(-0.5 / std::numbers::pi).epsilon(1e-12));

    TargetStrip inside;
    inside.a_p = 0.5;
    CHECK_THROWS_AS(fep_source({1.0, 1.0, 1.0}, d, inside, g), Error);
}

}
