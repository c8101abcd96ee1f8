#include "mlescape/krylov.hpp"

#include <cmath>
#include <vector>

namespace mlescape {

KrylovResult gmres(const LinearMap& op, const LinearMap& preconditioner, const Eigen::VectorXd& rhs,
                   const Eigen::VectorXd& initial, double tolerance, int max_iterations, int restart)
{
    const Eigen::Index n = rhs.size();
    KrylovResult result;
    result.x = initial;

    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        result.x.setZero();
        result.converged = true;
        return result;
    }

    Eigen::VectorXd r(n), w(n), z(n);
    auto true_residual = [&] {
        op(result.x, w);
        r = rhs - w;
        return r.norm();
    };

    double beta = true_residual();
    std::vector<Eigen::VectorXd> basis;
    Eigen::MatrixXd hess;
    Eigen::VectorXd cs, sn, g;

    while (result.iterations < max_iterations) {
        if (beta / rhs_norm <= tolerance)
            break;
        const int m = restart;
        basis.assign(1, r / beta);
        hess.setZero(m + 1, m);
        cs.setZero(m);
        sn.setZero(m);
        g.setZero(m + 1);
        g(0) = beta;

        int j = 0;
        for (; j < m && result.iterations < max_iterations; ++j) {
            ++result.iterations;
            preconditioner(basis[j], z);
            op(z, w);
            for (int i = 0; i <= j; ++i) {
                hess(i, j) = w.dot(basis[i]);
                w -= hess(i, j) * basis[i];
            }
            hess(j + 1, j) = w.norm();

            for (int i = 0; i < j; ++i) {
                const double t = cs(i) * hess(i, j) + sn(i) * hess(i + 1, j);
                hess(i + 1, j) = -sn(i) * hess(i, j) + cs(i) * hess(i + 1, j);
                hess(i, j) = t;
            }
            const double denom = std::hypot(hess(j, j), hess(j + 1, j));
            cs(j) = hess(j, j) / denom;
            sn(j) = hess(j + 1, j) / denom;
            hess(j, j) = denom;
            hess(j + 1, j) = 0.0;
            g(j + 1) = -sn(j) * g(j);
            g(j) = cs(j) * g(j);

            const bool done = std::abs(g(j + 1)) / rhs_norm <= 0.5 * tolerance;
            if (!done && w.norm() > 0.0)
                basis.push_back(w / w.norm());
            if (done || w.norm() == 0.0) {
                ++j;
                break;
            }
        }

        // Back substitution on the j x j triangle, then x += M^{-1} V y.
        Eigen::VectorXd y = hess.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        Eigen::VectorXd update = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < j; ++i)
            update += y(i) * basis[i];
        preconditioner(update, z);
        result.x += z;
        beta = true_residual();
    }

    result.relative_residual = beta / rhs_norm;
    result.converged = result.relative_residual <= tolerance;
    return result;
}

} // namespace mlescape
