#pragma once

#include <Eigen/Dense>

#include <functional>

namespace mlescape {

/// y = Op(x). Operators are applied matrix-free.
using LinearMap = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct KrylovResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double relative_residual = 0.0; ///< ||b - A x|| / ||b||, recomputed from x
    bool converged = false;
};

/// Restarted GMRES with right preconditioning, so the monitored residual is the
/// true residual of A x = b. `preconditioner` applies M^{-1}.
KrylovResult gmres(const LinearMap& op, const LinearMap& preconditioner, const Eigen::VectorXd& rhs,
                   const Eigen::VectorXd& initial, double tolerance, int max_iterations, int restart);

} // namespace mlescape
