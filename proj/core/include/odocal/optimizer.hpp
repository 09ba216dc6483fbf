#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace odocal {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

enum class JacobianMode { Analytic, ForwardDifference };

struct OptimizerConfig {
    std::size_t max_iters = 100;
    double f_tol = 1e-16;
    double step_tol = 1e-12;
    std::vector<std::pair<double, double>> bounds;  // per-parameter (lo, hi)
    JacobianMode jacobian = JacobianMode::ForwardDifference;
    double fd_step = 1e-6;       // relative forward-difference step
    double fd_floor = 1e-9;      // absolute step floor
};

enum class Termination { converged_f, converged_step, max_iters, failure };

const char* to_string(Termination t);

/// Accepted iterate history of one minimization. Loss values are
/// non-increasing; iterations == iterates.size() - 1.
struct OptimizationTrace {
    std::vector<std::pair<Eigen::VectorXd, double>> iterates;  // (x, 0.5*||r||^2)
    Termination termination = Termination::failure;
    std::size_t iterations = 0;
    double wall_time_s = 0.0;
    std::string message;

    const Eigen::VectorXd& solution() const { return iterates.back().first; }
    double loss() const { return iterates.back().second; }
};

/// Minimize 0.5*||residual(x)||^2 over the box via damped Gauss-Newton
/// (Levenberg-Marquardt) with step projection onto the bounds. Terminates
/// on the relative loss decrease (f_tol), on a projected step below
/// step_tol, or at max_iters. Accepted-loss monotonicity is guaranteed by
/// the damping loop.
OptimizationTrace minimize(const ResidualFn& residual, const Eigen::VectorXd& x0,
                           const OptimizerConfig& config, const JacobianFn& jacobian = nullptr);

/// Forward-difference Jacobian with the config's relative step and absolute
/// floor; steps flip direction when they would leave the box.
Eigen::MatrixXd forward_difference_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x,
                                            const OptimizerConfig& config);

}  // namespace odocal
