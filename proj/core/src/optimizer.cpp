#include "odocal/optimizer.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/Dense>

#include "odocal/errors.hpp"

namespace odocal {

namespace {

constexpr double kLambdaInit = 1e-10;
constexpr double kLambdaShrink = 0.25;
constexpr double kLambdaGrow = 10.0;
constexpr double kLambdaMax = 1e12;
constexpr int kMaxRetriesPerIteration = 40;

void validate(const Eigen::VectorXd& x0, const OptimizerConfig& cfg) {
    if (cfg.max_iters < 1) throw ParameterError("max_iters must be >= 1");
    if (!(cfg.f_tol > 0.0) || !(cfg.step_tol > 0.0)) {
        throw ParameterError("optimizer tolerances must be strictly positive");
    }
    if (cfg.bounds.size() != static_cast<std::size_t>(x0.size())) {
        throw ParameterError("bounds size must match the parameter dimension");
    }
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
        const auto& [lo, hi] = cfg.bounds[static_cast<std::size_t>(i)];
        if (!(lo < hi)) throw ParameterError("each bound must satisfy lo < hi");
        if (x0[i] < lo || x0[i] > hi) throw ParameterError("x0 must lie within the bounds");
    }
}

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const OptimizerConfig& cfg) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto& [lo, hi] = cfg.bounds[static_cast<std::size_t>(i)];
        x[i] = std::clamp(x[i], lo, hi);
    }
    return x;
}

double loss_of(const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); }

}  // namespace

const char* to_string(Termination t) {
    switch (t) {
        case Termination::converged_f: return "converged_f";
        case Termination::converged_step: return "converged_step";
        case Termination::max_iters: return "max_iters";
        default: return "failure";
    }
}

Eigen::MatrixXd forward_difference_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x,
                                            const OptimizerConfig& config) {
    const Eigen::VectorXd r0 = residual(x);
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double h = std::max(config.fd_step * std::abs(x[j]), config.fd_floor);
        if (!config.bounds.empty()) {
            const auto& [lo, hi] = config.bounds[static_cast<std::size_t>(j)];
            if (x[j] + h > hi) h = -h;  // step inward at the upper bound
            (void)lo;
        }
        Eigen::VectorXd xh = x;
        xh[j] += h;
        jac.col(j) = (residual(xh) - r0) / h;
    }
    return jac;
}

OptimizationTrace minimize(const ResidualFn& residual, const Eigen::VectorXd& x0,
                           const OptimizerConfig& config, const JacobianFn& jacobian) {
    validate(x0, config);
    if (config.jacobian == JacobianMode::Analytic && !jacobian) {
        throw ParameterError("analytic Jacobian requested but none provided");
    }
    const auto t_start = std::chrono::steady_clock::now();
    const auto elapsed = [&t_start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    OptimizationTrace trace;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd r = residual(x);
    if (!r.allFinite()) {
        trace.iterates.emplace_back(x, std::numeric_limits<double>::quiet_NaN());
        trace.termination = Termination::failure;
        trace.message = "residual is non-finite at the initial point";
        trace.wall_time_s = elapsed();
        return trace;
    }
    double f = loss_of(r);
    trace.iterates.emplace_back(x, f);

    const auto eval_jacobian = [&](const Eigen::VectorXd& at) {
        return config.jacobian == JacobianMode::Analytic
                   ? jacobian(at)
                   : forward_difference_jacobian(residual, at, config);
    };

    double lambda = kLambdaInit;
    trace.termination = Termination::max_iters;
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        const Eigen::MatrixXd jac = eval_jacobian(x);
        if (!jac.allFinite()) {
            trace.termination = Termination::failure;
            trace.message = "Jacobian is non-finite";
            break;
        }
        const Eigen::MatrixXd hess = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;

        // Marquardt scaling with a floor so flat directions stay solvable.
        Eigen::VectorXd diag = hess.diagonal();
        for (Eigen::Index i = 0; i < diag.size(); ++i) diag[i] = std::max(diag[i], 1e-12);

        bool accepted = false;
        bool last_nonfinite = false;
        for (int retry = 0; retry < kMaxRetriesPerIteration; ++retry) {
            Eigen::MatrixXd damped = hess;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            const Eigen::VectorXd x_new = clamp_to_box(x + step, config);
            const double step_norm = (x_new - x).norm();
            if (step_norm <= config.step_tol * std::max(1.0, x.norm())) {
                trace.termination = Termination::converged_step;
                trace.wall_time_s = elapsed();
                trace.iterations = trace.iterates.size() - 1;
                return trace;
            }
            const Eigen::VectorXd r_new = residual(x_new);
            if (!r_new.allFinite()) {
                last_nonfinite = true;
                lambda *= kLambdaGrow;
                if (lambda > kLambdaMax) break;
                continue;
            }
            last_nonfinite = false;
            const double f_new = loss_of(r_new);
            if (f_new < f) {
                const double f_prev = f;
                x = x_new;
                r = r_new;
                f = f_new;
                trace.iterates.emplace_back(x, f);
                lambda = std::max(lambda * kLambdaShrink, kLambdaInit);
                accepted = true;
                if (std::abs(f_prev - f) <= config.f_tol * std::max(1.0, f)) {
                    trace.termination = Termination::converged_f;
                    trace.wall_time_s = elapsed();
                    trace.iterations = trace.iterates.size() - 1;
                    return trace;
                }
                break;
            }
            lambda *= kLambdaGrow;
            if (lambda > kLambdaMax) break;
        }
        if (!accepted) {
            if (last_nonfinite) {
                trace.termination = Termination::failure;
                trace.message = "residual stayed non-finite under maximal damping";
            } else {
                // No descent direction left at maximal damping: stagnation.
                trace.termination = Termination::converged_step;
            }
            break;
        }
    }
    trace.iterations = trace.iterates.size() - 1;
    trace.wall_time_s = elapsed();
    return trace;
}

}  // namespace odocal
