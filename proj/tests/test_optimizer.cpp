#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "odocal/errors.hpp"
#include "odocal/optimizer.hpp"
#include "oracles.hpp"

using namespace odocal;

namespace {

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return v;
}

OptimizerConfig box1(double lo, double hi) {
    OptimizerConfig cfg;
    cfg.bounds = {{lo, hi}};
    return cfg;
}

}  // namespace

TEST_CASE("scalar quadratic converges to the root") {
    const ResidualFn fn = [](const Eigen::VectorXd& x) { return vec1(x[0] - 3.0); };
    const OptimizationTrace trace = minimize(fn, vec1(0.0), box1(0.0, 10.0));
    CHECK(trace.solution()[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK((trace.termination == Termination::converged_f ||
           trace.termination == Termination::converged_step));
}

TEST_CASE("linear least squares converges within three iterations") {
    // Two-parameter linear residuals: Gauss-Newton is exact.
    const ResidualFn fn = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(3);
        r[0] = 2.0 * x[0] - 1.0;
        r[1] = x[1] + 0.5;
        r[2] = x[0] + x[1] - 0.2;
        return r;
    };
    OptimizerConfig cfg;
    cfg.bounds = {{-10.0, 10.0}, {-10.0, 10.0}};
    const OptimizationTrace trace = minimize(fn, (Eigen::VectorXd(2) << 5.0, -5.0).finished(), cfg);
    CHECK(trace.iterations <= 3);
    // Normal-equations optimum for comparison.
    Eigen::MatrixXd a(3, 2);
    a << 2, 0, 0, 1, 1, 1;
    Eigen::VectorXd b(3);
    b << 1, -0.5, 0.2;
    const Eigen::VectorXd expected = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    CHECK(trace.solution()[0] == doctest::Approx(expected[0]).epsilon(1e-10));
    CHECK(trace.solution()[1] == doctest::Approx(expected[1]).epsilon(1e-10));
}

TEST_CASE("Rosenbrock-as-residuals reaches the grid-verified optimum") {
    const ResidualFn fn = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(2);
        r[0] = x[0] - 1.0;
        r[1] = 10.0 * (x[1] - x[0] * x[0]);
        return r;
    };
    // Independent verification of the optimum by nested grid refinement.
    const auto loss = [&fn](const std::array<double, 2>& p) {
        return 0.5 * fn((Eigen::VectorXd(2) << p[0], p[1]).finished()).squaredNorm();
    };
    const auto grid_opt = oracles::grid_refine_2d(loss, {-2.0, -2.0}, {2.0, 2.0});
    REQUIRE(std::abs(grid_opt[0] - 1.0) < 1e-6);
    REQUIRE(std::abs(grid_opt[1] - 1.0) < 1e-6);

    OptimizerConfig cfg;
    cfg.bounds = {{-2.0, 2.0}, {-2.0, 2.0}};
    cfg.max_iters = 500;
    const OptimizationTrace trace =
        minimize(fn, (Eigen::VectorXd(2) << -1.2, 1.0).finished(), cfg);
    CHECK(std::abs(trace.solution()[0] - 1.0) < 1e-8);
    CHECK(std::abs(trace.solution()[1] - 1.0) < 1e-8);
}

TEST_CASE("iterates stay inside the box and losses are monotone") {
    // Optimum outside the box: the solver must ride the boundary.
    const ResidualFn fn = [](const Eigen::VectorXd& x) { return vec1(x[0] - 12.0); };
    const OptimizationTrace trace = minimize(fn, vec1(1.0), box1(0.0, 10.0));
    CHECK(trace.solution()[0] == doctest::Approx(10.0));
    for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
        CHECK(trace.iterates[i].first[0] >= 0.0);
        CHECK(trace.iterates[i].first[0] <= 10.0);
        if (i > 0) CHECK(trace.iterates[i].second <= trace.iterates[i - 1].second);
    }
}

TEST_CASE("analytic Jacobian path matches forward differences") {
    const ResidualFn fn = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(2);
        r[0] = std::sin(x[0]) - 0.4;
        r[1] = x[0] * x[0] - 0.5;
        return r;
    };
    const JacobianFn jac = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j(2, 1);
        j(0, 0) = std::cos(x[0]);
        j(1, 0) = 2.0 * x[0];
        return j;
    };
    OptimizerConfig cfg = box1(0.0, 2.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 1.95);
    for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXd x = vec1(u(rng));
        const Eigen::MatrixXd fd = forward_difference_jacobian(fn, x, cfg);
        const Eigen::MatrixXd an = jac(x);
        CHECK((fd - an).lpNorm<Eigen::Infinity>() <=
              1e-5 * std::max(1.0, an.lpNorm<Eigen::Infinity>()));
    }

    cfg.jacobian = JacobianMode::Analytic;
    const OptimizationTrace trace = minimize(fn, vec1(1.9), cfg, jac);
    CHECK(trace.loss() < minimize(fn, vec1(1.9), box1(0.0, 2.0)).loss() + 1e-12);
}

TEST_CASE("non-finite residual at the start fails immediately with a diagnostic") {
    const ResidualFn fn = [](const Eigen::VectorXd&) {
        return vec1(std::numeric_limits<double>::quiet_NaN());
    };
    const OptimizationTrace trace = minimize(fn, vec1(1.0), box1(0.0, 10.0));
    CHECK(trace.termination == Termination::failure);
    CHECK(!trace.message.empty());
    CHECK(trace.iterates.size() == 1);
}

TEST_CASE("non-finite residual during the search is survived by damping") {
    // log(6 - x) from a far-left start: the first Gauss-Newton step
    // overshoots into the NaN region and must be damped back.
    const ResidualFn fn = [](const Eigen::VectorXd& x) {
        return vec1(std::log(6.0 - x[0]) - std::log(3.0));
    };
    OptimizerConfig cfg = box1(-50.0, 50.0);
    cfg.max_iters = 200;
    const OptimizationTrace trace = minimize(fn, vec1(-20.0), cfg);
    CHECK(trace.termination != Termination::failure);
    CHECK(trace.solution()[0] == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("minimize validates its configuration") {
    const ResidualFn fn = [](const Eigen::VectorXd& x) { return vec1(x[0]); };
    CHECK_THROWS_AS(minimize(fn, vec1(20.0), box1(0.0, 10.0)), ParameterError);  // x0 outside
    CHECK_THROWS_AS(minimize(fn, vec1(1.0), box1(10.0, 0.0)), ParameterError);   // inverted
    OptimizerConfig no_bounds;
    CHECK_THROWS_AS(minimize(fn, vec1(1.0), no_bounds), ParameterError);
    OptimizerConfig analytic = box1(0.0, 10.0);
    analytic.jacobian = JacobianMode::Analytic;
    CHECK_THROWS_AS(minimize(fn, vec1(1.0), analytic), ParameterError);  // no jacobian given
    OptimizerConfig bad_tol = box1(0.0, 10.0);
    bad_tol.f_tol = 0.0;
    CHECK_THROWS_AS(minimize(fn, vec1(1.0), bad_tol), ParameterError);
}

TEST_CASE("trace bookkeeping is consistent") {
    const ResidualFn fn = [](const Eigen::VectorXd& x) { return vec1(x[0] - 3.0); };
    const OptimizationTrace trace = minimize(fn, vec1(0.0), box1(0.0, 10.0));
    CHECK(trace.iterations == trace.iterates.size() - 1);
    CHECK(trace.wall_time_s >= 0.0);
}
