#include <doctest.h>

#include <cmath>
#include <random>

#include "odocal/calibration.hpp"
#include "odocal/errors.hpp"
#include "profiles.hpp"

using namespace odocal;

TEST_CASE("split_dataset: zero-steering dataset is entirely straight") {
    const SimResult result = simulate(profiles::catvehicle(false, 1));
    Dataset all_straight = result.dataset;
    for (Record& rec : all_straight.records) rec.interval.steering = 0.0;
    const SplitResult split = split_dataset(all_straight, profiles::catvehicle_split());
    CHECK(split.straight.records.size() == all_straight.records.size());
    CHECK(split.turn.records.empty());
}

TEST_CASE("split_dataset equals per-record threshold evaluation") {
    const SimResult result = simulate(profiles::turtlebot(true, 99));
    const SplitConfig cfg = profiles::turtlebot_split();
    const SplitResult split = split_dataset(result.dataset, cfg);
    std::size_t straight_expected = 0;
    for (const Record& rec : result.dataset.records) {
        const double rate =
            std::abs(rec.interval.dphi_right - rec.interval.dphi_left) / rec.interval.dt;
        if (rate < cfg.diff_threshold) ++straight_expected;
    }
    CHECK(split.straight.records.size() == straight_expected);
    CHECK(split.straight.records.size() + split.turn.records.size() ==
          result.dataset.records.size());
}

TEST_CASE("split_dataset concatenation is a permutation of the input") {
    const SimResult result = simulate(profiles::turtlebot(true, 7));
    const SplitResult split = split_dataset(result.dataset, profiles::turtlebot_split());
    std::vector<double> in_stamps, out_stamps;
    for (const Record& r : result.dataset.records) in_stamps.push_back(r.observation.timestamp);
    for (const Record& r : split.straight.records) out_stamps.push_back(r.observation.timestamp);
    for (const Record& r : split.turn.records) out_stamps.push_back(r.observation.timestamp);
    std::sort(in_stamps.begin(), in_stamps.end());
    std::sort(out_stamps.begin(), out_stamps.end());
    CHECK(in_stamps == out_stamps);
}

TEST_CASE("split_dataset rejects an empty dataset") {
    CHECK_THROWS_AS(split_dataset(Dataset{}, SplitConfig{}), ParameterError);
    SplitConfig bad;
    bad.diff_threshold = 0.0;
    Dataset data;
    data.records.push_back({{0.1, 0, 0, std::nullopt}, {0.0, {1, 1}}});
    CHECK_THROWS_AS(split_dataset(data, bad), ParameterError);
}

TEST_CASE("residuals vanish at the true parameters on noiseless data") {
    for (const SimConfig& cfg : {profiles::turtlebot(false), profiles::catvehicle(false)}) {
        const SimResult result = simulate(cfg);
        const Eigen::VectorXd r = residuals(result.dataset, cfg.true_params);
        CHECK(r.lpNorm<Eigen::Infinity>() < 1e-9);
    }
}

TEST_CASE("residual vector has two entries per consecutive pair") {
    const SimResult result = simulate(profiles::turtlebot(false));
    REQUIRE(result.dataset.records.size() == 401);
    const Eigen::VectorXd r = residuals(result.dataset, result.dataset.records.empty()
                                                            ? VehicleParams{}
                                                            : profiles::turtlebot(false).true_params);
    CHECK(r.size() == 800);
}

TEST_CASE("scaling the radius shifts straight-line forward residuals by -eps * rho") {
    SimConfig cfg;
    cfg.true_params = VehicleParams::differential(0.033, 0.16);
    cfg.landmark_world = {5.0, 0.0};
    cfg.profile = {{3.0, 6.0, 6.0, 0, 0}};
    const SimResult result = simulate(cfg);
    const double eps = 1e-4;
    const double rho_true = 6.0 * 0.1 * 0.033;
    const Eigen::VectorXd r =
        residuals(result.dataset, cfg.true_params.with_wheel_radius(0.033 * (1.0 + eps)));
    for (Eigen::Index i = 0; i < r.size(); i += 2) {
        CHECK(r[i] == doctest::Approx(-eps * rho_true).epsilon(1e-9));
        CHECK(std::abs(r[i + 1]) < 1e-12);
    }
}

TEST_CASE("residuals reject mismatched drive types and tiny datasets") {
    const SimResult result = simulate(profiles::turtlebot(false));
    CHECK_THROWS_AS(residuals(result.dataset, VehicleParams::bicycle(0.3, 2.6)),
                    DriveTypeMismatchError);
    Dataset tiny;
    tiny.records.push_back(result.dataset.records[0]);
    CHECK_THROWS_AS(residuals(tiny, profiles::turtlebot(false).true_params), ParameterError);
}

TEST_CASE("residual pairing skips records separated by a dropout gap") {
    const SimResult full = simulate(profiles::turtlebot(false));
    Dataset gappy = full.dataset;
    gappy.records.erase(gappy.records.begin() + 100);  // one dropout
    const Eigen::VectorXd r = residuals(gappy, profiles::turtlebot(false).true_params);
    // Two pairs lost: (99,100) and (100,101).
    CHECK(r.size() == 800 - 4);
    CHECK(r.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("calibrate with the optimum as the initial guess stays put") {
    for (const SimConfig& cfg : {profiles::turtlebot(false), profiles::catvehicle(false)}) {
        const SimResult result = simulate(cfg);
        const SplitConfig split = cfg.drive_type == DriveType::DifferentialDrive
                                      ? profiles::turtlebot_split()
                                      : profiles::catvehicle_split();
        const CalibrationResult cal =
            calibrate(result.dataset, cfg.true_params, split, OptimizerConfig{});
        CHECK(std::abs(cal.params_hat.wheel_radius - cfg.true_params.wheel_radius) /
                  cfg.true_params.wheel_radius <
              1e-9);
        CHECK(std::abs(cal.params_hat.geometry() - cfg.true_params.geometry()) /
                  cfg.true_params.geometry() <
              1e-9);
    }
}

TEST_CASE("calibrate recovers noiseless parameters from a 20% offset") {
    for (const SimConfig& cfg : {profiles::turtlebot(false), profiles::catvehicle(false)}) {
        const SimResult result = simulate(cfg);
        const SplitConfig split = cfg.drive_type == DriveType::DifferentialDrive
                                      ? profiles::turtlebot_split()
                                      : profiles::catvehicle_split();
        const VehicleParams initial = cfg.true_params
                                          .with_wheel_radius(1.2 * cfg.true_params.wheel_radius)
                                          .with_geometry(1.2 * cfg.true_params.geometry());
        const CalibrationResult cal = calibrate(result.dataset, initial, split, OptimizerConfig{});
        CHECK(std::abs(cal.params_hat.wheel_radius - cfg.true_params.wheel_radius) /
                  cfg.true_params.wheel_radius <
              1e-6);
        CHECK(std::abs(cal.params_hat.geometry() - cfg.true_params.geometry()) /
                  cfg.true_params.geometry() <
              1e-6);
    }
}

TEST_CASE("radius stage on noiseless straight data converges in at most 3 iterations") {
    const SimResult result = simulate(profiles::turtlebot(false));
    const VehicleParams initial =
        profiles::turtlebot(false).true_params.with_wheel_radius(0.033 * 1.2);
    const CalibrationResult cal =
        calibrate(result.dataset, initial, profiles::turtlebot_split(), OptimizerConfig{});
    CHECK(cal.radius_trace.iterations <= 3);
    // The straight-subset loss is exactly quadratic in r, so the recovery
    // is at machine precision well past the 1e-8 mark.
    CHECK(std::abs(cal.radius_trace.solution()[0] - 0.033) / 0.033 < 1e-8);
}

TEST_CASE("calibrate fails loudly when a partition is empty") {
    SimConfig turn_only = profiles::turtlebot(false);
    turn_only.profile = {{8.0, 3.0, 9.0, 0, 0}};  // only record 0 counts as straight
    CHECK_THROWS_AS(calibrate(simulate(turn_only).dataset, turn_only.true_params,
                              profiles::turtlebot_split(), OptimizerConfig{}),
                    StageImpossibleError);

    SimConfig straight_only = profiles::turtlebot(false);
    straight_only.profile = {{8.0, 6.0, 6.0, 0, 0}};  // the turn partition is empty
    CHECK_THROWS_AS(calibrate(simulate(straight_only).dataset, straight_only.true_params,
                              profiles::turtlebot_split(), OptimizerConfig{}),
                    StageImpossibleError);
}

TEST_CASE("noiseless loss at the truth is the global minimum over random perturbations") {
    const SimConfig cfg = profiles::turtlebot(false);
    const SimResult result = simulate(cfg);
    const auto loss = [&](const VehicleParams& p) {
        return 0.5 * residuals(result.dataset, p).squaredNorm();
    };
    const double at_truth = loss(cfg.true_params);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int i = 0; i < 1000; ++i) {
        const VehicleParams p =
            cfg.true_params.with_wheel_radius(cfg.true_params.wheel_radius * (1.0 + u(rng)))
                .with_geometry(cfg.true_params.geometry() * (1.0 + u(rng)));
        CHECK(at_truth <= loss(p));
    }
}

TEST_CASE("residuals derivative: forward differences agree with half-step central differences") {
    const SimResult result = simulate(profiles::turtlebot(true, 41));
    const SplitResult split = split_dataset(result.dataset, profiles::turtlebot_split());
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int i = 0; i < 20; ++i) {
        const VehicleParams p = VehicleParams::differential(0.033 * u(rng), 0.16 * u(rng));
        const auto f = [&](double radius) {
            return residuals(split.turn, p.with_wheel_radius(radius));
        };
        const double x = p.wheel_radius;
        const double h = 1e-6 * x;
        const Eigen::VectorXd forward = (f(x + h) - f(x)) / h;
        const Eigen::VectorXd central = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
        CHECK((forward - central).lpNorm<Eigen::Infinity>() <=
              1e-6 * std::max(1.0, central.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("analytic Jacobians match forward differences at random in-box points") {
    const SimResult tb = simulate(profiles::turtlebot(true, 53));
    const SimResult cv = simulate(profiles::catvehicle(true, 59));
    const SplitResult tb_split = split_dataset(tb.dataset, profiles::turtlebot_split());
    const SplitResult cv_split = split_dataset(cv.dataset, profiles::catvehicle_split());
    OptimizerConfig fd_cfg;
    fd_cfg.bounds = {{1e-6, 1e9}};

    struct Case {
        const Dataset* data;
        VehicleParams base;
        CalParam which;
    };
    const Case cases[] = {
        {&tb_split.straight, VehicleParams::differential(0.033, 0.16), CalParam::WheelRadius},
        {&tb_split.turn, VehicleParams::differential(0.033, 0.16), CalParam::Geometry},
        {&cv_split.straight, VehicleParams::bicycle(0.3672, 2.62), CalParam::WheelRadius},
        {&cv_split.turn, VehicleParams::bicycle(0.3672, 2.62), CalParam::Geometry},
    };
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> scale(0.25, 4.0);
    for (const Case& c : cases) {
        for (int i = 0; i < 20; ++i) {
            const double nominal =
                c.which == CalParam::WheelRadius ? c.base.wheel_radius : c.base.geometry();
            const double value = nominal * scale(rng);
            const auto apply = [&](double v) {
                return c.which == CalParam::WheelRadius ? c.base.with_wheel_radius(v)
                                                        : c.base.with_geometry(v);
            };
            const ResidualFn fn = [&](const Eigen::VectorXd& x) {
                return residuals(*c.data, apply(x[0]));
            };
            Eigen::VectorXd x(1);
            x[0] = value;
            const Eigen::MatrixXd fd = forward_difference_jacobian(fn, x, fd_cfg);
            const Eigen::MatrixXd an = residual_jacobian(*c.data, apply(value), c.which);
            CHECK((fd - an).lpNorm<Eigen::Infinity>() <=
                  1e-5 * std::max(1.0, an.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("calibrate is invariant to uniform time shifts") {
    const SimResult result = simulate(profiles::turtlebot(true, 71));
    Dataset shifted = result.dataset;
    for (Record& rec : shifted.records) rec.observation.timestamp += 1000.0;
    const VehicleParams initial = VehicleParams::differential(0.03, 0.15);
    const CalibrationResult a =
        calibrate(result.dataset, initial, profiles::turtlebot_split(), OptimizerConfig{});
    const CalibrationResult b =
        calibrate(shifted, initial, profiles::turtlebot_split(), OptimizerConfig{});
    CHECK(a.params_hat.wheel_radius == b.params_hat.wheel_radius);
    CHECK(a.params_hat.baseline == b.params_hat.baseline);
}

TEST_CASE("multi_restart with zero spread produces identical restarts") {
    const SimResult result = simulate(profiles::turtlebot(true, 73));
    MultiRestartConfig mc;
    mc.restarts = 8;
    mc.fig_std = 0.0;
    mc.threads = 2;
    const RestartStatistics stats =
        multi_restart(result.dataset, VehicleParams::differential(0.03, 0.15),
                      profiles::turtlebot_split(), OptimizerConfig{}, mc);
    REQUIRE(stats.restarts.size() == 8);
    for (const RestartRecord& rec : stats.restarts) {
        CHECK(rec.initial.wheel_radius == 0.03);
        CHECK(rec.result.params_hat.wheel_radius ==
              stats.restarts.front().result.params_hat.wheel_radius);
        CHECK(rec.result.params_hat.baseline ==
              stats.restarts.front().result.params_hat.baseline);
    }
    CHECK(stats.wheel_radius.std_dev == 0.0);
}

TEST_CASE("multi_restart on noiseless data collapses to the unique optimum") {
    const SimResult result = simulate(profiles::turtlebot(false));
    MultiRestartConfig mc;
    mc.restarts = 100;
    mc.fig_std = 0.1;
    mc.seed = 2024;
    mc.threads = 2;
    mc.ground_truth = profiles::turtlebot(false).true_params;
    const RestartStatistics stats =
        multi_restart(result.dataset, profiles::turtlebot(false).true_params,
                      profiles::turtlebot_split(), OptimizerConfig{}, mc);
    CHECK((stats.wheel_radius.max - stats.wheel_radius.min) < 1e-6 * stats.wheel_radius.mean);
    CHECK((stats.geometry.max - stats.geometry.min) < 1e-6 * stats.geometry.mean);
    REQUIRE(stats.wheel_radius.rel_error_vs_gt.has_value());
    CHECK(*stats.wheel_radius.rel_error_vs_gt < 1e-6);
    CHECK(*stats.geometry.rel_error_vs_gt < 1e-6);
    // Quartiles are ordered.
    CHECK(stats.geometry.min <= stats.geometry.q1);
    CHECK(stats.geometry.q1 <= stats.geometry.median);
    CHECK(stats.geometry.median <= stats.geometry.q3);
    CHECK(stats.geometry.q3 <= stats.geometry.max);
}

TEST_CASE("multi_restart on noisy data mirrors the reported error magnitudes") {
    const SimResult result = simulate(profiles::turtlebot(true));
    MultiRestartConfig mc;
    mc.restarts = 40;
    mc.fig_std = 0.1;
    mc.seed = 424242;
    mc.center = FigCenter::GroundTruth;
    mc.ground_truth = profiles::turtlebot(true).true_params;
    mc.threads = 2;
    const RestartStatistics stats =
        multi_restart(result.dataset, profiles::turtlebot(true).true_params,
                      profiles::turtlebot_split(), OptimizerConfig{}, mc);
    CHECK(*stats.wheel_radius.rel_error_vs_gt < 0.05);
    CHECK(*stats.geometry.rel_error_vs_gt < 0.01);
}

TEST_CASE("multi_restart validates its configuration") {
    const SimResult result = simulate(profiles::turtlebot(false));
    MultiRestartConfig mc;
    mc.restarts = 0;
    CHECK_THROWS_AS(multi_restart(result.dataset, profiles::turtlebot(false).true_params,
                                  profiles::turtlebot_split(), OptimizerConfig{}, mc),
                    ParameterError);
    mc.restarts = 2;
    mc.center = FigCenter::GroundTruth;  // without supplying a ground truth
    CHECK_THROWS_AS(multi_restart(result.dataset, profiles::turtlebot(false).true_params,
                                  profiles::turtlebot_split(), OptimizerConfig{}, mc),
                    ParameterError);
}
