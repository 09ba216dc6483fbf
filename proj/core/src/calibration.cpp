#include "odocal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "odocal/errors.hpp"
#include "odocal/parallel.hpp"

namespace odocal {

namespace {

bool time_adjacent(const Record& prev, const Record& cur) {
    const double gap = cur.observation.timestamp - prev.observation.timestamp;
    return std::abs(gap - cur.interval.dt) <=
           1e-9 * std::max(1.0, std::abs(cur.observation.timestamp));
}

bool is_straight(const Record& rec, DriveType drive, const SplitConfig& cfg) {
    if (drive == DriveType::DifferentialDrive) {
        return std::abs(rec.interval.dphi_right - rec.interval.dphi_left) / rec.interval.dt <
               cfg.diff_threshold;
    }
    if (!rec.interval.steering.has_value()) {
        throw DriveTypeMismatchError("bicycle dataset record is missing the steering angle");
    }
    return std::abs(*rec.interval.steering) < cfg.steer_threshold;
}

// sin(t)/t and (1-cos(t))/t with their derivatives, series-guarded near 0.
struct ChordFactors {
    double g1, g2, dg1, dg2;
};

ChordFactors chord_factors(double t) {
    ChordFactors f{};
    if (std::abs(t) < 1e-4) {
        const double t2 = t * t;
        f.g1 = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        f.g2 = t / 2.0 - t * t2 / 24.0;
        f.dg1 = -t / 3.0 + t * t2 / 30.0;
        f.dg2 = 0.5 - t2 / 8.0 + t2 * t2 / 144.0;
    } else {
        const double s = std::sin(t);
        const double half = std::sin(t / 2.0);
        const double one_minus_cos = 2.0 * half * half;
        f.g1 = s / t;
        f.g2 = one_minus_cos / t;
        f.dg1 = (t * std::cos(t) - s) / (t * t);
        f.dg2 = (t * s - one_minus_cos) / (t * t);
    }
    return f;
}

// d(rho)/dp and d(dtheta)/dp for the stage parameter.
struct MotionPartials {
    double rho, dtheta;
    double drho, ddtheta;
};

MotionPartials motion_partials(const EncoderInterval& interval, const VehicleParams& params,
                               CalParam which) {
    MotionPartials m{};
    const double c = 0.5 * (interval.dphi_left + interval.dphi_right);
    m.rho = c * params.wheel_radius;
    if (params.drive_type == DriveType::DifferentialDrive) {
        const double d = (interval.dphi_right - interval.dphi_left) / params.baseline;
        m.dtheta = d * params.wheel_radius;
        if (which == CalParam::WheelRadius) {
            m.drho = c;
            m.ddtheta = d;
        } else {
            m.drho = 0.0;
            m.ddtheta = -m.dtheta / params.baseline;
        }
    } else {
        const double tan_delta = std::tan(interval.steering.value());
        m.dtheta = m.rho * tan_delta / params.wheelbase;
        if (which == CalParam::WheelRadius) {
            m.drho = c;
            m.ddtheta = c * tan_delta / params.wheelbase;
        } else {
            m.drho = 0.0;
            m.ddtheta = -m.dtheta / params.wheelbase;
        }
    }
    return m;
}

std::vector<std::size_t> paired_indices(const Dataset& data) {
    std::vector<std::size_t> pairs;
    pairs.reserve(data.records.size());
    for (std::size_t i = 1; i < data.records.size(); ++i) {
        if (time_adjacent(data.records[i - 1], data.records[i])) pairs.push_back(i);
    }
    return pairs;
}

ParamStatistics summarize(std::vector<double> values, std::optional<double> ground_truth) {
    ParamStatistics stats;
    const auto n = static_cast<double>(values.size());
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.std_dev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(values.begin(), values.end());
    const auto quantile = [&values](double q) {
        const double pos = q * (static_cast<double>(values.size()) - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - std::floor(pos);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    stats.min = values.front();
    stats.q1 = quantile(0.25);
    stats.median = quantile(0.5);
    stats.q3 = quantile(0.75);
    stats.max = values.back();
    if (ground_truth) {
        stats.rel_error_vs_gt = std::abs(stats.mean - *ground_truth) / std::abs(*ground_truth);
    }
    return stats;
}

}  // namespace

void SplitConfig::validate() const {
    if (!(diff_threshold > 0.0) || !(steer_threshold > 0.0)) {
        throw ParameterError("split thresholds must be strictly positive");
    }
}

SplitResult split_dataset(const Dataset& data, const SplitConfig& config) {
    config.validate();
    if (data.records.empty()) throw ParameterError("cannot split an empty dataset");
    SplitResult out;
    out.straight.drive_type = out.turn.drive_type = data.drive_type;
    out.straight.provenance = out.turn.provenance = data.provenance;
    for (const Record& rec : data.records) {
        (is_straight(rec, data.drive_type, config) ? out.straight : out.turn)
            .records.push_back(rec);
    }
    return out;
}

Eigen::VectorXd residuals(const Dataset& data, const VehicleParams& params) {
    if (data.drive_type != params.drive_type) {
        throw DriveTypeMismatchError("dataset and parameters disagree on the drive type");
    }
    if (data.records.size() < 2) {
        throw ParameterError("residuals need at least two records");
    }
    const std::vector<std::size_t> pairs = paired_indices(data);
    Eigen::VectorXd out(2 * static_cast<Eigen::Index>(pairs.size()));
    Eigen::Index k = 0;
    for (const std::size_t i : pairs) {
        const BodyMotion motion = body_motion(data.records[i].interval, params);
        const Vec2 predicted = predict_landmark(data.records[i - 1].observation.position, motion);
        const Vec2 e = predicted - data.records[i].observation.position;
        out[k++] = e.x;
        out[k++] = e.y;
    }
    return out;
}

Eigen::MatrixXd residual_jacobian(const Dataset& data, const VehicleParams& params,
                                  CalParam which) {
    if (data.drive_type != params.drive_type) {
        throw DriveTypeMismatchError("dataset and parameters disagree on the drive type");
    }
    params.validate();
    const std::vector<std::size_t> pairs = paired_indices(data);
    Eigen::MatrixXd jac(2 * static_cast<Eigen::Index>(pairs.size()), 1);
    Eigen::Index k = 0;
    for (const std::size_t i : pairs) {
        const MotionPartials m = motion_partials(data.records[i].interval, params, which);
        const ChordFactors f = chord_factors(m.dtheta);
        const Vec2 prev = data.records[i - 1].observation.position;

        const Vec2 rho_vec{m.rho * f.g1, m.rho * f.g2};
        const Vec2 drho_vec{m.drho * f.g1 + m.rho * f.dg1 * m.ddtheta,
                            m.drho * f.g2 + m.rho * f.dg2 * m.ddtheta};
        const Vec2 arm = prev - rho_vec;

        const double ct = std::cos(m.dtheta);
        const double st = std::sin(m.dtheta);
        // d/dp of R(-t) * arm,  R(-t) = [[c, s], [-s, c]]
        const Vec2 rot_deriv{(-st * arm.x + ct * arm.y) * m.ddtheta,
                             (-ct * arm.x - st * arm.y) * m.ddtheta};
        jac(k++, 0) = rot_deriv.x - (ct * drho_vec.x + st * drho_vec.y);
        jac(k++, 0) = rot_deriv.y - (-st * drho_vec.x + ct * drho_vec.y);
    }
    return jac;
}

namespace {

std::pair<double, double> stage_bounds(const OptimizerConfig& cfg, std::size_t index,
                                       double nominal) {
    if (cfg.bounds.size() == 2) return cfg.bounds[index];
    if (!cfg.bounds.empty()) {
        throw ParameterError("calibration expects zero or two per-parameter bounds");
    }
    return {0.25 * nominal, 4.0 * nominal};
}

OptimizationTrace run_stage(const Dataset& subset, const VehicleParams& base, CalParam which,
                            double x0, std::pair<double, double> bounds,
                            const OptimizerConfig& opt_config) {
    const auto apply = [&base, which](double v) {
        return which == CalParam::WheelRadius ? base.with_wheel_radius(v) : base.with_geometry(v);
    };
    OptimizerConfig cfg = opt_config;
    cfg.bounds = {bounds};
    const ResidualFn fn = [&subset, apply](const Eigen::VectorXd& x) {
        return residuals(subset, apply(x[0]));
    };
    const JacobianFn jac = [&subset, apply, which](const Eigen::VectorXd& x) {
        return residual_jacobian(subset, apply(x[0]), which);
    };
    Eigen::VectorXd x0_vec(1);
    x0_vec[0] = x0;
    return minimize(fn, x0_vec, cfg, jac);
}

}  // namespace

CalibrationResult calibrate(const Dataset& data, const VehicleParams& initial,
                            const SplitConfig& split_config, const OptimizerConfig& opt_config) {
    initial.validate();
    if (data.drive_type != initial.drive_type) {
        throw DriveTypeMismatchError("dataset and initial parameters disagree on the drive type");
    }
    const SplitResult split = split_dataset(data, split_config);
    if (split.straight.records.size() < 2) {
        throw StageImpossibleError(
            "radius stage impossible: straight partition has fewer than two records");
    }
    if (split.turn.records.size() < 2) {
        throw StageImpossibleError(
            "geometry stage impossible: turn partition has fewer than two records");
    }

    CalibrationResult result;
    result.straight_count = split.straight.records.size();
    result.turn_count = split.turn.records.size();

    result.radius_trace =
        run_stage(split.straight, initial, CalParam::WheelRadius, initial.wheel_radius,
                  stage_bounds(opt_config, 0, initial.wheel_radius), opt_config);
    const double radius_hat = result.radius_trace.solution()[0];

    const VehicleParams frozen = initial.with_wheel_radius(radius_hat);
    result.geometry_trace = run_stage(split.turn, frozen, CalParam::Geometry, initial.geometry(),
                                      stage_bounds(opt_config, 1, initial.geometry()), opt_config);

    result.params_hat = frozen.with_geometry(result.geometry_trace.solution()[0]);
    return result;
}

RestartStatistics multi_restart(const Dataset& data, const VehicleParams& nominal,
                                const SplitConfig& split_config, const OptimizerConfig& opt_config,
                                const MultiRestartConfig& restart_config) {
    nominal.validate();
    if (restart_config.restarts < 1) throw ParameterError("restarts must be >= 1");
    if (restart_config.fig_std < 0.0) throw ParameterError("fig_std must be non-negative");
    const VehicleParams center = [&] {
        if (restart_config.center == FigCenter::Nominal) return nominal;
        if (!restart_config.ground_truth) {
            throw ParameterError("ground-truth-centered restarts need a ground truth");
        }
        return *restart_config.ground_truth;
    }();

    OptimizerConfig bounded = opt_config;
    if (bounded.bounds.empty()) {
        bounded.bounds = {{0.25 * nominal.wheel_radius, 4.0 * nominal.wheel_radius},
                          {0.25 * nominal.geometry(), 4.0 * nominal.geometry()}};
    }

    // Draw all initial guesses up front so threading cannot reorder them.
    std::mt19937_64 rng(restart_config.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const auto draw = [&](double center_value, const std::pair<double, double>& bounds) {
        double v = center_value;
        if (restart_config.fig_std > 0.0) {
            v += restart_config.fig_std * center_value * unit(rng);
        }
        return std::clamp(v, bounds.first, bounds.second);
    };
    std::vector<VehicleParams> initials;
    initials.reserve(restart_config.restarts);
    for (std::size_t k = 0; k < restart_config.restarts; ++k) {
        const double r0 = draw(center.wheel_radius, bounded.bounds[0]);
        const double g0 = draw(center.geometry(), bounded.bounds[1]);
        initials.push_back(nominal.with_wheel_radius(r0).with_geometry(g0));
    }

    RestartStatistics stats;
    stats.restarts.resize(restart_config.restarts);
    parallel_for(restart_config.restarts, resolve_threads(restart_config.threads),
                 [&](std::size_t k) {
                     stats.restarts[k] = {initials[k],
                                          calibrate(data, initials[k], split_config, bounded)};
                 });

    std::vector<double> radii, geoms;
    radii.reserve(restart_config.restarts);
    geoms.reserve(restart_config.restarts);
    for (const RestartRecord& rec : stats.restarts) {
        radii.push_back(rec.result.params_hat.wheel_radius);
        geoms.push_back(rec.result.params_hat.geometry());
        stats.mean_radius_stage_time_s += rec.result.radius_trace.wall_time_s;
        stats.mean_geometry_stage_time_s += rec.result.geometry_trace.wall_time_s;
    }
    const auto n = static_cast<double>(restart_config.restarts);
    stats.mean_radius_stage_time_s /= n;
    stats.mean_geometry_stage_time_s /= n;
    stats.straight_count = stats.restarts.front().result.straight_count;
    stats.turn_count = stats.restarts.front().result.turn_count;

    std::optional<double> gt_radius, gt_geometry;
    if (restart_config.ground_truth) {
        gt_radius = restart_config.ground_truth->wheel_radius;
        gt_geometry = restart_config.ground_truth->geometry();
    }
    stats.wheel_radius = summarize(std::move(radii), gt_radius);
    stats.geometry = summarize(std::move(geoms), gt_geometry);
    return stats;
}

}  // namespace odocal
