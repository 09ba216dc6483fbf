#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "odocal/optimizer.hpp"
#include "odocal/simulator.hpp"

namespace odocal {

/// Straight/turn partition thresholds. Differential drive compares the
/// wheel-speed difference |dphi_r - dphi_l|/dt against diff_threshold;
/// the bicycle model compares |steering| against steer_threshold.
struct SplitConfig {
    double diff_threshold = 0.01;   // rad/s
    double steer_threshold = 0.01;  // rad

    void validate() const;
};

struct SplitResult {
    Dataset straight;
    Dataset turn;
};

/// Exhaustive, disjoint partition of the records. Either side may come
/// back empty; downstream stages fail loudly on an empty partition.
SplitResult split_dataset(const Dataset& data, const SplitConfig& config);

/// Which scalar of VehicleParams a calibration stage adjusts.
enum class CalParam { WheelRadius, Geometry };

/// Stacked landmark-displacement residuals, two entries per time-adjacent
/// record pair:
///   r_i = predict_landmark(L_{i-1}, motion(interval_i, params)) - L_i
/// Pairs separated by a time gap (dropout, split boundary) are skipped.
Eigen::VectorXd residuals(const Dataset& data, const VehicleParams& params);

/// Analytic derivative of residuals() with respect to one parameter;
/// a (2 * pairs) x 1 matrix.
Eigen::MatrixXd residual_jacobian(const Dataset& data, const VehicleParams& params,
                                  CalParam which);

struct CalibrationResult {
    VehicleParams params_hat;
    OptimizationTrace radius_trace;
    OptimizationTrace geometry_trace;
    std::size_t straight_count = 0;
    std::size_t turn_count = 0;
};

/// Two-stage estimation: wheel radius on the straight subset with the
/// geometry frozen, then baseline/wheelbase on the turn subset with the
/// stage-1 radius frozen. Bounds default to [0.25, 4] x initial when the
/// optimizer config does not carry explicit per-parameter bounds.
CalibrationResult calibrate(const Dataset& data, const VehicleParams& initial,
                            const SplitConfig& split_config, const OptimizerConfig& opt_config);

enum class FigCenter { Nominal, GroundTruth };

struct MultiRestartConfig {
    std::size_t restarts = 100;
    double fig_std = 0.1;  // relative to the center value
    std::uint64_t seed = 0;
    FigCenter center = FigCenter::Nominal;
    std::optional<VehicleParams> ground_truth;  // enables relative-error reporting
    std::size_t threads = 0;                    // 0 = hardware concurrency
};

struct ParamStatistics {
    double mean = 0.0;
    double std_dev = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::optional<double> rel_error_vs_gt;  // |mean - gt| / gt
};

struct RestartRecord {
    VehicleParams initial;
    CalibrationResult result;
};

struct RestartStatistics {
    std::vector<RestartRecord> restarts;
    ParamStatistics wheel_radius;
    ParamStatistics geometry;
    double mean_radius_stage_time_s = 0.0;
    double mean_geometry_stage_time_s = 0.0;
    std::size_t straight_count = 0;
    std::size_t turn_count = 0;
};

/// Draw `restarts` initial guesses per parameter from a normal distribution
/// centered at the nominal (or the ground truth in paper-reproduction mode),
/// truncated to the bounds, run calibrate for each, and aggregate.
RestartStatistics multi_restart(const Dataset& data, const VehicleParams& nominal,
                                const SplitConfig& split_config, const OptimizerConfig& opt_config,
                                const MultiRestartConfig& restart_config);

}  // namespace odocal
