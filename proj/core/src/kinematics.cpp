#include "odocal/kinematics.hpp"

#include <cmath>

#include "odocal/errors.hpp"

namespace odocal {

namespace {

constexpr double kChordSeriesThreshold = 1e-8;

bool is_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void VehicleParams::validate() const {
    if (!is_positive(wheel_radius)) {
        throw ParameterError("wheel_radius must be strictly positive");
    }
    if (drive_type == DriveType::DifferentialDrive) {
        if (!is_positive(baseline)) {
            throw ParameterError("baseline must be strictly positive");
        }
        if (wheelbase != 0.0) {
            throw ParameterError("wheelbase must be unset for differential drive");
        }
    } else {
        if (!is_positive(wheelbase)) {
            throw ParameterError("wheelbase must be strictly positive");
        }
        if (baseline != 0.0) {
            throw ParameterError("baseline must be unset for bicycle model");
        }
    }
}

Vec2 arc_chord(double arc_length, double dtheta) {
    if (std::abs(dtheta) < kChordSeriesThreshold) {
        const double t2 = dtheta * dtheta;
        return {arc_length * (1.0 - t2 / 6.0),
                arc_length * (dtheta / 2.0 - dtheta * t2 / 24.0)};
    }
    // 1 - cos(t) computed as 2 sin^2(t/2) to stay accurate near zero.
    const double half = std::sin(dtheta / 2.0);
    return {arc_length * std::sin(dtheta) / dtheta,
            arc_length * 2.0 * half * half / dtheta};
}

BodyMotion diff_drive_motion(const EncoderInterval& interval, const VehicleParams& params) {
    if (params.drive_type != DriveType::DifferentialDrive) {
        throw DriveTypeMismatchError("diff_drive_motion requires differential-drive parameters");
    }
    params.validate();
    if (interval.steering.has_value()) {
        throw DriveTypeMismatchError("differential-drive interval carries a steering angle");
    }
    const double rho = 0.5 * (interval.dphi_left + interval.dphi_right) * params.wheel_radius;
    const double dtheta =
        (interval.dphi_right - interval.dphi_left) / params.baseline * params.wheel_radius;
    const Vec2 chord = arc_chord(rho, dtheta);
    return {chord.x, chord.y, dtheta};
}

BodyMotion bicycle_motion(const EncoderInterval& interval, const VehicleParams& params) {
    if (params.drive_type != DriveType::Bicycle) {
        throw DriveTypeMismatchError("bicycle_motion requires bicycle-model parameters");
    }
    params.validate();
    if (!interval.steering.has_value()) {
        throw DriveTypeMismatchError("bicycle interval is missing the steering angle");
    }
    const double steering = *interval.steering;
    if (!(std::abs(steering) < M_PI / 2.0)) {
        throw SteeringDomainError("steering angle must satisfy |delta| < pi/2");
    }
    const double rho = 0.5 * (interval.dphi_left + interval.dphi_right) * params.wheel_radius;
    const double dtheta = rho * std::tan(steering) / params.wheelbase;
    const Vec2 chord = arc_chord(rho, dtheta);
    return {chord.x, chord.y, dtheta};
}

BodyMotion body_motion(const EncoderInterval& interval, const VehicleParams& params) {
    return params.drive_type == DriveType::DifferentialDrive ? diff_drive_motion(interval, params)
                                                             : bicycle_motion(interval, params);
}

double combine_ackermann_steering(double delta_inner, double delta_outer) {
    if (!std::isfinite(delta_inner) || !std::isfinite(delta_outer)) {
        throw ParameterError("steering angles must be finite");
    }
    if (std::abs(delta_inner) >= M_PI / 2.0 || std::abs(delta_outer) >= M_PI / 2.0) {
        throw SteeringDomainError("Ackermann angles must satisfy |delta| < pi/2");
    }
    if (delta_inner == 0.0 && delta_outer == 0.0) {
        return 0.0;
    }
    // One wheel straight while the other turns, or wheels turning in
    // opposite directions, cannot share a turning circle.
    if (delta_inner * delta_outer <= 0.0) {
        throw InconsistentSteeringError("inner and outer steering angles must share a sign");
    }
    const double cot_mean = 0.5 * (1.0 / std::tan(delta_inner) + 1.0 / std::tan(delta_outer));
    return std::atan(1.0 / cot_mean);
}

Pose2D integrate_pose(const Pose2D& pose, const BodyMotion& motion) {
    const Vec2 step = rotate(motion.translation(), pose.theta);
    return {pose.x + step.x, pose.y + step.y, wrap_angle(pose.theta + motion.dtheta)};
}

Vec2 predict_landmark(const Vec2& prev_position, const BodyMotion& motion) {
    return rotate(prev_position - motion.translation(), -motion.dtheta);
}

LandmarkObservation predict_landmark(const LandmarkObservation& prev, const BodyMotion& motion) {
    return {prev.timestamp, predict_landmark(prev.position, motion)};
}

}  // namespace odocal
