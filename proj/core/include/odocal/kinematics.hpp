#pragma once

#include <optional>

#include "odocal/geometry.hpp"

namespace odocal {

enum class DriveType { DifferentialDrive, Bicycle };

/// Per-timestep actuator deltas: wheel angle increments over the interval
/// and, for bicycle-model data, the combined steering angle.
struct EncoderInterval {
    double dt = 0.0;          // seconds, > 0
    double dphi_left = 0.0;   // rad
    double dphi_right = 0.0;  // rad
    std::optional<double> steering;  // rad, bicycle model only
};

/// The parameter set under calibration: wheel radius plus the drive-type
/// specific geometry length (baseline for differential drive, wheelbase
/// for the bicycle model).
struct VehicleParams {
    DriveType drive_type = DriveType::DifferentialDrive;
    double wheel_radius = 0.0;
    double baseline = 0.0;   // differential drive only
    double wheelbase = 0.0;  // bicycle only

    static VehicleParams differential(double wheel_radius, double baseline) {
        return {DriveType::DifferentialDrive, wheel_radius, baseline, 0.0};
    }
    static VehicleParams bicycle(double wheel_radius, double wheelbase) {
        return {DriveType::Bicycle, wheel_radius, 0.0, wheelbase};
    }

    /// The geometry length relevant to the drive type.
    double geometry() const {
        return drive_type == DriveType::DifferentialDrive ? baseline : wheelbase;
    }
    VehicleParams with_wheel_radius(double r) const {
        VehicleParams p = *this;
        p.wheel_radius = r;
        return p;
    }
    VehicleParams with_geometry(double g) const {
        VehicleParams p = *this;
        (drive_type == DriveType::DifferentialDrive ? p.baseline : p.wheelbase) = g;
        return p;
    }

    /// Throws ParameterError unless exactly the fields relevant to the
    /// drive type are set and all lengths are strictly positive.
    void validate() const;
};

/// Model-predicted translation and heading change of the body over one
/// encoder interval, expressed in the body frame at the interval start.
struct BodyMotion {
    double rho_x = 0.0;
    double rho_y = 0.0;
    double dtheta = 0.0;

    Vec2 translation() const { return {rho_x, rho_y}; }
};

/// Body-frame chord of a constant-curvature arc of length `arc_length`
/// and total heading change `dtheta`. Switches to a Taylor expansion for
/// |dtheta| < 1e-8 so the straight-line limit is reached continuously.
Vec2 arc_chord(double arc_length, double dtheta);

/// Forward differential-drive motion: arc length (dphi_l + dphi_r)/2 * r,
/// heading change (dphi_r - dphi_l)/B * r, chord per arc_chord().
BodyMotion diff_drive_motion(const EncoderInterval& interval, const VehicleParams& params);

/// Forward bicycle-model motion: arc length mean(dphi) * r, heading change
/// rho * tan(steering) / L, chord per arc_chord().
BodyMotion bicycle_motion(const EncoderInterval& interval, const VehicleParams& params);

/// Dispatch on params.drive_type.
BodyMotion body_motion(const EncoderInterval& interval, const VehicleParams& params);

/// Reduce inner/outer Ackermann steering angles to the single equivalent
/// bicycle steering angle via the cotangent mean:
///   cot(delta) = (cot(delta_inner) + cot(delta_outer)) / 2
double combine_ackermann_steering(double delta_inner, double delta_outer);

/// Compose a pose with a body motion: translate by the world-frame rotation
/// of the chord, then add the heading change (wrapped).
Pose2D integrate_pose(const Pose2D& pose, const BodyMotion& motion);

/// Expected body-frame landmark position after the body moves by `motion`:
///   L_t = R(-dtheta) * (L_{t-1} - rho)
Vec2 predict_landmark(const Vec2& prev_position, const BodyMotion& motion);

/// Typed overload; the timestamp is advanced by nothing (the motion carries
/// no clock), callers stamp results themselves.
LandmarkObservation predict_landmark(const LandmarkObservation& prev, const BodyMotion& motion);

}  // namespace odocal
