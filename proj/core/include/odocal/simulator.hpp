#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odocal/kinematics.hpp"
#include "odocal/pointcloud.hpp"

namespace odocal {

/// Noise applied to the measured channels; the underlying true motion is
/// always noise-free.
struct NoiseSpec {
    double encoder_std = 0.0;   // rad per wheel increment
    double landmark_std = 0.0;  // m per observation component
    double point_std = 0.0;     // m of LiDAR range noise
    double dropout_prob = 0.0;  // probability a record is omitted

    void validate() const;
};

/// One piecewise-constant control segment. Differential drive reads the
/// two wheel speeds; the bicycle model reads wheel_speed (applied to both
/// rear wheels) and steering.
struct ControlSegment {
    double duration = 0.0;     // seconds
    double left = 0.0;         // rad/s, left wheel
    double right = 0.0;        // rad/s, right wheel
    double wheel_speed = 0.0;  // rad/s, rear wheels (bicycle)
    double steering = 0.0;     // rad (bicycle)
};

struct SimConfig {
    DriveType drive_type = DriveType::DifferentialDrive;
    VehicleParams true_params;
    std::vector<ControlSegment> profile;
    Vec2 landmark_world;
    double rate_hz = 10.0;
    NoiseSpec noise;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One synchronized timestep: the encoder interval ending at the
/// observation's timestamp. The first record of a run carries a zero
/// interval (there is no motion before the first sample).
struct Record {
    EncoderInterval interval;
    LandmarkObservation observation;
};

struct Dataset {
    DriveType drive_type = DriveType::DifferentialDrive;
    std::vector<Record> records;
    std::string provenance;
};

struct SimResult {
    Dataset dataset;
    std::vector<Pose2D> ground_truth;  // noise-free pose at every timestamp
};

/// Integrate the true kinematics at `rate_hz` under the control profile,
/// emitting measured encoder increments (Gaussian noise of encoder_std),
/// body-frame landmark observations (landmark_std), and record dropout.
/// Deterministic per seed. Throws ScenarioError when the landmark comes
/// within 0.1 m of the vehicle path.
SimResult simulate(const SimConfig& config);

struct CylinderSpec {
    double radius = 0.05;  // m
    double height = 0.4;   // m, standing on the ground plane
};

struct LidarSpec {
    std::size_t layers = 16;
    double fov_vertical = 0.5236;  // rad, symmetric about the horizon
    double angular_res = 0.005;    // rad between azimuth steps
    double range_std = 0.0;        // m of Gaussian range noise
    double max_range = 30.0;       // m
    double mount_height = 0.2;     // m above the ground plane
};

/// Cast a multi-layer spinning LiDAR from the vehicle pose against the
/// ground plane (within ground_extent of the sensor) and the cylinder
/// standing at landmark_world. Points come back in the body frame.
PointCloud render_cylinder_cloud(const Pose2D& pose, const Vec2& landmark_world,
                                 const CylinderSpec& cyl, const LidarSpec& lidar,
                                 double ground_extent, std::uint64_t seed);

}  // namespace odocal
