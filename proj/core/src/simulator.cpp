#include "odocal/simulator.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "odocal/errors.hpp"

namespace odocal {

namespace {

constexpr double kMinLandmarkRange = 0.1;

double draw_normal(std::mt19937_64& rng, double std_dev) {
    if (std_dev <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, std_dev)(rng);
}

/// Body-frame view of a world point from a pose.
Vec2 world_to_body(const Pose2D& pose, const Vec2& world) {
    return rotate(world - Vec2{pose.x, pose.y}, -pose.theta);
}

EncoderInterval true_interval(const ControlSegment& seg, DriveType drive, double dt) {
    EncoderInterval interval;
    interval.dt = dt;
    if (drive == DriveType::DifferentialDrive) {
        interval.dphi_left = seg.left * dt;
        interval.dphi_right = seg.right * dt;
    } else {
        interval.dphi_left = seg.wheel_speed * dt;
        interval.dphi_right = seg.wheel_speed * dt;
        interval.steering = seg.steering;
    }
    return interval;
}

}  // namespace

void NoiseSpec::validate() const {
    if (encoder_std < 0.0 || landmark_std < 0.0 || point_std < 0.0) {
        throw ParameterError("noise standard deviations must be non-negative");
    }
    if (dropout_prob < 0.0 || dropout_prob > 1.0) {
        throw ParameterError("dropout_prob must lie in [0, 1]");
    }
}

void SimConfig::validate() const {
    true_params.validate();
    if (true_params.drive_type != drive_type) {
        throw DriveTypeMismatchError("SimConfig drive_type disagrees with true_params");
    }
    noise.validate();
    if (!(rate_hz > 0.0)) throw ParameterError("rate_hz must be strictly positive");
    if (!std::isfinite(landmark_world.x) || !std::isfinite(landmark_world.y)) {
        throw ParameterError("landmark_world must be finite");
    }
    if (profile.empty()) throw ParameterError("control profile is empty");
    const double dt = 1.0 / rate_hz;
    for (const ControlSegment& seg : profile) {
        if (!(seg.duration > 0.0)) throw ParameterError("segment durations must be positive");
        const double steps = seg.duration / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
            throw ParameterError("segment durations must be whole multiples of 1/rate_hz");
        }
        if (drive_type == DriveType::Bicycle && !(std::abs(seg.steering) < M_PI / 2.0)) {
            throw SteeringDomainError("profile steering must satisfy |delta| < pi/2");
        }
    }
}

SimResult simulate(const SimConfig& config) {
    config.validate();
    const double dt = 1.0 / config.rate_hz;
    std::mt19937_64 rng(config.seed);

    SimResult result;
    result.dataset.drive_type = config.drive_type;
    {
        std::ostringstream meta;
        meta << "simulated drive_type="
             << (config.drive_type == DriveType::DifferentialDrive ? "differential" : "bicycle")
             << " rate_hz=" << config.rate_hz << " seed=" << config.seed;
        result.dataset.provenance = meta.str();
    }

    Pose2D pose;  // vehicle starts at the world origin, heading +x
    result.ground_truth.push_back(pose);

    const auto emit_record = [&](double t, const EncoderInterval& measured) {
        const Vec2 body = world_to_body(pose, config.landmark_world);
        LandmarkObservation obs;
        obs.timestamp = t;
        obs.position = {body.x + draw_normal(rng, config.noise.landmark_std),
                        body.y + draw_normal(rng, config.noise.landmark_std)};
        bool dropped = false;
        if (config.noise.dropout_prob > 0.0) {
            dropped = std::uniform_real_distribution<double>(0.0, 1.0)(rng) <
                      config.noise.dropout_prob;
        }
        if (!dropped) {
            result.dataset.records.push_back({measured, obs});
        }
    };

    if ((config.landmark_world - Vec2{pose.x, pose.y}).norm() < kMinLandmarkRange) {
        throw ScenarioError("vehicle starts within 0.1 m of the landmark");
    }

    // Record 0: the initial observation with a zero interval.
    EncoderInterval first;
    first.dt = dt;
    if (config.drive_type == DriveType::Bicycle) first.steering = 0.0;
    emit_record(0.0, first);

    std::size_t step_index = 0;
    for (const ControlSegment& seg : config.profile) {
        const auto steps = static_cast<std::size_t>(std::llround(seg.duration / dt));
        const EncoderInterval truth = true_interval(seg, config.drive_type, dt);
        for (std::size_t k = 0; k < steps; ++k) {
            const BodyMotion motion = body_motion(truth, config.true_params);
            pose = integrate_pose(pose, motion);
            result.ground_truth.push_back(pose);
            const double t = static_cast<double>(++step_index) * dt;

            const double range = (config.landmark_world - Vec2{pose.x, pose.y}).norm();
            if (range < kMinLandmarkRange) {
                throw ScenarioError("vehicle path passes within 0.1 m of the landmark");
            }

            EncoderInterval measured = truth;
            measured.dphi_left += draw_normal(rng, config.noise.encoder_std);
            measured.dphi_right += draw_normal(rng, config.noise.encoder_std);
            emit_record(t, measured);
        }
    }
    return result;
}

PointCloud render_cylinder_cloud(const Pose2D& pose, const Vec2& landmark_world,
                                 const CylinderSpec& cyl, const LidarSpec& lidar,
                                 double ground_extent, std::uint64_t seed) {
    if (!(cyl.radius > 0.0)) throw ParameterError("cylinder radius must be positive");
    const Vec2 to_landmark = landmark_world - Vec2{pose.x, pose.y};
    if (to_landmark.norm() <= cyl.radius) {
        throw ScenarioError("vehicle is inside the landmark cylinder");
    }
    if (lidar.layers < 1 || !(lidar.angular_res > 0.0)) {
        throw ParameterError("lidar needs at least one layer and a positive angular resolution");
    }

    std::mt19937_64 rng(seed);
    PointCloud cloud;

    // Cylinder axis in sensor-relative world coordinates.
    const double cx = to_landmark.x;
    const double cy = to_landmark.y;
    const double oz = lidar.mount_height;

    const auto azimuth_steps = static_cast<std::size_t>(std::floor(2.0 * M_PI / lidar.angular_res));
    for (std::size_t layer = 0; layer < lidar.layers; ++layer) {
        const double elevation =
            lidar.layers == 1
                ? 0.0
                : -lidar.fov_vertical / 2.0 +
                      lidar.fov_vertical * static_cast<double>(layer) /
                          static_cast<double>(lidar.layers - 1);
        const double ce = std::cos(elevation);
        const double se = std::sin(elevation);
        for (std::size_t step = 0; step < azimuth_steps; ++step) {
            const double azimuth_body = static_cast<double>(step) * lidar.angular_res;
            const double azimuth_world = azimuth_body + pose.theta;
            const double dx = ce * std::cos(azimuth_world);
            const double dy = ce * std::sin(azimuth_world);
            const double dz = se;

            double range = std::numeric_limits<double>::infinity();

            // Ground plane z = 0, limited to ground_extent around the sensor.
            if (dz < 0.0) {
                const double tg = -oz / dz;
                if (tg > 0.0 && tg <= lidar.max_range) {
                    const double gx = tg * dx;
                    const double gy = tg * dy;
                    if (std::hypot(gx, gy) <= ground_extent) range = tg;
                }
            }

            // Cylinder shell at (cx, cy), radius r, z in [0, height].
            const double a = dx * dx + dy * dy;
            if (a > 1e-12) {
                const double bx = -cx;
                const double by = -cy;
                const double b = 2.0 * (bx * dx + by * dy);
                const double c = bx * bx + by * by - cyl.radius * cyl.radius;
                const double disc = b * b - 4.0 * a * c;
                if (disc >= 0.0) {
                    const double tc = (-b - std::sqrt(disc)) / (2.0 * a);  // near intersection
                    if (tc > 0.0 && tc <= lidar.max_range && tc < range) {
                        const double z = oz + tc * dz;
                        if (z >= 0.0 && z <= cyl.height) range = tc;
                    }
                }
            }

            if (!std::isfinite(range)) continue;
            range += draw_normal(rng, lidar.range_std);
            // Points in the body frame; the sensor sits at (0, 0, mount_height).
            const double bx = ce * std::cos(azimuth_body);
            const double by = ce * std::sin(azimuth_body);
            cloud.points.push_back({range * bx, range * by, oz + range * dz});
        }
    }
    return cloud;
}

}  // namespace odocal
