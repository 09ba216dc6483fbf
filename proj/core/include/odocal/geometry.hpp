#pragma once

#include <cmath>

namespace odocal {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Rotate a planar vector by `angle` radians (counter-clockwise).
inline Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * M_PI;
    a = std::fmod(a + M_PI, two_pi);
    if (a <= 0.0) a += two_pi;
    return a - M_PI;
}

/// Planar vehicle pose. `theta` is kept in (-pi, pi] by every operation
/// that returns a Pose2D.
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

/// Landmark position in the vehicle body frame at one timestep.
struct LandmarkObservation {
    double timestamp = 0.0;
    Vec2 position;
};

}  // namespace odocal
