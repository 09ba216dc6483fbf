#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "odocal/geometry.hpp"

namespace odocal {

/// 3-D points in the vehicle body frame. May be empty.
struct PointCloud {
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

enum class Axis { X, Y, Z };

/// Connected group of points with its arithmetic-mean centroid.
struct Cluster {
    std::vector<std::size_t> point_indices;  // ascending indices into the source cloud
    Vec3 centroid;
};

/// Keep (negative=false) or drop (negative=true) points inside the
/// inclusive axis-aligned box [min_corner, max_corner].
PointCloud crop_box(const PointCloud& cloud, const Vec3& min_corner, const Vec3& max_corner,
                    bool negative = false);

/// Keep points whose `axis` coordinate lies in [lo, hi].
PointCloud pass_through(const PointCloud& cloud, Axis axis, double lo, double hi);

/// Replace each occupied cell of an axis-aligned grid of size `leaf` by the
/// centroid of the cell's members. Output is ordered by cell coordinates.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

struct GroundSegmentation {
    PointCloud ground;
    PointCloud rest;
    // Best plane as n . p + d = 0 with |n| = 1; meaningless when no
    // admissible hypothesis was found (ground empty).
    Vec3 normal;
    double offset = 0.0;
    std::size_t inlier_count = 0;
};

/// RANSAC over 3-point plane hypotheses, restricted to planes whose normal
/// lies within `angle_tol` of `axis`. The admissible plane with the most
/// inliers (|signed distance| <= dist_tol) becomes the ground; ties go to
/// the smaller mean absolute residual, then to the earlier iteration.
/// Deterministic for a fixed seed. Clouds of fewer than 3 points come back
/// untouched in `rest`.
GroundSegmentation segment_ground_ransac(const PointCloud& cloud, const Vec3& axis,
                                         double angle_tol, double dist_tol, std::size_t iters,
                                         std::uint64_t seed);

/// Single-linkage connected components under the distance `tolerance`,
/// grid-accelerated. Components outside [min_size, max_size] are dropped;
/// clusters come back sorted by size descending, ties broken by smallest
/// member index.
std::vector<Cluster> euclidean_cluster(const PointCloud& cloud, double tolerance,
                                       std::size_t min_size, std::size_t max_size);

/// All stage parameters of the extraction chain plus the track gate.
struct ExtractionConfig {
    // Optional excision of vehicle self-returns (crop_box with negative=true).
    std::optional<Vec3> self_min, self_max;
    // Region of interest (crop_box with negative=false).
    Vec3 region_min{-50.0, -50.0, -5.0};
    Vec3 region_max{50.0, 50.0, 5.0};

    Axis pass_axis = Axis::Z;
    double pass_lo = -1.0;
    double pass_hi = 2.0;

    double leaf = 0.02;

    Vec3 ransac_axis{0.0, 0.0, 1.0};
    double ransac_angle_tol = 0.2;
    double ransac_dist_tol = 0.02;
    std::size_t ransac_iters = 100;

    double cluster_tolerance = 0.2;
    std::size_t cluster_min_size = 5;
    std::size_t cluster_max_size = 100000;

    // Track association: nearest cluster to `previous`, rejected beyond
    // max_jump. With no previous observation the largest cluster wins.
    std::optional<Vec2> previous;
    double max_jump = 0.5;

    // Visible-arc correction: a LiDAR sees only the near half of a cylinder
    // shell, biasing the centroid toward the sensor by ~2r/pi. When enabled
    // the observation is pushed back out along the bearing.
    bool range_offset_correction = true;
    double cylinder_radius = 0.05;

    std::uint64_t seed = 0;
};

/// Run the full chain crop -> pass -> voxel -> ground removal -> clustering
/// and return the selected cluster centroid projected to the plane, or
/// nothing when no cluster survives.
std::optional<Vec2> extract_landmark(const PointCloud& cloud, const ExtractionConfig& config);

}  // namespace odocal
