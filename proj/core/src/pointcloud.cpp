#include "odocal/pointcloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include "odocal/errors.hpp"

namespace odocal {

namespace {

double coord(const Vec3& p, Axis axis) {
    switch (axis) {
        case Axis::X: return p.x;
        case Axis::Y: return p.y;
        default: return p.z;
    }
}

bool inside_box(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
}

using CellKey = std::array<long long, 3>;

CellKey cell_of(const Vec3& p, double inv_cell) {
    return {static_cast<long long>(std::floor(p.x * inv_cell)),
            static_cast<long long>(std::floor(p.y * inv_cell)),
            static_cast<long long>(std::floor(p.z * inv_cell))};
}

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        std::size_t h = 1469598103934665603ull;
        for (long long v : k) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

}  // namespace

PointCloud crop_box(const PointCloud& cloud, const Vec3& min_corner, const Vec3& max_corner,
                    bool negative) {
    if (min_corner.x > max_corner.x || min_corner.y > max_corner.y ||
        min_corner.z > max_corner.z) {
        throw ParameterError("crop_box corners are inverted");
    }
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) {
        if (inside_box(p, min_corner, max_corner) != negative) {
            out.points.push_back(p);
        }
    }
    return out;
}

PointCloud pass_through(const PointCloud& cloud, Axis axis, double lo, double hi) {
    if (lo > hi) {
        throw ParameterError("pass_through interval is inverted");
    }
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) {
        const double v = coord(p, axis);
        if (v >= lo && v <= hi) {
            out.points.push_back(p);
        }
    }
    return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
    if (!(leaf > 0.0)) {
        throw ParameterError("voxel leaf size must be strictly positive");
    }
    const double inv = 1.0 / leaf;
    // Ordered map gives a canonical output order (by cell coordinates).
    std::map<CellKey, std::pair<Vec3, std::size_t>> cells;
    for (const Vec3& p : cloud.points) {
        auto& [sum, n] = cells[cell_of(p, inv)];
        sum = sum + p;
        ++n;
    }
    PointCloud out;
    out.points.reserve(cells.size());
    for (const auto& [key, acc] : cells) {
        out.points.push_back(acc.first * (1.0 / static_cast<double>(acc.second)));
    }
    return out;
}

GroundSegmentation segment_ground_ransac(const PointCloud& cloud, const Vec3& axis,
                                         double angle_tol, double dist_tol, std::size_t iters,
                                         std::uint64_t seed) {
    const double axis_norm = axis.norm();
    if (!(axis_norm > 0.0)) {
        throw ParameterError("segment_ground_ransac axis must be non-zero");
    }
    if (!(dist_tol > 0.0) || iters < 1) {
        throw ParameterError("segment_ground_ransac needs dist_tol > 0 and iters >= 1");
    }
    GroundSegmentation result;
    if (cloud.size() < 3) {
        result.rest = cloud;
        return result;
    }

    const Vec3 axis_unit = axis * (1.0 / axis_norm);
    const double cos_tol = std::cos(angle_tol);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);

    bool found = false;
    Vec3 best_n;
    double best_d = 0.0;
    std::size_t best_inliers = 0;
    double best_mean_residual = std::numeric_limits<double>::infinity();

    for (std::size_t it = 0; it < iters; ++it) {
        const std::size_t a = pick(rng);
        const std::size_t b = pick(rng);
        const std::size_t c = pick(rng);
        if (a == b || a == c || b == c) continue;
        const Vec3& pa = cloud.points[a];
        Vec3 n = (cloud.points[b] - pa).cross(cloud.points[c] - pa);
        const double len = n.norm();
        if (len < 1e-12) continue;  // collinear sample
        n = n * (1.0 / len);
        // Sign-insensitive alignment with the constraint axis.
        if (std::abs(n.dot(axis_unit)) < cos_tol) continue;
        const double d = -n.dot(pa);

        std::size_t inliers = 0;
        double residual_sum = 0.0;
        for (const Vec3& p : cloud.points) {
            const double r = std::abs(n.dot(p) + d);
            if (r <= dist_tol) {
                ++inliers;
                residual_sum += r;
            }
        }
        const double mean_residual = inliers ? residual_sum / static_cast<double>(inliers) : 0.0;
        if (inliers > best_inliers ||
            (inliers == best_inliers && inliers > 0 && mean_residual < best_mean_residual)) {
            found = true;
            best_n = n;
            best_d = d;
            best_inliers = inliers;
            best_mean_residual = mean_residual;
        }
    }

    if (!found) {
        result.rest = cloud;
        return result;
    }
    result.normal = best_n;
    result.offset = best_d;
    result.inlier_count = best_inliers;
    for (const Vec3& p : cloud.points) {
        if (std::abs(best_n.dot(p) + best_d) <= dist_tol) {
            result.ground.points.push_back(p);
        } else {
            result.rest.points.push_back(p);
        }
    }
    return result;
}

std::vector<Cluster> euclidean_cluster(const PointCloud& cloud, double tolerance,
                                       std::size_t min_size, std::size_t max_size) {
    if (!(tolerance > 0.0)) {
        throw ParameterError("cluster tolerance must be strictly positive");
    }
    if (min_size < 1 || min_size > max_size) {
        throw ParameterError("cluster size bounds must satisfy 1 <= min <= max");
    }
    const std::size_t n = cloud.size();
    std::vector<Cluster> clusters;
    if (n == 0) return clusters;

    // Uniform grid with cell size = tolerance; neighbor candidates live in
    // the 27 surrounding cells.
    const double inv = 1.0 / tolerance;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
    grid.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[cell_of(cloud.points[i], inv)].push_back(i);
    }

    const double tol2 = tolerance * tolerance;
    std::vector<int> label(n, -1);
    std::vector<std::size_t> stack;
    int next_label = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = next_label;
        stack.assign(1, s);
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            const Vec3& pi = cloud.points[i];
            const CellKey base = cell_of(pi, inv);
            for (long long dx = -1; dx <= 1; ++dx) {
                for (long long dy = -1; dy <= 1; ++dy) {
                    for (long long dz = -1; dz <= 1; ++dz) {
                        const auto it = grid.find({base[0] + dx, base[1] + dy, base[2] + dz});
                        if (it == grid.end()) continue;
                        for (const std::size_t j : it->second) {
                            if (label[j] >= 0) continue;
                            const Vec3 diff = cloud.points[j] - pi;
                            if (diff.dot(diff) <= tol2) {
                                label[j] = next_label;
                                stack.push_back(j);
                            }
                        }
                    }
                }
            }
        }
        ++next_label;
    }

    std::vector<Cluster> all(static_cast<std::size_t>(next_label));
    for (std::size_t i = 0; i < n; ++i) {
        all[static_cast<std::size_t>(label[i])].point_indices.push_back(i);
    }
    for (Cluster& c : all) {
        if (c.point_indices.size() < min_size || c.point_indices.size() > max_size) continue;
        Vec3 sum;
        for (std::size_t i : c.point_indices) sum = sum + cloud.points[i];
        c.centroid = sum * (1.0 / static_cast<double>(c.point_indices.size()));
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.point_indices.size() != b.point_indices.size()) {
            return a.point_indices.size() > b.point_indices.size();
        }
        return a.point_indices.front() < b.point_indices.front();
    });
    return clusters;
}

std::optional<Vec2> extract_landmark(const PointCloud& cloud, const ExtractionConfig& config) {
    PointCloud work = cloud;
    if (config.self_min && config.self_max) {
        work = crop_box(work, *config.self_min, *config.self_max, /*negative=*/true);
    }
    work = crop_box(work, config.region_min, config.region_max);
    work = pass_through(work, config.pass_axis, config.pass_lo, config.pass_hi);
    work = voxel_downsample(work, config.leaf);
    work = segment_ground_ransac(work, config.ransac_axis, config.ransac_angle_tol,
                                 config.ransac_dist_tol, config.ransac_iters, config.seed)
               .rest;
    const std::vector<Cluster> clusters = euclidean_cluster(
        work, config.cluster_tolerance, config.cluster_min_size, config.cluster_max_size);
    if (clusters.empty()) return std::nullopt;

    const Cluster* chosen = nullptr;
    if (config.previous) {
        double best = config.max_jump;
        for (const Cluster& c : clusters) {
            const double dist = (Vec2{c.centroid.x, c.centroid.y} - *config.previous).norm();
            if (dist <= best) {
                best = dist;
                chosen = &c;
            }
        }
        if (!chosen) return std::nullopt;  // nothing within the gate
    } else {
        chosen = &clusters.front();  // largest on the first frame
    }

    Vec2 position{chosen->centroid.x, chosen->centroid.y};
    if (config.range_offset_correction) {
        const double range = position.norm();
        if (range > 0.0) {
            position = position * ((range + 2.0 * config.cylinder_radius / M_PI) / range);
        }
    }
    return position;
}

}  // namespace odocal
