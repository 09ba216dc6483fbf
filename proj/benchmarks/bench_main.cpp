#include <benchmark/benchmark.h>

#include <random>

#include "odocal/calibration.hpp"
#include "odocal/pointcloud.hpp"
#include "odocal/simulator.hpp"
#include "profiles.hpp"

using namespace odocal;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) cloud.points.push_back({u(rng), u(rng), u(rng)});
    return cloud;
}

}  // namespace

static void BM_DiffDriveMotion(benchmark::State& state) {
    const EncoderInterval interval{0.1, 0.55, 0.65, std::nullopt};
    const VehicleParams params = VehicleParams::differential(0.033, 0.16);
    for (auto _ : state) {
        benchmark::DoNotOptimize(diff_drive_motion(interval, params));
    }
}
BENCHMARK(BM_DiffDriveMotion);

static void BM_PredictLandmark(benchmark::State& state) {
    const BodyMotion motion{0.02, 0.001, 0.05};
    const Vec2 landmark{2.0, 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_landmark(landmark, motion));
    }
}
BENCHMARK(BM_PredictLandmark);

static void BM_Residuals(benchmark::State& state) {
    const SimResult sim = simulate(profiles::turtlebot(true));
    const VehicleParams params = VehicleParams::differential(0.035, 0.17);
    for (auto _ : state) {
        benchmark::DoNotOptimize(residuals(sim.dataset, params));
    }
}
BENCHMARK(BM_Residuals);

static void BM_ResidualJacobian(benchmark::State& state) {
    const SimResult sim = simulate(profiles::turtlebot(true));
    const VehicleParams params = VehicleParams::differential(0.035, 0.17);
    for (auto _ : state) {
        benchmark::DoNotOptimize(residual_jacobian(sim.dataset, params, CalParam::WheelRadius));
    }
}
BENCHMARK(BM_ResidualJacobian);

static void BM_CalibrateTwoStage(benchmark::State& state) {
    const SimResult sim = simulate(profiles::turtlebot(true));
    const VehicleParams initial = VehicleParams::differential(0.036, 0.18);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            calibrate(sim.dataset, initial, profiles::turtlebot_split(), OptimizerConfig{}));
    }
}
BENCHMARK(BM_CalibrateTwoStage);

static void BM_VoxelDownsample(benchmark::State& state) {
    const PointCloud cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(voxel_downsample(cloud, 0.2));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_VoxelDownsample)->Range(256, 16384)->Complexity();

static void BM_EuclideanCluster(benchmark::State& state) {
    const PointCloud cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(euclidean_cluster(cloud, 0.4, 1, cloud.size()));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EuclideanCluster)->Range(256, 16384)->Complexity();

static void BM_RansacGround(benchmark::State& state) {
    PointCloud cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 17);
    for (Vec3& p : cloud.points) p.z *= 0.01;  // mostly flat
    for (auto _ : state) {
        benchmark::DoNotOptimize(segment_ground_ransac(cloud, {0, 0, 1}, 0.2, 0.05, 100, 3));
    }
}
BENCHMARK(BM_RansacGround)->Range(1024, 8192);

static void BM_RenderCylinderCloud(benchmark::State& state) {
    const CylinderSpec cyl{0.05, 0.4};
    LidarSpec lidar;
    lidar.layers = 32;
    lidar.fov_vertical = 0.5;
    lidar.angular_res = 0.004;
    lidar.range_std = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            render_cylinder_cloud({0, 0, 0}, {3.0, 1.0}, cyl, lidar, 8.0, 5));
    }
}
BENCHMARK(BM_RenderCylinderCloud);

static void BM_ExtractLandmark(benchmark::State& state) {
    const CylinderSpec cyl{0.05, 0.4};
    LidarSpec lidar;
    lidar.layers = 32;
    lidar.fov_vertical = 0.5;
    lidar.angular_res = 0.004;
    lidar.range_std = 0.01;
    const PointCloud cloud = render_cylinder_cloud({0, 0, 0}, {3.0, 1.0}, cyl, lidar, 8.0, 5);
    ExtractionConfig config;
    config.region_min = {-6.5, -6.5, -0.5};
    config.region_max = {6.5, 6.5, 1.5};
    config.leaf = 0.02;
    config.ransac_dist_tol = 0.02;
    config.ransac_iters = 150;
    config.cluster_tolerance = 0.2;
    config.cluster_min_size = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_landmark(cloud, config));
    }
}
BENCHMARK(BM_ExtractLandmark);

BENCHMARK_MAIN();
