#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "odocal/calibration.hpp"
#include "odocal/pointcloud.hpp"
#include "odocal/simulator.hpp"

namespace odocal::cli {

struct RenderSection {
    bool enabled = false;
    CylinderSpec cylinder;
    LidarSpec lidar;
    double ground_extent = 8.0;
};

struct CalibrationSection {
    VehicleParams nominal;
    std::size_t restarts = 100;
    double fig_std = 0.1;
    FigCenter center = FigCenter::Nominal;
    std::optional<VehicleParams> ground_truth;
};

/// One declarative experiment document. Sections are optional in the file;
/// each subcommand demands the ones it needs. Unknown keys anywhere are
/// rejected.
struct ExperimentConfig {
    DriveType drive_type = DriveType::DifferentialDrive;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0 = hardware concurrency; ODOCAL_THREADS caps it

    std::optional<SimConfig> sim;
    RenderSection render;
    std::optional<ExtractionConfig> extraction;
    SplitConfig split;
    OptimizerConfig optimizer;
    std::optional<CalibrationSection> calibration;
    std::filesystem::path output_dir = "out";
};

/// Parse and schema-validate a config file. Throws ParameterError with a
/// line- or path-anchored message on any violation.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace odocal::cli
