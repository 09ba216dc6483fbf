#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "odocal/pointcloud.hpp"
#include "odocal/simulator.hpp"

namespace odocal::io {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

// Dataset CSV: header `t,dt,dphi_left,dphi_right,steering,lx,ly`, one row
// per record, `steering` empty for differential drive. '.' decimal
// separator, LF line endings, UTF-8.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

// Trajectory CSV: header `t,x,y,theta`, one row per pose at t = i * dt.
void write_trajectory_csv(const std::vector<Pose2D>& poses, double dt,
                          const std::filesystem::path& path);

// Point-cloud frame CSV: header `x,y,z`, one row per point (meters, body
// frame). A frames directory carries `manifest.csv` (header `file,t`)
// naming each frame file and its timestamp.
void write_frame_csv(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_frame_csv(const std::filesystem::path& path);

struct FrameManifestEntry {
    std::string file;
    double timestamp = 0.0;
};

void write_frame_manifest(const std::vector<FrameManifestEntry>& entries,
                          const std::filesystem::path& path);
std::vector<FrameManifestEntry> read_frame_manifest(const std::filesystem::path& path);

// Landmark observation CSV: header `t,lx,ly`.
void write_observations_csv(const std::vector<LandmarkObservation>& observations,
                            const std::filesystem::path& path);
std::vector<LandmarkObservation> read_observations_csv(const std::filesystem::path& path);

}  // namespace odocal::io
