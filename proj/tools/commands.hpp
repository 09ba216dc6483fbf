#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

namespace odocal::cli {

struct CommonOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;           // overrides the config seed
    std::optional<std::filesystem::path> out;    // overrides output.dir
};

void run_simulate(const CommonOptions& options);
void run_extract(const std::filesystem::path& frames_dir, const CommonOptions& options);
void run_calibrate(const std::filesystem::path& dataset_path, const CommonOptions& options);
void run_report(const std::filesystem::path& result_path, const CommonOptions& options);

}  // namespace odocal::cli
