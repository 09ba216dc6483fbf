#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiment_config.hpp"
#include "odocal/calibration.hpp"
#include "odocal/errors.hpp"
#include "odocal/io.hpp"
#include "odocal/parallel.hpp"
#include "odocal/simulator.hpp"

namespace odocal::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

ExperimentConfig load_with_overrides(const CommonOptions& options) {
    ExperimentConfig cfg = load_experiment_config(options.config);
    if (options.seed) {
        cfg.seed = *options.seed;
        if (cfg.sim) cfg.sim->seed = *options.seed;
        if (cfg.extraction) cfg.extraction->seed = *options.seed;
    }
    if (options.out) cfg.output_dir = *options.out;
    return cfg;
}

std::size_t effective_threads(const ExperimentConfig& cfg) {
    std::size_t threads = resolve_threads(cfg.threads);
    if (const char* env = std::getenv("ODOCAL_THREADS")) {
        const unsigned long cap = std::strtoul(env, nullptr, 10);
        if (cap >= 1) threads = std::min<std::size_t>(threads, cap);
    }
    return threads;
}

std::string geometry_key(DriveType drive) {
    return drive == DriveType::DifferentialDrive ? "baseline" : "wheelbase";
}

json params_to_json(const VehicleParams& p) {
    return {{"wheel_radius", p.wheel_radius}, {geometry_key(p.drive_type), p.geometry()}};
}

json stats_to_json(const ParamStatistics& s) {
    json j{{"mean", s.mean},     {"std", s.std_dev}, {"min", s.min}, {"q1", s.q1},
           {"median", s.median}, {"q3", s.q3},       {"max", s.max}};
    if (s.rel_error_vs_gt) j["rel_error_vs_gt"] = *s.rel_error_vs_gt;
    return j;
}

json trace_to_json(const std::string& parameter, const OptimizationTrace& trace) {
    json iterates = json::array();
    for (const auto& [x, loss] : trace.iterates) {
        iterates.push_back(json::array({x[0], loss}));
    }
    return {{"parameter", parameter},
            {"termination", to_string(trace.termination)},
            {"iterations", trace.iterations},
            {"wall_time_s", trace.wall_time_s},
            {"trace", std::move(iterates)}};
}

std::string frame_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06zu.csv", index);
    return buf;
}

}  // namespace

void run_simulate(const CommonOptions& options) {
    const ExperimentConfig cfg = load_with_overrides(options);
    if (!cfg.sim) throw ParameterError("config has no 'sim' section, required by simulate");

    const SimResult result = simulate(*cfg.sim);
    if (result.dataset.records.empty()) {
        throw ParameterError("simulation produced an empty dataset");
    }
    fs::create_directories(cfg.output_dir);
    io::write_dataset_csv(result.dataset, cfg.output_dir / "dataset.csv");
    io::write_trajectory_csv(result.ground_truth, 1.0 / cfg.sim->rate_hz,
                             cfg.output_dir / "ground_truth.csv");

    if (cfg.render.enabled) {
        const fs::path frames_dir = cfg.output_dir / "frames";
        fs::create_directories(frames_dir);
        const double dt = 1.0 / cfg.sim->rate_hz;
        const std::size_t n = result.ground_truth.size();
        std::vector<io::FrameManifestEntry> manifest(n);
        parallel_for(n, effective_threads(cfg), [&](std::size_t i) {
            const PointCloud cloud = render_cylinder_cloud(
                result.ground_truth[i], cfg.sim->landmark_world, cfg.render.cylinder,
                cfg.render.lidar, cfg.render.ground_extent,
                cfg.seed ^ static_cast<std::uint64_t>(i));
            const std::string name = frame_name(i);
            io::write_frame_csv(cloud, frames_dir / name);
            manifest[i] = {name, static_cast<double>(i) * dt};
        });
        io::write_frame_manifest(manifest, frames_dir / "manifest.csv");
        std::cout << "frames: " << n << " -> " << frames_dir.string() << "\n";
    }

    const SplitResult preview = split_dataset(result.dataset, cfg.split);
    std::cout << "records: " << result.dataset.records.size() << "\n"
              << "split preview: straight=" << preview.straight.records.size()
              << " turn=" << preview.turn.records.size() << "\n"
              << "wrote " << (cfg.output_dir / "dataset.csv").string() << "\n";
}

void run_extract(const std::filesystem::path& frames_dir, const CommonOptions& options) {
    const ExperimentConfig cfg = load_with_overrides(options);
    if (!cfg.extraction) throw ParameterError("config has no 'extraction' section, required by extract");

    const fs::path manifest_path = frames_dir / "manifest.csv";
    if (!fs::exists(manifest_path)) {
        throw DataError("no manifest.csv in frames directory: " + frames_dir.string());
    }
    const std::vector<io::FrameManifestEntry> manifest = io::read_frame_manifest(manifest_path);
    if (manifest.empty()) throw DataError("frame manifest is empty: " + manifest_path.string());

    std::vector<LandmarkObservation> observations;
    ExtractionConfig extraction = *cfg.extraction;
    std::size_t unreadable = 0;
    std::size_t dropouts = 0;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        PointCloud cloud;
        try {
            cloud = io::read_frame_csv(frames_dir / manifest[i].file);
        } catch (const DataError& e) {
            std::cerr << "warning: skipping unreadable frame: " << e.what() << "\n";
            ++unreadable;
            continue;
        }
        extraction.seed = cfg.seed ^ static_cast<std::uint64_t>(i);
        const std::optional<Vec2> position = extract_landmark(cloud, extraction);
        if (!position) {
            ++dropouts;
            continue;
        }
        observations.push_back({manifest[i].timestamp, *position});
        extraction.previous = *position;  // gate the next frame around this one
    }
    if (unreadable * 2 > manifest.size()) {
        throw DataError("more than half of the frames are unreadable (" +
                        std::to_string(unreadable) + "/" + std::to_string(manifest.size()) + ")");
    }

    fs::create_directories(cfg.output_dir);
    const fs::path out_path = cfg.output_dir / "observations.csv";
    io::write_observations_csv(observations, out_path);
    std::cout << "frames: " << manifest.size() << " observations: " << observations.size()
              << " dropouts: " << dropouts << " unreadable: " << unreadable << "\n"
              << "wrote " << out_path.string() << "\n";
}

void run_calibrate(const std::filesystem::path& dataset_path, const CommonOptions& options) {
    const ExperimentConfig cfg = load_with_overrides(options);
    if (!cfg.calibration) {
        throw ParameterError("config has no 'calibration' section, required by calibrate");
    }
    const Dataset data = io::read_dataset_csv(dataset_path);
    if (data.drive_type != cfg.drive_type) {
        throw DataError("dataset drive type disagrees with the config drive_type");
    }

    const CalibrationSection& cal = *cfg.calibration;
    MultiRestartConfig restart_cfg;
    restart_cfg.restarts = cal.restarts;
    restart_cfg.fig_std = cal.fig_std;
    restart_cfg.seed = cfg.seed;
    restart_cfg.center = cal.center;
    restart_cfg.ground_truth = cal.ground_truth;
    restart_cfg.threads = effective_threads(cfg);

    const RestartStatistics stats =
        multi_restart(data, cal.nominal, cfg.split, cfg.optimizer, restart_cfg);

    const std::string geom = geometry_key(cfg.drive_type);
    json result{{"drive_type",
                 cfg.drive_type == DriveType::DifferentialDrive ? "differential" : "bicycle"},
                {"dataset", dataset_path.string()},
                {"records", data.records.size()},
                {"split", {{"straight", stats.straight_count}, {"turn", stats.turn_count}}},
                {"nominal", params_to_json(cal.nominal)}};
    if (cal.ground_truth) result["ground_truth"] = params_to_json(*cal.ground_truth);
    result["statistics"] = {{"wheel_radius", stats_to_json(stats.wheel_radius)},
                            {geom, stats_to_json(stats.geometry)},
                            {"mean_stage_wall_time_s",
                             {{"radius", stats.mean_radius_stage_time_s},
                              {"geometry", stats.mean_geometry_stage_time_s}}}};
    json restarts = json::array();
    for (const RestartRecord& rec : stats.restarts) {
        restarts.push_back(
            {{"initial", params_to_json(rec.initial)},
             {"estimate", params_to_json(rec.result.params_hat)},
             {"stages", json::array({trace_to_json("wheel_radius", rec.result.radius_trace),
                                     trace_to_json(geom, rec.result.geometry_trace)})}});
    }
    result["restarts"] = std::move(restarts);

    fs::create_directories(cfg.output_dir);
    {
        std::ofstream out(cfg.output_dir / "result.json", std::ios::binary);
        out << result.dump(2) << "\n";
    }
    {
        std::ofstream out(cfg.output_dir / "traces.csv", std::ios::binary);
        out << "restart,parameter,iteration,value,loss\n";
        for (std::size_t k = 0; k < stats.restarts.size(); ++k) {
            const auto dump_trace = [&](const std::string& name, const OptimizationTrace& tr) {
                for (std::size_t i = 0; i < tr.iterates.size(); ++i) {
                    out << k << ',' << name << ',' << i << ','
                        << io::format_double(tr.iterates[i].first[0]) << ','
                        << io::format_double(tr.iterates[i].second) << '\n';
                }
            };
            dump_trace("wheel_radius", stats.restarts[k].result.radius_trace);
            dump_trace(geom, stats.restarts[k].result.geometry_trace);
        }
    }

    const auto print_row = [&](const std::string& name, const ParamStatistics& s, double time_s) {
        std::printf("%-14s mean=%-12.6g std=%-10.4g", name.c_str(), s.mean, s.std_dev);
        if (s.rel_error_vs_gt) std::printf(" err_vs_gt=%.3f%%", 100.0 * *s.rel_error_vs_gt);
        std::printf(" stage_time=%.4gs\n", time_s);
    };
    std::printf("records: %zu  split: straight=%zu turn=%zu  restarts: %zu\n",
                data.records.size(), stats.straight_count, stats.turn_count,
                stats.restarts.size());
    print_row("wheel_radius", stats.wheel_radius, stats.mean_radius_stage_time_s);
    print_row(geom, stats.geometry, stats.mean_geometry_stage_time_s);
    std::cout << "wrote " << (cfg.output_dir / "result.json").string() << "\n";
}

void run_report(const std::filesystem::path& result_path, const CommonOptions& options) {
    json result;
    {
        std::ifstream in(result_path, std::ios::binary);
        if (!in) throw DataError("cannot open result: " + result_path.string());
        try {
            result = json::parse(in);
        } catch (const json::parse_error& e) {
            throw DataError(result_path.string() + ": " + e.what());
        }
    }
    const auto require = [&](const json& obj, const char* key) -> const json& {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            throw DataError(result_path.string() + ": result is missing '" + key + "'");
        }
        return *it;
    };
    const std::string drive = require(result, "drive_type").get<std::string>();
    const std::string geom = drive == "differential" ? "baseline" : "wheelbase";
    const json& restarts = require(result, "restarts");
    const json& statistics = require(result, "statistics");
    if (!restarts.is_array() || restarts.empty()) {
        throw DataError(result_path.string() + ": 'restarts' must be a non-empty array");
    }

    const fs::path out_dir = options.out.value_or(result_path.parent_path());
    fs::create_directories(out_dir);

    {
        std::ofstream out(out_dir / "report_curves.csv", std::ios::binary);
        out << "restart,parameter,iteration,value,loss\n";
        for (std::size_t k = 0; k < restarts.size(); ++k) {
            for (const json& stage : require(restarts[k], "stages")) {
                const std::string name = require(stage, "parameter").get<std::string>();
                const json& trace = require(stage, "trace");
                for (std::size_t i = 0; i < trace.size(); ++i) {
                    out << k << ',' << name << ',' << i << ','
                        << io::format_double(trace[i][0].get<double>()) << ','
                        << io::format_double(trace[i][1].get<double>()) << '\n';
                }
            }
        }
    }
    {
        std::ofstream out(out_dir / "report_distribution.csv", std::ios::binary);
        out << "parameter,restart,estimate\n";
        for (const std::string& name : {std::string("wheel_radius"), geom}) {
            for (std::size_t k = 0; k < restarts.size(); ++k) {
                const json& estimate = require(restarts[k], "estimate");
                out << name << ',' << k << ','
                    << io::format_double(require(estimate, name.c_str()).get<double>()) << '\n';
            }
        }
    }
    {
        std::ofstream out(out_dir / "report_quartiles.csv", std::ios::binary);
        out << "parameter,count,mean,std,min,q1,median,q3,max,rel_error_vs_gt\n";
        for (const std::string& name : {std::string("wheel_radius"), geom}) {
            const json& s = require(statistics, name.c_str());
            out << name << ',' << restarts.size();
            for (const char* key : {"mean", "std", "min", "q1", "median", "q3", "max"}) {
                out << ',' << io::format_double(require(s, key).get<double>());
            }
            out << ',';
            if (s.contains("rel_error_vs_gt")) {
                out << io::format_double(s["rel_error_vs_gt"].get<double>());
            }
            out << '\n';
        }
    }
    std::cout << "wrote report_curves.csv, report_distribution.csv, report_quartiles.csv to "
              << out_dir.string() << "\n";
}

}  // namespace odocal::cli
