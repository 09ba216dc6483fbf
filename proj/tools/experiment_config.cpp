#include "experiment_config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "odocal/errors.hpp"

namespace odocal::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ParameterError(path + ": " + message);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) fail(path, "unknown key '" + key + "'");
    }
}

const json& member(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing required key '") + key + "'");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

double num_or(const json& obj, const std::string& path, const char* key, double fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : as_number(*it, path + "." + key);
}

std::size_t count_or(const json& obj, const std::string& path, const char* key,
                     std::size_t fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer() && !it->is_number_unsigned()) {
        fail(path + "." + key, "expected a non-negative integer");
    }
    const auto v = it->get<long long>();
    if (v < 0) fail(path + "." + key, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

bool bool_or(const json& obj, const std::string& path, const char* key, bool fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
    return it->get<bool>();
}

std::string str(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Vec2 as_vec2(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) fail(path, "expected [x, y]");
    return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
}

Vec3 as_vec3(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
    return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]"),
            as_number(v[2], path + "[2]")};
}

VehicleParams parse_params(const json& obj, const std::string& path, DriveType drive) {
    if (!obj.is_object()) fail(path, "expected an object");
    if (drive == DriveType::DifferentialDrive) {
        check_keys(obj, path, {"wheel_radius", "baseline"});
        return VehicleParams::differential(
            as_number(member(obj, path, "wheel_radius"), path + ".wheel_radius"),
            as_number(member(obj, path, "baseline"), path + ".baseline"));
    }
    check_keys(obj, path, {"wheel_radius", "wheelbase"});
    return VehicleParams::bicycle(
        as_number(member(obj, path, "wheel_radius"), path + ".wheel_radius"),
        as_number(member(obj, path, "wheelbase"), path + ".wheelbase"));
}

NoiseSpec parse_noise(const json& obj, const std::string& path) {
    check_keys(obj, path, {"encoder_std", "landmark_std", "point_std", "dropout_prob"});
    NoiseSpec noise;
    noise.encoder_std = num_or(obj, path, "encoder_std", 0.0);
    noise.landmark_std = num_or(obj, path, "landmark_std", 0.0);
    noise.point_std = num_or(obj, path, "point_std", 0.0);
    noise.dropout_prob = num_or(obj, path, "dropout_prob", 0.0);
    return noise;
}

SimConfig parse_sim(const json& obj, const std::string& path, DriveType drive,
                    std::uint64_t seed) {
    check_keys(obj, path,
               {"rate_hz", "true_params", "landmark", "profile", "noise", "render_frames",
                "lidar", "cylinder", "ground_extent"});
    SimConfig sim;
    sim.drive_type = drive;
    sim.seed = seed;
    sim.rate_hz = as_number(member(obj, path, "rate_hz"), path + ".rate_hz");
    sim.true_params = parse_params(member(obj, path, "true_params"), path + ".true_params", drive);
    sim.landmark_world = as_vec2(member(obj, path, "landmark"), path + ".landmark");
    const json& profile = member(obj, path, "profile");
    if (!profile.is_array() || profile.empty()) fail(path + ".profile", "expected a non-empty array");
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const std::string seg_path = path + ".profile[" + std::to_string(i) + "]";
        const json& seg = profile[i];
        if (!seg.is_object()) fail(seg_path, "expected an object");
        ControlSegment cs;
        cs.duration = as_number(member(seg, seg_path, "duration"), seg_path + ".duration");
        if (drive == DriveType::DifferentialDrive) {
            check_keys(seg, seg_path, {"duration", "left", "right"});
            cs.left = as_number(member(seg, seg_path, "left"), seg_path + ".left");
            cs.right = as_number(member(seg, seg_path, "right"), seg_path + ".right");
        } else {
            check_keys(seg, seg_path, {"duration", "wheel_speed", "steering"});
            cs.wheel_speed =
                as_number(member(seg, seg_path, "wheel_speed"), seg_path + ".wheel_speed");
            cs.steering = as_number(member(seg, seg_path, "steering"), seg_path + ".steering");
        }
        sim.profile.push_back(cs);
    }
    if (const auto it = obj.find("noise"); it != obj.end()) {
        sim.noise = parse_noise(*it, path + ".noise");
    }
    return sim;
}

RenderSection parse_render(const json& sim_obj, const std::string& path, const NoiseSpec& noise) {
    RenderSection render;
    render.enabled = bool_or(sim_obj, path, "render_frames", false);
    if (const auto it = sim_obj.find("cylinder"); it != sim_obj.end()) {
        const std::string p = path + ".cylinder";
        check_keys(*it, p, {"radius", "height"});
        render.cylinder.radius = num_or(*it, p, "radius", render.cylinder.radius);
        render.cylinder.height = num_or(*it, p, "height", render.cylinder.height);
    }
    if (const auto it = sim_obj.find("lidar"); it != sim_obj.end()) {
        const std::string p = path + ".lidar";
        check_keys(*it, p, {"layers", "fov_vertical", "angular_res", "max_range", "mount_height"});
        render.lidar.layers = count_or(*it, p, "layers", render.lidar.layers);
        render.lidar.fov_vertical = num_or(*it, p, "fov_vertical", render.lidar.fov_vertical);
        render.lidar.angular_res = num_or(*it, p, "angular_res", render.lidar.angular_res);
        render.lidar.max_range = num_or(*it, p, "max_range", render.lidar.max_range);
        render.lidar.mount_height = num_or(*it, p, "mount_height", render.lidar.mount_height);
    }
    render.lidar.range_std = noise.point_std;
    render.ground_extent = num_or(sim_obj, path, "ground_extent", render.ground_extent);
    return render;
}

Axis parse_axis(const json& v, const std::string& path) {
    const std::string s = str(v, path);
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    fail(path, "expected one of \"x\", \"y\", \"z\"");
}

ExtractionConfig parse_extraction(const json& obj, const std::string& path, std::uint64_t seed) {
    check_keys(obj, path,
               {"self_box", "region", "pass", "leaf", "ransac", "cluster", "gate",
                "range_offset_correction", "cylinder_radius"});
    ExtractionConfig ex;
    ex.seed = seed;
    if (const auto it = obj.find("self_box"); it != obj.end()) {
        const std::string p = path + ".self_box";
        check_keys(*it, p, {"min", "max"});
        ex.self_min = as_vec3(member(*it, p, "min"), p + ".min");
        ex.self_max = as_vec3(member(*it, p, "max"), p + ".max");
    }
    if (const auto it = obj.find("region"); it != obj.end()) {
        const std::string p = path + ".region";
        check_keys(*it, p, {"min", "max"});
        ex.region_min = as_vec3(member(*it, p, "min"), p + ".min");
        ex.region_max = as_vec3(member(*it, p, "max"), p + ".max");
    }
    if (const auto it = obj.find("pass"); it != obj.end()) {
        const std::string p = path + ".pass";
        check_keys(*it, p, {"axis", "lo", "hi"});
        ex.pass_axis = parse_axis(member(*it, p, "axis"), p + ".axis");
        ex.pass_lo = num_or(*it, p, "lo", ex.pass_lo);
        ex.pass_hi = num_or(*it, p, "hi", ex.pass_hi);
    }
    ex.leaf = num_or(obj, path, "leaf", ex.leaf);
    if (const auto it = obj.find("ransac"); it != obj.end()) {
        const std::string p = path + ".ransac";
        check_keys(*it, p, {"axis", "angle_tol", "dist_tol", "iters"});
        if (const auto a = it->find("axis"); a != it->end()) {
            ex.ransac_axis = as_vec3(*a, p + ".axis");
        }
        ex.ransac_angle_tol = num_or(*it, p, "angle_tol", ex.ransac_angle_tol);
        ex.ransac_dist_tol = num_or(*it, p, "dist_tol", ex.ransac_dist_tol);
        ex.ransac_iters = count_or(*it, p, "iters", ex.ransac_iters);
    }
    if (const auto it = obj.find("cluster"); it != obj.end()) {
        const std::string p = path + ".cluster";
        check_keys(*it, p, {"tolerance", "min_size", "max_size"});
        ex.cluster_tolerance = num_or(*it, p, "tolerance", ex.cluster_tolerance);
        ex.cluster_min_size = count_or(*it, p, "min_size", ex.cluster_min_size);
        ex.cluster_max_size = count_or(*it, p, "max_size", ex.cluster_max_size);
    }
    if (const auto it = obj.find("gate"); it != obj.end()) {
        const std::string p = path + ".gate";
        check_keys(*it, p, {"max_jump"});
        ex.max_jump = num_or(*it, p, "max_jump", ex.max_jump);
    }
    ex.range_offset_correction =
        bool_or(obj, path, "range_offset_correction", ex.range_offset_correction);
    ex.cylinder_radius = num_or(obj, path, "cylinder_radius", ex.cylinder_radius);
    return ex;
}

SplitConfig parse_split(const json& obj, const std::string& path) {
    check_keys(obj, path, {"diff_threshold", "steer_threshold"});
    SplitConfig split;
    split.diff_threshold = num_or(obj, path, "diff_threshold", split.diff_threshold);
    split.steer_threshold = num_or(obj, path, "steer_threshold", split.steer_threshold);
    return split;
}

OptimizerConfig parse_optimizer(const json& obj, const std::string& path) {
    check_keys(obj, path, {"max_iters", "f_tol", "step_tol", "jacobian", "fd_step"});
    OptimizerConfig opt;
    opt.jacobian = JacobianMode::Analytic;  // calibration provides analytic Jacobians
    opt.max_iters = count_or(obj, path, "max_iters", opt.max_iters);
    opt.f_tol = num_or(obj, path, "f_tol", opt.f_tol);
    opt.step_tol = num_or(obj, path, "step_tol", opt.step_tol);
    opt.fd_step = num_or(obj, path, "fd_step", opt.fd_step);
    if (const auto it = obj.find("jacobian"); it != obj.end()) {
        const std::string s = str(*it, path + ".jacobian");
        if (s == "analytic") {
            opt.jacobian = JacobianMode::Analytic;
        } else if (s == "forward_difference") {
            opt.jacobian = JacobianMode::ForwardDifference;
        } else {
            fail(path + ".jacobian", "expected \"analytic\" or \"forward_difference\"");
        }
    }
    return opt;
}

CalibrationSection parse_calibration(const json& obj, const std::string& path, DriveType drive) {
    check_keys(obj, path, {"nominal", "restarts", "fig_std", "fig_center", "ground_truth"});
    CalibrationSection cal;
    cal.nominal = parse_params(member(obj, path, "nominal"), path + ".nominal", drive);
    cal.restarts = count_or(obj, path, "restarts", cal.restarts);
    cal.fig_std = num_or(obj, path, "fig_std", cal.fig_std);
    if (const auto it = obj.find("fig_center"); it != obj.end()) {
        const std::string s = str(*it, path + ".fig_center");
        if (s == "nominal") {
            cal.center = FigCenter::Nominal;
        } else if (s == "ground_truth") {
            cal.center = FigCenter::GroundTruth;
        } else {
            fail(path + ".fig_center", "expected \"nominal\" or \"ground_truth\"");
        }
    }
    if (const auto it = obj.find("ground_truth"); it != obj.end()) {
        cal.ground_truth = parse_params(*it, path + ".ground_truth", drive);
    }
    return cal;
}

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open config: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError(path.string() + ":" + std::to_string(line_of_offset(text, e.byte)) +
                             ": " + e.what());
    }
    if (!root.is_object()) throw ParameterError(path.string() + ": expected a JSON object");

    const std::string top = "$";
    check_keys(root, top,
               {"drive_type", "seed", "threads", "sim", "extraction", "split", "optimizer",
                "calibration", "output"});

    ExperimentConfig cfg;
    const std::string drive = str(member(root, top, "drive_type"), top + ".drive_type");
    if (drive == "differential") {
        cfg.drive_type = DriveType::DifferentialDrive;
    } else if (drive == "bicycle") {
        cfg.drive_type = DriveType::Bicycle;
    } else {
        fail(top + ".drive_type", "expected \"differential\" or \"bicycle\"");
    }
    cfg.seed = count_or(root, top, "seed", 0);
    cfg.threads = count_or(root, top, "threads", 0);

    if (const auto it = root.find("sim"); it != root.end()) {
        cfg.sim = parse_sim(*it, top + ".sim", cfg.drive_type, cfg.seed);
        cfg.render = parse_render(*it, top + ".sim", cfg.sim->noise);
    }
    if (const auto it = root.find("extraction"); it != root.end()) {
        cfg.extraction = parse_extraction(*it, top + ".extraction", cfg.seed);
    }
    if (const auto it = root.find("split"); it != root.end()) {
        cfg.split = parse_split(*it, top + ".split");
    }
    if (const auto it = root.find("optimizer"); it != root.end()) {
        cfg.optimizer = parse_optimizer(*it, top + ".optimizer");
    } else {
        cfg.optimizer.jacobian = JacobianMode::Analytic;
    }
    if (const auto it = root.find("calibration"); it != root.end()) {
        cfg.calibration = parse_calibration(*it, top + ".calibration", cfg.drive_type);
    }
    if (const auto it = root.find("output"); it != root.end()) {
        check_keys(*it, top + ".output", {"dir"});
        cfg.output_dir = str(member(*it, top + ".output", "dir"), top + ".output.dir");
    }
    return cfg;
}

}  // namespace odocal::cli
