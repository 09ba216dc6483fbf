#include "odocal/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "odocal/errors.hpp"

namespace odocal::io {

namespace {

std::string location(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path.string());
    return in;
}

// Strips one trailing CR so CRLF files still parse; output is always LF.
bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t line) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw DataError(location(path, line) + ": expected a finite number, got '" + field + "'");
    }
    return value;
}

void expect_header(std::istream& in, const std::string& expected,
                   const std::filesystem::path& path) {
    std::string line;
    if (!next_line(in, line) || line != expected) {
        throw DataError(location(path, 1) + ": expected header '" + expected + "'");
    }
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "t,dt,dphi_left,dphi_right,steering,lx,ly\n";
    for (const Record& rec : data.records) {
        out << format_double(rec.observation.timestamp) << ',' << format_double(rec.interval.dt)
            << ',' << format_double(rec.interval.dphi_left) << ','
            << format_double(rec.interval.dphi_right) << ','
            << (rec.interval.steering ? format_double(*rec.interval.steering) : std::string())
            << ',' << format_double(rec.observation.position.x) << ','
            << format_double(rec.observation.position.y) << '\n';
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "t,dt,dphi_left,dphi_right,steering,lx,ly", path);
    Dataset data;
    data.provenance = "file: " + path.string();
    std::string line;
    std::size_t line_no = 1;
    bool any_steering = false;
    bool any_missing = false;
    double last_t = 0.0;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 7) {
            throw DataError(location(path, line_no) + ": expected 7 columns, got " +
                            std::to_string(fields.size()));
        }
        Record rec;
        rec.observation.timestamp = parse_double(fields[0], path, line_no);
        rec.interval.dt = parse_double(fields[1], path, line_no);
        rec.interval.dphi_left = parse_double(fields[2], path, line_no);
        rec.interval.dphi_right = parse_double(fields[3], path, line_no);
        if (!fields[4].empty()) {
            rec.interval.steering = parse_double(fields[4], path, line_no);
            any_steering = true;
        } else {
            any_missing = true;
        }
        if (any_steering && any_missing) {
            throw DataError(location(path, line_no) + ": steering present in some rows only");
        }
        rec.observation.position.x = parse_double(fields[5], path, line_no);
        rec.observation.position.y = parse_double(fields[6], path, line_no);
        if (!(rec.interval.dt > 0.0)) {
            throw DataError(location(path, line_no) + ": dt must be strictly positive");
        }
        if (!data.records.empty() && rec.observation.timestamp <= last_t) {
            throw DataError(location(path, line_no) + ": timestamps must be strictly increasing");
        }
        last_t = rec.observation.timestamp;
        data.records.push_back(rec);
    }
    data.drive_type = any_steering ? DriveType::Bicycle : DriveType::DifferentialDrive;
    return data;
}

void write_trajectory_csv(const std::vector<Pose2D>& poses, double dt,
                          const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "t,x,y,theta\n";
    for (std::size_t i = 0; i < poses.size(); ++i) {
        out << format_double(static_cast<double>(i) * dt) << ',' << format_double(poses[i].x)
            << ',' << format_double(poses[i].y) << ',' << format_double(poses[i].theta) << '\n';
    }
}

void write_frame_csv(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "x,y,z\n";
    for (const Vec3& p : cloud.points) {
        out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.z)
            << '\n';
    }
}

PointCloud read_frame_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "x,y,z", path);
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 3) {
            throw DataError(location(path, line_no) + ": expected 3 columns, got " +
                            std::to_string(fields.size()));
        }
        cloud.points.push_back({parse_double(fields[0], path, line_no),
                                parse_double(fields[1], path, line_no),
                                parse_double(fields[2], path, line_no)});
    }
    return cloud;
}

void write_frame_manifest(const std::vector<FrameManifestEntry>& entries,
                          const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "file,t\n";
    for (const FrameManifestEntry& e : entries) {
        out << e.file << ',' << format_double(e.timestamp) << '\n';
    }
}

std::vector<FrameManifestEntry> read_frame_manifest(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "file,t", path);
    std::vector<FrameManifestEntry> entries;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 2 || fields[0].empty()) {
            throw DataError(location(path, line_no) + ": expected 'file,t'");
        }
        entries.push_back({fields[0], parse_double(fields[1], path, line_no)});
    }
    return entries;
}

void write_observations_csv(const std::vector<LandmarkObservation>& observations,
                            const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "t,lx,ly\n";
    for (const LandmarkObservation& obs : observations) {
        out << format_double(obs.timestamp) << ',' << format_double(obs.position.x) << ','
            << format_double(obs.position.y) << '\n';
    }
}

std::vector<LandmarkObservation> read_observations_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "t,lx,ly", path);
    std::vector<LandmarkObservation> observations;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != 3) {
            throw DataError(location(path, line_no) + ": expected 3 columns");
        }
        observations.push_back({parse_double(fields[0], path, line_no),
                                {parse_double(fields[1], path, line_no),
                                 parse_double(fields[2], path, line_no)}});
    }
    return observations;
}

}  // namespace odocal::io
