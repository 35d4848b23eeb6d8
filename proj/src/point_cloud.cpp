#include "gait/point_cloud.hpp"

#include <cmath>
#include <sstream>

#include "gait/errors.hpp"
#include "io_util.hpp"

namespace gait {

PointCloud load_point_cloud(const std::filesystem::path& file, std::size_t frame_index) {
    auto in = detail::open_in(file);
    PointCloud cloud;
    cloud.frame_index = frame_index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        Point3 p;
        if (!(row >> p.x >> p.y >> p.z))
            throw FormatError(file.string() + ":" + std::to_string(line_no) +
                              ": expected \"x y z\"");
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw FormatError(file.string() + ":" + std::to_string(line_no) +
                              ": non-finite coordinate");
        cloud.points.push_back(p);
    }
    return cloud;
}

void save_point_cloud(const std::filesystem::path& file, const PointCloud& cloud) {
    auto out = detail::open_out(file);
    for (const Point3& p : cloud.points) {
        out << detail::fmt_double(p.x) << ' ' << detail::fmt_double(p.y) << ' '
            << detail::fmt_double(p.z) << '\n';
    }
    if (!out) throw IoError("write failed: " + file.string());
}

std::vector<std::string> load_frame_manifest(const std::filesystem::path& file) {
    auto in = detail::open_in(file);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

void save_frame_manifest(const std::filesystem::path& file, const std::vector<std::string>& names) {
    auto out = detail::open_out(file);
    for (const auto& name : names) out << name << '\n';
    if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace gait
