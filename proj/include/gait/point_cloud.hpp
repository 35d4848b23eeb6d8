#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace gait {

// One 3D body point in meters. z is the vertical axis (normal to the
// ground / treadmill surface).
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// One frame's set of body points.
struct PointCloud {
    std::vector<Point3> points;
    std::size_t frame_index = 0;
};

// Text format: one point per line, "x y z" in meters.
PointCloud load_point_cloud(const std::filesystem::path& file, std::size_t frame_index = 0);
void save_point_cloud(const std::filesystem::path& file, const PointCloud& cloud);

// Per-sequence frame manifest: one file name per line, temporal order.
std::vector<std::string> load_frame_manifest(const std::filesystem::path& file);
void save_frame_manifest(const std::filesystem::path& file, const std::vector<std::string>& names);

}  // namespace gait
