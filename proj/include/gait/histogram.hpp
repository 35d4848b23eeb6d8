#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gait/point_cloud.hpp"

namespace gait {

// Cylinder fitted onto one cloud: axis through the centroid, bases through
// the highest/lowest points, radius = max radial distance of any point.
struct CylinderFrame {
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;
    double radius = 0.0;
};

// Per-sector point counts, rows = height bands (row 0 = lowest), columns =
// angular sectors. Stored row-major.
struct RawHistogram {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint64_t> counts;

    std::uint64_t& at(std::size_t r, std::size_t c) { return counts[r * cols + c]; }
    std::uint64_t at(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }
    std::uint64_t total() const;
};

// Normalized histogram: values in {k/255 : k = 0..255}, max bin = 1.0.
struct Histogram {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major, row 0 = lowest band

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::size_t size() const { return rows * cols; }
};

// Throws DegenerateCloud if the cloud has < 2 points, no z extent, or all
// points sit on the axis (radius 0).
CylinderFrame fit_cylinder(const PointCloud& cloud);

// Bins every point: row = floor((z - z_min) / (z_max - z_min) * rows),
// column = floor((atan2(y - cy, x - cx) + pi) / (2 pi) * sectors), both
// clamped so boundary points land in the outermost/topmost bin.
RawHistogram compute_raw_histogram(const PointCloud& cloud, const CylinderFrame& cyl,
                                   std::size_t rows, std::size_t sectors);

// Scales by the per-histogram max count and quantizes to 256 levels
// (round half away from zero). Throws EmptyHistogram if all counts are 0.
Histogram normalize_histogram(const RawHistogram& raw);

// Row-major flatten (row 0 first); the exact inverse of unflatten.
std::vector<double> flatten(const Histogram& hist);
Histogram unflatten(std::span<const double> values, std::size_t rows, std::size_t cols);

// Convenience: fit + bin + normalize.
Histogram extract_histogram(const PointCloud& cloud, std::size_t rows, std::size_t sectors);

// Binary format: magic "GHIST1", rows and cols as little-endian uint16,
// then rows*cols bytes holding the 256-level values.
void write_histogram(const std::filesystem::path& file, const Histogram& hist);
Histogram read_histogram(const std::filesystem::path& file);

void write_histogram_csv(const std::filesystem::path& file, const Histogram& hist);

}  // namespace gait
