#include "gait/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gait/errors.hpp"
#include "io_util.hpp"

namespace gait {

std::uint64_t RawHistogram::total() const {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    return sum;
}

CylinderFrame fit_cylinder(const PointCloud& cloud) {
    const auto& pts = cloud.points;
    if (pts.size() < 2)
        throw DegenerateCloud("frame " + std::to_string(cloud.frame_index) +
                              ": need at least 2 points, got " + std::to_string(pts.size()));

    CylinderFrame cyl;
    double sx = 0.0, sy = 0.0;
    cyl.z_min = pts.front().z;
    cyl.z_max = pts.front().z;
    for (const Point3& p : pts) {
        sx += p.x;
        sy += p.y;
        cyl.z_min = std::min(cyl.z_min, p.z);
        cyl.z_max = std::max(cyl.z_max, p.z);
    }
    cyl.centroid_x = sx / static_cast<double>(pts.size());
    cyl.centroid_y = sy / static_cast<double>(pts.size());
    if (!(cyl.z_max > cyl.z_min))
        throw DegenerateCloud("frame " + std::to_string(cloud.frame_index) +
                              ": no vertical extent");

    double r2_max = 0.0;
    for (const Point3& p : pts) {
        const double dx = p.x - cyl.centroid_x;
        const double dy = p.y - cyl.centroid_y;
        r2_max = std::max(r2_max, dx * dx + dy * dy);
    }
    cyl.radius = std::sqrt(r2_max);
    if (!(cyl.radius > 0.0))
        throw DegenerateCloud("frame " + std::to_string(cloud.frame_index) +
                              ": all points on the cylinder axis");
    return cyl;
}

RawHistogram compute_raw_histogram(const PointCloud& cloud, const CylinderFrame& cyl,
                                   std::size_t rows, std::size_t sectors) {
    if (rows < 1 || sectors < 1) throw InvalidParams("histogram needs rows >= 1 and sectors >= 1");
    if (!(cyl.z_max > cyl.z_min)) throw DegenerateCloud("invalid cylinder: z_max <= z_min");

    RawHistogram raw;
    raw.rows = rows;
    raw.cols = sectors;
    raw.counts.assign(rows * sectors, 0);

    const double z_span = cyl.z_max - cyl.z_min;
    const double two_pi = 2.0 * std::numbers::pi;
    for (const Point3& p : cloud.points) {
        auto row = static_cast<std::int64_t>(
            std::floor((p.z - cyl.z_min) / z_span * static_cast<double>(rows)));
        row = std::clamp<std::int64_t>(row, 0, static_cast<std::int64_t>(rows) - 1);

        // Angular origin points towards -x; columns increase counter-clockwise.
        const double angle = std::atan2(p.y - cyl.centroid_y, p.x - cyl.centroid_x);
        auto col = static_cast<std::int64_t>(
            std::floor((angle + std::numbers::pi) / two_pi * static_cast<double>(sectors)));
        col = std::clamp<std::int64_t>(col, 0, static_cast<std::int64_t>(sectors) - 1);

        ++raw.counts[static_cast<std::size_t>(row) * sectors + static_cast<std::size_t>(col)];
    }
    return raw;
}

Histogram normalize_histogram(const RawHistogram& raw) {
    const std::uint64_t max_count = *std::max_element(raw.counts.begin(), raw.counts.end());
    if (max_count == 0) throw EmptyHistogram("all histogram counts are zero");

    Histogram hist;
    hist.rows = raw.rows;
    hist.cols = raw.cols;
    hist.values.resize(raw.counts.size());
    for (std::size_t i = 0; i < raw.counts.size(); ++i) {
        const double v = static_cast<double>(raw.counts[i]) / static_cast<double>(max_count);
        hist.values[i] = std::round(v * 255.0) / 255.0;
    }
    return hist;
}

std::vector<double> flatten(const Histogram& hist) { return hist.values; }

Histogram unflatten(std::span<const double> values, std::size_t rows, std::size_t cols) {
    if (values.size() != rows * cols)
        throw ShapeMismatch("unflatten: got " + std::to_string(values.size()) +
                            " values for a " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " grid");
    Histogram hist;
    hist.rows = rows;
    hist.cols = cols;
    hist.values.assign(values.begin(), values.end());
    return hist;
}

Histogram extract_histogram(const PointCloud& cloud, std::size_t rows, std::size_t sectors) {
    const CylinderFrame cyl = fit_cylinder(cloud);
    return normalize_histogram(compute_raw_histogram(cloud, cyl, rows, sectors));
}

namespace {
constexpr char kHistMagic[6] = {'G', 'H', 'I', 'S', 'T', '1'};
}

void write_histogram(const std::filesystem::path& file, const Histogram& hist) {
    auto out = detail::open_out(file, /*binary=*/true);
    detail::write_bytes(out, kHistMagic, sizeof(kHistMagic));
    detail::write_u16le(out, static_cast<std::uint16_t>(hist.rows));
    detail::write_u16le(out, static_cast<std::uint16_t>(hist.cols));
    for (double v : hist.values) {
        const double level = std::round(v * 255.0);
        detail::write_u8(out, static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0)));
    }
    if (!out) throw IoError("write failed: " + file.string());
}

Histogram read_histogram(const std::filesystem::path& file) {
    auto in = detail::open_in(file, /*binary=*/true);
    char magic[6];
    detail::read_bytes(in, magic, sizeof(magic), "histogram magic");
    if (!std::equal(magic, magic + 6, kHistMagic))
        throw FormatError("bad histogram magic in " + file.string());
    Histogram hist;
    hist.rows = detail::read_u16le(in, "rows");
    hist.cols = detail::read_u16le(in, "cols");
    hist.values.resize(hist.rows * hist.cols);
    for (double& v : hist.values)
        v = static_cast<double>(detail::read_u8(in, "histogram bin")) / 255.0;
    return hist;
}

void write_histogram_csv(const std::filesystem::path& file, const Histogram& hist) {
    auto out = detail::open_out(file);
    for (std::size_t r = 0; r < hist.rows; ++r) {
        for (std::size_t c = 0; c < hist.cols; ++c) {
            if (c) out << ',';
            out << detail::fmt_double(hist.at(r, c));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace gait
