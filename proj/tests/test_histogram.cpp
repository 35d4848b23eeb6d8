#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "gait/errors.hpp"
#include "gait/histogram.hpp"
#include "gait/rng.hpp"

using namespace gait;

namespace {

PointCloud random_cloud(Rng& rng, std::size_t n) {
    PointCloud cloud;
    for (std::size_t i = 0; i < n; ++i)
        cloud.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 2)});
    return cloud;
}

}  // namespace

TEST_CASE("fit_cylinder: axis through centroid, bases at extremes, tight radius") {
    PointCloud cloud;
    cloud.points = {{1, 0, 0}, {-1, 0, 0}, {0, 0, 1}};
    const CylinderFrame cyl = fit_cylinder(cloud);
    CHECK(cyl.centroid_x == doctest::Approx(0.0));
    CHECK(cyl.centroid_y == doctest::Approx(0.0));
    CHECK(cyl.z_min == doctest::Approx(0.0));
    CHECK(cyl.z_max == doctest::Approx(1.0));
    CHECK(cyl.radius == doctest::Approx(1.0));
}

TEST_CASE("fit_cylinder: degenerate clouds are rejected") {
    PointCloud one;
    one.points = {{0, 0, 0}};
    CHECK_THROWS_AS(fit_cylinder(one), DegenerateCloud);

    PointCloud flat;
    flat.points = {{0, 0, 1}, {1, 0, 1}};
    CHECK_THROWS_AS(fit_cylinder(flat), DegenerateCloud);

    // Two points on the axis: z extent fine but radius 0.
    PointCloud axial;
    axial.points = {{0, 0, 0}, {0, 0, 2}};
    CHECK_THROWS_AS(fit_cylinder(axial), DegenerateCloud);
}

TEST_CASE("fit_cylinder: radius is the exact max radial distance") {
    Rng rng(42);
    const PointCloud cloud = random_cloud(rng, 1000);
    const CylinderFrame cyl = fit_cylinder(cloud);
    double max_r = 0.0;
    bool touched = false;
    for (const Point3& p : cloud.points) {
        const double r = std::hypot(p.x - cyl.centroid_x, p.y - cyl.centroid_y);
        CHECK(r <= cyl.radius + 1e-12);
        max_r = std::max(max_r, r);
        if (std::abs(r - cyl.radius) < 1e-12) touched = true;
    }
    CHECK(touched);
    CHECK(cyl.radius == doctest::Approx(max_r));
}

TEST_CASE("raw histogram: all points in one cell") {
    PointCloud cloud;
    for (int i = 0; i < 4; ++i) cloud.points.push_back({0.5, 0.5, 0.25});
    cloud.points.push_back({-0.5, -0.5, 0.0});
    cloud.points.push_back({0.0, 0.1, 1.0});
    const CylinderFrame cyl = fit_cylinder(cloud);
    const RawHistogram raw = compute_raw_histogram(cloud, cyl, 4, 4);
    CHECK(raw.total() == cloud.points.size());
    std::uint64_t biggest = 0;
    for (auto c : raw.counts) biggest = std::max(biggest, c);
    CHECK(biggest == 4);
}

TEST_CASE("raw histogram: eight sectors get one point each") {
    // Points on a unit circle at angles k*45deg + 1deg, same height band.
    PointCloud cloud;
    const double deg = std::numbers::pi / 180.0;
    for (int k = 0; k < 8; ++k) {
        const double a = (45.0 * k + 1.0) * deg;
        cloud.points.push_back({std::cos(a), std::sin(a), 0.5});
    }
    // Anchor points near the axis pin the z range; they land in the bottom
    // and (clamped) top rows, away from the circle's middle row.
    cloud.points.push_back({0.0, 1e-9, 0.0});
    cloud.points.push_back({0.0, 1e-9, 1.0});
    const CylinderFrame cyl = fit_cylinder(cloud);
    const RawHistogram raw = compute_raw_histogram(cloud, cyl, 3, 8);
    for (std::size_t c = 0; c < 8; ++c) {
        CHECK(raw.at(1, c) == 1);
    }
    CHECK(raw.total() == cloud.points.size());
}

TEST_CASE("raw histogram: partition property on random clouds") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const PointCloud cloud = random_cloud(rng, 100 + rng.uniform_int(400));
        const CylinderFrame cyl = fit_cylinder(cloud);
        const RawHistogram raw = compute_raw_histogram(cloud, cyl, 16, 16);
        CHECK(raw.total() == cloud.points.size());
    }
}

TEST_CASE("normalize: max bin maps to 1, 256 levels") {
    RawHistogram raw;
    raw.rows = 1;
    raw.cols = 3;
    raw.counts = {10, 5, 0};
    const Histogram hist = normalize_histogram(raw);
    CHECK(hist.values[0] == doctest::Approx(1.0));
    CHECK(hist.values[1] == doctest::Approx(128.0 / 255.0));  // round(0.5*255) = 128
    CHECK(hist.values[2] == doctest::Approx(0.0));
}

TEST_CASE("normalize: equal counts map to all ones; empty throws") {
    RawHistogram raw;
    raw.rows = 2;
    raw.cols = 2;
    raw.counts = {3, 3, 3, 3};
    const Histogram hist = normalize_histogram(raw);
    for (double v : hist.values) CHECK(v == doctest::Approx(1.0));

    raw.counts = {0, 0, 0, 0};
    CHECK_THROWS_AS(normalize_histogram(raw), EmptyHistogram);
}

TEST_CASE("normalize: every value is a 256-level quantile") {
    Rng rng(11);
    const PointCloud cloud = random_cloud(rng, 1200);
    const Histogram hist = extract_histogram(cloud, 16, 16);
    for (double v : hist.values) {
        const double scaled = v * 255.0;
        CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("normalize: duplicating every point leaves the histogram unchanged") {
    Rng rng(13);
    PointCloud cloud = random_cloud(rng, 500);
    const Histogram one = extract_histogram(cloud, 16, 16);
    PointCloud doubled = cloud;
    doubled.points.insert(doubled.points.end(), cloud.points.begin(), cloud.points.end());
    const Histogram two = extract_histogram(doubled, 16, 16);
    CHECK(one.values == two.values);
}

TEST_CASE("flatten: row-major with exact inverse") {
    Histogram hist;
    hist.rows = 16;
    hist.cols = 16;
    hist.values.assign(256, 0.0);
    hist.values[3 * 16 + 5] = 1.0;  // row 3, col 5
    const std::vector<double> flat = flatten(hist);
    CHECK(flat.size() == 256);
    CHECK(flat[3 * 16 + 5] == 1.0);
    const Histogram back = unflatten(flat, 16, 16);
    CHECK(back.values == hist.values);
    CHECK_THROWS_AS(unflatten(flat, 4, 4), ShapeMismatch);
}

TEST_CASE("rotation by one sector permutes histogram columns cyclically") {
    Rng rng(21);
    const std::size_t sectors = 16;
    const double sector_angle = 2.0 * std::numbers::pi / static_cast<double>(sectors);
    for (int trial = 0; trial < 20; ++trial) {
        // Angles placed strictly inside sector interiors.
        PointCloud cloud;
        const std::size_t n = 300;
        for (std::size_t i = 0; i < n; ++i) {
            const double frac = 0.1 + 0.8 * rng.uniform();
            const double angle = (static_cast<double>(rng.uniform_int(sectors)) + frac) *
                                     sector_angle - std::numbers::pi;
            const double r = 0.2 + 0.8 * rng.uniform();
            cloud.points.push_back({r * std::cos(angle), r * std::sin(angle), rng.uniform(0, 1)});
        }
        const CylinderFrame cyl = fit_cylinder(cloud);
        const RawHistogram raw = compute_raw_histogram(cloud, cyl, 8, sectors);

        PointCloud rotated;
        for (const Point3& p : cloud.points) {
            const double dx = p.x - cyl.centroid_x;
            const double dy = p.y - cyl.centroid_y;
            const double c = std::cos(sector_angle), s = std::sin(sector_angle);
            rotated.points.push_back(
                {cyl.centroid_x + c * dx - s * dy, cyl.centroid_y + s * dx + c * dy, p.z});
        }
        const CylinderFrame cyl2 = fit_cylinder(rotated);
        const RawHistogram raw2 = compute_raw_histogram(rotated, cyl2, 8, sectors);
        for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t c = 0; c < sectors; ++c)
                CHECK(raw2.at(r, (c + 1) % sectors) == raw.at(r, c));
    }
}

TEST_CASE("histogram file: binary round trip and magic check") {
    Rng rng(31);
    const PointCloud cloud = random_cloud(rng, 800);
    const Histogram hist = extract_histogram(cloud, 16, 16);

    const auto dir = std::filesystem::temp_directory_path() / "gait_hist_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "h.ghist";
    write_histogram(file, hist);
    const Histogram back = read_histogram(file);
    CHECK(back.rows == hist.rows);
    CHECK(back.cols == hist.cols);
    CHECK(back.values == hist.values);

    // Corrupt the magic.
    {
        std::ofstream out(file, std::ios::binary);
        out << "BOGUS1";
    }
    CHECK_THROWS_AS(read_histogram(file), FormatError);

    write_histogram_csv(dir / "h.csv", hist);
    CHECK(std::filesystem::exists(dir / "h.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("point cloud text round trip") {
    Rng rng(37);
    const PointCloud cloud = random_cloud(rng, 100);
    const auto dir = std::filesystem::temp_directory_path() / "gait_cloud_test";
    std::filesystem::create_directories(dir);
    save_point_cloud(dir / "c.txt", cloud);
    const PointCloud back = load_point_cloud(dir / "c.txt", cloud.frame_index);
    REQUIRE(back.points.size() == cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        CHECK(back.points[i].x == cloud.points[i].x);
        CHECK(back.points[i].y == cloud.points[i].y);
        CHECK(back.points[i].z == cloud.points[i].z);
    }
    std::filesystem::remove_all(dir);
}
