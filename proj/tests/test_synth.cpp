#include <doctest.h>

#include <cmath>
#include <set>

#include "gait/errors.hpp"
#include "gait/histogram.hpp"
#include "gait/synth.hpp"

using namespace gait;

TEST_CASE("generate_sequence: same seed gives bit-identical clouds") {
    GaitParams p;
    p.points_per_frame = 200;
    p.seed = 314;
    const auto a = generate_sequence(p, 10);
    const auto b = generate_sequence(p, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t f = 0; f < a.size(); ++f) {
        REQUIRE(a[f].points.size() == b[f].points.size());
        for (std::size_t i = 0; i < a[f].points.size(); ++i) {
            CHECK(a[f].points[i].x == b[f].points[i].x);
            CHECK(a[f].points[i].y == b[f].points[i].y);
            CHECK(a[f].points[i].z == b[f].points[i].z);
        }
    }
}

TEST_CASE("generate_sequence: zero amplitude and zero noise freeze the pose") {
    GaitParams p;
    p.points_per_frame = 150;
    p.swing_amp_left = 0.0;
    p.swing_amp_right = 0.0;
    p.noise_sigma = 0.0;
    p.seed = 7;
    const auto frames = generate_sequence(p, 8);
    for (std::size_t f = 1; f < frames.size(); ++f) {
        for (std::size_t i = 0; i < frames[0].points.size(); ++i) {
            CHECK(frames[f].points[i].x == frames[0].points[i].x);
            CHECK(frames[f].points[i].y == frames[0].points[i].y);
            CHECK(frames[f].points[i].z == frames[0].points[i].z);
        }
    }
}

TEST_CASE("generate_sequence: left/right point balance over a full cycle") {
    GaitParams p;
    p.points_per_frame = 1000;
    p.seed = 99;
    p.cycle_frames = 24;
    const auto frames = generate_sequence(p, 24);
    std::size_t left = 0, right = 0;
    for (const auto& cloud : frames) {
        for (const auto& pt : cloud.points) (pt.x < 0 ? left : right)++;
    }
    const double ratio = static_cast<double>(left) / static_cast<double>(left + right);
    CHECK(ratio > 0.45);
    CHECK(ratio < 0.55);
}

TEST_CASE("generate_sequence: clouds satisfy the histogram preconditions") {
    for (const char* mode : {"normal", "sole_15cm_left", "weight_right"}) {
        GaitParams p;
        p.points_per_frame = 400;
        p.seed = 1234;
        if (std::string(mode) == "sole_15cm_left") p.sole_lift_left = 0.15;
        if (std::string(mode) == "weight_right") p.speed_scale_right = 0.75;
        for (const auto& cloud : generate_sequence(p, 30)) {
            const Histogram hist = extract_histogram(cloud, 16, 16);  // must not throw
            CHECK(hist.size() == 256);
            const double top = *std::max_element(hist.values.begin(), hist.values.end());
            CHECK(top == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("generate_sequence: parameter validation") {
    GaitParams p;
    p.cycle_frames = 3;
    CHECK_THROWS_AS(generate_sequence(p, 5), InvalidParams);
    p = {};
    p.noise_sigma = -0.1;
    CHECK_THROWS_AS(generate_sequence(p, 5), InvalidParams);
    p = {};
    p.swing_amp_left = -1.0;
    CHECK_THROWS_AS(generate_sequence(p, 5), InvalidParams);
    p = {};
    CHECK_THROWS_AS(generate_sequence(p, 0), InvalidParams);
}

TEST_CASE("default_benchmark: subject-disjoint split with one label per sequence") {
    BenchmarkConfig cfg;
    cfg.train_subjects = 3;
    cfg.test_subjects = 2;
    cfg.train_seqs_per_subject = 2;
    cfg.test_normal_per_subject = 2;
    cfg.train_frames = 30;
    cfg.test_frames = 40;
    cfg.points_per_frame = 100;
    const Benchmark bench = default_benchmark(2222, cfg);

    CHECK(bench.train.size() == 6);
    CHECK(bench.test.size() == 2 * (2 + 8));  // normals + 8 abnormal modes

    std::set<std::size_t> train_subjects, test_subjects;
    for (const auto& s : bench.train) {
        train_subjects.insert(s.subject);
        CHECK(s.mode == "normal");
        CHECK(!s.abnormal);
    }
    for (const auto& s : bench.test) {
        test_subjects.insert(s.subject);
        CHECK(s.abnormal == (s.mode != "normal"));
    }
    for (std::size_t s : train_subjects) CHECK(test_subjects.count(s) == 0);

    // Unique ids.
    std::set<std::string> ids;
    for (const auto& s : bench.train) ids.insert(s.id);
    for (const auto& s : bench.test) ids.insert(s.id);
    CHECK(ids.size() == bench.train.size() + bench.test.size());
}

TEST_CASE("default_benchmark: regeneration is exact") {
    BenchmarkConfig cfg;
    cfg.train_subjects = 2;
    cfg.test_subjects = 1;
    cfg.points_per_frame = 64;
    const Benchmark a = default_benchmark(5, cfg);
    const Benchmark b = default_benchmark(5, cfg);
    REQUIRE(a.train.size() == b.train.size());
    REQUIRE(a.test.size() == b.test.size());
    for (std::size_t i = 0; i < a.test.size(); ++i) {
        CHECK(a.test[i].id == b.test[i].id);
        CHECK(a.test[i].params.seed == b.test[i].params.seed);
        CHECK(a.test[i].params.phase_offset == b.test[i].params.phase_offset);
        CHECK(a.test[i].params.height_scale == b.test[i].params.height_scale);
    }
}

TEST_CASE("abnormal modes alter the expected side") {
    BenchmarkConfig cfg;
    cfg.train_subjects = 1;
    cfg.test_subjects = 1;
    const Benchmark bench = default_benchmark(1, cfg);
    for (const auto& spec : bench.test) {
        if (spec.mode == "sole_10cm_left") {
            CHECK(spec.params.sole_lift_left == doctest::Approx(0.10));
            CHECK(spec.params.sole_lift_right == 0.0);
        } else if (spec.mode == "weight_right") {
            CHECK(spec.params.speed_scale_right == doctest::Approx(0.75));
            CHECK(spec.params.speed_scale_left == 1.0);
        }
    }
}
