#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gait/point_cloud.hpp"

namespace gait {

// Parameters of the synthetic walker. The body is five sampled segments
// (torso, head, two legs, arm pair); legs swing sinusoidally in
// anti-phase. Abnormal gaits raise one leg by a simulated sole thickness
// or slow one side's swing (simulated ankle weight).
struct GaitParams {
    std::size_t points_per_frame = 1400;
    std::size_t cycle_frames = 26;       // >= 4
    double swing_amp_left = 0.30;        // meters of foot travel, >= 0
    double swing_amp_right = 0.30;
    double sole_lift_left = 0.0;         // meters, simulated sole thickness
    double sole_lift_right = 0.0;
    double speed_scale_left = 1.0;       // swing-speed factor per side
    double speed_scale_right = 1.0;
    double noise_sigma = 0.02;           // meters, >= 0
    double height_scale = 1.0;           // subject body size factor
    double density_scale = 1.0;          // subject point-count factor
    double phase_offset = 0.0;           // radians
    std::uint64_t seed = 0;
};

// Throws InvalidParams on violated bounds.
void validate(const GaitParams& params);

// Deterministic given the seed: a fixed per-sequence point template moves
// through the gait cycle, with fresh per-frame jitter when noise_sigma > 0.
std::vector<PointCloud> generate_sequence(const GaitParams& params, std::size_t n_frames);

struct SequenceSpec {
    std::string id;
    std::string mode;        // normal, sole_{5,10,15}cm_{left,right}, weight_{left,right}
    bool abnormal = false;
    std::size_t subject = 0;
    std::size_t n_frames = 0;
    GaitParams params;
};

struct BenchmarkConfig {
    std::size_t train_subjects = 6;
    std::size_t test_subjects = 4;
    std::size_t train_seqs_per_subject = 2;
    std::size_t test_normal_per_subject = 3;
    std::size_t train_frames = 180;
    std::size_t test_frames = 240;
    std::size_t points_per_frame = 1400;
    std::size_t base_cycle_frames = 22;  // per-subject cadence = base + [0, 8]
    double noise_sigma = 0.02;
    bool all_abnormal_modes = true;  // 8 modes; false keeps sole_10cm_left + weight_left
};

struct Benchmark {
    std::vector<SequenceSpec> train;  // normal gaits only
    std::vector<SequenceSpec> test;   // held-out subjects, normal + abnormal
};

// Subject-disjoint split with per-subject body scale / density / cadence
// variation. Regenerating with the same seed yields identical specs.
Benchmark default_benchmark(std::uint64_t seed, const BenchmarkConfig& cfg = {});

// Writes each sequence as frame_NNNNNN.txt files plus frames.txt, and a
// manifest CSV "sequence_id,label,mode,seed" per split.
void write_sequence(const std::filesystem::path& dir, const SequenceSpec& spec);
void write_manifest(const std::filesystem::path& file, const std::vector<SequenceSpec>& specs);

struct ManifestEntry {
    std::string sequence_id;
    std::string label;  // "normal" | "abnormal"
    std::string mode;
    std::uint64_t seed = 0;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file);

}  // namespace gait
