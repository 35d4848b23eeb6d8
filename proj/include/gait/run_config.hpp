#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gait/aae.hpp"
#include "gait/gait_index.hpp"
#include "gait/synth.hpp"

namespace gait {

// Flat key=value run configuration shared by all CLI subcommands. The
// digest covers the semantic parameters (everything except the path-valued
// keys), so reruns into different directories stay byte-identical.
struct RunConfig {
    std::uint64_t seed = 42;

    std::filesystem::path data_dir = "out/data";
    std::filesystem::path hist_dir = "out/hist";
    std::filesystem::path ckpt_dir = "out/ckpt";
    std::filesystem::path scores_dir = "out/scores";
    std::filesystem::path report_dir = "out/report";

    std::size_t hist_rows = 16;
    std::size_t hist_cols = 16;

    BenchmarkConfig bench;

    std::size_t hidden_units = 96;
    std::size_t latent_dim = 16;
    double leaky_slope = 0.2;
    TrainConfig train;
    std::size_t save_interval = 10;

    IndexConfig index;

    std::vector<std::size_t> eval_deltas = {1, 10, 21, 60};

    std::size_t workers = 1;

    std::map<std::string, std::string> raw;  // canonical key -> value
    std::uint64_t digest = 0;
};

// FNV-1a 64 over the sorted non-path key=value lines.
std::uint64_t config_digest(const std::map<std::string, std::string>& kv);
std::string digest_hex(std::uint64_t digest);

std::map<std::string, std::string> load_config_file(const std::filesystem::path& file);

// Builds the typed config from file values plus overrides (later wins),
// then validates. Throws InvalidParams with the offending key.
RunConfig make_run_config(const std::map<std::string, std::string>& file_kv,
                          const std::map<std::string, std::string>& overrides);

}  // namespace gait
