#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gait/aae.hpp"
#include "gait/gait_index.hpp"

namespace gait {

// Snapshot of a training run: model parameters, optimizer moments (so a
// resumed run continues bit-identically), loss history, and the measure
// weights computed from the training set with this model state.
struct Checkpoint {
    std::uint32_t epoch = 0;  // completed epochs, 1-based count
    std::uint64_t config_digest = 0;
    AaeModel model;
    PriorSpec prior;
    IndexConfig index_cfg;
    MeasureWeights weights;
    std::vector<EpochLosses> history;
    // Adam moments; sized enc+dec and enc respectively.
    std::vector<double> adam_ae_m, adam_ae_v;
    std::uint64_t adam_ae_step = 0;
    std::vector<double> adam_q_m, adam_q_v;
    std::uint64_t adam_q_step = 0;
};

// Binary file: magic "GAAE1", version byte, config digest, then the fields
// above with all floats as little-endian doubles; parameters in the
// documented flat order (encoder, decoder, discriminator; per layer
// weights row-major then biases). Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace gait
