#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gait/nn.hpp"
#include "gait/rng.hpp"

namespace gait {

// Network sizes: encoder in -> hidden (leaky ReLU) -> latent, decoder
// latent -> hidden (leaky ReLU) -> in (sigmoid), discriminator latent ->
// hidden (leaky ReLU) -> 1 (sigmoid).
struct AaeArch {
    std::size_t input = 256;
    std::size_t hidden = 96;
    std::size_t latent = 16;
    double leaky_slope = 0.2;
};

struct AaeModel {
    AaeArch arch;
    nn::Mlp encoder;
    nn::Mlp decoder;
    nn::Mlp discriminator;
};

AaeModel make_aae(const AaeArch& arch, Rng& rng);

// Zero-mean multivariate normal with scalar covariance sigma2 * I.
struct PriorSpec {
    std::size_t dim = 16;
    double sigma2 = 1.0;
};

std::vector<double> sample_prior(const PriorSpec& prior, Rng& rng);

std::vector<double> encode(const AaeModel& model, std::span<const double> x);
std::vector<double> decode(const AaeModel& model, std::span<const double> z);
double discriminate(const AaeModel& model, std::span<const double> z);

using Batch = std::vector<std::vector<double>>;

// Mean cross-entropy of X against its reconstruction, over elements and
// batch.
double loss_ae(const AaeModel& model, const Batch& xs);

// (1/2n) sum_i [ -log D(z~_i) - log(1 - D(Q(x_i))) ] + (gamma/2) R_D.
double loss_d(const AaeModel& model, const Batch& xs, const Batch& prior_zs, double gamma);

// R_D: (1 - D(z~))^2 |grad logit|^2 averaged over prior samples plus
// D(z)^2 |grad logit|^2 averaged over encoded samples.
double gradient_penalty(const AaeModel& model, const Batch& prior_zs, const Batch& encoded_zs);

// (1/n) sum_i [ -log D(Q(x_i)) ].
double loss_q(const AaeModel& model, const Batch& xs);

// Loss values plus exact parameter gradients (accumulated into the given
// Grads; callers zero them first). These are what the training schedule
// steps on, and what the finite-difference checks verify.
double loss_ae_grads(const AaeModel& model, const Batch& xs, nn::Grads& enc_grads,
                     nn::Grads& dec_grads);
double loss_d_grads(const AaeModel& model, const Batch& xs, const Batch& prior_zs, double gamma,
                    nn::Grads& disc_grads);
double loss_q_grads(const AaeModel& model, const Batch& xs, nn::Grads& enc_grads);

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 64;
    double lr_ae = 1e-3;   // Adam, encoder+decoder on the reconstruction loss
    double lr_d = 1e-2;    // SGD, discriminator
    double lr_q = 1e-4;    // Adam, encoder on the generator loss
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double gamma0 = 0.1;         // initial regularizer weight
    double gamma_decay = 0.99;   // gamma_epoch = gamma0 * decay^epoch
    double prior_sigma2 = 1.0;
    std::uint64_t seed = 0;
    std::size_t stable_window = 100;
};

struct EpochLosses {
    double ae = 0.0;
    double d = 0.0;
    double q = 0.0;
};

// Owns the three optimizer states across epochs. Each epoch draws its
// minibatch order and prior samples from a substream derived from
// (seed, epoch), so training resumed from a checkpoint continues exactly
// like an uninterrupted run.
class Trainer {
  public:
    Trainer(AaeModel& model, const TrainConfig& cfg);

    // One pass over the dataset: per minibatch an Adam step on
    // encoder+decoder (reconstruction), an SGD step on the discriminator
    // with fresh prior samples, then an Adam step on the encoder
    // (generator loss). Throws EmptyDataset.
    EpochLosses run_epoch(const Batch& dataset);

    std::size_t completed_epochs() const { return epoch_; }
    const std::vector<EpochLosses>& history() const { return history_; }
    const TrainConfig& config() const { return cfg_; }

    // Checkpoint restore hooks.
    nn::AdamState& adam_ae_state() { return adam_ae_; }
    nn::AdamState& adam_q_state() { return adam_q_; }
    void restore(std::size_t completed_epochs, std::vector<EpochLosses> history);

  private:
    AaeModel& model_;
    TrainConfig cfg_;
    nn::AdamState adam_ae_;
    nn::AdamState adam_q_;
    nn::SgdState sgd_d_;
    std::size_t epoch_ = 0;
    std::vector<EpochLosses> history_;
};

// Contiguous range of `window` epochs minimizing the variance of
// L_D + L_Q; ties resolved to the earliest start. Returns {first, last}
// as 0-based inclusive epoch indices. Throws HistoryTooShort.
struct EpochRange {
    std::size_t first = 0;
    std::size_t last = 0;
};

EpochRange select_stable_window(std::span<const EpochLosses> history, std::size_t window = 100);

}  // namespace gait
