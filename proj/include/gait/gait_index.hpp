#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "gait/aae.hpp"
#include "gait/histogram.hpp"

namespace gait {

// Per-frame partial measures and their weighted combination. recon is the
// reconstruction RMSE (grows with abnormality); prior and disc are the
// scaled prior density and discriminator output (shrink with abnormality).
struct FrameMeasures {
    double recon = 0.0;
    double prior = 0.0;
    double disc = 0.0;
    double combined = 0.0;
};

struct IndexConfig {
    double exponent = 1.0 / 8.0;  // applied to the prior measure, 0 < u <= 1
    bool use_recon = true;
    bool use_prior = true;
    bool use_disc = true;
};

// w_i = (sum of masked-in s_j) / s_i where s_i is the training mean of
// measure i (prior measure after the exponent); masked-out weights are 0.
struct MeasureWeights {
    double w_recon = 0.0;
    double w_prior = 0.0;
    double w_disc = 0.0;
    double s_recon = 0.0;
    double s_prior = 0.0;
    double s_disc = 0.0;
};

// ||x - xhat||_2 / sqrt(m).
double measure_recon(std::span<const double> x, std::span<const double> xhat);

// Density ratio f(z|P)/f(0|P) = exp(-|z|^2 / (2 sigma2)) in (0, 1].
double measure_prior(std::span<const double> z, const PriorSpec& prior);

double measure_disc(const AaeModel& model, std::span<const double> z);

// y^u; monotone, so ROC metrics of the transformed measure are unchanged.
double apply_exponent(double y, double u);

// Raw (uncombined) measures for a batch of flattened histograms.
std::vector<FrameMeasures> measure_frames(const AaeModel& model, const PriorSpec& prior,
                                          const Batch& xs);

// Throws ZeroMeanMeasure if a masked-in mean is zero.
MeasureWeights compute_weights(std::span<const FrameMeasures> training, const IndexConfig& cfg);

double combine(const FrameMeasures& m, const MeasureWeights& w, const IndexConfig& cfg);

// encode -> decode -> discriminate -> measures -> combined.
FrameMeasures score_frame(const AaeModel& model, const PriorSpec& prior,
                          const MeasureWeights& w, const IndexConfig& cfg,
                          const Histogram& hist);

// Score CSV: header "frame_index,y_ae,y_p,y_d,combined", one row per frame.
struct ScoredFrame {
    std::size_t frame_index = 0;
    FrameMeasures measures;
};

void write_scores_csv(const std::filesystem::path& file, std::span<const ScoredFrame> rows,
                      std::uint64_t config_digest);
std::vector<ScoredFrame> read_scores_csv(const std::filesystem::path& file);

}  // namespace gait
