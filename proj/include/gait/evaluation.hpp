#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gait {

enum class Label : int { normal = 0, abnormal = 1 };

// Scores aligned with class labels. The abnormal class is the positive
// class; higher scores mean "more abnormal" once oriented.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<Label> labels;

    std::size_t size() const { return scores.size(); }
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

// Thresholds at every distinct score; runs from (0,0) to (1,1), monotone
// in both axes. Throws SingleClass unless both classes are present.
std::vector<RocPoint> roc_curve(const ScoredSet& s);

// Trapezoidal area under the ROC curve; equals the Mann-Whitney statistic
// P(score_abn > score_norm) + 1/2 P(tie).
double auc(const ScoredSet& s);

// Operating point where FPR = FNR, linearly interpolated between adjacent
// ROC vertices.
double eer(const ScoredSet& s);

// Negates the scores when the raw AUC is below 0.5 so that higher always
// means more abnormal; `flipped` reports whether that happened.
ScoredSet orient(const ScoredSet& s, bool* flipped = nullptr);

enum class SegmentMode { non_overlapping, sliding };

// Means over windows of delta consecutive frames. Non-overlapping windows
// drop the trailing remainder; sliding windows use stride 1. Throws
// SegmentTooLong if delta exceeds the sequence length.
std::vector<double> aggregate(std::span<const double> frame_scores, std::size_t delta,
                              SegmentMode mode);

// Arithmetic mean over the whole sequence. Throws EmptySequence.
double sequence_score(std::span<const double> frame_scores);

// Metrics per model checkpoint plus their means over the epoch range. Each
// set is oriented independently before computing AUC/EER.
struct RangeSummary {
    std::vector<double> aucs;
    std::vector<double> eers;
    std::vector<bool> flipped;
    double auc_mean = 0.0;
    double eer_mean = 0.0;
};

RangeSummary evaluate_epoch_range(std::span<const ScoredSet> per_checkpoint);

}  // namespace gait
