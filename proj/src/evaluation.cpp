#include "gait/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gait/errors.hpp"

namespace gait {

namespace {

struct ClassCounts {
    std::size_t n_abnormal = 0;
    std::size_t n_normal = 0;
};

ClassCounts check_two_classes(const ScoredSet& s) {
    if (s.scores.size() != s.labels.size() || s.scores.empty())
        throw ShapeMismatch("scored set: scores/labels length mismatch or empty");
    ClassCounts c;
    for (Label l : s.labels) (l == Label::abnormal ? c.n_abnormal : c.n_normal)++;
    if (c.n_abnormal == 0 || c.n_normal == 0)
        throw SingleClass("ROC metrics need both classes present");
    return c;
}

}  // namespace

std::vector<RocPoint> roc_curve(const ScoredSet& s) {
    const ClassCounts c = check_two_classes(s);

    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.scores[a] > s.scores[b];
    });

    std::vector<RocPoint> curve;
    curve.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    // One vertex per distinct score value; ties advance together.
    while (i < order.size()) {
        const double value = s.scores[order[i]];
        while (i < order.size() && s.scores[order[i]] == value) {
            (s.labels[order[i]] == Label::abnormal ? tp : fp)++;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(c.n_normal),
                         static_cast<double>(tp) / static_cast<double>(c.n_abnormal)});
    }
    return curve;
}

double auc(const ScoredSet& s) {
    const std::vector<RocPoint> curve = roc_curve(s);
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    return area;
}

double eer(const ScoredSet& s) {
    const std::vector<RocPoint> curve = roc_curve(s);
    // Walk the curve until FPR - FNR changes sign, then interpolate on the
    // crossing segment. d starts at -1 (FPR 0, FNR 1) and ends at +1.
    double prev_d = curve.front().fpr - (1.0 - curve.front().tpr);
    if (prev_d == 0.0) return curve.front().fpr;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double d = curve[i].fpr - (1.0 - curve[i].tpr);
        if (d == 0.0) return curve[i].fpr;
        if (d > 0.0) {
            const double alpha = -prev_d / (d - prev_d);
            return curve[i - 1].fpr + alpha * (curve[i].fpr - curve[i - 1].fpr);
        }
        prev_d = d;
    }
    return curve.back().fpr;  // unreachable: d ends at +1
}

ScoredSet orient(const ScoredSet& s, bool* flipped) {
    const double raw = auc(s);
    if (raw >= 0.5) {
        if (flipped) *flipped = false;
        return s;
    }
    ScoredSet out = s;
    for (double& v : out.scores) v = -v;
    if (flipped) *flipped = true;
    return out;
}

std::vector<double> aggregate(std::span<const double> frame_scores, std::size_t delta,
                              SegmentMode mode) {
    if (delta < 1) throw InvalidParams("segment length must be >= 1");
    if (delta > frame_scores.size())
        throw SegmentTooLong("segment length " + std::to_string(delta) +
                             " exceeds sequence length " + std::to_string(frame_scores.size()));
    std::vector<double> out;
    const double inv_d = 1.0 / static_cast<double>(delta);
    if (mode == SegmentMode::non_overlapping) {
        // Trailing remainder dropped.
        for (std::size_t start = 0; start + delta <= frame_scores.size(); start += delta) {
            double sum = 0.0;
            for (std::size_t i = start; i < start + delta; ++i) sum += frame_scores[i];
            out.push_back(sum * inv_d);
        }
    } else {
        for (std::size_t start = 0; start + delta <= frame_scores.size(); ++start) {
            double sum = 0.0;
            for (std::size_t i = start; i < start + delta; ++i) sum += frame_scores[i];
            out.push_back(sum * inv_d);
        }
    }
    return out;
}

double sequence_score(std::span<const double> frame_scores) {
    if (frame_scores.empty()) throw EmptySequence("sequence_score: empty sequence");
    double sum = 0.0;
    for (double v : frame_scores) sum += v;
    return sum / static_cast<double>(frame_scores.size());
}

RangeSummary evaluate_epoch_range(std::span<const ScoredSet> per_checkpoint) {
    if (per_checkpoint.empty()) throw EmptyDataset("evaluate_epoch_range: no checkpoints");
    RangeSummary summary;
    for (const ScoredSet& s : per_checkpoint) {
        bool flipped = false;
        const ScoredSet o = orient(s, &flipped);
        summary.aucs.push_back(auc(o));
        summary.eers.push_back(eer(o));
        summary.flipped.push_back(flipped);
    }
    summary.auc_mean = std::accumulate(summary.aucs.begin(), summary.aucs.end(), 0.0) /
                       static_cast<double>(summary.aucs.size());
    summary.eer_mean = std::accumulate(summary.eers.begin(), summary.eers.end(), 0.0) /
                       static_cast<double>(summary.eers.size());
    return summary;
}

}  // namespace gait
