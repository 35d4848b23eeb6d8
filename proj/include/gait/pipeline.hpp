#pragma once

#include <cstddef>

#include "gait/run_config.hpp"

namespace gait {

// Subcommand bodies, shared by the CLI and the test suites. All throw on
// fatal errors; the CLI maps exception types to exit codes.

// Generates the synthetic benchmark dataset under cfg.data_dir.
void run_synth(const RunConfig& cfg);

// Extracts one histogram file per frame under cfg.hist_dir. Degenerate
// clouds are reported and skipped; the return value is the number of
// rejected frames (nonzero means partial failure).
std::size_t run_extract(const RunConfig& cfg);

// Trains the model on the normal training histograms; writes checkpoints,
// the training-log CSV and the stable-window record under cfg.ckpt_dir.
// When `resume_from` is nonzero, continues from that saved epoch.
void run_train(const RunConfig& cfg, std::size_t resume_from = 0);

// Scores the test sequences with every checkpoint in the stable window;
// one CSV per (checkpoint, sequence) under cfg.scores_dir.
void run_score(const RunConfig& cfg);

// Aggregates score CSVs into AUC/EER tables across aggregation levels and
// segment lengths, averaged over the stable window; writes report files
// under cfg.report_dir.
void run_eval(const RunConfig& cfg);

}  // namespace gait
