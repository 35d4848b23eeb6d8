#include "gait/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include "gait/checkpoint.hpp"
#include "gait/errors.hpp"
#include "gait/evaluation.hpp"
#include "gait/histogram.hpp"
#include "io_util.hpp"

namespace gait {

namespace {

namespace fs = std::filesystem;

// Index-sharded loop; each task must only touch its own slot/files so the
// results are identical for any worker count.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min(workers, n);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string epoch_dir_name(std::size_t epoch) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "epoch_%04zu", epoch);
    return buf;
}

std::string checkpoint_name(std::size_t epoch) { return epoch_dir_name(epoch) + ".gaae"; }

std::size_t parse_frame_index(const std::string& name) {
    std::size_t begin = std::string::npos, end = std::string::npos;
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(name[i]))) {
            if (begin == std::string::npos) begin = i;
            end = i + 1;
        }
    }
    if (begin == std::string::npos) throw FormatError("no frame index in name: " + name);
    return static_cast<std::size_t>(std::stoull(name.substr(begin, end - begin)));
}

std::vector<ManifestEntry> read_split_manifests(const RunConfig& cfg, bool train, bool test) {
    std::vector<ManifestEntry> entries;
    if (train) {
        auto part = read_manifest(cfg.data_dir / "train_manifest.csv");
        entries.insert(entries.end(), part.begin(), part.end());
    }
    if (test) {
        auto part = read_manifest(cfg.data_dir / "test_manifest.csv");
        entries.insert(entries.end(), part.begin(), part.end());
    }
    return entries;
}

// Flattened histograms of one sequence in frame order, with frame indices.
struct SequenceData {
    std::vector<std::size_t> frame_indices;
    Batch xs;
};

SequenceData load_sequence_histograms(const RunConfig& cfg, const std::string& sequence_id) {
    const fs::path seq_dir = cfg.hist_dir / sequence_id;
    SequenceData data;
    for (const std::string& name : load_frame_manifest(seq_dir / "frames.txt")) {
        const Histogram hist = read_histogram(seq_dir / name);
        if (hist.rows != cfg.hist_rows || hist.cols != cfg.hist_cols)
            throw FormatError("histogram " + name + " is " + std::to_string(hist.rows) + "x" +
                              std::to_string(hist.cols) + ", expected " +
                              std::to_string(cfg.hist_rows) + "x" + std::to_string(cfg.hist_cols));
        data.frame_indices.push_back(parse_frame_index(name));
        data.xs.push_back(flatten(hist));
    }
    return data;
}

std::vector<std::size_t> checkpoint_epochs(const RunConfig& cfg) {
    std::vector<std::size_t> epochs;
    for (std::size_t e = cfg.save_interval; e <= cfg.train.epochs; e += cfg.save_interval)
        epochs.push_back(e);
    if (epochs.empty() || epochs.back() != cfg.train.epochs) epochs.push_back(cfg.train.epochs);
    return epochs;
}

struct StableWindow {
    std::size_t first_epoch = 0;  // 1-based, inclusive
    std::size_t last_epoch = 0;
};

void write_stable_window(const RunConfig& cfg, const StableWindow& w) {
    auto out = detail::open_out(cfg.ckpt_dir / "stable_window.csv");
    out << "# config_digest=" << digest_hex(cfg.digest) << '\n';
    out << "start_epoch,end_epoch\n" << w.first_epoch << ',' << w.last_epoch << '\n';
}

StableWindow read_stable_window(const RunConfig& cfg) {
    auto in = detail::open_in(cfg.ckpt_dir / "stable_window.csv");
    std::string line;
    StableWindow w;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("start_epoch", 0) == 0) continue;
        if (std::sscanf(line.c_str(), "%zu,%zu", &w.first_epoch, &w.last_epoch) != 2)
            throw FormatError("malformed stable_window.csv row: " + line);
        return w;
    }
    throw FormatError("stable_window.csv has no data row");
}

AaeArch arch_from_config(const RunConfig& cfg) {
    return {cfg.hist_rows * cfg.hist_cols, cfg.hidden_units, cfg.latent_dim, cfg.leaky_slope};
}

}  // namespace

void run_synth(const RunConfig& cfg) {
    const Benchmark bench = default_benchmark(cfg.seed, cfg.bench);
    fs::create_directories(cfg.data_dir);

    std::vector<const SequenceSpec*> all;
    for (const auto& spec : bench.train) all.push_back(&spec);
    for (const auto& spec : bench.test) all.push_back(&spec);
    parallel_for(all.size(), cfg.workers,
                 [&](std::size_t i) { write_sequence(cfg.data_dir, *all[i]); });

    write_manifest(cfg.data_dir / "train_manifest.csv", bench.train);
    write_manifest(cfg.data_dir / "test_manifest.csv", bench.test);
}

std::size_t run_extract(const RunConfig& cfg) {
    const std::vector<ManifestEntry> entries = read_split_manifests(cfg, true, true);
    if (entries.empty()) throw EmptyDataset("no sequences in dataset manifests");
    fs::create_directories(cfg.hist_dir);

    struct SeqResult {
        std::size_t n_frames = 0;
        std::size_t n_extracted = 0;
    };
    std::vector<SeqResult> results(entries.size());
    std::mutex log_mutex;

    parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
        const std::string& seq_id = entries[i].sequence_id;
        const fs::path src_dir = cfg.data_dir / seq_id;
        const fs::path dst_dir = cfg.hist_dir / seq_id;
        fs::create_directories(dst_dir);

        std::vector<std::string> out_names;
        const std::vector<std::string> frames = load_frame_manifest(src_dir / "frames.txt");
        results[i].n_frames = frames.size();
        for (const std::string& frame_name : frames) {
            const PointCloud cloud =
                load_point_cloud(src_dir / frame_name, parse_frame_index(frame_name));
            try {
                const Histogram hist = extract_histogram(cloud, cfg.hist_rows, cfg.hist_cols);
                std::string out_name = frame_name;
                const std::size_t dot = out_name.rfind('.');
                out_name = out_name.substr(0, dot) + ".ghist";
                write_histogram(dst_dir / out_name, hist);
                out_names.push_back(out_name);
            } catch (const DegenerateCloud& e) {
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "extract: skipping " << seq_id << "/" << frame_name << ": "
                          << e.what() << '\n';
            }
        }
        results[i].n_extracted = out_names.size();
        save_frame_manifest(dst_dir / "frames.txt", out_names);
    });

    std::size_t rejected = 0;
    auto out = detail::open_out(cfg.hist_dir / "extract_manifest.csv");
    out << "# config_digest=" << digest_hex(cfg.digest) << '\n';
    out << "sequence_id,n_frames,n_extracted\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out << entries[i].sequence_id << ',' << results[i].n_frames << ','
            << results[i].n_extracted << '\n';
        rejected += results[i].n_frames - results[i].n_extracted;
    }
    return rejected;
}

void run_train(const RunConfig& cfg, std::size_t resume_from) {
    const std::vector<ManifestEntry> entries = read_split_manifests(cfg, true, false);
    if (entries.empty()) throw EmptyDataset("empty training manifest");

    Batch dataset;
    for (const ManifestEntry& e : entries) {
        if (e.label != "normal")
            throw InvalidParams("training manifest contains non-normal sequence: " +
                                e.sequence_id);
        SequenceData data = load_sequence_histograms(cfg, e.sequence_id);
        for (auto& x : data.xs) dataset.push_back(std::move(x));
    }
    if (dataset.empty()) throw EmptyDataset("no training histograms extracted");

    const AaeArch arch = arch_from_config(cfg);
    const PriorSpec prior{cfg.latent_dim, cfg.train.prior_sigma2};

    Rng init_rng(Rng::derive(cfg.seed, 0));
    AaeModel model = make_aae(arch, init_rng);
    Trainer trainer(model, cfg.train);

    if (resume_from > 0) {
        Checkpoint ckpt = load_checkpoint(cfg.ckpt_dir / checkpoint_name(resume_from));
        model = std::move(ckpt.model);
        trainer.restore(ckpt.epoch, std::move(ckpt.history));
        trainer.adam_ae_state().m = std::move(ckpt.adam_ae_m);
        trainer.adam_ae_state().v = std::move(ckpt.adam_ae_v);
        trainer.adam_ae_state().step = ckpt.adam_ae_step;
        trainer.adam_q_state().m = std::move(ckpt.adam_q_m);
        trainer.adam_q_state().v = std::move(ckpt.adam_q_v);
        trainer.adam_q_state().step = ckpt.adam_q_step;
    }

    fs::create_directories(cfg.ckpt_dir);
    const std::vector<std::size_t> save_epochs = checkpoint_epochs(cfg);

    while (trainer.completed_epochs() < cfg.train.epochs) {
        trainer.run_epoch(dataset);
        const std::size_t epoch = trainer.completed_epochs();
        if (std::find(save_epochs.begin(), save_epochs.end(), epoch) == save_epochs.end())
            continue;

        Checkpoint ckpt;
        ckpt.epoch = static_cast<std::uint32_t>(epoch);
        ckpt.config_digest = cfg.digest;
        ckpt.model = model;
        ckpt.prior = prior;
        ckpt.index_cfg = cfg.index;
        const std::vector<FrameMeasures> measures = measure_frames(model, prior, dataset);
        ckpt.weights = compute_weights(measures, cfg.index);
        ckpt.history = trainer.history();
        ckpt.adam_ae_m = trainer.adam_ae_state().m;
        ckpt.adam_ae_v = trainer.adam_ae_state().v;
        ckpt.adam_ae_step = trainer.adam_ae_state().step;
        ckpt.adam_q_m = trainer.adam_q_state().m;
        ckpt.adam_q_v = trainer.adam_q_state().v;
        ckpt.adam_q_step = trainer.adam_q_state().step;
        save_checkpoint(cfg.ckpt_dir / checkpoint_name(epoch), ckpt);
    }

    const auto& history = trainer.history();
    {
        auto out = detail::open_out(cfg.ckpt_dir / "training_log.csv");
        out << "# config_digest=" << digest_hex(cfg.digest) << '\n';
        out << "epoch,L_AE,L_D,L_Q\n";
        for (std::size_t i = 0; i < history.size(); ++i) {
            out << (i + 1) << ',' << detail::fmt_double(history[i].ae) << ','
                << detail::fmt_double(history[i].d) << ',' << detail::fmt_double(history[i].q)
                << '\n';
        }
    }
    const EpochRange range = select_stable_window(history, cfg.train.stable_window);
    write_stable_window(cfg, {range.first + 1, range.last + 1});
}

void run_score(const RunConfig& cfg) {
    const StableWindow window = read_stable_window(cfg);
    std::vector<std::size_t> epochs;
    for (std::size_t e : checkpoint_epochs(cfg)) {
        if (e >= window.first_epoch && e <= window.last_epoch &&
            fs::exists(cfg.ckpt_dir / checkpoint_name(e)))
            epochs.push_back(e);
    }
    if (epochs.empty())
        throw Error("no checkpoints fall inside the stable window; lower save_interval");

    const std::vector<ManifestEntry> entries = read_split_manifests(cfg, false, true);
    if (entries.empty()) throw EmptyDataset("empty test manifest");

    // Load each sequence once; score with every checkpoint in the window.
    std::vector<SequenceData> sequences(entries.size());
    parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
        sequences[i] = load_sequence_histograms(cfg, entries[i].sequence_id);
    });

    for (const std::size_t epoch : epochs) {
        const Checkpoint ckpt = load_checkpoint(cfg.ckpt_dir / checkpoint_name(epoch));
        const fs::path out_dir = cfg.scores_dir / epoch_dir_name(epoch);
        fs::create_directories(out_dir);
        parallel_for(entries.size(), cfg.workers, [&](std::size_t i) {
            const SequenceData& data = sequences[i];
            std::vector<ScoredFrame> rows;
            rows.reserve(data.xs.size());
            for (std::size_t f = 0; f < data.xs.size(); ++f) {
                ScoredFrame row;
                row.frame_index = data.frame_indices[f];
                const Histogram hist = unflatten(data.xs[f], cfg.hist_rows, cfg.hist_cols);
                row.measures =
                    score_frame(ckpt.model, ckpt.prior, ckpt.weights, ckpt.index_cfg, hist);
                rows.push_back(row);
            }
            write_scores_csv(out_dir / (entries[i].sequence_id + ".csv"), rows, cfg.digest);
        });
    }
}

namespace {

constexpr std::array<const char*, 4> kChannels = {"y_ae", "y_p", "y_d", "combined"};

double channel_value(const FrameMeasures& m, std::size_t channel) {
    switch (channel) {
        case 0: return m.recon;
        case 1: return m.prior;
        case 2: return m.disc;
        default: return m.combined;
    }
}

struct EvalRow {
    std::string channel;
    std::string level;
    std::string mode;
    std::size_t delta;
    RangeSummary summary;
};

}  // namespace

void run_eval(const RunConfig& cfg) {
    const StableWindow window = read_stable_window(cfg);
    const std::vector<ManifestEntry> entries = read_split_manifests(cfg, false, true);

    std::vector<std::size_t> epochs;
    for (std::size_t e : checkpoint_epochs(cfg)) {
        if (e >= window.first_epoch && e <= window.last_epoch &&
            fs::exists(cfg.scores_dir / epoch_dir_name(e)))
            epochs.push_back(e);
    }
    if (epochs.empty()) throw EmptyDataset("no scored checkpoints inside the stable window");

    bool has_normal = false, has_abnormal = false;
    for (const ManifestEntry& e : entries) (e.label == "abnormal" ? has_abnormal : has_normal) = true;
    if (!has_normal || !has_abnormal)
        throw SingleClass("test manifest must contain both normal and abnormal sequences");

    // scores[checkpoint][sequence][channel] = per-frame values.
    std::vector<std::vector<std::array<std::vector<double>, 4>>> scores(epochs.size());
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        scores[e].resize(entries.size());
        const fs::path dir = cfg.scores_dir / epoch_dir_name(epochs[e]);
        parallel_for(entries.size(), cfg.workers, [&, e](std::size_t i) {
            const std::vector<ScoredFrame> rows =
                read_scores_csv(dir / (entries[i].sequence_id + ".csv"));
            for (std::size_t ch = 0; ch < 4; ++ch) {
                auto& v = scores[e][i][ch];
                v.reserve(rows.size());
                for (const ScoredFrame& row : rows) v.push_back(channel_value(row.measures, ch));
            }
        });
    }

    const auto label_of = [&](std::size_t i) {
        return entries[i].label == "abnormal" ? Label::abnormal : Label::normal;
    };

    std::vector<EvalRow> rows;
    std::vector<ScoredSet> last_frame_sets(4), last_seq_sets(4), last_seg_sets(4);
    const std::size_t roc_delta = *std::max_element(cfg.eval_deltas.begin(), cfg.eval_deltas.end());

    for (std::size_t ch = 0; ch < 4; ++ch) {
        // Per-frame level.
        {
            std::vector<ScoredSet> sets(epochs.size());
            for (std::size_t e = 0; e < epochs.size(); ++e) {
                for (std::size_t i = 0; i < entries.size(); ++i) {
                    for (double v : scores[e][i][ch]) {
                        sets[e].scores.push_back(v);
                        sets[e].labels.push_back(label_of(i));
                    }
                }
            }
            last_frame_sets[ch] = sets.back();
            rows.push_back({kChannels[ch], "frame", "none", 1, evaluate_epoch_range(sets)});
        }
        // Per-segment levels.
        for (const SegmentMode mode : {SegmentMode::non_overlapping, SegmentMode::sliding}) {
            const char* mode_name = mode == SegmentMode::non_overlapping ? "nonoverlap" : "sliding";
            for (const std::size_t delta : cfg.eval_deltas) {
                std::vector<ScoredSet> sets(epochs.size());
                for (std::size_t e = 0; e < epochs.size(); ++e) {
                    for (std::size_t i = 0; i < entries.size(); ++i) {
                        for (double v : aggregate(scores[e][i][ch], delta, mode)) {
                            sets[e].scores.push_back(v);
                            sets[e].labels.push_back(label_of(i));
                        }
                    }
                }
                if (mode == SegmentMode::non_overlapping && delta == roc_delta)
                    last_seg_sets[ch] = sets.back();
                rows.push_back({kChannels[ch], "segment", mode_name, delta,
                                evaluate_epoch_range(sets)});
            }
        }
        // Per-sequence level.
        {
            std::vector<ScoredSet> sets(epochs.size());
            for (std::size_t e = 0; e < epochs.size(); ++e) {
                for (std::size_t i = 0; i < entries.size(); ++i) {
                    sets[e].scores.push_back(sequence_score(scores[e][i][ch]));
                    sets[e].labels.push_back(label_of(i));
                }
            }
            last_seq_sets[ch] = sets.back();
            rows.push_back({kChannels[ch], "sequence", "none", 0, evaluate_epoch_range(sets)});
        }
    }

    fs::create_directories(cfg.report_dir);
    {
        auto out = detail::open_out(cfg.report_dir / "report.csv");
        out << "# config_digest=" << digest_hex(cfg.digest) << '\n';
        out << "channel,level,mode,delta,n_checkpoints,auc_mean,eer_mean,flipped_any\n";
        for (const EvalRow& row : rows) {
            const bool flipped_any = std::any_of(row.summary.flipped.begin(),
                                                 row.summary.flipped.end(),
                                                 [](bool b) { return b; });
            out << row.channel << ',' << row.level << ',' << row.mode << ',' << row.delta << ','
                << row.summary.aucs.size() << ',' << detail::fmt_double(row.summary.auc_mean)
                << ',' << detail::fmt_double(row.summary.eer_mean) << ','
                << (flipped_any ? 1 : 0) << '\n';
        }
    }
    {
        auto out = detail::open_out(cfg.report_dir / "per_checkpoint.csv");
        out << "# config_digest=" << digest_hex(cfg.digest) << '\n';
        out << "epoch,channel,level,mode,delta,auc,eer,flipped\n";
        for (const EvalRow& row : rows) {
            for (std::size_t e = 0; e < epochs.size(); ++e) {
                out << epochs[e] << ',' << row.channel << ',' << row.level << ',' << row.mode
                    << ',' << row.delta << ',' << detail::fmt_double(row.summary.aucs[e]) << ','
                    << detail::fmt_double(row.summary.eers[e]) << ','
                    << (row.summary.flipped[e] ? 1 : 0) << '\n';
            }
        }
    }
    // ROC plot data for the combined index from the last checkpoint in the
    // window, at the frame / segment(max delta, non-overlapping) / sequence
    // levels.
    const auto write_roc = [&](const fs::path& file, const ScoredSet& set) {
        const std::vector<RocPoint> curve = roc_curve(orient(set));
        auto out = detail::open_out(file);
        out << "# config_digest=" << digest_hex(cfg.digest) << '\n';
        out << "fpr,tpr\n";
        for (const RocPoint& p : curve)
            out << detail::fmt_double(p.fpr) << ',' << detail::fmt_double(p.tpr) << '\n';
    };
    write_roc(cfg.report_dir / "roc_frame.csv", last_frame_sets[3]);
    write_roc(cfg.report_dir / "roc_segment.csv", last_seg_sets[3]);
    write_roc(cfg.report_dir / "roc_sequence.csv", last_seq_sets[3]);
}

}  // namespace gait
