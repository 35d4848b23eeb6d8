#include "gait/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "gait/errors.hpp"
#include "io_util.hpp"

namespace gait {

namespace {

std::uint64_t fnv1a64(std::string_view text, std::uint64_t hash = 0xcbf29ce484222325ull) {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x00000100000001b3ull;
    }
    return hash;
}

bool is_path_key(const std::string& key) {
    return key.size() > 4 && key.compare(key.size() - 4, 4, "_dir") == 0;
}

double to_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw InvalidParams("config key '" + key + "': not a number: " + value);
    return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw InvalidParams("config key '" + key + "': not an integer: " + value);
    return v;
}

std::size_t to_size(const std::string& key, const std::string& value) {
    return static_cast<std::size_t>(to_u64(key, value));
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw InvalidParams("config key '" + key + "': not a boolean: " + value);
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& value) {
    std::vector<std::size_t> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(to_size(key, item));
    }
    if (out.empty()) throw InvalidParams("config key '" + key + "': empty list");
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::string measures_string(const IndexConfig& cfg) {
    std::string out;
    if (cfg.use_recon) out += "ae";
    if (cfg.use_prior) out += out.empty() ? "p" : ",p";
    if (cfg.use_disc) out += out.empty() ? "d" : ",d";
    return out;
}

void set_measures(IndexConfig& cfg, const std::string& value) {
    cfg.use_recon = cfg.use_prior = cfg.use_disc = false;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "ae")
            cfg.use_recon = true;
        else if (item == "p")
            cfg.use_prior = true;
        else if (item == "d")
            cfg.use_disc = true;
        else
            throw InvalidParams("config key 'measures': unknown measure: " + item);
    }
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setter_table() {
    static const std::map<std::string, Setter> table = {
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); }},
        {"data_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.data_dir = v; }},
        {"hist_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.hist_dir = v; }},
        {"ckpt_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.ckpt_dir = v; }},
        {"scores_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.scores_dir = v; }},
        {"report_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.report_dir = v; }},
        {"hist_rows", [](RunConfig& c, const std::string& k, const std::string& v) { c.hist_rows = to_size(k, v); }},
        {"hist_cols", [](RunConfig& c, const std::string& k, const std::string& v) { c.hist_cols = to_size(k, v); }},
        {"train_subjects", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.train_subjects = to_size(k, v); }},
        {"test_subjects", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.test_subjects = to_size(k, v); }},
        {"train_seqs_per_subject", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.train_seqs_per_subject = to_size(k, v); }},
        {"test_normal_per_subject", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.test_normal_per_subject = to_size(k, v); }},
        {"train_frames", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.train_frames = to_size(k, v); }},
        {"test_frames", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.test_frames = to_size(k, v); }},
        {"points_per_frame", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.points_per_frame = to_size(k, v); }},
        {"cycle_frames", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.base_cycle_frames = to_size(k, v); }},
        {"noise_sigma", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.noise_sigma = to_double(k, v); }},
        {"all_abnormal_modes", [](RunConfig& c, const std::string& k, const std::string& v) { c.bench.all_abnormal_modes = to_bool(k, v); }},
        {"hidden_units", [](RunConfig& c, const std::string& k, const std::string& v) { c.hidden_units = to_size(k, v); }},
        {"latent_dim", [](RunConfig& c, const std::string& k, const std::string& v) { c.latent_dim = to_size(k, v); }},
        {"leaky_slope", [](RunConfig& c, const std::string& k, const std::string& v) { c.leaky_slope = to_double(k, v); }},
        {"epochs", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.epochs = to_size(k, v); }},
        {"batch_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.batch_size = to_size(k, v); }},
        {"lr_ae", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lr_ae = to_double(k, v); }},
        {"lr_d", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lr_d = to_double(k, v); }},
        {"lr_q", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.lr_q = to_double(k, v); }},
        {"adam_beta1", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.adam_beta1 = to_double(k, v); }},
        {"adam_beta2", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.adam_beta2 = to_double(k, v); }},
        {"adam_eps", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.adam_eps = to_double(k, v); }},
        {"gamma0", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.gamma0 = to_double(k, v); }},
        {"gamma_decay", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.gamma_decay = to_double(k, v); }},
        {"prior_sigma2", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.prior_sigma2 = to_double(k, v); }},
        {"stable_window", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.stable_window = to_size(k, v); }},
        {"save_interval", [](RunConfig& c, const std::string& k, const std::string& v) { c.save_interval = to_size(k, v); }},
        {"exponent_u", [](RunConfig& c, const std::string& k, const std::string& v) { c.index.exponent = to_double(k, v); }},
        {"measures", [](RunConfig& c, const std::string&, const std::string& v) { set_measures(c.index, v); }},
        {"eval_deltas", [](RunConfig& c, const std::string& k, const std::string& v) { c.eval_deltas = to_size_list(k, v); }},
        {"workers", [](RunConfig& c, const std::string& k, const std::string& v) { c.workers = to_size(k, v); }},
    };
    return table;
}

std::map<std::string, std::string> canonical_map(const RunConfig& c) {
    std::map<std::string, std::string> kv;
    kv["seed"] = std::to_string(c.seed);
    kv["data_dir"] = c.data_dir.string();
    kv["hist_dir"] = c.hist_dir.string();
    kv["ckpt_dir"] = c.ckpt_dir.string();
    kv["scores_dir"] = c.scores_dir.string();
    kv["report_dir"] = c.report_dir.string();
    kv["hist_rows"] = std::to_string(c.hist_rows);
    kv["hist_cols"] = std::to_string(c.hist_cols);
    kv["train_subjects"] = std::to_string(c.bench.train_subjects);
    kv["test_subjects"] = std::to_string(c.bench.test_subjects);
    kv["train_seqs_per_subject"] = std::to_string(c.bench.train_seqs_per_subject);
    kv["test_normal_per_subject"] = std::to_string(c.bench.test_normal_per_subject);
    kv["train_frames"] = std::to_string(c.bench.train_frames);
    kv["test_frames"] = std::to_string(c.bench.test_frames);
    kv["points_per_frame"] = std::to_string(c.bench.points_per_frame);
    kv["cycle_frames"] = std::to_string(c.bench.base_cycle_frames);
    kv["noise_sigma"] = detail::fmt_double(c.bench.noise_sigma);
    kv["all_abnormal_modes"] = c.bench.all_abnormal_modes ? "1" : "0";
    kv["hidden_units"] = std::to_string(c.hidden_units);
    kv["latent_dim"] = std::to_string(c.latent_dim);
    kv["leaky_slope"] = detail::fmt_double(c.leaky_slope);
    kv["epochs"] = std::to_string(c.train.epochs);
    kv["batch_size"] = std::to_string(c.train.batch_size);
    kv["lr_ae"] = detail::fmt_double(c.train.lr_ae);
    kv["lr_d"] = detail::fmt_double(c.train.lr_d);
    kv["lr_q"] = detail::fmt_double(c.train.lr_q);
    kv["adam_beta1"] = detail::fmt_double(c.train.adam_beta1);
    kv["adam_beta2"] = detail::fmt_double(c.train.adam_beta2);
    kv["adam_eps"] = detail::fmt_double(c.train.adam_eps);
    kv["gamma0"] = detail::fmt_double(c.train.gamma0);
    kv["gamma_decay"] = detail::fmt_double(c.train.gamma_decay);
    kv["prior_sigma2"] = detail::fmt_double(c.train.prior_sigma2);
    kv["stable_window"] = std::to_string(c.train.stable_window);
    kv["save_interval"] = std::to_string(c.save_interval);
    kv["exponent_u"] = detail::fmt_double(c.index.exponent);
    kv["measures"] = measures_string(c.index);
    kv["eval_deltas"] = join_sizes(c.eval_deltas);
    kv["workers"] = std::to_string(c.workers);
    return kv;
}

void validate(const RunConfig& c) {
    if (c.hist_rows < 1 || c.hist_rows > 0xffff || c.hist_cols < 1 || c.hist_cols > 0xffff)
        throw InvalidParams("hist_rows/hist_cols must be in [1, 65535]");
    if (c.hidden_units < 1 || c.latent_dim < 1)
        throw InvalidParams("hidden_units and latent_dim must be >= 1");
    if (!(c.leaky_slope > 0.0 && c.leaky_slope < 1.0))
        throw InvalidParams("leaky_slope must be in (0, 1)");
    if (c.train.epochs < 1) throw InvalidParams("epochs must be >= 1");
    if (c.train.batch_size < 1) throw InvalidParams("batch_size must be >= 1");
    if (c.train.stable_window < 1 || c.train.stable_window > c.train.epochs)
        throw InvalidParams("stable_window must be in [1, epochs]");
    if (c.save_interval < 1) throw InvalidParams("save_interval must be >= 1");
    if (c.save_interval > c.train.stable_window)
        throw InvalidParams("save_interval must not exceed stable_window, or the "
                            "window could contain no checkpoints");
    if (!(c.train.lr_ae > 0.0 && c.train.lr_d > 0.0 && c.train.lr_q > 0.0))
        throw InvalidParams("learning rates must be > 0");
    if (c.train.gamma0 < 0.0) throw InvalidParams("gamma0 must be >= 0");
    if (!(c.train.gamma_decay > 0.0 && c.train.gamma_decay <= 1.0))
        throw InvalidParams("gamma_decay must be in (0, 1]");
    if (!(c.train.prior_sigma2 > 0.0)) throw InvalidParams("prior_sigma2 must be > 0");
    if (!(c.index.exponent > 0.0 && c.index.exponent <= 1.0))
        throw InvalidParams("exponent_u must be in (0, 1]");
    if (!c.index.use_recon && !c.index.use_prior && !c.index.use_disc)
        throw InvalidParams("at least one measure must be enabled");
    if (c.eval_deltas.empty()) throw InvalidParams("eval_deltas must not be empty");
    for (std::size_t d : c.eval_deltas) {
        if (d < 1) throw InvalidParams("eval_deltas entries must be >= 1");
        if (d > c.bench.test_frames)
            throw InvalidParams("eval delta " + std::to_string(d) +
                                " exceeds test_frames " + std::to_string(c.bench.test_frames));
    }
    if (c.workers < 1) throw InvalidParams("workers must be >= 1");
    if (c.bench.train_subjects < 1 || c.bench.test_subjects < 1 ||
        c.bench.train_seqs_per_subject < 1 || c.bench.test_normal_per_subject < 1 ||
        c.bench.train_frames < 1 || c.bench.test_frames < 1)
        throw InvalidParams("benchmark sizes must be >= 1");
    if (c.bench.noise_sigma < 0.0) throw InvalidParams("noise_sigma must be >= 0");
    if (c.bench.points_per_frame < 10) throw InvalidParams("points_per_frame must be >= 10");
    if (c.bench.base_cycle_frames < 4) throw InvalidParams("cycle_frames must be >= 4");
}

}  // namespace

std::uint64_t config_digest(const std::map<std::string, std::string>& kv) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const auto& [key, value] : kv) {  // std::map iterates in key order
        if (is_path_key(key)) continue;
        hash = fnv1a64(key, hash);
        hash = fnv1a64("=", hash);
        hash = fnv1a64(value, hash);
        hash = fnv1a64("\n", hash);
    }
    return hash;
}

std::string digest_hex(std::uint64_t digest) { return detail::digest_hex(digest); }

std::map<std::string, std::string> load_config_file(const std::filesystem::path& file) {
    auto in = detail::open_in(file);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        const auto strip = [](std::string s) {
            const auto begin = s.find_first_not_of(" \t");
            if (begin == std::string::npos) return std::string();
            const auto end = s.find_last_not_of(" \t");
            return s.substr(begin, end - begin + 1);
        };
        if (strip(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParams(file.string() + ":" + std::to_string(line_no) +
                                ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            throw InvalidParams(file.string() + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

RunConfig make_run_config(const std::map<std::string, std::string>& file_kv,
                          const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    const auto& table = setter_table();
    const auto apply = [&](const std::map<std::string, std::string>& kv) {
        for (const auto& [key, value] : kv) {
            const auto it = table.find(key);
            if (it == table.end()) throw InvalidParams("unknown config key: " + key);
            it->second(cfg, key, value);
        }
    };
    apply(file_kv);
    apply(overrides);
    cfg.train.seed = cfg.seed;
    validate(cfg);
    cfg.raw = canonical_map(cfg);
    cfg.digest = config_digest(cfg.raw);
    return cfg;
}

}  // namespace gait
