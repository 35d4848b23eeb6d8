#include "gait/synth.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gait/errors.hpp"
#include "gait/rng.hpp"
#include "io_util.hpp"

namespace gait {

namespace {

enum class Part : std::uint8_t { torso, head, left_leg, right_leg, left_arm, right_arm };

// One sampled body-surface point: its part plus fixed shape offsets. The
// per-frame position is a deterministic function of (template, phase).
struct TemplatePoint {
    Part part;
    double u = 0.0;   // position along the segment
    double ox = 0.0;  // cross-section offsets, unit scale
    double oy = 0.0;
    double oz = 0.0;
};

struct BodyShape {
    double s;  // height scale
    double hip_z, shoulder_z, head_z, head_r;
    double hip_dx, shoulder_dx;
    double torso_rx, torso_ry;
    double leg_thick, arm_thick;
    double hand_z;

    explicit BodyShape(double scale)
        : s(scale),
          hip_z(0.95 * scale),
          shoulder_z(1.45 * scale),
          head_z(1.62 * scale),
          head_r(0.11 * scale),
          hip_dx(0.10 * scale),
          shoulder_dx(0.19 * scale),
          torso_rx(0.16 * scale),
          torso_ry(0.10 * scale),
          leg_thick(0.045 * scale),
          arm_thick(0.035 * scale),
          hand_z(1.00 * scale) {}
};

struct SideState {
    double phase = 0.0;
    double amp = 0.0;
    double sole = 0.0;
};

Point3 place(const TemplatePoint& tp, const BodyShape& body, const SideState& left,
             const SideState& right) {
    switch (tp.part) {
        case Part::torso: {
            const double z = body.hip_z + tp.u * (body.shoulder_z - body.hip_z);
            return {tp.ox * body.torso_rx, tp.oy * body.torso_ry, z + tp.oz * 0.01 * body.s};
        }
        case Part::head:
            return {tp.ox * body.head_r, tp.oy * body.head_r,
                    body.head_z + tp.oz * body.head_r};
        case Part::left_leg:
        case Part::right_leg: {
            const bool is_left = tp.part == Part::left_leg;
            const SideState& side = is_left ? left : right;
            const double hip_x = is_left ? -body.hip_dx : body.hip_dx;
            // Foot travels fore-aft; it lifts while swinging forward and the
            // lift height scales with the swing amplitude so a zero-amplitude
            // walker stands still.
            const double foot_y = side.amp * std::cos(side.phase);
            const double lift = 0.18 * side.amp * std::max(0.0, -std::sin(side.phase));
            const double foot_z = side.sole + lift;
            const double x = hip_x + tp.ox * body.leg_thick;
            const double y = tp.u * foot_y + tp.oy * body.leg_thick;
            const double z = body.hip_z + tp.u * (foot_z - body.hip_z);
            return {x, y, z};
        }
        case Part::left_arm:
        case Part::right_arm: {
            const bool is_left = tp.part == Part::left_arm;
            // Arms swing opposite to the same-side leg.
            const SideState& side = is_left ? left : right;
            const double shoulder_x = is_left ? -body.shoulder_dx : body.shoulder_dx;
            const double hand_y = 0.5 * side.amp * std::cos(side.phase + std::numbers::pi);
            const double x = shoulder_x + tp.ox * body.arm_thick;
            const double y = tp.u * hand_y + tp.oy * body.arm_thick;
            const double z = body.shoulder_z + tp.u * (body.hand_z - body.shoulder_z);
            return {x, y, z};
        }
    }
    return {};
}

std::vector<TemplatePoint> sample_template(const GaitParams& params, Rng& rng) {
    const auto n_total = static_cast<std::size_t>(
        std::max(1.0, std::round(static_cast<double>(params.points_per_frame) *
                                 params.density_scale)));
    // Rough body-mass split across the five segment groups.
    const std::pair<Part, double> split[] = {
        {Part::torso, 0.38},     {Part::head, 0.12},      {Part::left_leg, 0.17},
        {Part::right_leg, 0.17}, {Part::left_arm, 0.08},  {Part::right_arm, 0.08},
    };
    std::vector<TemplatePoint> tpl;
    tpl.reserve(n_total);
    for (const auto& [part, frac] : split) {
        const auto n_part = static_cast<std::size_t>(
            std::round(frac * static_cast<double>(n_total)));
        for (std::size_t k = 0; k < n_part; ++k) {
            TemplatePoint tp;
            tp.part = part;
            tp.u = rng.uniform();
            if (part == Part::head) {
                // Point inside the unit ball.
                for (;;) {
                    tp.ox = rng.uniform(-1.0, 1.0);
                    tp.oy = rng.uniform(-1.0, 1.0);
                    tp.oz = rng.uniform(-1.0, 1.0);
                    if (tp.ox * tp.ox + tp.oy * tp.oy + tp.oz * tp.oz <= 1.0) break;
                }
            } else if (part == Part::torso) {
                for (;;) {
                    tp.ox = rng.uniform(-1.0, 1.0);
                    tp.oy = rng.uniform(-1.0, 1.0);
                    if (tp.ox * tp.ox + tp.oy * tp.oy <= 1.0) break;
                }
                tp.oz = rng.normal();
            } else {
                tp.ox = rng.normal();
                tp.oy = rng.normal();
            }
            tpl.push_back(tp);
        }
    }
    return tpl;
}

}  // namespace

void validate(const GaitParams& params) {
    if (params.cycle_frames < 4) throw InvalidParams("cycle_frames must be >= 4");
    if (params.points_per_frame < 10) throw InvalidParams("points_per_frame must be >= 10");
    if (params.swing_amp_left < 0.0 || params.swing_amp_right < 0.0)
        throw InvalidParams("swing amplitudes must be >= 0");
    if (params.noise_sigma < 0.0) throw InvalidParams("noise_sigma must be >= 0");
    if (params.sole_lift_left < 0.0 || params.sole_lift_right < 0.0)
        throw InvalidParams("sole lifts must be >= 0");
    if (params.speed_scale_left <= 0.0 || params.speed_scale_right <= 0.0)
        throw InvalidParams("speed scales must be > 0");
    if (params.height_scale <= 0.0 || params.density_scale <= 0.0)
        throw InvalidParams("height/density scales must be > 0");
}

std::vector<PointCloud> generate_sequence(const GaitParams& params, std::size_t n_frames) {
    validate(params);
    if (n_frames < 1) throw InvalidParams("n_frames must be >= 1");

    Rng rng(params.seed);
    const std::vector<TemplatePoint> tpl = sample_template(params, rng);
    const BodyShape body(params.height_scale);

    const double two_pi = 2.0 * std::numbers::pi;
    const double base_rate = two_pi / static_cast<double>(params.cycle_frames);

    std::vector<PointCloud> frames;
    frames.reserve(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) {
        SideState left{params.phase_offset +
                           base_rate * params.speed_scale_left * static_cast<double>(t),
                       params.swing_amp_left, params.sole_lift_left};
        SideState right{params.phase_offset + std::numbers::pi +
                            base_rate * params.speed_scale_right * static_cast<double>(t),
                        params.swing_amp_right, params.sole_lift_right};
        PointCloud cloud;
        cloud.frame_index = t;
        cloud.points.reserve(tpl.size());
        for (const TemplatePoint& tp : tpl) {
            Point3 p = place(tp, body, left, right);
            if (params.noise_sigma > 0.0) {
                p.x += rng.normal(0.0, params.noise_sigma);
                p.y += rng.normal(0.0, params.noise_sigma);
                p.z += rng.normal(0.0, params.noise_sigma);
            }
            cloud.points.push_back(p);
        }
        frames.push_back(std::move(cloud));
    }
    return frames;
}

namespace {

struct SubjectTraits {
    double height_scale;
    double density_scale;
    double swing_amp;
    std::size_t cycle_frames;
};

SubjectTraits subject_traits(std::uint64_t seed, std::size_t subject, std::size_t base_cycle) {
    Rng rng(Rng::derive(seed, 0x5ab0 + subject));
    SubjectTraits t;
    t.height_scale = rng.uniform(0.92, 1.08);
    t.density_scale = rng.uniform(0.90, 1.10);
    t.swing_amp = rng.uniform(0.26, 0.34);
    t.cycle_frames = base_cycle + rng.uniform_int(9);
    return t;
}

struct ModeDef {
    const char* name;
    double sole_left, sole_right;
    double speed_left, speed_right;
};

constexpr ModeDef kAbnormalModes[] = {
    {"sole_5cm_left", 0.05, 0.0, 1.0, 1.0},   {"sole_5cm_right", 0.0, 0.05, 1.0, 1.0},
    {"sole_10cm_left", 0.10, 0.0, 1.0, 1.0},  {"sole_10cm_right", 0.0, 0.10, 1.0, 1.0},
    {"sole_15cm_left", 0.15, 0.0, 1.0, 1.0},  {"sole_15cm_right", 0.0, 0.15, 1.0, 1.0},
    {"weight_left", 0.0, 0.0, 0.75, 1.0},     {"weight_right", 0.0, 0.0, 1.0, 0.75},
};

SequenceSpec make_spec(std::uint64_t bench_seed, const BenchmarkConfig& cfg, std::size_t subject,
                       const std::string& id, const std::string& mode, bool abnormal,
                       std::size_t n_frames, std::uint64_t stream) {
    const SubjectTraits traits = subject_traits(bench_seed, subject, cfg.base_cycle_frames);
    SequenceSpec spec;
    spec.id = id;
    spec.mode = mode;
    spec.abnormal = abnormal;
    spec.subject = subject;
    spec.n_frames = n_frames;

    GaitParams& p = spec.params;
    p.points_per_frame = cfg.points_per_frame;
    p.cycle_frames = traits.cycle_frames;
    p.swing_amp_left = traits.swing_amp;
    p.swing_amp_right = traits.swing_amp;
    p.noise_sigma = cfg.noise_sigma;
    p.height_scale = traits.height_scale;
    p.density_scale = traits.density_scale;
    p.seed = Rng::derive(bench_seed, stream);
    Rng rng(Rng::derive(bench_seed, stream ^ 0xfa5e));
    p.phase_offset = rng.uniform(0.0, 2.0 * std::numbers::pi);

    if (mode != "normal") {
        for (const ModeDef& def : kAbnormalModes) {
            if (mode == def.name) {
                p.sole_lift_left = def.sole_left;
                p.sole_lift_right = def.sole_right;
                p.speed_scale_left = def.speed_left;
                p.speed_scale_right = def.speed_right;
                return spec;
            }
        }
        throw InvalidParams("unknown gait mode: " + mode);
    }
    return spec;
}

}  // namespace

Benchmark default_benchmark(std::uint64_t seed, const BenchmarkConfig& cfg) {
    if (cfg.train_subjects < 1 || cfg.test_subjects < 1)
        throw InvalidParams("benchmark needs at least one subject per split");
    Benchmark bench;
    std::uint64_t stream = 1;
    char id[64];

    for (std::size_t s = 0; s < cfg.train_subjects; ++s) {
        for (std::size_t k = 0; k < cfg.train_seqs_per_subject; ++k) {
            std::snprintf(id, sizeof(id), "train_s%02zu_normal_%zu", s, k);
            bench.train.push_back(make_spec(seed, cfg, s, id, "normal", false,
                                            cfg.train_frames, stream++));
        }
    }
    for (std::size_t s = 0; s < cfg.test_subjects; ++s) {
        const std::size_t subject = cfg.train_subjects + s;
        for (std::size_t k = 0; k < cfg.test_normal_per_subject; ++k) {
            std::snprintf(id, sizeof(id), "test_s%02zu_normal_%zu", subject, k);
            bench.test.push_back(make_spec(seed, cfg, subject, id, "normal", false,
                                           cfg.test_frames, stream++));
        }
        for (const ModeDef& def : kAbnormalModes) {
            if (!cfg.all_abnormal_modes && std::string(def.name) != "sole_10cm_left" &&
                std::string(def.name) != "weight_left") {
                ++stream;  // keep downstream seeds stable across the flag
                continue;
            }
            std::snprintf(id, sizeof(id), "test_s%02zu_%s", subject, def.name);
            bench.test.push_back(make_spec(seed, cfg, subject, id, def.name, true,
                                           cfg.test_frames, stream++));
        }
    }
    return bench;
}

void write_sequence(const std::filesystem::path& dir, const SequenceSpec& spec) {
    const std::filesystem::path seq_dir = dir / spec.id;
    std::filesystem::create_directories(seq_dir);
    const std::vector<PointCloud> frames = generate_sequence(spec.params, spec.n_frames);
    std::vector<std::string> names;
    names.reserve(frames.size());
    char name[32];
    for (const PointCloud& cloud : frames) {
        std::snprintf(name, sizeof(name), "frame_%06zu.txt", cloud.frame_index);
        save_point_cloud(seq_dir / name, cloud);
        names.emplace_back(name);
    }
    save_frame_manifest(seq_dir / "frames.txt", names);
}

void write_manifest(const std::filesystem::path& file, const std::vector<SequenceSpec>& specs) {
    auto out = detail::open_out(file);
    out << "sequence_id,label,mode,seed\n";
    for (const SequenceSpec& spec : specs) {
        out << spec.id << ',' << (spec.abnormal ? "abnormal" : "normal") << ',' << spec.mode
            << ',' << spec.params.seed << '\n';
    }
    if (!out) throw IoError("write failed: " + file.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file) {
    auto in = detail::open_in(file);
    std::vector<ManifestEntry> entries;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "sequence_id,label,mode,seed")
                throw FormatError("unexpected manifest header in " + file.string());
            saw_header = true;
            continue;
        }
        std::istringstream row(line);
        ManifestEntry e;
        std::string seed_str;
        if (!std::getline(row, e.sequence_id, ',') || !std::getline(row, e.label, ',') ||
            !std::getline(row, e.mode, ',') || !std::getline(row, seed_str))
            throw FormatError("malformed manifest row in " + file.string() + ": " + line);
        e.seed = std::stoull(seed_str);
        entries.push_back(e);
    }
    return entries;
}

}  // namespace gait
