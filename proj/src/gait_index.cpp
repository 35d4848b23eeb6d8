#include "gait/gait_index.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "gait/errors.hpp"
#include "io_util.hpp"

namespace gait {

double measure_recon(std::span<const double> x, std::span<const double> xhat) {
    if (x.size() != xhat.size() || x.empty())
        throw ShapeMismatch("measure_recon: length mismatch or empty input");
    double sum2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - xhat[i];
        sum2 += d * d;
    }
    return std::sqrt(sum2 / static_cast<double>(x.size()));
}

double measure_prior(std::span<const double> z, const PriorSpec& prior) {
    if (z.size() != prior.dim)
        throw ShapeMismatch("measure_prior: latent length " + std::to_string(z.size()) +
                            " != prior dimension " + std::to_string(prior.dim));
    double norm2 = 0.0;
    for (double v : z) norm2 += v * v;
    return std::exp(-norm2 / (2.0 * prior.sigma2));
}

double measure_disc(const AaeModel& model, std::span<const double> z) {
    return discriminate(model, z);
}

double apply_exponent(double y, double u) { return std::pow(y, u); }

std::vector<FrameMeasures> measure_frames(const AaeModel& model, const PriorSpec& prior,
                                          const Batch& xs) {
    std::vector<FrameMeasures> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        FrameMeasures m;
        const std::vector<double> z = encode(model, x);
        const std::vector<double> xhat = decode(model, z);
        m.recon = measure_recon(x, xhat);
        m.prior = measure_prior(z, prior);
        m.disc = discriminate(model, z);
        out.push_back(m);
    }
    return out;
}

MeasureWeights compute_weights(std::span<const FrameMeasures> training, const IndexConfig& cfg) {
    if (training.empty()) throw EmptyDataset("compute_weights: no training measures");
    MeasureWeights w;
    const double inv_n = 1.0 / static_cast<double>(training.size());
    for (const FrameMeasures& m : training) {
        w.s_recon += m.recon;
        w.s_prior += apply_exponent(m.prior, cfg.exponent);
        w.s_disc += m.disc;
    }
    w.s_recon *= inv_n;
    w.s_prior *= inv_n;
    w.s_disc *= inv_n;

    double total = 0.0;
    if (cfg.use_recon) {
        if (w.s_recon == 0.0) throw ZeroMeanMeasure("reconstruction measure has zero mean");
        total += w.s_recon;
    }
    if (cfg.use_prior) {
        if (w.s_prior == 0.0) throw ZeroMeanMeasure("prior measure has zero mean");
        total += w.s_prior;
    }
    if (cfg.use_disc) {
        if (w.s_disc == 0.0) throw ZeroMeanMeasure("discriminator measure has zero mean");
        total += w.s_disc;
    }
    w.w_recon = cfg.use_recon ? total / w.s_recon : 0.0;
    w.w_prior = cfg.use_prior ? total / w.s_prior : 0.0;
    w.w_disc = cfg.use_disc ? total / w.s_disc : 0.0;
    return w;
}

double combine(const FrameMeasures& m, const MeasureWeights& w, const IndexConfig& cfg) {
    return w.w_recon * m.recon + w.w_prior * apply_exponent(m.prior, cfg.exponent) +
           w.w_disc * m.disc;
}

FrameMeasures score_frame(const AaeModel& model, const PriorSpec& prior,
                          const MeasureWeights& w, const IndexConfig& cfg,
                          const Histogram& hist) {
    const std::vector<double> x = flatten(hist);
    const std::vector<double> z = encode(model, x);
    const std::vector<double> xhat = decode(model, z);
    FrameMeasures m;
    m.recon = measure_recon(x, xhat);
    m.prior = measure_prior(z, prior);
    m.disc = discriminate(model, z);
    m.combined = combine(m, w, cfg);
    return m;
}

void write_scores_csv(const std::filesystem::path& file, std::span<const ScoredFrame> rows,
                      std::uint64_t config_digest) {
    auto out = detail::open_out(file);
    out << "# config_digest=" << detail::digest_hex(config_digest) << '\n';
    out << "frame_index,y_ae,y_p,y_d,combined\n";
    for (const ScoredFrame& row : rows) {
        out << row.frame_index << ',' << detail::fmt_double(row.measures.recon) << ','
            << detail::fmt_double(row.measures.prior) << ','
            << detail::fmt_double(row.measures.disc) << ','
            << detail::fmt_double(row.measures.combined) << '\n';
    }
    if (!out) throw IoError("write failed: " + file.string());
}

std::vector<ScoredFrame> read_scores_csv(const std::filesystem::path& file) {
    auto in = detail::open_in(file);
    std::vector<ScoredFrame> rows;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line.rfind("frame_index,", 0) != 0)
                throw FormatError("unexpected score CSV header in " + file.string());
            saw_header = true;
            continue;
        }
        std::istringstream row(line);
        ScoredFrame f;
        char comma;
        if (!(row >> f.frame_index >> comma >> f.measures.recon >> comma >> f.measures.prior >>
              comma >> f.measures.disc >> comma >> f.measures.combined))
            throw FormatError("malformed score row in " + file.string() + ": " + line);
        rows.push_back(f);
    }
    return rows;
}

}  // namespace gait
