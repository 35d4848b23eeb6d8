#include "gait/aae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gait/errors.hpp"

namespace gait {

namespace {

using nn::Act;
using nn::Grads;
using nn::Mlp;
using nn::Trace;

constexpr double kEps = nn::kProbEps;

double clamp_prob(double p) { return std::clamp(p, kEps, 1.0 - kEps); }

// Penalty term for one discriminator input: pref * |grad logit|^2 with
// pref = (1-D)^2 on prior samples and D^2 on encoded samples. When `gd`
// is given, accumulates coeff * d(term)/d(params). The input gradient of
// a piecewise-linear net is locally linear in the parameters, so the
// second-order part treats the leaky-ReLU masks as constants (their a.e.
// derivative is zero) and differentiates the bilinear form directly.
double penalty_term(const Mlp& disc, const Trace& trace, bool real_side, double coeff,
                    Grads* gd) {
    std::vector<std::vector<double>> delta;  // dlogit/dpre per layer
    const std::vector<double> g = nn::logit_input_gradient(disc, trace, &delta);

    double grad_norm2 = 0.0;
    for (double v : g) grad_norm2 += v * v;

    const double p = trace.act.back()[0];
    const double pref = real_side ? (1.0 - p) * (1.0 - p) : p * p;
    const double term = pref * grad_norm2;
    if (!gd) return term;

    const std::size_t n_layers = disc.layers.size();

    // Route A: the prefactor depends on the logit; standard backprop with
    // the delta chain as seed.
    const double dpref_dp = real_side ? -2.0 * (1.0 - p) : 2.0 * p;
    const double seed = coeff * grad_norm2 * dpref_dp * p * (1.0 - p);
    if (seed != 0.0) {
        for (std::size_t l = 0; l < n_layers; ++l) {
            const auto& in = trace.act[l];
            const auto& layer = disc.layers[l];
            for (std::size_t o = 0; o < layer.out_units; ++o) {
                const double d = seed * delta[l][o];
                gd->biases[l][o] += d;
                double* row = gd->weights[l].data() + o * layer.in_units;
                for (std::size_t i = 0; i < layer.in_units; ++i) row[i] += d * in[i];
            }
        }
    }

    // Route B: d|g|^2/dW with the activation masks frozen. q_l is
    // d|g|^2/d(delta_l); biases never enter g.
    const double scale = coeff * pref;
    {
        const auto& first = disc.layers.front();
        // d|g|^2/dW_0 = 2 delta_0 g^T
        for (std::size_t o = 0; o < first.out_units; ++o) {
            const double d = scale * 2.0 * delta[0][o];
            double* row = gd->weights[0].data() + o * first.in_units;
            for (std::size_t i = 0; i < first.in_units; ++i) row[i] += d * g[i];
        }
        // q_0 = 2 W_0 g
        std::vector<double> q(first.out_units, 0.0);
        for (std::size_t o = 0; o < first.out_units; ++o) {
            const double* row = first.weights.data() + o * first.in_units;
            double acc = 0.0;
            for (std::size_t i = 0; i < first.in_units; ++i) acc += row[i] * g[i];
            q[o] = 2.0 * acc;
        }
        for (std::size_t l = 0; l + 1 < n_layers; ++l) {
            const auto& layer = disc.layers[l];
            const auto& next = disc.layers[l + 1];
            // u = mask_l ⊙ q_l
            std::vector<double> u(layer.out_units);
            for (std::size_t i = 0; i < layer.out_units; ++i) {
                const double mask = trace.pre[l][i] > 0.0 ? 1.0 : disc.leaky_slope;
                u[i] = mask * q[i];
            }
            // d|g|^2/dW_{l+1} = delta_{l+1} u^T
            for (std::size_t o = 0; o < next.out_units; ++o) {
                const double d = scale * delta[l + 1][o];
                double* row = gd->weights[l + 1].data() + o * next.in_units;
                for (std::size_t i = 0; i < next.in_units; ++i) row[i] += d * u[i];
            }
            // q_{l+1} = W_{l+1} u
            std::vector<double> qn(next.out_units, 0.0);
            for (std::size_t o = 0; o < next.out_units; ++o) {
                const double* row = next.weights.data() + o * next.in_units;
                double acc = 0.0;
                for (std::size_t i = 0; i < next.in_units; ++i) acc += row[i] * u[i];
                qn[o] = acc;
            }
            q.swap(qn);
        }
    }
    return term;
}

// Mean cross-entropy over the batch with optional encoder/decoder grads.
double ae_loss_impl(const AaeModel& model, const Batch& xs, Grads* genc, Grads* gdec) {
    if (xs.empty()) throw EmptyDataset("loss_ae: empty batch");
    const double n = static_cast<double>(xs.size());
    const double m = static_cast<double>(model.arch.input);
    Trace trace_enc, trace_dec;
    std::vector<double> dxhat;
    double loss = 0.0;
    for (const auto& x : xs) {
        nn::forward(model.encoder, x, trace_enc);
        nn::forward(model.decoder, trace_enc.act.back(), trace_dec);
        const auto& xhat = trace_dec.act.back();
        loss += nn::cross_entropy(x, xhat);
        if (genc && gdec) {
            // d(mean CE over elements and batch)/dxhat
            nn::cross_entropy_grad(x, xhat, 1.0 / (m * n), dxhat);
            const std::vector<double> dz = nn::backward(model.decoder, trace_dec, dxhat, *gdec);
            nn::backward(model.encoder, trace_enc, dz, *genc);
        }
    }
    return loss / n;
}

double d_loss_impl(const AaeModel& model, const Batch& xs, const Batch& prior_zs, double gamma,
                   Grads* gd) {
    if (xs.empty() || prior_zs.size() != xs.size())
        throw ShapeMismatch("loss_d: batch sizes must match and be nonempty");
    const std::size_t n = xs.size();
    const double inv_2n = 1.0 / (2.0 * static_cast<double>(n));
    const double penalty_coeff = gamma * inv_2n;  // (gamma/2) * (1/n) per sample

    Trace trace;
    double ce = 0.0;
    double penalty = 0.0;
    std::vector<double> dout(1);
    for (std::size_t i = 0; i < n; ++i) {
        // Prior sample: positive label.
        nn::forward(model.discriminator, prior_zs[i], trace);
        const double p_real = trace.act.back()[0];
        ce += -std::log(clamp_prob(p_real));
        if (gd) {
            dout[0] = (p_real > kEps && p_real < 1.0 - kEps) ? -inv_2n / p_real : 0.0;
            nn::backward(model.discriminator, trace, dout, *gd);
        }
        if (gamma != 0.0) penalty += penalty_term(model.discriminator, trace, true, penalty_coeff, gd);

        // Encoded sample: negative label. The encoder is a fixed input
        // producer here; its parameters receive no gradient.
        const std::vector<double> z = nn::forward(model.encoder, xs[i]);
        nn::forward(model.discriminator, z, trace);
        const double p_fake = trace.act.back()[0];
        ce += -std::log(clamp_prob(1.0 - p_fake));
        if (gd) {
            dout[0] = (p_fake > kEps && p_fake < 1.0 - kEps) ? inv_2n / (1.0 - p_fake) : 0.0;
            nn::backward(model.discriminator, trace, dout, *gd);
        }
        if (gamma != 0.0)
            penalty += penalty_term(model.discriminator, trace, false, penalty_coeff, gd);
    }
    return ce * inv_2n + 0.5 * gamma * penalty / static_cast<double>(n);
}

double q_loss_impl(const AaeModel& model, const Batch& xs, Grads* genc) {
    if (xs.empty()) throw EmptyDataset("loss_q: empty batch");
    const double n = static_cast<double>(xs.size());
    Trace trace_enc, trace_d;
    Grads scratch = nn::make_grads(model.discriminator);  // discarded
    std::vector<double> dout(1);
    double loss = 0.0;
    for (const auto& x : xs) {
        nn::forward(model.encoder, x, trace_enc);
        nn::forward(model.discriminator, trace_enc.act.back(), trace_d);
        const double p = trace_d.act.back()[0];
        loss += -std::log(clamp_prob(p));
        if (genc) {
            dout[0] = (p > kEps && p < 1.0 - kEps) ? -1.0 / (p * n) : 0.0;
            const std::vector<double> dz =
                nn::backward(model.discriminator, trace_d, dout, scratch);
            nn::backward(model.encoder, trace_enc, dz, *genc);
        }
    }
    return loss / n;
}

std::vector<double> collect_two(const Mlp& a, const Mlp& b) {
    std::vector<double> flat = nn::collect_params(a);
    const std::vector<double> tail = nn::collect_params(b);
    flat.insert(flat.end(), tail.begin(), tail.end());
    return flat;
}

void assign_two(Mlp& a, Mlp& b, std::span<const double> flat) {
    nn::assign_params(a, flat.subspan(0, a.param_count()));
    nn::assign_params(b, flat.subspan(a.param_count()));
}

}  // namespace

AaeModel make_aae(const AaeArch& arch, Rng& rng) {
    AaeModel model;
    model.arch = arch;
    const std::size_t enc_dims[] = {arch.input, arch.hidden, arch.latent};
    const std::size_t dec_dims[] = {arch.latent, arch.hidden, arch.input};
    const std::size_t disc_dims[] = {arch.latent, arch.hidden, 1};
    const Act hidden_id[] = {Act::leaky_relu, Act::identity};
    const Act hidden_sig[] = {Act::leaky_relu, Act::sigmoid};
    model.encoder = nn::make_mlp(enc_dims, hidden_id, arch.leaky_slope);
    model.decoder = nn::make_mlp(dec_dims, hidden_sig, arch.leaky_slope);
    model.discriminator = nn::make_mlp(disc_dims, hidden_sig, arch.leaky_slope);
    nn::init_glorot_uniform(model.encoder, rng);
    nn::init_glorot_uniform(model.decoder, rng);
    nn::init_glorot_uniform(model.discriminator, rng);
    return model;
}

std::vector<double> sample_prior(const PriorSpec& prior, Rng& rng) {
    std::vector<double> z(prior.dim);
    const double stddev = std::sqrt(prior.sigma2);
    for (double& v : z) v = rng.normal(0.0, stddev);
    return z;
}

std::vector<double> encode(const AaeModel& model, std::span<const double> x) {
    return nn::forward(model.encoder, x);
}

std::vector<double> decode(const AaeModel& model, std::span<const double> z) {
    return nn::forward(model.decoder, z);
}

double discriminate(const AaeModel& model, std::span<const double> z) {
    return nn::forward(model.discriminator, z)[0];
}

double loss_ae(const AaeModel& model, const Batch& xs) {
    return ae_loss_impl(model, xs, nullptr, nullptr);
}

double loss_d(const AaeModel& model, const Batch& xs, const Batch& prior_zs, double gamma) {
    return d_loss_impl(model, xs, prior_zs, gamma, nullptr);
}

double gradient_penalty(const AaeModel& model, const Batch& prior_zs, const Batch& encoded_zs) {
    if (prior_zs.empty() || encoded_zs.empty())
        throw EmptyDataset("gradient_penalty: empty batch");
    Trace trace;
    double real_sum = 0.0;
    for (const auto& z : prior_zs) {
        nn::forward(model.discriminator, z, trace);
        real_sum += penalty_term(model.discriminator, trace, true, 0.0, nullptr);
    }
    double fake_sum = 0.0;
    for (const auto& z : encoded_zs) {
        nn::forward(model.discriminator, z, trace);
        fake_sum += penalty_term(model.discriminator, trace, false, 0.0, nullptr);
    }
    return real_sum / static_cast<double>(prior_zs.size()) +
           fake_sum / static_cast<double>(encoded_zs.size());
}

double loss_q(const AaeModel& model, const Batch& xs) {
    return q_loss_impl(model, xs, nullptr);
}

double loss_ae_grads(const AaeModel& model, const Batch& xs, Grads& enc_grads,
                     Grads& dec_grads) {
    return ae_loss_impl(model, xs, &enc_grads, &dec_grads);
}

double loss_d_grads(const AaeModel& model, const Batch& xs, const Batch& prior_zs, double gamma,
                    Grads& disc_grads) {
    return d_loss_impl(model, xs, prior_zs, gamma, &disc_grads);
}

double loss_q_grads(const AaeModel& model, const Batch& xs, Grads& enc_grads) {
    return q_loss_impl(model, xs, &enc_grads);
}

Trainer::Trainer(AaeModel& model, const TrainConfig& cfg) : model_(model), cfg_(cfg) {
    if (cfg.batch_size < 1) throw InvalidParams("batch_size must be >= 1");
    if (cfg.epochs < cfg.stable_window)
        throw InvalidParams("epochs must be >= stable_window");
    if (!(cfg.gamma0 >= 0.0)) throw InvalidParams("gamma0 must be >= 0");
    const std::size_t n_ae = model.encoder.param_count() + model.decoder.param_count();
    adam_ae_ = nn::make_adam(n_ae, {cfg.lr_ae, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
    adam_q_ = nn::make_adam(model.encoder.param_count(),
                            {cfg.lr_q, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
    sgd_d_ = {cfg.lr_d};
}

void Trainer::restore(std::size_t completed_epochs, std::vector<EpochLosses> history) {
    epoch_ = completed_epochs;
    history_ = std::move(history);
}

EpochLosses Trainer::run_epoch(const Batch& dataset) {
    if (dataset.empty()) throw EmptyDataset("train_epoch: empty dataset");
    const std::size_t n_samples = dataset.size();
    Rng rng(Rng::derive(cfg_.seed, 1 + epoch_));
    const double gamma = cfg_.gamma0 * std::pow(cfg_.gamma_decay, static_cast<double>(epoch_));
    const PriorSpec prior{model_.arch.latent, cfg_.prior_sigma2};

    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    Grads genc = nn::make_grads(model_.encoder);
    Grads gdec = nn::make_grads(model_.decoder);
    Grads gd = nn::make_grads(model_.discriminator);

    EpochLosses sums;
    Batch batch, prior_batch;
    for (std::size_t start = 0; start < n_samples; start += cfg_.batch_size) {
        const std::size_t stop = std::min(start + cfg_.batch_size, n_samples);
        batch.clear();
        for (std::size_t k = start; k < stop; ++k) batch.push_back(dataset[order[k]]);
        const double n_b = static_cast<double>(batch.size());

        // (1) Adam on encoder+decoder: reconstruction loss.
        nn::zero_grads(genc);
        nn::zero_grads(gdec);
        const double l_ae = ae_loss_impl(model_, batch, &genc, &gdec);
        {
            std::vector<double> params = collect_two(model_.encoder, model_.decoder);
            std::vector<double> grads;
            grads.reserve(params.size());
            nn::append_grads(genc, grads);
            nn::append_grads(gdec, grads);
            nn::adam_step(adam_ae_, params, grads);
            assign_two(model_.encoder, model_.decoder, params);
        }

        // (2) SGD on the discriminator with fresh prior samples.
        prior_batch.clear();
        for (std::size_t k = 0; k < batch.size(); ++k)
            prior_batch.push_back(sample_prior(prior, rng));
        nn::zero_grads(gd);
        const double l_d = d_loss_impl(model_, batch, prior_batch, gamma, &gd);
        {
            std::vector<double> params = nn::collect_params(model_.discriminator);
            std::vector<double> grads;
            grads.reserve(params.size());
            nn::append_grads(gd, grads);
            nn::sgd_step(sgd_d_, params, grads);
            nn::assign_params(model_.discriminator, params);
        }

        // (3) Adam on the encoder: generator loss.
        nn::zero_grads(genc);
        const double l_q = q_loss_impl(model_, batch, &genc);
        {
            std::vector<double> params = nn::collect_params(model_.encoder);
            std::vector<double> grads;
            grads.reserve(params.size());
            nn::append_grads(genc, grads);
            nn::adam_step(adam_q_, params, grads);
            nn::assign_params(model_.encoder, params);
        }

        if (!std::isfinite(l_ae) || !std::isfinite(l_d) || !std::isfinite(l_q))
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch_ + 1));
        sums.ae += l_ae * n_b;
        sums.d += l_d * n_b;
        sums.q += l_q * n_b;
    }

    const double inv_n = 1.0 / static_cast<double>(n_samples);
    EpochLosses losses{sums.ae * inv_n, sums.d * inv_n, sums.q * inv_n};
    history_.push_back(losses);
    ++epoch_;
    return losses;
}

EpochRange select_stable_window(std::span<const EpochLosses> history, std::size_t window) {
    if (window < 1) throw InvalidParams("stable window must be >= 1");
    if (history.size() < window)
        throw HistoryTooShort("history has " + std::to_string(history.size()) +
                              " epochs, window needs " + std::to_string(window));
    std::vector<double> serie(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) serie[i] = history[i].d + history[i].q;

    std::size_t best_start = 0;
    double best_var = std::numeric_limits<double>::infinity();
    const double inv_w = 1.0 / static_cast<double>(window);
    for (std::size_t start = 0; start + window <= serie.size(); ++start) {
        double mean = 0.0;
        for (std::size_t i = start; i < start + window; ++i) mean += serie[i];
        mean *= inv_w;
        double var = 0.0;
        for (std::size_t i = start; i < start + window; ++i) {
            const double d = serie[i] - mean;
            var += d * d;
        }
        var *= inv_w;
        if (var < best_var) {
            best_var = var;
            best_start = start;
        }
    }
    return {best_start, best_start + window - 1};
}

}  // namespace gait
