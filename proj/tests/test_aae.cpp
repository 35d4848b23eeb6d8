#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "gait/aae.hpp"
#include "gait/checkpoint.hpp"
#include "gait/errors.hpp"
#include "gait/gait_index.hpp"
#include "oracles.hpp"

using namespace gait;

namespace {

Batch random_batch(std::size_t n, std::size_t dim, Rng& rng) {
    Batch xs(n);
    for (auto& x : xs) {
        x.resize(dim);
        for (double& v : x) v = rng.uniform();
    }
    return xs;
}

void zero_params(nn::Mlp& net) {
    for (auto& layer : net.layers) {
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
        std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
    }
}

AaeModel small_model(std::uint64_t seed) {
    Rng rng(seed);
    return make_aae({16, 8, 4, 0.2}, rng);
}

}  // namespace

TEST_CASE("architecture: parameter counts match the layer table") {
    Rng rng(1);
    const AaeModel model = make_aae({}, rng);
    CHECK(model.encoder.param_count() == 256 * 96 + 96 + 96 * 16 + 16);
    CHECK(model.decoder.param_count() == 16 * 96 + 96 + 96 * 256 + 256);
    CHECK(model.discriminator.param_count() == 16 * 96 + 96 + 96 * 1 + 1);
    CHECK(model.encoder.input_size() == 256);
    CHECK(model.encoder.output_size() == 16);
    CHECK(model.decoder.output_size() == 256);
    CHECK(model.discriminator.output_size() == 1);
}

TEST_CASE("encode/decode/discriminate: shapes, ranges, zero-weight cases") {
    Rng rng(2);
    AaeModel model = make_aae({}, rng);
    const std::vector<double> x(256, 0.25);

    const std::vector<double> z = encode(model, x);
    CHECK(z.size() == 16);
    const std::vector<double> xhat = decode(model, z);
    CHECK(xhat.size() == 256);
    for (double v : xhat) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    const double p = discriminate(model, z);
    CHECK(p > 0.0);
    CHECK(p < 1.0);

    // Zero weights: encoder output is its final bias vector; sigmoid
    // outputs sit at one half.
    zero_params(model.encoder);
    for (std::size_t i = 0; i < 16; ++i) model.encoder.layers[1].biases[i] = 0.5 + 0.01 * i;
    const std::vector<double> zb = encode(model, x);
    for (std::size_t i = 0; i < 16; ++i) CHECK(zb[i] == doctest::Approx(0.5 + 0.01 * i));

    zero_params(model.decoder);
    zero_params(model.discriminator);
    for (double v : decode(model, zb)) CHECK(v == doctest::Approx(0.5));
    CHECK(discriminate(model, zb) == doctest::Approx(0.5));

    CHECK_THROWS_AS(encode(model, std::vector<double>(100, 0.0)), ShapeMismatch);
    CHECK_THROWS_AS(discriminate(model, x), ShapeMismatch);
}

TEST_CASE("encode matches a composition oracle") {
    Rng rng(3);
    const AaeModel model = small_model(33);
    Batch xs = random_batch(1, 16, rng);
    const std::vector<double> z = encode(model, xs[0]);
    const std::vector<double> oracle =
        nn::forward(model.encoder, xs[0]);  // same network, explicit path
    // Plain loop recomputation of the two layers.
    std::vector<double> h(8, 0.0);
    for (std::size_t o = 0; o < 8; ++o) {
        double acc = model.encoder.layers[0].biases[o];
        for (std::size_t i = 0; i < 16; ++i)
            acc += model.encoder.layers[0].weights[o * 16 + i] * xs[0][i];
        h[o] = acc > 0 ? acc : 0.2 * acc;
    }
    for (std::size_t o = 0; o < 4; ++o) {
        double acc = model.encoder.layers[1].biases[o];
        for (std::size_t i = 0; i < 8; ++i)
            acc += model.encoder.layers[1].weights[o * 8 + i] * h[i];
        CHECK(z[o] == doctest::Approx(acc).epsilon(1e-12));
    }
    CHECK(z == oracle);
}

TEST_CASE("loss_ae: closed form at one half and oracle agreement") {
    Rng rng(4);
    AaeModel model = make_aae({}, rng);
    zero_params(model.decoder);  // reconstruction is exactly 0.5 everywhere
    Batch xs(3, std::vector<double>(256, 0.5));
    CHECK(loss_ae(model, xs) == doctest::Approx(std::log(2.0)));

    // Random model: mean of per-sample cross entropies.
    AaeModel m2 = make_aae({}, rng);
    Batch batch = random_batch(5, 256, rng);
    double expect = 0.0;
    for (const auto& x : batch) expect += nn::cross_entropy(x, decode(m2, encode(m2, x)));
    expect /= 5.0;
    CHECK(loss_ae(m2, batch) == doctest::Approx(expect).epsilon(1e-12));

    CHECK_THROWS_AS(loss_ae(m2, Batch{}), EmptyDataset);
}

TEST_CASE("loss_d: log 2 at a constant half discriminator, oracle otherwise") {
    Rng rng(5);
    AaeModel model = make_aae({16, 8, 4, 0.2}, rng);
    zero_params(model.discriminator);  // D == 0.5 everywhere
    Batch xs = random_batch(4, 16, rng);
    Batch zs = random_batch(4, 4, rng);
    CHECK(loss_d(model, xs, zs, 0.0) == doctest::Approx(std::log(2.0)));
    // Constant D also has zero input gradient, so R_D adds nothing.
    CHECK(loss_d(model, xs, zs, 0.7) == doctest::Approx(std::log(2.0)));
    CHECK(gradient_penalty(model, zs, zs) == doctest::Approx(0.0));

    const AaeModel m2 = small_model(55);
    double expect = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double p_real = discriminate(m2, zs[i]);
        const double p_fake = discriminate(m2, encode(m2, xs[i]));
        expect += -std::log(p_real) - std::log(1.0 - p_fake);
    }
    expect /= 2.0 * static_cast<double>(xs.size());
    CHECK(loss_d(m2, xs, zs, 0.0) == doctest::Approx(expect).epsilon(1e-12));

    // gamma=0 equals the plain GAN discriminator loss; gamma>0 adds the
    // scaled penalty.
    const double r = gradient_penalty(m2, zs, [&] {
        Batch enc;
        for (const auto& x : xs) enc.push_back(encode(m2, x));
        return enc;
    }());
    CHECK(loss_d(m2, xs, zs, 0.3) ==
          doctest::Approx(loss_d(m2, xs, zs, 0.0) + 0.15 * r).epsilon(1e-12));
}

TEST_CASE("gradient_penalty: nonnegative and consistent with FD input gradients") {
    Rng rng(6);
    const AaeModel model = small_model(77);
    const Batch prior_zs = random_batch(3, 4, rng);
    const Batch enc_zs = random_batch(3, 4, rng);
    const double r = gradient_penalty(model, prior_zs, enc_zs);
    CHECK(r >= 0.0);

    // Oracle: squared norms of finite-difference logit gradients.
    const auto logit = [&](const std::vector<double>& z) {
        const double p = discriminate(model, z);
        return std::log(p / (1.0 - p));
    };
    double expect = 0.0;
    for (const auto& z : prior_zs) {
        std::vector<double> zz = z;
        const auto g = oracles::fd_gradient(zz, [&] { return logit(zz); });
        double n2 = 0.0;
        for (double v : g) n2 += v * v;
        const double d = discriminate(model, z);
        expect += (1.0 - d) * (1.0 - d) * n2 / 3.0;
    }
    for (const auto& z : enc_zs) {
        std::vector<double> zz = z;
        const auto g = oracles::fd_gradient(zz, [&] { return logit(zz); });
        double n2 = 0.0;
        for (double v : g) n2 += v * v;
        const double d = discriminate(model, z);
        expect += d * d * n2 / 3.0;
    }
    CHECK(r == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("loss_q: log 2 at a constant half discriminator, oracle otherwise") {
    Rng rng(7);
    AaeModel model = small_model(88);
    zero_params(model.discriminator);
    Batch xs = random_batch(6, 16, rng);
    CHECK(loss_q(model, xs) == doctest::Approx(std::log(2.0)));

    const AaeModel m2 = small_model(99);
    double expect = 0.0;
    for (const auto& x : xs) expect += -std::log(discriminate(m2, encode(m2, x)));
    expect /= static_cast<double>(xs.size());
    CHECK(loss_q(m2, xs) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("loss gradients match finite differences on a reduced model") {
    Rng rng(8);
    const AaeModel model = small_model(123);
    const Batch xs = random_batch(3, 16, rng);
    const Batch zs = random_batch(3, 4, rng);

    SUBCASE("reconstruction loss over encoder and decoder") {
        AaeModel m = model;
        nn::Grads ge = nn::make_grads(m.encoder);
        nn::Grads gd = nn::make_grads(m.decoder);
        loss_ae_grads(m, xs, ge, gd);
        std::vector<double> analytic;
        nn::append_grads(ge, analytic);
        nn::append_grads(gd, analytic);

        std::vector<double> params = nn::collect_params(m.encoder);
        const std::vector<double> dec_params = nn::collect_params(m.decoder);
        params.insert(params.end(), dec_params.begin(), dec_params.end());
        const std::size_t n_enc = m.encoder.param_count();
        const auto loss = [&] {
            nn::assign_params(m.encoder, std::span(params).subspan(0, n_enc));
            nn::assign_params(m.decoder, std::span(params).subspan(n_enc));
            return loss_ae(m, xs);
        };
        const std::vector<double> fd = oracles::fd_gradient(params, loss);
        CHECK(oracles::max_relative_error(analytic, fd) < 1e-4);
    }

    SUBCASE("discriminator loss including the gradient penalty") {
        AaeModel m = model;
        nn::Grads gd = nn::make_grads(m.discriminator);
        loss_d_grads(m, xs, zs, 0.25, gd);
        std::vector<double> analytic;
        nn::append_grads(gd, analytic);

        std::vector<double> params = nn::collect_params(m.discriminator);
        const auto loss = [&] {
            nn::assign_params(m.discriminator, params);
            return loss_d(m, xs, zs, 0.25);
        };
        const std::vector<double> fd = oracles::fd_gradient(params, loss);
        CHECK(oracles::max_relative_error(analytic, fd) < 1e-4);
    }

    SUBCASE("generator loss over the encoder") {
        AaeModel m = model;
        nn::Grads ge = nn::make_grads(m.encoder);
        loss_q_grads(m, xs, ge);
        std::vector<double> analytic;
        nn::append_grads(ge, analytic);

        std::vector<double> params = nn::collect_params(m.encoder);
        const auto loss = [&] {
            nn::assign_params(m.encoder, params);
            return loss_q(m, xs);
        };
        const std::vector<double> fd = oracles::fd_gradient(params, loss);
        CHECK(oracles::max_relative_error(analytic, fd) < 1e-4);
    }
}

TEST_CASE("trainer: zero learning rates leave all parameters unchanged") {
    Rng rng(9);
    AaeModel model = small_model(321);
    const std::vector<double> before_e = nn::collect_params(model.encoder);
    const std::vector<double> before_p = nn::collect_params(model.decoder);
    const std::vector<double> before_d = nn::collect_params(model.discriminator);

    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.stable_window = 1;
    cfg.batch_size = 4;
    cfg.lr_ae = cfg.lr_d = cfg.lr_q = 0.0;
    cfg.seed = 5;
    Trainer trainer(model, cfg);
    const Batch data = random_batch(10, 16, rng);
    trainer.run_epoch(data);
    CHECK(nn::collect_params(model.encoder) == before_e);
    CHECK(nn::collect_params(model.decoder) == before_p);
    CHECK(nn::collect_params(model.discriminator) == before_d);
    CHECK(trainer.history().size() == 1);
    trainer.run_epoch(data);
    CHECK(trainer.history().size() == 2);

    CHECK_THROWS_AS(trainer.run_epoch(Batch{}), EmptyDataset);
}

TEST_CASE("trainer: optimizer steps stay inside their parameter partition") {
    Rng rng(10);
    const Batch data = random_batch(12, 16, rng);

    // Only the discriminator trains: encoder and decoder must not move.
    {
        AaeModel model = small_model(42);
        const auto enc = nn::collect_params(model.encoder);
        const auto dec = nn::collect_params(model.decoder);
        const auto disc = nn::collect_params(model.discriminator);
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.stable_window = 1;
        cfg.batch_size = 6;
        cfg.lr_ae = 0.0;
        cfg.lr_q = 0.0;
        cfg.lr_d = 1e-2;
        Trainer trainer(model, cfg);
        trainer.run_epoch(data);
        CHECK(nn::collect_params(model.encoder) == enc);
        CHECK(nn::collect_params(model.decoder) == dec);
        CHECK(nn::collect_params(model.discriminator) != disc);
    }
    // Only the generator step trains: decoder and discriminator fixed.
    {
        AaeModel model = small_model(42);
        const auto dec = nn::collect_params(model.decoder);
        const auto disc = nn::collect_params(model.discriminator);
        const auto enc = nn::collect_params(model.encoder);
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.stable_window = 1;
        cfg.batch_size = 6;
        cfg.lr_ae = 0.0;
        cfg.lr_d = 0.0;
        cfg.lr_q = 1e-3;
        Trainer trainer(model, cfg);
        trainer.run_epoch(data);
        CHECK(nn::collect_params(model.decoder) == dec);
        CHECK(nn::collect_params(model.discriminator) == disc);
        CHECK(nn::collect_params(model.encoder) != enc);
    }
}

TEST_CASE("trainer: reconstruction loss decreases on a structured dataset") {
    // 200 synthetic samples on a low-dimensional manifold.
    Rng rng(11);
    Batch data;
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform();
        std::vector<double> x(16);
        for (std::size_t j = 0; j < 16; ++j)
            x[j] = 0.5 + 0.4 * std::sin(0.3 * static_cast<double>(j) + 6.28 * a);
        data.push_back(x);
    }
    AaeModel model = small_model(7);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.stable_window = 5;
    cfg.batch_size = 32;
    cfg.seed = 3;
    Trainer trainer(model, cfg);
    for (int e = 0; e < 20; ++e) trainer.run_epoch(data);
    CHECK(trainer.history().back().ae < trainer.history().front().ae);
}

TEST_CASE("trainer: same seed reproduces parameters bit for bit") {
    Rng rng(12);
    const Batch data = random_batch(30, 16, rng);
    const auto run = [&] {
        AaeModel model = small_model(100);
        TrainConfig cfg;
        cfg.epochs = 3;
        cfg.stable_window = 1;
        cfg.batch_size = 8;
        cfg.seed = 77;
        Trainer trainer(model, cfg);
        for (int e = 0; e < 3; ++e) trainer.run_epoch(data);
        std::vector<double> all = nn::collect_params(model.encoder);
        const auto d = nn::collect_params(model.decoder);
        const auto di = nn::collect_params(model.discriminator);
        all.insert(all.end(), d.begin(), d.end());
        all.insert(all.end(), di.begin(), di.end());
        return all;
    };
    CHECK(run() == run());
}

TEST_CASE("select_stable_window: ties break earliest; spikes are excluded") {
    std::vector<EpochLosses> flat(10, {1.0, 0.7, 0.7});
    const EpochRange first = select_stable_window(flat, 4);
    CHECK(first.first == 0);
    CHECK(first.last == 3);

    // A late spike in L_D pushes the window before it.
    std::vector<EpochLosses> spiky(12, {1.0, 0.5, 0.5});
    spiky[9].d = 8.0;
    const EpochRange range = select_stable_window(spiky, 6);
    CHECK(range.last < 9);

    // Brute-force oracle over every start using a prefix-sum variance.
    Rng rng(13);
    std::vector<EpochLosses> noisy(40);
    for (auto& e : noisy) {
        e.ae = rng.uniform();
        e.d = rng.uniform();
        e.q = rng.uniform();
    }
    const std::size_t w = 10;
    double best = 1e300;
    std::size_t best_start = 0;
    std::vector<double> s1(noisy.size() + 1, 0.0), s2(noisy.size() + 1, 0.0);
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        const double v = noisy[i].d + noisy[i].q;
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    for (std::size_t start = 0; start + w <= noisy.size(); ++start) {
        const double sum = s1[start + w] - s1[start];
        const double sum2 = s2[start + w] - s2[start];
        const double var = sum2 / w - (sum / w) * (sum / w);
        if (var < best - 1e-15) {
            best = var;
            best_start = start;
        }
    }
    const EpochRange got = select_stable_window(noisy, w);
    CHECK(got.first == best_start);

    CHECK_THROWS_AS(select_stable_window(flat, 11), HistoryTooShort);
}

TEST_CASE("checkpoint: bit-exact round trip and version checks") {
    Rng rng(14);
    AaeModel model = small_model(2000);
    Checkpoint ckpt;
    ckpt.epoch = 42;
    ckpt.config_digest = 0xdeadbeefcafe1234ull;
    ckpt.model = model;
    ckpt.prior = {4, 1.5};
    ckpt.index_cfg = {0.25, true, false, true};
    ckpt.weights = {1.0, 2.0, 3.0, 0.1, 0.2, 0.3};
    ckpt.history = {{1.0, 2.0, 3.0}, {0.5, 0.25, 0.125}};
    const std::size_t n_ae = model.encoder.param_count() + model.decoder.param_count();
    ckpt.adam_ae_m.assign(n_ae, 0.5);
    ckpt.adam_ae_v.assign(n_ae, 0.25);
    ckpt.adam_ae_step = 7;
    ckpt.adam_q_m.assign(model.encoder.param_count(), -0.5);
    ckpt.adam_q_v.assign(model.encoder.param_count(), 0.125);
    ckpt.adam_q_step = 3;

    const auto dir = std::filesystem::temp_directory_path() / "gait_ckpt_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "m.gaae";
    save_checkpoint(file, ckpt);
    const Checkpoint back = load_checkpoint(file);

    CHECK(back.epoch == 42);
    CHECK(back.config_digest == ckpt.config_digest);
    CHECK(back.history.size() == 2);
    CHECK(back.history[1].q == 0.125);
    CHECK(back.index_cfg.use_prior == false);
    CHECK(back.weights.w_disc == 3.0);
    CHECK(nn::collect_params(back.model.encoder) == nn::collect_params(model.encoder));
    CHECK(nn::collect_params(back.model.decoder) == nn::collect_params(model.decoder));
    CHECK(nn::collect_params(back.model.discriminator) ==
          nn::collect_params(model.discriminator));
    CHECK(back.adam_ae_step == 7);
    CHECK(back.adam_q_m == ckpt.adam_q_m);

    // save -> load -> save produces identical bytes.
    const auto file2 = dir / "m2.gaae";
    save_checkpoint(file2, back);
    std::ifstream f1(file, std::ios::binary), f2(file2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);

    // Scores from the loaded model are identical on fresh inputs.
    Rng rng2(15);
    for (int i = 0; i < 100; ++i) {
        Batch x = random_batch(1, 16, rng2);
        CHECK(encode(back.model, x[0]) == encode(model, x[0]));
    }

    {
        std::ofstream out(file, std::ios::binary);
        out << "NOTAC";
    }
    CHECK_THROWS_AS(load_checkpoint(file), FormatError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sample_prior: dimension and variance follow the spec") {
    Rng rng(16);
    const PriorSpec prior{16, 4.0};
    double sum2 = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto z = sample_prior(prior, rng);
        REQUIRE(z.size() == 16);
        for (double v : z) sum2 += v * v;
    }
    CHECK(sum2 / (n * 16) == doctest::Approx(4.0).epsilon(0.05));
}
