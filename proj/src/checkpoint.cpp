#include "gait/checkpoint.hpp"

#include <algorithm>
#include <string>

#include "gait/errors.hpp"
#include "io_util.hpp"

namespace gait {

namespace {

constexpr char kMagic[5] = {'G', 'A', 'A', 'E', '1'};
constexpr std::uint8_t kVersion = 1;

void write_vec(std::ostream& out, const std::vector<double>& v) {
    detail::write_u64le(out, v.size());
    for (double x : v) detail::write_f64le(out, x);
}

std::vector<double> read_vec(std::istream& in, const char* what) {
    const std::uint64_t n = detail::read_u64le(in, what);
    std::vector<double> v(n);
    for (double& x : v) x = detail::read_f64le(in, what);
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt) {
    auto out = detail::open_out(file, /*binary=*/true);
    detail::write_bytes(out, kMagic, sizeof(kMagic));
    detail::write_u8(out, kVersion);
    detail::write_u64le(out, ckpt.config_digest);
    detail::write_u32le(out, ckpt.epoch);

    const AaeArch& arch = ckpt.model.arch;
    detail::write_u32le(out, static_cast<std::uint32_t>(arch.input));
    detail::write_u32le(out, static_cast<std::uint32_t>(arch.hidden));
    detail::write_u32le(out, static_cast<std::uint32_t>(arch.latent));
    detail::write_f64le(out, arch.leaky_slope);

    detail::write_u32le(out, static_cast<std::uint32_t>(ckpt.prior.dim));
    detail::write_f64le(out, ckpt.prior.sigma2);

    detail::write_f64le(out, ckpt.index_cfg.exponent);
    const std::uint8_t mask = static_cast<std::uint8_t>((ckpt.index_cfg.use_recon ? 1 : 0) |
                                                        (ckpt.index_cfg.use_prior ? 2 : 0) |
                                                        (ckpt.index_cfg.use_disc ? 4 : 0));
    detail::write_u8(out, mask);

    detail::write_f64le(out, ckpt.weights.w_recon);
    detail::write_f64le(out, ckpt.weights.w_prior);
    detail::write_f64le(out, ckpt.weights.w_disc);
    detail::write_f64le(out, ckpt.weights.s_recon);
    detail::write_f64le(out, ckpt.weights.s_prior);
    detail::write_f64le(out, ckpt.weights.s_disc);

    detail::write_u32le(out, static_cast<std::uint32_t>(ckpt.history.size()));
    for (const EpochLosses& e : ckpt.history) {
        detail::write_f64le(out, e.ae);
        detail::write_f64le(out, e.d);
        detail::write_f64le(out, e.q);
    }

    // Parameters in documented flat order: encoder, decoder, discriminator.
    write_vec(out, nn::collect_params(ckpt.model.encoder));
    write_vec(out, nn::collect_params(ckpt.model.decoder));
    write_vec(out, nn::collect_params(ckpt.model.discriminator));

    detail::write_u64le(out, ckpt.adam_ae_step);
    write_vec(out, ckpt.adam_ae_m);
    write_vec(out, ckpt.adam_ae_v);
    detail::write_u64le(out, ckpt.adam_q_step);
    write_vec(out, ckpt.adam_q_m);
    write_vec(out, ckpt.adam_q_v);

    if (!out) throw IoError("write failed: " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    auto in = detail::open_in(file, /*binary=*/true);
    char magic[5];
    detail::read_bytes(in, magic, sizeof(magic), "checkpoint magic");
    if (!std::equal(magic, magic + 5, kMagic))
        throw FormatError("bad checkpoint magic in " + file.string());
    const std::uint8_t version = detail::read_u8(in, "version");
    if (version != kVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " in " +
                          file.string());

    Checkpoint ckpt;
    ckpt.config_digest = detail::read_u64le(in, "config digest");
    ckpt.epoch = detail::read_u32le(in, "epoch");

    AaeArch arch;
    arch.input = detail::read_u32le(in, "arch input");
    arch.hidden = detail::read_u32le(in, "arch hidden");
    arch.latent = detail::read_u32le(in, "arch latent");
    arch.leaky_slope = detail::read_f64le(in, "leaky slope");

    ckpt.prior.dim = detail::read_u32le(in, "prior dim");
    ckpt.prior.sigma2 = detail::read_f64le(in, "prior sigma2");

    ckpt.index_cfg.exponent = detail::read_f64le(in, "exponent");
    const std::uint8_t mask = detail::read_u8(in, "measure mask");
    ckpt.index_cfg.use_recon = (mask & 1) != 0;
    ckpt.index_cfg.use_prior = (mask & 2) != 0;
    ckpt.index_cfg.use_disc = (mask & 4) != 0;

    ckpt.weights.w_recon = detail::read_f64le(in, "weights");
    ckpt.weights.w_prior = detail::read_f64le(in, "weights");
    ckpt.weights.w_disc = detail::read_f64le(in, "weights");
    ckpt.weights.s_recon = detail::read_f64le(in, "weights");
    ckpt.weights.s_prior = detail::read_f64le(in, "weights");
    ckpt.weights.s_disc = detail::read_f64le(in, "weights");

    const std::uint32_t n_hist = detail::read_u32le(in, "history length");
    ckpt.history.resize(n_hist);
    for (EpochLosses& e : ckpt.history) {
        e.ae = detail::read_f64le(in, "history");
        e.d = detail::read_f64le(in, "history");
        e.q = detail::read_f64le(in, "history");
    }

    // Rebuild the (zero-initialized) architecture, then overwrite params.
    Rng dummy(0);
    ckpt.model = make_aae(arch, dummy);
    nn::assign_params(ckpt.model.encoder, read_vec(in, "encoder params"));
    nn::assign_params(ckpt.model.decoder, read_vec(in, "decoder params"));
    nn::assign_params(ckpt.model.discriminator, read_vec(in, "discriminator params"));

    ckpt.adam_ae_step = detail::read_u64le(in, "adam ae step");
    ckpt.adam_ae_m = read_vec(in, "adam ae m");
    ckpt.adam_ae_v = read_vec(in, "adam ae v");
    ckpt.adam_q_step = detail::read_u64le(in, "adam q step");
    ckpt.adam_q_m = read_vec(in, "adam q m");
    ckpt.adam_q_v = read_vec(in, "adam q v");
    return ckpt;
}

}  // namespace gait
