#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gait/rng.hpp"

namespace gait::nn {

enum class Act : std::uint8_t { identity = 0, leaky_relu = 1, sigmoid = 2 };

// Fully-connected layer, weights row-major (out_units x in_units).
struct DenseLayer {
    std::size_t in_units = 0;
    std::size_t out_units = 0;
    std::vector<double> weights;
    std::vector<double> biases;
    Act act = Act::identity;
};

// Small dense network with manual reverse-mode gradients. All math is
// double precision; training is single threaded and fully deterministic.
struct Mlp {
    std::vector<DenseLayer> layers;
    double leaky_slope = 0.2;

    std::size_t input_size() const { return layers.empty() ? 0 : layers.front().in_units; }
    std::size_t output_size() const { return layers.empty() ? 0 : layers.back().out_units; }
    std::size_t param_count() const;
};

// dims = {in, h1, ..., out}; acts has one entry per layer.
Mlp make_mlp(std::span<const std::size_t> dims, std::span<const Act> acts, double leaky_slope = 0.2);

// Uniform init in +/- sqrt(6 / (fan_in + fan_out)); biases zero.
void init_glorot_uniform(Mlp& net, Rng& rng);

// Cached activations from one forward pass; act[0] is the input copy,
// act[l+1] / pre[l] belong to layer l.
struct Trace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
};

std::vector<double> forward(const Mlp& net, std::span<const double> x);
void forward(const Mlp& net, std::span<const double> x, Trace& trace);

// Parameter gradients, shaped like the layers of one Mlp.
struct Grads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

Grads make_grads(const Mlp& net);
void zero_grads(Grads& g);

// Accumulates dL/dparams into g given dL/doutput, and returns dL/dinput.
// The input gradient feeds the discriminator regularizer and generator
// updates that pass through the discriminator.
std::vector<double> backward(const Mlp& net, const Trace& trace,
                             std::span<const double> dout, Grads& g);

// d(final pre-activation)/d(input) for a scalar-output net, i.e. the input
// gradient of the logit underneath a final sigmoid. delta_out, when given,
// receives dlogit/d(pre_l) per layer (used by the gradient penalty).
std::vector<double> logit_input_gradient(const Mlp& net, const Trace& trace,
                                         std::vector<std::vector<double>>* delta_out = nullptr);

// Mean over elements of -x log(xh) - (1-x) log(1-xh); xh clamped to
// [1e-7, 1 - 1e-7].
double cross_entropy(std::span<const double> x, std::span<const double> xhat);

// d(cross_entropy)/dxhat scaled by `scale`; zero where the clamp binds.
void cross_entropy_grad(std::span<const double> x, std::span<const double> xhat,
                        double scale, std::vector<double>& dxhat);

inline constexpr double kProbEps = 1e-7;

// Flat parameter/gradient vectors in documented order: per layer, weights
// row-major then biases; layers in network order. Checkpoints persist
// parameters in exactly this order.
std::vector<double> collect_params(const Mlp& net);
void assign_params(Mlp& net, std::span<const double> flat);
void append_grads(const Grads& g, std::vector<double>& flat);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;
};

AdamState make_adam(std::size_t n_params, const AdamConfig& cfg);

// Standard Adam with bias correction.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

struct SgdState {
    double lr = 1e-2;
};

void sgd_step(const SgdState& state, std::span<double> params, std::span<const double> grads);

}  // namespace gait::nn
