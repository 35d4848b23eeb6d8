#include "gait/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gait/errors.hpp"

namespace gait::nn {

namespace {

double apply_act(Act act, double pre, double slope) {
    switch (act) {
        case Act::identity: return pre;
        case Act::leaky_relu: return pre > 0.0 ? pre : slope * pre;
        case Act::sigmoid: return 1.0 / (1.0 + std::exp(-pre));
    }
    return pre;
}

// Derivative of the activation given both the pre-activation and the
// stored output (the sigmoid case reuses y(1-y)).
double act_derivative(Act act, double pre, double out, double slope) {
    switch (act) {
        case Act::identity: return 1.0;
        case Act::leaky_relu: return pre > 0.0 ? 1.0 : slope;
        case Act::sigmoid: return out * (1.0 - out);
    }
    return 1.0;
}

void check_input(const Mlp& net, std::size_t got) {
    if (got != net.input_size())
        throw ShapeMismatch("network expects input of length " +
                            std::to_string(net.input_size()) + ", got " + std::to_string(got));
}

}  // namespace

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weights.size() + layer.biases.size();
    return n;
}

Mlp make_mlp(std::span<const std::size_t> dims, std::span<const Act> acts, double leaky_slope) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1)
        throw ShapeMismatch("make_mlp: need N+1 dims for N activations");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
        throw InvalidParams("leaky slope must be in (0, 1)");
    Mlp net;
    net.leaky_slope = leaky_slope;
    net.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        layer.in_units = dims[l];
        layer.out_units = dims[l + 1];
        layer.weights.assign(layer.in_units * layer.out_units, 0.0);
        layer.biases.assign(layer.out_units, 0.0);
        layer.act = acts[l];
    }
    return net;
}

void init_glorot_uniform(Mlp& net, Rng& rng) {
    for (auto& layer : net.layers) {
        const double bound =
            std::sqrt(6.0 / static_cast<double>(layer.in_units + layer.out_units));
        for (double& w : layer.weights) w = rng.uniform(-bound, bound);
        std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
    }
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
    check_input(net, x.size());
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (const auto& layer : net.layers) {
        next.assign(layer.out_units, 0.0);
        for (std::size_t o = 0; o < layer.out_units; ++o) {
            const double* w = layer.weights.data() + o * layer.in_units;
            double acc = layer.biases[o];
            for (std::size_t i = 0; i < layer.in_units; ++i) acc += w[i] * cur[i];
            next[o] = apply_act(layer.act, acc, net.leaky_slope);
        }
        cur.swap(next);
    }
    return cur;
}

void forward(const Mlp& net, std::span<const double> x, Trace& trace) {
    check_input(net, x.size());
    const std::size_t n_layers = net.layers.size();
    trace.pre.resize(n_layers);
    trace.act.resize(n_layers + 1);
    trace.act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& layer = net.layers[l];
        auto& pre = trace.pre[l];
        auto& out = trace.act[l + 1];
        pre.assign(layer.out_units, 0.0);
        out.assign(layer.out_units, 0.0);
        const auto& in = trace.act[l];
        for (std::size_t o = 0; o < layer.out_units; ++o) {
            const double* w = layer.weights.data() + o * layer.in_units;
            double acc = layer.biases[o];
            for (std::size_t i = 0; i < layer.in_units; ++i) acc += w[i] * in[i];
            pre[o] = acc;
            out[o] = apply_act(layer.act, acc, net.leaky_slope);
        }
    }
}

Grads make_grads(const Mlp& net) {
    Grads g;
    g.weights.resize(net.layers.size());
    g.biases.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        g.weights[l].assign(net.layers[l].weights.size(), 0.0);
        g.biases[l].assign(net.layers[l].biases.size(), 0.0);
    }
    return g;
}

void zero_grads(Grads& g) {
    for (auto& w : g.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : g.biases) std::fill(b.begin(), b.end(), 0.0);
}

std::vector<double> backward(const Mlp& net, const Trace& trace,
                             std::span<const double> dout, Grads& g) {
    const std::size_t n_layers = net.layers.size();
    if (dout.size() != net.output_size())
        throw ShapeMismatch("backward: dout length " + std::to_string(dout.size()) +
                            " != output size " + std::to_string(net.output_size()));

    std::vector<double> dcur(dout.begin(), dout.end());
    std::vector<double> dprev;
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = net.layers[l];
        const auto& pre = trace.pre[l];
        const auto& out = trace.act[l + 1];
        const auto& in = trace.act[l];

        // dL/dpre in place.
        for (std::size_t o = 0; o < layer.out_units; ++o)
            dcur[o] *= act_derivative(layer.act, pre[o], out[o], net.leaky_slope);

        double* gw = g.weights[l].data();
        for (std::size_t o = 0; o < layer.out_units; ++o) {
            const double d = dcur[o];
            g.biases[l][o] += d;
            double* row = gw + o * layer.in_units;
            for (std::size_t i = 0; i < layer.in_units; ++i) row[i] += d * in[i];
        }

        dprev.assign(layer.in_units, 0.0);
        for (std::size_t o = 0; o < layer.out_units; ++o) {
            const double d = dcur[o];
            const double* row = layer.weights.data() + o * layer.in_units;
            for (std::size_t i = 0; i < layer.in_units; ++i) dprev[i] += d * row[i];
        }
        dcur.swap(dprev);
    }
    return dcur;
}

std::vector<double> logit_input_gradient(const Mlp& net, const Trace& trace,
                                         std::vector<std::vector<double>>* delta_out) {
    const std::size_t n_layers = net.layers.size();
    if (net.output_size() != 1)
        throw ShapeMismatch("logit_input_gradient expects a scalar-output network");

    if (delta_out) delta_out->assign(n_layers, {});
    // delta_l = d(logit)/d(pre_l); the final layer's activation is skipped
    // because the logit is its pre-activation.
    std::vector<double> delta = {1.0};
    if (delta_out) (*delta_out)[n_layers - 1] = delta;
    for (std::size_t l = n_layers; l-- > 1;) {
        const auto& layer = net.layers[l];
        const auto& below = net.layers[l - 1];
        std::vector<double> dprev(layer.in_units, 0.0);
        for (std::size_t o = 0; o < layer.out_units; ++o) {
            const double d = delta[o];
            const double* row = layer.weights.data() + o * layer.in_units;
            for (std::size_t i = 0; i < layer.in_units; ++i) dprev[i] += d * row[i];
        }
        for (std::size_t i = 0; i < below.out_units; ++i)
            dprev[i] *= act_derivative(below.act, trace.pre[l - 1][i], trace.act[l][i],
                                       net.leaky_slope);
        delta.swap(dprev);
        if (delta_out) (*delta_out)[l - 1] = delta;
    }
    const auto& first = net.layers.front();
    std::vector<double> dinput(first.in_units, 0.0);
    for (std::size_t o = 0; o < first.out_units; ++o) {
        const double d = delta[o];
        const double* row = first.weights.data() + o * first.in_units;
        for (std::size_t i = 0; i < first.in_units; ++i) dinput[i] += d * row[i];
    }
    return dinput;
}

double cross_entropy(std::span<const double> x, std::span<const double> xhat) {
    if (x.size() != xhat.size() || x.empty())
        throw ShapeMismatch("cross_entropy: length mismatch or empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p = std::clamp(xhat[i], kProbEps, 1.0 - kProbEps);
        sum += -x[i] * std::log(p) - (1.0 - x[i]) * std::log(1.0 - p);
    }
    return sum / static_cast<double>(x.size());
}

void cross_entropy_grad(std::span<const double> x, std::span<const double> xhat,
                        double scale, std::vector<double>& dxhat) {
    dxhat.assign(xhat.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (xhat[i] <= kProbEps || xhat[i] >= 1.0 - kProbEps) continue;  // clamp is flat
        dxhat[i] = scale * (-x[i] / xhat[i] + (1.0 - x[i]) / (1.0 - xhat[i]));
    }
}

std::vector<double> collect_params(const Mlp& net) {
    std::vector<double> flat;
    flat.reserve(net.param_count());
    for (const auto& layer : net.layers) {
        flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
        flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
    }
    return flat;
}

void assign_params(Mlp& net, std::span<const double> flat) {
    if (flat.size() != net.param_count())
        throw ShapeMismatch("assign_params: got " + std::to_string(flat.size()) +
                            " values, expected " + std::to_string(net.param_count()));
    std::size_t pos = 0;
    for (auto& layer : net.layers) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.weights.size(),
                    layer.weights.begin());
        pos += layer.weights.size();
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), layer.biases.size(),
                    layer.biases.begin());
        pos += layer.biases.size();
    }
}

void append_grads(const Grads& g, std::vector<double>& flat) {
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        flat.insert(flat.end(), g.weights[l].begin(), g.weights[l].end());
        flat.insert(flat.end(), g.biases[l].begin(), g.biases[l].end());
    }
}

AdamState make_adam(std::size_t n_params, const AdamConfig& cfg) {
    AdamState state;
    state.cfg = cfg;
    state.m.assign(n_params, 0.0);
    state.v.assign(n_params, 0.0);
    return state;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ShapeMismatch("adam_step: parameter/gradient/state sizes differ");
    ++state.step;
    const double b1 = state.cfg.beta1;
    const double b2 = state.cfg.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double gi = grads[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * gi;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * gi * gi;
        const double mhat = state.m[i] / corr1;
        const double vhat = state.v[i] / corr2;
        params[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
}

void sgd_step(const SgdState& state, std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size())
        throw ShapeMismatch("sgd_step: parameter/gradient sizes differ");
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= state.lr * grads[i];
}

}  // namespace gait::nn
