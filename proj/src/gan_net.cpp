#include "ooc/gan/net.hpp"

#include <cmath>

#include "ooc/errors.hpp"

namespace ooc::gan {

namespace {

double activate_output(OutputActivation kind, double z) {
    return kind == OutputActivation::Sigmoid ? 1.0 / (1.0 + std::exp(-z)) : z;
}

// Derivatives recovered from post-activation values.
double output_derivative(OutputActivation kind, double a) {
    return kind == OutputActivation::Sigmoid ? a * (1.0 - a) : 1.0;
}

}  // namespace

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += weights[l].size() + biases[l].size();
    }
    return n;
}

bool DenseNet::finite() const {
    for (const auto& w : weights) {
        for (double v : w) {
            if (!std::isfinite(v)) return false;
        }
    }
    for (const auto& b : biases) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

DenseNet make_dense_net(const std::vector<int>& layer_sizes, OutputActivation output,
                        Rng& rng) {
    if (layer_sizes.size() < 2) {
        throw ValidationError("make_dense_net: need at least input and output layers");
    }
    for (int size : layer_sizes) {
        if (size < 1) throw ValidationError("make_dense_net: layer sizes must be positive");
    }
    DenseNet net;
    net.layer_sizes = layer_sizes;
    net.output = output;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        std::vector<double> w(static_cast<std::size_t>(in) * out);
        for (double& v : w) v = rng.uniform(-0.05, 0.05);
        std::vector<double> b(out);
        for (double& v : b) v = rng.uniform(-0.05, 0.05);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

ForwardTrace forward_trace(const DenseNet& net, std::span<const double> input) {
    if (static_cast<int>(input.size()) != net.input_size()) {
        throw ValidationError("forward: input size does not match the net");
    }
    ForwardTrace trace;
    trace.post.reserve(net.weights.size() + 1);
    trace.post.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const std::vector<double>& prev = trace.post.back();
        const int in = net.layer_sizes[l];
        const int out = net.layer_sizes[l + 1];
        std::vector<double> next(out);
        const bool last = l + 1 == net.weights.size();
        for (int i = 0; i < out; ++i) {
            double z = net.biases[l][i];
            const double* row = net.weights[l].data() + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) {
                z += row[j] * prev[j];
            }
            next[i] = last ? activate_output(net.output, z) : std::tanh(z);
        }
        trace.post.push_back(std::move(next));
    }
    return trace;
}

std::vector<double> forward(const DenseNet& net, std::span<const double> input) {
    return forward_trace(net, input).post.back();
}

NetGradients NetGradients::zeros_like(const DenseNet& net) {
    NetGradients grads;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        grads.weights.emplace_back(net.weights[l].size(), 0.0);
        grads.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return grads;
}

void NetGradients::add(const NetGradients& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += other.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
    }
}

void NetGradients::scale(double factor) {
    for (auto& w : weights) {
        for (double& v : w) v *= factor;
    }
    for (auto& b : biases) {
        for (double& v : b) v *= factor;
    }
}

bool NetGradients::finite() const {
    for (const auto& w : weights) {
        for (double v : w) {
            if (!std::isfinite(v)) return false;
        }
    }
    for (const auto& b : biases) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

namespace {

void backprop_impl(const DenseNet& net, const ForwardTrace& trace,
                   std::span<const double> d_output, NetGradients* grads,
                   std::vector<double>* d_input) {
    const std::size_t layers = net.weights.size();
    const std::vector<double>& out = trace.post.back();

    std::vector<double> delta(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        delta[i] = d_output[i] * output_derivative(net.output, out[i]);
    }

    for (std::size_t l = layers; l-- > 0;) {
        const std::vector<double>& prev = trace.post[l];
        const int in = net.layer_sizes[l];
        const int out_n = net.layer_sizes[l + 1];

        if (grads != nullptr) {
            for (int i = 0; i < out_n; ++i) {
                double* row = grads->weights[l].data() + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) {
                    row[j] += delta[i] * prev[j];
                }
                grads->biases[l][i] += delta[i];
            }
        }

        if (l == 0 && d_input == nullptr) break;

        std::vector<double> d_prev(in, 0.0);
        for (int i = 0; i < out_n; ++i) {
            const double* row = net.weights[l].data() + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) {
                d_prev[j] += row[j] * delta[i];
            }
        }
        if (l == 0) {
            *d_input = std::move(d_prev);
            break;
        }
        // tanh'(z) = 1 - a^2 on hidden layers
        delta.resize(in);
        for (int j = 0; j < in; ++j) {
            delta[j] = d_prev[j] * (1.0 - prev[j] * prev[j]);
        }
    }
}

}  // namespace

void backprop(const DenseNet& net, const ForwardTrace& trace,
              std::span<const double> d_output, NetGradients& grads,
              std::vector<double>* d_input) {
    backprop_impl(net, trace, d_output, &grads, d_input);
}

std::vector<double> backprop_input(const DenseNet& net, const ForwardTrace& trace,
                                   std::span<const double> d_output) {
    std::vector<double> d_input;
    backprop_impl(net, trace, d_output, nullptr, &d_input);
    return d_input;
}

void apply_update(DenseNet& net, const NetGradients& grads, double step) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
            net.weights[l][i] += step * grads.weights[l][i];
        }
        for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
            net.biases[l][i] += step * grads.biases[l][i];
        }
    }
}

}  // namespace ooc::gan
