#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ooc::gan {

// Deterministic random source. Draws are derived from raw mt19937_64 output
// instead of std distributions, so the sample sequence for a given seed does
// not depend on the standard library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    // Box-Muller; consumes two draws per call.
    double gaussian(double mean, double stddev) {
        const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * 3.141592653589793238462643 * u2);
    }

private:
    std::mt19937_64 gen_;
};

enum class OutputActivation { Identity, Sigmoid };

// Fully connected network with tanh hidden units. Weight matrices are
// row-major (out x in).
struct DenseNet {
    std::vector<int> layer_sizes;
    OutputActivation output = OutputActivation::Identity;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;
    bool finite() const;
};

// Parameters drawn uniformly from [-0.05, 0.05], weights before biases,
// layer by layer.
DenseNet make_dense_net(const std::vector<int>& layer_sizes, OutputActivation output,
                        Rng& rng);

std::vector<double> forward(const DenseNet& net, std::span<const double> input);

// Post-activation values per layer; post[0] is the input. tanh and sigmoid
// derivatives are recovered from these, so pre-activations are not kept.
struct ForwardTrace {
    std::vector<std::vector<double>> post;

    const std::vector<double>& output() const { return post.back(); }
};

ForwardTrace forward_trace(const DenseNet& net, std::span<const double> input);

// Parameter gradients with the same shapes as the net they belong to.
struct NetGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static NetGradients zeros_like(const DenseNet& net);
    void add(const NetGradients& other);
    void scale(double factor);
    bool finite() const;
};

// Accumulates dL/dparams into grads given dL/d(output activations).
// When d_input is non-null it also receives dL/d(input).
void backprop(const DenseNet& net, const ForwardTrace& trace,
              std::span<const double> d_output, NetGradients& grads,
              std::vector<double>* d_input = nullptr);

// dL/d(input) only; parameter gradients are not touched.
std::vector<double> backprop_input(const DenseNet& net, const ForwardTrace& trace,
                                   std::span<const double> d_output);

// In-place SGD update: params += step * grads.
void apply_update(DenseNet& net, const NetGradients& grads, double step);

}  // namespace ooc::gan
