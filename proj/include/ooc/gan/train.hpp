#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ooc/errors.hpp"
#include "ooc/gan/net.hpp"

namespace ooc::gan {

enum class NoiseKind { Uniform, Gaussian };
enum class GeneratorLoss { Saturating, NonSaturating };

// Training configuration. The synthetic target is an isotropic Gaussian in
// data_dim dimensions; noise is uniform on [-1, 1] or standard Gaussian.
struct GanConfig {
    int data_dim = 1;
    int noise_dim = 2;
    NoiseKind noise = NoiseKind::Uniform;
    int batch_size = 64;       // m
    int d_steps = 1;           // k
    double lr_d = 0.1;
    double lr_g = 0.1;
    long long iterations = 5000;
    std::uint64_t seed = 7;
    double epsilon = 1e-7;     // log-argument clamp
    GeneratorLoss generator_loss = GeneratorLoss::Saturating;
    std::vector<int> g_hidden = {16};
    std::vector<int> d_hidden = {16};
    double data_mean = 3.0;
    double data_stddev = 1.0;

    void validate() const;  // ValidationError on out-of-range fields
    std::vector<int> generator_sizes() const;
    std::vector<int> discriminator_sizes() const;
};

GanConfig parse_gan_config(std::string_view text);
std::string write_gan_config(const GanConfig& config);

// Per-iteration training curves.
struct TrainMetrics {
    std::vector<double> d_objective;
    std::vector<double> g_objective;
    std::vector<double> mean_d_real;
    std::vector<double> mean_d_fake;

    std::size_t size() const { return d_objective.size(); }
    std::string to_csv() const;  // header: iteration,d_obj,g_obj,mean_d_real,mean_d_fake
};

// Raised when training hits a non-finite value; carries the metrics
// collected up to the failing iteration.
class TrainError : public NumericError {
public:
    TrainError(const std::string& what, long long iteration, TrainMetrics partial)
        : NumericError(what, iteration), partial_metrics(std::move(partial)) {}
    TrainMetrics partial_metrics;
};

// The minimax value: mean(log clamp(d_real)) + mean(log clamp(1 - d_fake)),
// with the log arguments clamped to [epsilon, 1 - epsilon]. At the
// equilibrium D == 1/2 everywhere this equals -2 ln 2.
double v_gan(std::span<const double> d_real, std::span<const double> d_fake, double epsilon);

struct GanNets {
    DenseNet generator;
    DenseNet discriminator;
};

GanNets make_nets(const GanConfig& config, Rng& rng);

struct BatchStats {
    double objective = 0.0;
    double mean_real = 0.0;
    double mean_fake = 0.0;
};

// Batch gradient kernels. Per-sample contributions are independent, so the
// default variant computes them under OpenMP; the reduction always runs in
// sample order, which makes the parallel result bitwise identical to the
// serial reference.
NetGradients d_batch_gradient(const GanNets& nets,
                              const std::vector<std::vector<double>>& real,
                              const std::vector<std::vector<double>>& noise,
                              double epsilon, BatchStats* stats = nullptr);
NetGradients d_batch_gradient_serial(const GanNets& nets,
                                     const std::vector<std::vector<double>>& real,
                                     const std::vector<std::vector<double>>& noise,
                                     double epsilon, BatchStats* stats = nullptr);
NetGradients g_batch_gradient(const GanNets& nets,
                              const std::vector<std::vector<double>>& noise, double epsilon,
                              GeneratorLoss loss, double* objective = nullptr);
NetGradients g_batch_gradient_serial(const GanNets& nets,
                                     const std::vector<std::vector<double>>& noise,
                                     double epsilon, GeneratorLoss loss,
                                     double* objective = nullptr);

// One discriminator ascent step on (1/m) sum [log D(x) + log(1 - D(G(z)))].
// Generator parameters are untouched. Returns the batch objective and mean
// D outputs before the update.
BatchStats d_step(GanNets& nets, const std::vector<std::vector<double>>& real,
                  const std::vector<std::vector<double>>& noise, const GanConfig& config,
                  long long iteration = -1);

// One generator step: descend (1/m) sum log(1 - D(G(z))) in saturating mode,
// ascend (1/m) sum log D(G(z)) in non-saturating mode. Discriminator
// parameters are untouched. Returns the batch objective before the update.
double g_step(GanNets& nets, const std::vector<std::vector<double>>& noise,
              const GanConfig& config, long long iteration = -1);

struct TrainResult {
    GanNets nets;
    TrainMetrics metrics;
};

// Minibatch SGD training: per outer iteration, k discriminator steps on
// fresh noise/data batches, then one generator step. Fully deterministic
// given the seed.
TrainResult train(const GanConfig& config);

std::vector<std::vector<double>> sample_noise(Rng& rng, const GanConfig& config, int count);
std::vector<std::vector<double>> sample_data(Rng& rng, const GanConfig& config, int count);

// Histogram-based Jensen-Shannon divergence estimate in [0, ln 2]. Needs at
// least two samples per side and a non-degenerate combined range.
double js_estimate(std::span<const double> real, std::span<const double> fake, int bins);

}  // namespace ooc::gan
