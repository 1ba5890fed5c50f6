#include "ooc/gan/train.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ooc/io_util.hpp"

namespace ooc::gan {

using nlohmann::json;

void GanConfig::validate() const {
    if (data_dim < 1 || noise_dim < 1) {
        throw ValidationError("gan config: data_dim and noise_dim must be >= 1");
    }
    if (batch_size < 1) throw ValidationError("gan config: batch_size must be >= 1");
    if (d_steps < 1) throw ValidationError("gan config: d_steps must be >= 1");
    if (!(lr_d > 0.0) || !(lr_g > 0.0)) {
        throw ValidationError("gan config: learning rates must be > 0");
    }
    if (iterations < 0) throw ValidationError("gan config: iterations must be >= 0");
    if (!(epsilon > 0.0) || !(epsilon < 0.1)) {
        throw ValidationError("gan config: epsilon must lie in (0, 0.1)");
    }
    if (!(data_stddev > 0.0)) throw ValidationError("gan config: data_stddev must be > 0");
    for (int width : g_hidden) {
        if (width < 1) throw ValidationError("gan config: g_hidden widths must be >= 1");
    }
    for (int width : d_hidden) {
        if (width < 1) throw ValidationError("gan config: d_hidden widths must be >= 1");
    }
}

std::vector<int> GanConfig::generator_sizes() const {
    std::vector<int> sizes{noise_dim};
    sizes.insert(sizes.end(), g_hidden.begin(), g_hidden.end());
    sizes.push_back(data_dim);
    return sizes;
}

std::vector<int> GanConfig::discriminator_sizes() const {
    std::vector<int> sizes{data_dim};
    sizes.insert(sizes.end(), d_hidden.begin(), d_hidden.end());
    sizes.push_back(1);
    return sizes;
}

GanConfig parse_gan_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("gan config: " + std::string(e.what()), e.byte);
    }
    if (!doc.is_object()) {
        throw ValidationError("gan config: top-level value must be an object");
    }
    GanConfig config;
    auto get = [&](const char* key, auto& field) {
        if (doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
    };
    get("data_dim", config.data_dim);
    get("noise_dim", config.noise_dim);
    get("batch_size", config.batch_size);
    get("d_steps", config.d_steps);
    get("lr_d", config.lr_d);
    get("lr_g", config.lr_g);
    get("iterations", config.iterations);
    get("seed", config.seed);
    get("epsilon", config.epsilon);
    get("g_hidden", config.g_hidden);
    get("d_hidden", config.d_hidden);
    get("data_mean", config.data_mean);
    get("data_stddev", config.data_stddev);
    if (doc.contains("noise")) {
        const std::string kind = doc["noise"].get<std::string>();
        if (kind == "uniform") {
            config.noise = NoiseKind::Uniform;
        } else if (kind == "gaussian") {
            config.noise = NoiseKind::Gaussian;
        } else {
            throw ValidationError("gan config: noise must be \"uniform\" or \"gaussian\"");
        }
    }
    if (doc.contains("generator_loss")) {
        const std::string mode = doc["generator_loss"].get<std::string>();
        if (mode == "saturating") {
            config.generator_loss = GeneratorLoss::Saturating;
        } else if (mode == "non-saturating") {
            config.generator_loss = GeneratorLoss::NonSaturating;
        } else {
            throw ValidationError(
                "gan config: generator_loss must be \"saturating\" or \"non-saturating\"");
        }
    }
    config.validate();
    return config;
}

std::string write_gan_config(const GanConfig& config) {
    json doc{
        {"data_dim", config.data_dim},
        {"noise_dim", config.noise_dim},
        {"noise", config.noise == NoiseKind::Uniform ? "uniform" : "gaussian"},
        {"batch_size", config.batch_size},
        {"d_steps", config.d_steps},
        {"lr_d", config.lr_d},
        {"lr_g", config.lr_g},
        {"iterations", config.iterations},
        {"seed", config.seed},
        {"epsilon", config.epsilon},
        {"generator_loss",
         config.generator_loss == GeneratorLoss::Saturating ? "saturating" : "non-saturating"},
        {"g_hidden", config.g_hidden},
        {"d_hidden", config.d_hidden},
        {"data_mean", config.data_mean},
        {"data_stddev", config.data_stddev},
    };
    return doc.dump(2) + "\n";
}

std::string TrainMetrics::to_csv() const {
    std::string out = "iteration,d_obj,g_obj,mean_d_real,mean_d_fake\n";
    for (std::size_t i = 0; i < size(); ++i) {
        out += std::to_string(i) + "," + format_double(d_objective[i]) + "," +
               format_double(g_objective[i]) + "," + format_double(mean_d_real[i]) + "," +
               format_double(mean_d_fake[i]) + "\n";
    }
    return out;
}

namespace {

double clamp_unit(double v, double epsilon) {
    return std::min(std::max(v, epsilon), 1.0 - epsilon);
}

// d log(clamp(v)) / dv: zero in the clamped regions.
double clamped_log_grad(double v, double epsilon) {
    return (v > epsilon && v < 1.0 - epsilon) ? 1.0 / v : 0.0;
}

}  // namespace

double v_gan(std::span<const double> d_real, std::span<const double> d_fake, double epsilon) {
    if (d_real.empty() || d_fake.empty()) {
        throw ValidationError("v_gan: output lists must be non-empty");
    }
    if (!(epsilon > 0.0) || !(epsilon < 0.1)) {
        throw ValidationError("v_gan: epsilon must lie in (0, 0.1)");
    }
    for (double v : d_real) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("v_gan: discriminator outputs must lie in [0, 1]");
        }
    }
    for (double v : d_fake) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError("v_gan: discriminator outputs must lie in [0, 1]");
        }
    }
    double real_sum = 0.0;
    for (double v : d_real) real_sum += std::log(clamp_unit(v, epsilon));
    double fake_sum = 0.0;
    for (double v : d_fake) fake_sum += std::log(clamp_unit(1.0 - v, epsilon));
    return real_sum / static_cast<double>(d_real.size()) +
           fake_sum / static_cast<double>(d_fake.size());
}

GanNets make_nets(const GanConfig& config, Rng& rng) {
    GanNets nets;
    nets.generator = make_dense_net(config.generator_sizes(), OutputActivation::Identity, rng);
    nets.discriminator =
        make_dense_net(config.discriminator_sizes(), OutputActivation::Sigmoid, rng);
    return nets;
}

namespace {

struct DSample {
    NetGradients grads;     // w.r.t. discriminator parameters, unscaled
    double objective = 0.0; // log clamp(D(x)) + log clamp(1 - D(G(z)))
    double d_real = 0.0;
    double d_fake = 0.0;
};

DSample d_sample_gradient(const GanNets& nets, std::span<const double> x,
                          std::span<const double> z, double epsilon) {
    DSample sample;
    sample.grads = NetGradients::zeros_like(nets.discriminator);

    const ForwardTrace real_trace = forward_trace(nets.discriminator, x);
    sample.d_real = real_trace.output()[0];
    sample.objective += std::log(clamp_unit(sample.d_real, epsilon));
    const double d_real_grad[1] = {clamped_log_grad(sample.d_real, epsilon)};
    backprop(nets.discriminator, real_trace, d_real_grad, sample.grads);

    const std::vector<double> generated = forward(nets.generator, z);
    const ForwardTrace fake_trace = forward_trace(nets.discriminator, generated);
    sample.d_fake = fake_trace.output()[0];
    sample.objective += std::log(clamp_unit(1.0 - sample.d_fake, epsilon));
    // d log(clamp(1 - a)) / da = -1 / (1 - a) inside the clamp window
    const double d_fake_grad[1] = {-clamped_log_grad(1.0 - sample.d_fake, epsilon)};
    backprop(nets.discriminator, fake_trace, d_fake_grad, sample.grads);

    return sample;
}

NetGradients d_batch_impl(const GanNets& nets, const std::vector<std::vector<double>>& real,
                          const std::vector<std::vector<double>>& noise, double epsilon,
                          BatchStats* stats, bool parallel) {
    if (real.size() != noise.size() || real.empty()) {
        throw ValidationError("d_batch_gradient: real and noise batches must match and be non-empty");
    }
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(real.size());
    std::vector<DSample> samples(real.size());
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            samples[i] = d_sample_gradient(nets, real[i], noise[i], epsilon);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            samples[i] = d_sample_gradient(nets, real[i], noise[i], epsilon);
        }
    }

    // Fixed-order reduction keeps the result independent of the schedule.
    NetGradients total = NetGradients::zeros_like(nets.discriminator);
    double objective = 0.0;
    double real_sum = 0.0;
    double fake_sum = 0.0;
    for (const DSample& sample : samples) {
        total.add(sample.grads);
        objective += sample.objective;
        real_sum += sample.d_real;
        fake_sum += sample.d_fake;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    total.scale(inv_m);
    if (stats != nullptr) {
        stats->objective = objective * inv_m;
        stats->mean_real = real_sum * inv_m;
        stats->mean_fake = fake_sum * inv_m;
    }
    return total;
}

struct GSample {
    NetGradients grads;  // w.r.t. generator parameters, unscaled
    double objective = 0.0;
};

GSample g_sample_gradient(const GanNets& nets, std::span<const double> z, double epsilon,
                          GeneratorLoss loss) {
    GSample sample;
    sample.grads = NetGradients::zeros_like(nets.generator);

    const ForwardTrace g_trace = forward_trace(nets.generator, z);
    const ForwardTrace d_trace = forward_trace(nets.discriminator, g_trace.output());
    const double d_out = d_trace.output()[0];

    double d_output_grad;
    if (loss == GeneratorLoss::Saturating) {
        sample.objective = std::log(clamp_unit(1.0 - d_out, epsilon));
        d_output_grad = -clamped_log_grad(1.0 - d_out, epsilon);
    } else {
        sample.objective = std::log(clamp_unit(d_out, epsilon));
        d_output_grad = clamped_log_grad(d_out, epsilon);
    }

    const double d_grad[1] = {d_output_grad};
    const std::vector<double> d_input = backprop_input(nets.discriminator, d_trace, d_grad);
    backprop(nets.generator, g_trace, d_input, sample.grads);
    return sample;
}

NetGradients g_batch_impl(const GanNets& nets, const std::vector<std::vector<double>>& noise,
                          double epsilon, GeneratorLoss loss, double* objective,
                          bool parallel) {
    if (noise.empty()) {
        throw ValidationError("g_batch_gradient: noise batch must be non-empty");
    }
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(noise.size());
    std::vector<GSample> samples(noise.size());
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            samples[i] = g_sample_gradient(nets, noise[i], epsilon, loss);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < m; ++i) {
            samples[i] = g_sample_gradient(nets, noise[i], epsilon, loss);
        }
    }

    NetGradients total = NetGradients::zeros_like(nets.generator);
    double sum = 0.0;
    for (const GSample& sample : samples) {
        total.add(sample.grads);
        sum += sample.objective;
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    total.scale(inv_m);
    if (objective != nullptr) *objective = sum * inv_m;
    return total;
}

}  // namespace

NetGradients d_batch_gradient(const GanNets& nets, const std::vector<std::vector<double>>& real,
                              const std::vector<std::vector<double>>& noise, double epsilon,
                              BatchStats* stats) {
    return d_batch_impl(nets, real, noise, epsilon, stats, true);
}

NetGradients d_batch_gradient_serial(const GanNets& nets,
                                     const std::vector<std::vector<double>>& real,
                                     const std::vector<std::vector<double>>& noise,
                                     double epsilon, BatchStats* stats) {
    return d_batch_impl(nets, real, noise, epsilon, stats, false);
}

NetGradients g_batch_gradient(const GanNets& nets, const std::vector<std::vector<double>>& noise,
                              double epsilon, GeneratorLoss loss, double* objective) {
    return g_batch_impl(nets, noise, epsilon, loss, objective, true);
}

NetGradients g_batch_gradient_serial(const GanNets& nets,
                                     const std::vector<std::vector<double>>& noise,
                                     double epsilon, GeneratorLoss loss, double* objective) {
    return g_batch_impl(nets, noise, epsilon, loss, objective, false);
}

BatchStats d_step(GanNets& nets, const std::vector<std::vector<double>>& real,
                  const std::vector<std::vector<double>>& noise, const GanConfig& config,
                  long long iteration) {
    if (static_cast<int>(real.size()) != config.batch_size ||
        static_cast<int>(noise.size()) != config.batch_size) {
        throw ValidationError("d_step: batch sizes must equal m");
    }
    BatchStats stats;
    const NetGradients grads =
        d_batch_gradient(nets, real, noise, config.epsilon, &stats);
    if (!grads.finite() || !std::isfinite(stats.objective)) {
        throw NumericError("d_step: non-finite gradient at iteration " +
                               std::to_string(iteration),
                           iteration);
    }
    apply_update(nets.discriminator, grads, config.lr_d);  // ascent
    return stats;
}

double g_step(GanNets& nets, const std::vector<std::vector<double>>& noise,
              const GanConfig& config, long long iteration) {
    if (static_cast<int>(noise.size()) != config.batch_size) {
        throw ValidationError("g_step: batch size must equal m");
    }
    double objective = 0.0;
    const NetGradients grads =
        g_batch_gradient(nets, noise, config.epsilon, config.generator_loss, &objective);
    if (!grads.finite() || !std::isfinite(objective)) {
        throw NumericError("g_step: non-finite gradient at iteration " +
                               std::to_string(iteration),
                           iteration);
    }
    // Saturating mode descends its objective; non-saturating ascends.
    const double step =
        config.generator_loss == GeneratorLoss::Saturating ? -config.lr_g : config.lr_g;
    apply_update(nets.generator, grads, step);
    return objective;
}

std::vector<std::vector<double>> sample_noise(Rng& rng, const GanConfig& config, int count) {
    std::vector<std::vector<double>> batch(count);
    for (auto& z : batch) {
        z.resize(config.noise_dim);
        for (double& v : z) {
            v = config.noise == NoiseKind::Uniform ? rng.uniform(-1.0, 1.0)
                                                   : rng.gaussian(0.0, 1.0);
        }
    }
    return batch;
}

std::vector<std::vector<double>> sample_data(Rng& rng, const GanConfig& config, int count) {
    std::vector<std::vector<double>> batch(count);
    for (auto& x : batch) {
        x.resize(config.data_dim);
        for (double& v : x) {
            v = rng.gaussian(config.data_mean, config.data_stddev);
        }
    }
    return batch;
}

TrainResult train(const GanConfig& config) {
    config.validate();
    Rng rng(config.seed);
    TrainResult result;
    result.nets = make_nets(config, rng);
    TrainMetrics& metrics = result.metrics;

    for (long long it = 0; it < config.iterations; ++it) {
        try {
            BatchStats stats;
            for (int step = 0; step < config.d_steps; ++step) {
                const auto noise = sample_noise(rng, config, config.batch_size);
                const auto real = sample_data(rng, config, config.batch_size);
                stats = d_step(result.nets, real, noise, config, it);
            }
            const auto noise = sample_noise(rng, config, config.batch_size);
            const double g_obj = g_step(result.nets, noise, config, it);

            metrics.d_objective.push_back(stats.objective);
            metrics.g_objective.push_back(g_obj);
            metrics.mean_d_real.push_back(stats.mean_real);
            metrics.mean_d_fake.push_back(stats.mean_fake);
        } catch (const NumericError& e) {
            throw TrainError(e.what(), it, std::move(metrics));
        }
    }
    return result;
}

double js_estimate(std::span<const double> real, std::span<const double> fake, int bins) {
    if (real.size() < 2 || fake.size() < 2) {
        throw ValidationError("js_estimate: need at least two samples per side");
    }
    if (bins < 2) {
        throw ValidationError("js_estimate: bins must be >= 2");
    }
    double lo = real[0];
    double hi = real[0];
    for (double v : real) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : fake) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        throw ValidationError("js_estimate: degenerate samples (all values identical)");
    }

    const auto histogram = [&](std::span<const double> values) {
        std::vector<double> h(bins, 0.0);
        for (double v : values) {
            auto bin = static_cast<std::ptrdiff_t>((v - lo) / (hi - lo) *
                                                   static_cast<double>(bins));
            bin = std::clamp<std::ptrdiff_t>(bin, 0, bins - 1);
            h[bin] += 1.0;
        }
        for (double& p : h) p /= static_cast<double>(values.size());
        return h;
    };
    const std::vector<double> p = histogram(real);
    const std::vector<double> q = histogram(fake);

    double js = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m);
    }
    return js;
}

}  // namespace ooc::gan
