// Compares the OpenMP kernels against their serial reference
// implementations: same inputs, timed side by side, results checked for
// equality (bitwise for the GAN gradients).

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "ooc/feature_space.hpp"
#include "ooc/gan/train.hpp"
#include "ooc/oneshot.hpp"

using namespace ooc;

namespace {

struct Timing {
    double serial = 0.0;
    double parallel = 0.0;
    bool match = false;
};

template <typename Serial, typename Parallel, typename Equal>
Timing measure(int repeats, Serial serial, Parallel parallel, Equal equal) {
    Timing timing;
    timing.serial = 1e300;
    timing.parallel = 1e300;
    timing.match = equal(serial(), parallel());
    for (int r = 0; r < repeats; ++r) {
        double t0 = omp_get_wtime();
        auto a = serial();
        double t1 = omp_get_wtime();
        auto b = parallel();
        double t2 = omp_get_wtime();
        timing.serial = std::min(timing.serial, t1 - t0);
        timing.parallel = std::min(timing.parallel, t2 - t1);
        timing.match = timing.match && equal(a, b);
    }
    return timing;
}

void print_row(const std::string& name, const Timing& t) {
    std::printf("%-28s %10.4fs %10.4fs %8.2fx   %s\n", name.c_str(), t.serial, t.parallel,
                t.serial / t.parallel, t.match ? "OK" : "MISMATCH");
}

std::vector<DetectionRecord> synthetic_records(int count, int vocab_size,
                                               std::mt19937_64& rng) {
    std::vector<std::string> names;
    names.reserve(vocab_size);
    for (int i = 0; i < vocab_size; ++i) names.push_back("label-" + std::to_string(i));
    std::uniform_int_distribution<int> labels_per_record(2, 16);
    std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
    std::uniform_real_distribution<double> value(0.01, 1.0);

    std::vector<DetectionRecord> records(count);
    for (int i = 0; i < count; ++i) {
        records[i].image_id = "img-" + std::to_string(i);
        const int n = labels_per_record(rng);
        for (int j = 0; j < n; ++j) records[i].labels[names[pick(rng)]] = value(rng);
    }
    return records;
}

bool verdicts_equal(const std::vector<Verdict>& a, const std::vector<Verdict>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].fake != b[i].fake || a[i].score != b[i].score ||
            a[i].evidence != b[i].evidence) {
            return false;
        }
    }
    return true;
}

bool gradients_equal(const gan::NetGradients& a, const gan::NetGradients& b) {
    return a.weights == b.weights && a.biases == b.biases;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial-vs-OpenMP benchmark for the batch kernels"};
    bool quick = false;
    int repeats = 3;
    app.add_flag("--quick", quick, "Small sizes, used as a smoke test");
    app.add_option("--repeats", repeats, "Timing repetitions (best of N)");
    CLI11_PARSE(app, argc, argv);

    const int record_count = quick ? 2000 : 60000;
    const int vocab_size = quick ? 64 : 400;
    const int gan_batch = quick ? 128 : 2048;
    const int gan_hidden = quick ? 16 : 96;

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %11s %11s %9s   %s\n", "kernel", "serial", "openmp", "speedup",
                "check");

    std::mt19937_64 rng(99);
    const auto records = synthetic_records(record_count, vocab_size, rng);

    // Whitelist half the synthetic labels so both split branches are taken.
    ContextWhitelist whitelist;
    for (int i = 0; i < vocab_size; i += 2) whitelist.labels.insert("label-" + std::to_string(i));
    DetectionRecord reference;
    reference.image_id = "reference";
    for (int i = 1; i < vocab_size; i += 8) reference.labels["label-" + std::to_string(i)] = 0.8;

    const Vocabulary vocab = build_vocabulary(records, false).vocabulary;
    print_row("vectorize_batch",
              measure(
                  repeats, [&] { return vectorize_batch_serial(records, vocab); },
                  [&] { return vectorize_batch(records, vocab); },
                  [](const auto& a, const auto& b) { return a == b; }));

    const OneShotModel shared = fit(reference, whitelist, Rule::SharedOoc, 0.4);
    print_row("classify_batch shared-ooc",
              measure(
                  repeats, [&] { return classify_batch_serial(shared, records); },
                  [&] { return classify_batch(shared, records); }, verdicts_equal));

    const OneShotModel cosine_model = fit(reference, whitelist, Rule::CosineOoc, 0.4, 0.2);
    print_row("classify_batch cosine-ooc",
              measure(
                  repeats, [&] { return classify_batch_serial(cosine_model, records); },
                  [&] { return classify_batch(cosine_model, records); }, verdicts_equal));

    gan::GanConfig config;
    config.data_dim = 2;
    config.noise_dim = 4;
    config.batch_size = gan_batch;
    config.g_hidden = {gan_hidden};
    config.d_hidden = {gan_hidden};
    gan::Rng gan_rng(7);
    const gan::GanNets nets = gan::make_nets(config, gan_rng);
    const auto noise = gan::sample_noise(gan_rng, config, config.batch_size);
    const auto real = gan::sample_data(gan_rng, config, config.batch_size);

    print_row("gan d_batch_gradient",
              measure(
                  repeats,
                  [&] {
                      return gan::d_batch_gradient_serial(nets, real, noise, config.epsilon,
                                                          nullptr);
                  },
                  [&] {
                      return gan::d_batch_gradient(nets, real, noise, config.epsilon, nullptr);
                  },
                  gradients_equal));

    print_row("gan g_batch_gradient",
              measure(
                  repeats,
                  [&] {
                      return gan::g_batch_gradient_serial(
                          nets, noise, config.epsilon, gan::GeneratorLoss::Saturating, nullptr);
                  },
                  [&] {
                      return gan::g_batch_gradient(nets, noise, config.epsilon,
                                                   gan::GeneratorLoss::Saturating, nullptr);
                  },
                  gradients_equal));

    return 0;
}
