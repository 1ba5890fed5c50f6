#include "ooc/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ooc/client.hpp"
#include "ooc/detection.hpp"
#include "ooc/errors.hpp"
#include "ooc/feature_space.hpp"
#include "ooc/gan/train.hpp"
#include "ooc/harness.hpp"
#include "ooc/io_util.hpp"
#include "ooc/oneshot.hpp"
#include "ooc/vendor.hpp"

namespace ooc::cli {

namespace {

std::string verdicts_csv(const std::vector<Verdict>& verdicts) {
    std::string out = "image_id,label,score,evidence\n";
    for (const Verdict& v : verdicts) {
        std::string evidence;
        for (const auto& [label, value] : v.evidence) {
            if (!evidence.empty()) evidence += ';';
            evidence += label + ":" + format_double(value);
        }
        out += csv_field(v.image_id) + "," + (v.fake ? "fake" : "real") + "," +
               format_double(v.score) + "," + csv_field(evidence) + "\n";
    }
    return out;
}

ContextWhitelist load_whitelist(const std::string& path, std::string& meta_name) {
    if (path.empty()) {
        meta_name = "builtin:face-default";
        return default_face_whitelist();
    }
    meta_name = path;
    return parse_whitelist(read_file(path));
}

struct IngestOpts {
    std::string endpoint_path, mapping_path, image_ref, out, cache_dir;
};

void run_ingest(const IngestOpts& opts) {
    EndpointConfig endpoint = parse_endpoint_config(read_file(opts.endpoint_path));
    if (!opts.cache_dir.empty()) endpoint.cache_dir = opts.cache_dir;
    const VendorMapping mapping = opts.mapping_path.empty()
                                      ? VendorMapping{}
                                      : parse_vendor_mapping(read_file(opts.mapping_path));
    const DetectionRecord record = fetch_detections(endpoint, opts.image_ref, mapping);
    atomic_write(opts.out, write_fixture({record}));
}

struct VocabOpts {
    std::string fixtures, out;
    bool remove_common = false;
};

void run_vocab(const VocabOpts& opts) {
    std::vector<DetectionRecord> records;
    try {
        records = parse_fixture(read_file(opts.fixtures));
        const VocabularyBuild build = build_vocabulary(records, opts.remove_common);
        if (!build.warning.empty()) {
            std::cerr << "warning: " << build.warning << "\n";
        }
        atomic_write(opts.out, write_vocabulary(build.vocabulary));
    } catch (const ValidationError& e) {
        throw ValidationError(opts.fixtures + ": " + e.what());
    }
}

struct VectorizeOpts {
    std::string fixtures, vocab, out;
    bool serial = false;
};

void run_vectorize(const VectorizeOpts& opts) {
    const Vocabulary vocab = parse_vocabulary(read_file(opts.vocab));
    const std::vector<DetectionRecord> records = parse_fixture(read_file(opts.fixtures));
    const std::vector<SparseVector> vectors =
        opts.serial ? vectorize_batch_serial(records, vocab) : vectorize_batch(records, vocab);
    atomic_write(opts.out, write_vectors(vectors));
}

struct FitOpts {
    std::string reference, whitelist, rule = "shared-ooc", reference_label = "fake", out;
    double tau = 0.5;
    double sigma = 0.3;
};

void run_fit(const FitOpts& opts) {
    const std::vector<DetectionRecord> records = parse_fixture(read_file(opts.reference));
    if (records.size() != 1) {
        throw ValidationError(opts.reference + ": the reference fixture must contain exactly "
                                               "one entry (one-shot), found " +
                              std::to_string(records.size()));
    }
    std::string whitelist_name;
    const ContextWhitelist whitelist = load_whitelist(opts.whitelist, whitelist_name);
    if (opts.reference_label != "fake" && opts.reference_label != "real") {
        throw ValidationError("fit: --reference-label must be \"fake\" or \"real\"");
    }
    const ReferenceLabel label =
        opts.reference_label == "real" ? ReferenceLabel::Real : ReferenceLabel::Fake;
    const OneShotModel model = fit(records.front(), whitelist, parse_rule(opts.rule), opts.tau,
                                   opts.sigma, label);
    atomic_write(opts.out, write_model(model, whitelist_name));
}

struct ClassifyOpts {
    std::string model, fixtures, out;
    bool serial = false;
};

void run_classify(const ClassifyOpts& opts) {
    const OneShotModel model = parse_model(read_file(opts.model));
    const std::vector<DetectionRecord> records = parse_fixture(read_file(opts.fixtures));
    const std::vector<Verdict> verdicts =
        opts.serial ? classify_batch_serial(model, records) : classify_batch(model, records);
    atomic_write(opts.out, verdicts_csv(verdicts));
}

struct EvaluateOpts {
    std::string model, fixtures, out, format = "csv";
    bool remove_common = false;
};

void run_evaluate(const EvaluateOpts& opts) {
    std::string whitelist_file;
    const OneShotModel model = parse_model(read_file(opts.model), &whitelist_file);
    const std::string fixture_bytes = read_file(opts.fixtures);
    const LabeledSet set = parse_labeled_fixture(fixture_bytes);

    RunMeta meta;
    meta.whitelist_file = whitelist_file;
    meta.remove_common = opts.remove_common;
    meta.fixture_checksum = fnv1a64_hex(fixture_bytes);
    meta.model_file = opts.model;
    const EvalReport report = evaluate(model, set, meta);

    if (opts.format == "csv") {
        atomic_write(opts.out, report_csv(report));
    } else if (opts.format == "text") {
        atomic_write(opts.out, report_text(report));
    } else {
        throw ValidationError("evaluate: format must be \"csv\" or \"text\"");
    }
}

struct CompareOpts {
    std::vector<std::string> reports;    // name=path (structured-text reports)
    std::vector<std::string> externals;  // name=value
    std::string out;
};

void run_compare(const CompareOpts& opts) {
    std::vector<ComparisonEntry> entries;
    for (const std::string& spec : opts.reports) {
        const std::size_t eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("compare: --report expects name=path, got \"" + spec + "\"");
        }
        const EvalReport report = parse_report_text(read_file(spec.substr(eq + 1)));
        entries.push_back({spec.substr(0, eq), report.accuracy, false});
    }
    for (const std::string& spec : opts.externals) {
        const std::size_t eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("compare: --external expects name=value, got \"" + spec +
                                  "\"");
        }
        double accuracy = 0.0;
        try {
            accuracy = std::stod(spec.substr(eq + 1));
        } catch (const std::exception&) {
            throw ValidationError("compare: accuracy in \"" + spec + "\" is not a number");
        }
        entries.push_back({spec.substr(0, eq), accuracy, true});
    }
    atomic_write(opts.out, comparison_csv(std::move(entries)));
}

struct GanDemoOpts {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<long long> iterations;
    std::optional<double> lr_d, lr_g;
    std::optional<std::string> generator_loss;
};

void run_gan_demo(const GanDemoOpts& opts) {
    gan::GanConfig config;
    if (!opts.config.empty()) config = gan::parse_gan_config(read_file(opts.config));
    if (opts.seed) config.seed = *opts.seed;
    if (opts.iterations) config.iterations = *opts.iterations;
    if (opts.lr_d) config.lr_d = *opts.lr_d;
    if (opts.lr_g) config.lr_g = *opts.lr_g;
    if (opts.generator_loss) {
        if (*opts.generator_loss == "saturating") {
            config.generator_loss = gan::GeneratorLoss::Saturating;
        } else if (*opts.generator_loss == "non-saturating") {
            config.generator_loss = gan::GeneratorLoss::NonSaturating;
        } else {
            throw ValidationError(
                "gan-demo: --generator-loss must be saturating or non-saturating");
        }
    }
    config.validate();
    try {
        const gan::TrainResult result = gan::train(config);
        atomic_write(opts.out, result.metrics.to_csv());
    } catch (const gan::TrainError& e) {
        // Keep whatever was measured before the failure.
        atomic_write(opts.out, e.partial_metrics.to_csv());
        throw;
    }
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"One-shot out-of-context fake-image detection toolkit"};
    app.require_subcommand(1);

    IngestOpts ingest;
    auto* ingest_cmd =
        app.add_subcommand("ingest", "Fetch detections for an image into a fixture file");
    ingest_cmd->add_option("--endpoint", ingest.endpoint_path, "Endpoint config JSON")
        ->required();
    ingest_cmd->add_option("--mapping", ingest.mapping_path,
                           "Vendor mapping JSON (default: Labels/Name/Confidence)");
    ingest_cmd->add_option("--image-ref", ingest.image_ref, "Opaque image reference")
        ->required();
    ingest_cmd->add_option("--out", ingest.out, "Output fixture file")->required();
    ingest_cmd->add_option("--cache-dir", ingest.cache_dir,
                           "Cache directory (overrides endpoint config)");
    ingest_cmd->callback([&] { run_ingest(ingest); });

    VocabOpts vocab;
    auto* vocab_cmd =
        app.add_subcommand("vocab", "Build a bag-of-words vocabulary from fixtures");
    vocab_cmd->add_option("--fixtures", vocab.fixtures, "Fixture file")->required();
    vocab_cmd->add_flag("--remove-common", vocab.remove_common,
                        "Drop labels present in every record");
    vocab_cmd->add_option("--out", vocab.out, "Output vocabulary file")->required();
    vocab_cmd->callback([&] { run_vocab(vocab); });

    VectorizeOpts vectorize;
    auto* vectorize_cmd =
        app.add_subcommand("vectorize", "Project fixtures onto a vocabulary");
    vectorize_cmd->add_option("--fixtures", vectorize.fixtures, "Fixture file")->required();
    vectorize_cmd->add_option("--vocab", vectorize.vocab, "Vocabulary file")->required();
    vectorize_cmd->add_option("--out", vectorize.out, "Output vector file")->required();
    vectorize_cmd->add_flag("--serial", vectorize.serial, "Use the serial reference path");
    vectorize_cmd->callback([&] { run_vectorize(vectorize); });

    FitOpts fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a one-shot model from a reference fixture");
    fit_cmd->add_option("--reference", fit.reference, "Fixture file with exactly one entry")
        ->required();
    fit_cmd->add_option("--whitelist", fit.whitelist,
                        "Whitelist file (default: built-in face whitelist)");
    fit_cmd->add_option("--rule", fit.rule, "shared-ooc | any-ooc | cosine-ooc")
        ->default_val("shared-ooc");
    fit_cmd->add_option("--tau", fit.tau, "Confidence threshold")->default_val(0.5);
    fit_cmd->add_option("--sigma", fit.sigma, "Cosine similarity threshold")->default_val(0.3);
    fit_cmd->add_option("--reference-label", fit.reference_label,
                        "fake | real (real is permitted under any-ooc only)")
        ->default_val("fake");
    fit_cmd->add_option("--out", fit.out, "Output model file")->required();
    fit_cmd->callback([&] { run_fit(fit); });

    ClassifyOpts classify;
    auto* classify_cmd = app.add_subcommand("classify", "Classify fixtures with a model");
    classify_cmd->add_option("--model", classify.model, "Model file")->required();
    classify_cmd->add_option("--fixtures", classify.fixtures, "Fixture file")->required();
    classify_cmd->add_option("--out", classify.out, "Output verdict CSV")->required();
    classify_cmd->add_flag("--serial", classify.serial, "Use the serial reference path");
    classify_cmd->callback([&] { run_classify(classify); });

    EvaluateOpts evaluate;
    auto* evaluate_cmd =
        app.add_subcommand("evaluate", "Evaluate a model against labeled fixtures");
    evaluate_cmd->add_option("--model", evaluate.model, "Model file")->required();
    evaluate_cmd->add_option("--fixtures", evaluate.fixtures, "Labeled fixture file")
        ->required();
    evaluate_cmd->add_option("--out", evaluate.out, "Output report file")->required();
    evaluate_cmd->add_option("--format", evaluate.format, "csv | text")->default_val("csv");
    evaluate_cmd->add_flag("--remove-common", evaluate.remove_common,
                           "Record that the run used remove_common (metadata only)");
    evaluate_cmd->callback([&] { run_evaluate(evaluate); });

    CompareOpts compare;
    auto* compare_cmd =
        app.add_subcommand("compare", "Combine evaluation reports into a comparison table");
    compare_cmd->add_option("--report", compare.reports,
                            "name=path of a structured-text report (repeatable)");
    compare_cmd->add_option("--external", compare.externals,
                            "name=accuracy supplied from elsewhere (repeatable)");
    compare_cmd->add_option("--out", compare.out, "Output comparison CSV")->required();
    compare_cmd->callback([&] { run_compare(compare); });

    GanDemoOpts gan_demo;
    auto* gan_cmd = app.add_subcommand(
        "gan-demo", "Train the desk-scale GAN on synthetic data and write metrics");
    gan_cmd->add_option("--config", gan_demo.config, "GAN config JSON");
    gan_cmd->add_option("--seed", gan_demo.seed, "Override the RNG seed");
    gan_cmd->add_option("--iterations", gan_demo.iterations, "Override the iteration count");
    gan_cmd->add_option("--lr-d", gan_demo.lr_d, "Override the discriminator learning rate");
    gan_cmd->add_option("--lr-g", gan_demo.lr_g, "Override the generator learning rate");
    gan_cmd->add_option("--generator-loss", gan_demo.generator_loss,
                        "saturating | non-saturating");
    gan_cmd->add_option("--out", gan_demo.out, "Output metrics CSV")->required();
    gan_cmd->callback([&] { run_gan_demo(gan_demo); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const RemoteError& e) {
        std::cerr << "error: " << e.what() << (e.retryable() ? " (retryable)" : "") << "\n";
        return 3;
    } catch (const MappingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("oocdet");
    for (const std::string& arg : args) argv.push_back(arg.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ooc::cli
