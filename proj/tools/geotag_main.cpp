// geotag - train, evaluate and run a convolutional tagger that marks
// location words in short noisy texts.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "geotag/corpus.hpp"
#include "geotag/harness.hpp"
#include "geotag/metrics.hpp"
#include "geotag/serialize.hpp"
#include "geotag/training.hpp"

namespace {

using geotag::ModelConfig;

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw geotag::corpus_error("cannot write file: " + path);
    out << content;
    if (!out) throw geotag::corpus_error("write failed: " + path);
}

ModelConfig config_from(const std::string& config_path, std::uint64_t seed) {
    ModelConfig config = config_path.empty() ? ModelConfig{} : geotag::load_config(config_path);
    config.seed = seed;
    config.validate();
    return config;
}

std::optional<geotag::PretrainedMap> maybe_pretrained(const std::string& path, std::size_t k) {
    if (path.empty()) return std::nullopt;
    return geotag::load_pretrained(path, k);
}

int run_train(const std::string& corpus_path, const std::string& embeddings_path,
              const std::string& config_path, std::uint64_t seed, const std::string& model_out,
              const std::string& log_out) {
    const ModelConfig config = config_from(config_path, seed);
    const auto corpus = geotag::load_corpus(corpus_path);
    if (corpus.examples.empty()) throw geotag::corpus_error("corpus has no usable examples");

    const auto vocab = geotag::build_vocab(corpus);
    geotag::PretrainedMap pretrained;
    if (!embeddings_path.empty()) pretrained = geotag::load_pretrained(embeddings_path, config.k);
    auto lookup = geotag::build_lookup(vocab, pretrained, config.k, config.seed);
    std::cerr << "vocabulary: " << vocab.size() << " entries, pretrained coverage "
              << lookup.copied_rows << "/" << (vocab.size() > 2 ? vocab.size() - 2 : 0) << "\n";

    auto model = geotag::init_model(config, vocab, std::move(lookup.matrix));
    const auto log = geotag::train(model, corpus);
    geotag::save_model(model, model_out);
    if (!log_out.empty()) write_text(log_out, log.to_csv());

    if (!log.epochs.empty())
        std::cerr << "final epoch mean loss: " << log.epochs.back().mean_loss << "\n";
    std::cerr << "model written to " << model_out << "\n";
    return kExitOk;
}

int run_eval(const std::string& model_path, const std::string& corpus_path,
             const std::string& out_path) {
    const auto model = geotag::load_model(model_path);
    const auto corpus = geotag::load_corpus(corpus_path);
    if (corpus.examples.empty()) throw geotag::corpus_error("corpus has no usable examples");

    std::vector<geotag::InstanceScores> scores;
    scores.reserve(corpus.examples.size());
    for (const auto& ex : corpus.examples) {
        const auto enc = geotag::encode(ex, model.vocab, model.config.m);
        scores.push_back(geotag::score_instance(enc.labels, geotag::predict_mask(model, enc)));
    }
    auto report = geotag::aggregate(scores);
    report.label_length = model.config.m;

    const std::string csv = geotag::metrics_csv_header() + "\n" + geotag::metrics_csv_row(report) + "\n";
    if (out_path.empty())
        std::cout << csv;
    else
        write_text(out_path, csv);
    std::cerr << geotag::metrics_table(report);
    return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& input_path,
                const std::string& out_path) {
    const auto model = geotag::load_model(model_path);

    std::ifstream file;
    std::istream* in = &std::cin;
    if (!input_path.empty() && input_path != "-") {
        file.open(input_path);
        if (!file) throw geotag::corpus_error("cannot open input file: " + input_path);
        in = &file;
    }
    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        out_file.open(out_path, std::ios::binary);
        if (!out_file) throw geotag::corpus_error("cannot write file: " + out_path);
        out = &out_file;
    }

    std::string line;
    while (std::getline(*in, line)) {
        nlohmann::json record;
        record["text"] = line;
        record["tokens"] = nlohmann::json::array();
        record["locations"] = nlohmann::json::array();
        const auto tokens = geotag::preprocess({line});
        if (!tokens.empty()) {
            record["tokens"] = tokens;
            geotag::AnnotatedTweet tweet{tokens, std::vector<std::uint8_t>(tokens.size(), 0)};
            const auto enc = geotag::encode(tweet, model.vocab, model.config.m);
            const auto mask = geotag::predict_mask(model, enc);
            for (std::size_t i = 0; i < enc.true_length; ++i)
                if (mask[i]) {
                    nlohmann::json loc;
                    loc["index"] = i;
                    loc["token"] = tokens[i];
                    record["locations"].push_back(loc);
                }
        }
        *out << record.dump() << "\n";
    }
    return kExitOk;
}

int run_cv(const std::string& corpus_path, const std::string& embeddings_path,
           const std::string& config_path, std::uint64_t seed, std::size_t folds,
           bool paper_vocab, const std::string& out_path) {
    const ModelConfig config = config_from(config_path, seed);
    const auto corpus = geotag::load_corpus(corpus_path);

    geotag::CrossValidationOptions options;
    options.folds = folds;
    options.global_vocab = paper_vocab;
    options.pretrained = maybe_pretrained(embeddings_path, config.k);

    const auto result = geotag::cross_validate(corpus, config, options);
    const auto csv = result.to_csv();
    if (out_path.empty())
        std::cout << csv;
    else
        write_text(out_path, csv);
    std::cerr << geotag::metrics_table(result.mean);
    return kExitOk;
}

int run_sweep(const std::string& corpus_path, const std::string& embeddings_path,
              const std::string& config_path, const std::string& spec_path, std::uint64_t seed,
              std::size_t folds, const std::string& out_path) {
    const ModelConfig base = config_from(config_path, seed);
    std::ifstream spec_file(spec_path);
    if (!spec_file) throw geotag::harness_error("cannot open sweep spec: " + spec_path);
    std::string spec_text((std::istreambuf_iterator<char>(spec_file)),
                          std::istreambuf_iterator<char>());
    const auto variants = geotag::parse_sweep_spec(spec_text, base);
    const auto corpus = geotag::load_corpus(corpus_path);

    geotag::CrossValidationOptions options;
    options.folds = folds;
    options.pretrained = maybe_pretrained(embeddings_path, base.k);

    const auto result = geotag::sweep(corpus, variants, options);
    std::cout << result.to_table();
    if (!out_path.empty()) write_text(out_path, result.to_csv());
    return kExitOk;
}

int run_synth(const std::string& gazetteer_path, const std::string& templates_path, std::size_t n,
              std::uint64_t seed, const std::string& out_path) {
    const auto gazetteer = geotag::load_gazetteer(gazetteer_path);
    const auto templates = geotag::load_templates(templates_path);
    const auto corpus = geotag::synth_generate(gazetteer, templates, n, seed);
    geotag::save_corpus(corpus, out_path);
    std::cerr << "wrote " << corpus.examples.size() << " examples to " << out_path << "\n";
    return kExitOk;
}

int run_gradcheck(const std::string& config_path, std::uint64_t seed) {
    ModelConfig config;
    if (config_path.empty()) {
        // reference check configuration: small enough to sweep every parameter
        config.m = 8;
        config.k = 4;
        config.filter_widths = {2, 3};
        config.feature_maps = 4;
        config.pool_window = 5;
        config.conv_depth = 2;
        config.dense_depth = 2;
        config.dense_hidden = 8;
        config.dropout = 0.0;
    } else {
        config = geotag::load_config(config_path);
    }
    config.seed = seed;
    if (config.dropout != 0.0) {
        std::cerr << "gradcheck forces dropout = 0 (config value ignored)\n";
        config.dropout = 0.0;
    }
    config.validate();

    geotag::Vocabulary vocab;
    for (int i = 0; i < 12; ++i) vocab.add("word" + std::to_string(i));
    auto lookup = geotag::build_lookup(vocab, {}, config.k, config.seed);
    auto model = geotag::init_model(config, vocab, std::move(lookup.matrix));

    // full-length example: keeps the check away from the ReLU kink that
    // all-PAD windows hit with zero-initialized biases
    geotag::Rng rng(geotag::derive_seed(config.seed, 0x47434845));
    geotag::EncodedTweet enc;
    enc.true_length = config.m;
    enc.indices.resize(config.m);
    enc.labels.resize(config.m);
    for (std::size_t i = 0; i < config.m; ++i) {
        enc.indices[i] = 2 + static_cast<std::uint32_t>(rng.index(vocab.size() - 2));
        enc.labels[i] = rng.bernoulli(0.4);
    }

    const double max_rel = geotag::grad_check(model, enc, 1e-5);
    std::cout << "max relative error: " << max_rel << "\n";
    if (max_rel >= 1e-4) {
        std::cerr << "FAIL: gradient mismatch\n";
        return kExitData;
    }
    std::cout << "OK\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"convolutional location-word tagger for short noisy texts"};
    app.require_subcommand(1);

    std::string corpus_path, embeddings_path, config_path, model_path, input_path;
    std::string out_path, log_path, gazetteer_path, templates_path, spec_path;
    std::uint64_t seed = 0;
    std::size_t count = 0, folds = 10;
    bool paper_vocab = false;

    auto* train = app.add_subcommand("train", "train a model on an annotated corpus");
    train->add_option("--corpus", corpus_path, "corpus JSONL file")->required();
    train->add_option("--embeddings", embeddings_path, "pretrained embedding text file");
    train->add_option("--config", config_path, "key = value config file");
    train->add_option("--model-out", model_path, "output model file")->required();
    train->add_option("--log-out", log_path, "training log CSV");
    train->add_option("--seed", seed, "RNG seed")->required();

    auto* eval = app.add_subcommand("eval", "score a model against an annotated corpus");
    eval->add_option("--model", model_path, "model file")->required();
    eval->add_option("--corpus", corpus_path, "corpus JSONL file")->required();
    eval->add_option("--out", out_path, "metrics CSV output (default stdout)");

    auto* predict = app.add_subcommand("predict", "tag location words in raw text lines");
    predict->add_option("--model", model_path, "model file")->required();
    predict->add_option("--input", input_path, "text file, one tweet per line ('-' = stdin)");
    predict->add_option("--out", out_path, "JSONL output (default stdout)");

    auto* cv = app.add_subcommand("cv", "k-fold cross validation");
    cv->add_option("--corpus", corpus_path, "corpus JSONL file")->required();
    cv->add_option("--embeddings", embeddings_path, "pretrained embedding text file");
    cv->add_option("--config", config_path, "key = value config file");
    cv->add_option("--folds", folds, "fold count")->capture_default_str();
    cv->add_flag("--paper-vocab", paper_vocab,
                 "build one vocabulary from the whole corpus (leaks evaluation tokens)");
    cv->add_option("--out", out_path, "per-fold CSV output (default stdout)");
    cv->add_option("--seed", seed, "RNG seed")->required();

    auto* sweep = app.add_subcommand("sweep", "cross-validate a list of config variants");
    sweep->add_option("--corpus", corpus_path, "corpus JSONL file")->required();
    sweep->add_option("--embeddings", embeddings_path, "pretrained embedding text file");
    sweep->add_option("--config", config_path, "base config file");
    sweep->add_option("--spec", spec_path, "sweep spec, one variant per line")->required();
    sweep->add_option("--folds", folds, "fold count")->capture_default_str();
    sweep->add_option("--out", out_path, "result CSV output");
    sweep->add_option("--seed", seed, "RNG seed")->required();

    auto* synth = app.add_subcommand("synth", "generate a synthetic annotated corpus");
    synth->add_option("--gazetteer", gazetteer_path, "place names, one per line")->required();
    synth->add_option("--templates", templates_path, "templates with {LOC} slots")->required();
    synth->add_option("--n", count, "number of examples")->required();
    synth->add_option("--out", out_path, "corpus JSONL output")->required();
    synth->add_option("--seed", seed, "RNG seed")->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gradcheck->add_option("--config", config_path, "config file (default: reference small model)");
    gradcheck->add_option("--seed", seed, "RNG seed")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (train->parsed())
            return run_train(corpus_path, embeddings_path, config_path, seed, model_path, log_path);
        if (eval->parsed()) return run_eval(model_path, corpus_path, out_path);
        if (predict->parsed()) return run_predict(model_path, input_path, out_path);
        if (cv->parsed())
            return run_cv(corpus_path, embeddings_path, config_path, seed, folds, paper_vocab,
                          out_path);
        if (sweep->parsed())
            return run_sweep(corpus_path, embeddings_path, config_path, spec_path, seed, folds,
                             out_path);
        if (synth->parsed())
            return run_synth(gazetteer_path, templates_path, count, seed, out_path);
        if (gradcheck->parsed()) return run_gradcheck(config_path, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
