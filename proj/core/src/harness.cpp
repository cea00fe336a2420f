#include "geotag/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "geotag/rng.hpp"

namespace geotag {

std::vector<std::size_t> FoldPlan::fold_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (assignments[i] != fold) out.push_back(i);
    return out;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw harness_error("kfold_split: need at least 2 folds");
    if (n < k)
        throw harness_error("kfold_split: " + std::to_string(n) + " examples cannot fill " +
                            std::to_string(k) + " folds");
    std::vector<std::size_t> shuffled(n);
    std::iota(shuffled.begin(), shuffled.end(), 0);
    Rng rng(derive_seed(seed, 0x4b464c44));  // "KFLD"
    rng.shuffle(shuffled);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) plan.assignments[shuffled[j]] = j % k;
    return plan;
}

namespace {

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& indices) {
    Corpus out;
    out.provenance = corpus.provenance;
    out.examples.reserve(indices.size());
    for (const auto i : indices) out.examples.push_back(corpus.examples[i]);
    return out;
}

}  // namespace

CrossValidationResult cross_validate(const Corpus& corpus, const ModelConfig& config,
                                     const CrossValidationOptions& options) {
    config.validate();
    if (corpus.examples.size() < options.folds)
        throw harness_error("cross_validate: corpus smaller than fold count");

    const FoldPlan plan = kfold_split(corpus.examples.size(), options.folds, config.seed);
    const PretrainedMap empty_pretrained;
    const PretrainedMap& pretrained =
        options.pretrained ? *options.pretrained : empty_pretrained;

    CrossValidationResult result;
    for (std::size_t fold = 0; fold < options.folds; ++fold) {
        const auto train_idx = plan.train_indices(fold);
        const auto test_idx = plan.fold_indices(fold);
        const Corpus train_corpus = subset(corpus, train_idx);

        ModelConfig fold_config = config;
        fold_config.seed = derive_seed(derive_seed(config.seed, 0x464f4c44), fold);  // "FOLD"

        const Vocabulary vocab =
            options.global_vocab ? build_vocab(corpus) : build_vocab(train_corpus);
        LookupBuild lookup = build_lookup(vocab, pretrained, fold_config.k, fold_config.seed);

        Model model = init_model(fold_config, vocab, std::move(lookup.matrix));
        TrainLog log;
        try {
            log = train(model, train_corpus);
        } catch (const training_error& e) {
            throw harness_error("fold " + std::to_string(fold) + ": " + e.what());
        }

        std::vector<InstanceScores> scores;
        scores.reserve(test_idx.size());
        for (const auto i : test_idx) {
            const EncodedTweet enc = encode(corpus.examples[i], vocab, fold_config.m);
            scores.push_back(score_instance(enc.labels, predict_mask(model, enc)));
        }

        FoldReport report;
        report.fold = fold;
        report.metrics = aggregate(scores);
        report.metrics.label_length = fold_config.m;
        report.final_train_loss = log.epochs.empty() ? 0.0 : log.epochs.back().mean_loss;
        report.pretrained_coverage = lookup.coverage();
        result.folds.push_back(std::move(report));
    }

    MetricsReport mean;
    for (const auto& fr : result.folds) {
        mean.precision += fr.metrics.precision;
        mean.recall += fr.metrics.recall;
        mean.f1 += fr.metrics.f1;
        mean.hamming_loss += fr.metrics.hamming_loss;
        mean.jaccard += fr.metrics.jaccard;
        mean.exact_match += fr.metrics.exact_match;
        mean.count += fr.metrics.count;
    }
    const double k = static_cast<double>(result.folds.size());
    mean.precision /= k;
    mean.recall /= k;
    mean.f1 /= k;
    mean.hamming_loss /= k;
    mean.jaccard /= k;
    mean.exact_match /= k;
    mean.label_length = config.m;
    result.mean = mean;
    return result;
}

std::string CrossValidationResult::to_csv() const {
    std::ostringstream os;
    os << "fold," << metrics_csv_header() << '\n';
    for (const auto& fr : folds)
        os << fr.fold << ',' << metrics_csv_row(fr.metrics) << '\n';
    os << "mean," << metrics_csv_row(mean) << '\n';
    return os.str();
}

std::vector<SweepVariant> parse_sweep_spec(const std::string& text, const ModelConfig& base) {
    std::vector<SweepVariant> variants;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;

        SweepVariant variant;
        variant.config = base;
        std::stringstream parts(line);
        std::string part;
        std::string label;
        while (std::getline(parts, part, ';')) {
            part = trim(part);
            if (part.empty()) continue;
            const auto eq = part.find('=');
            if (eq == std::string::npos)
                throw harness_error("sweep line " + std::to_string(line_no) +
                                    ": expected key=value, got \"" + part + "\"");
            try {
                apply_config_entry(variant.config, trim(part.substr(0, eq)),
                                   trim(part.substr(eq + 1)));
            } catch (const config_error& e) {
                throw harness_error("sweep line " + std::to_string(line_no) + ": " + e.what());
            }
            if (!label.empty()) label += ';';
            label += part;
        }
        variant.config.validate();
        variant.label = label;
        variants.push_back(std::move(variant));
    }
    if (variants.empty()) throw harness_error("sweep spec has no variants");
    return variants;
}

SweepResult sweep(const Corpus& corpus, const std::vector<SweepVariant>& variants,
                  const CrossValidationOptions& options) {
    if (variants.empty()) throw harness_error("sweep: no variants");
    SweepResult result;
    for (const auto& variant : variants) {
        SweepRow row;
        row.label = variant.label;
        try {
            row.mean = cross_validate(corpus, variant.config, options).mean;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }

    const SweepRow* best = nullptr;
    for (const auto& row : result.rows) {
        if (!row.ok) continue;
        if (!best) {
            best = &row;
            continue;
        }
        const auto& a = row.mean;
        const auto& b = best->mean;
        if (a.f1 > b.f1 ||
            (a.f1 == b.f1 && (a.exact_match > b.exact_match ||
                              (a.exact_match == b.exact_match && a.hamming_loss < b.hamming_loss))))
            best = &row;
    }
    if (best)
        for (auto& row : result.rows) row.best = (&row == best);
    return result;
}

std::string SweepResult::to_table() const {
    std::size_t width = 12;
    for (const auto& row : rows) width = std::max(width, row.label.size());
    std::ostringstream os;
    os << "  " << std::string(width, ' ').replace(0, 7, "variant")
       << "  precision  recall  f1      hamming  jaccard  exact\n";
    char buf[160];
    for (const auto& row : rows) {
        os << (row.best ? "* " : "  ") << row.label
           << std::string(width - row.label.size(), ' ');
        if (row.ok) {
            std::snprintf(buf, sizeof(buf), "  %9.4f  %6.4f  %6.4f  %7.4f  %7.4f  %5.4f\n",
                          row.mean.precision, row.mean.recall, row.mean.f1, row.mean.hamming_loss,
                          row.mean.jaccard, row.mean.exact_match);
            os << buf;
        } else {
            os << "  FAILED: " << row.error << '\n';
        }
    }
    return os.str();
}

std::string SweepResult::to_csv() const {
    std::ostringstream os;
    os << "variant,best," << metrics_csv_header() << ",error\n";
    for (const auto& row : rows) {
        os << '"' << row.label << "\"," << (row.best ? 1 : 0) << ',';
        if (row.ok)
            os << metrics_csv_row(row.mean) << ',';
        else
            os << ",,,,,," << '"' << row.error << '"';
        os << '\n';
    }
    return os.str();
}

}  // namespace geotag
