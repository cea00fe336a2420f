#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geotag/config.hpp"
#include "geotag/corpus.hpp"
#include "geotag/metrics.hpp"
#include "geotag/model.hpp"
#include "geotag/training.hpp"

namespace geotag {

class harness_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shuffled k-way partition; sizes differ by at most one and the assignment
// depends only on (n, k, seed).
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;  // example index -> fold id
    std::uint64_t seed = 0;

    std::vector<std::size_t> fold_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
};

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct CrossValidationOptions {
    std::size_t folds = 10;
    // Build the vocabulary (and embedding rows) from the full corpus
    // instead of each fold's training split. Leaks evaluation tokens into
    // the table; off by default.
    bool global_vocab = false;
    std::optional<PretrainedMap> pretrained;  // nullopt = random init
};

struct FoldReport {
    std::size_t fold = 0;
    MetricsReport metrics;
    double final_train_loss = 0.0;
    double pretrained_coverage = 0.0;
};

struct CrossValidationResult {
    std::vector<FoldReport> folds;
    MetricsReport mean;  // unweighted mean over folds

    // fold rows followed by a mean row; fixed formatting
    std::string to_csv() const;
};

// Per fold: vocabulary from the training split (unless global_vocab),
// lookup build, training, then held-out scoring on the padded outputs.
CrossValidationResult cross_validate(const Corpus& corpus, const ModelConfig& config,
                                     const CrossValidationOptions& options);

struct SweepVariant {
    std::string label;
    ModelConfig config;
};

// One variant per line: semicolon-separated "key=value" overrides applied
// to the base config. '#' starts a comment.
std::vector<SweepVariant> parse_sweep_spec(const std::string& text, const ModelConfig& base);

struct SweepRow {
    std::string label;
    bool ok = false;
    std::string error;  // set when the variant failed
    MetricsReport mean;
    bool best = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;

    std::string to_table() const;
    std::string to_csv() const;
};

// cross_validate per variant, rows in spec order. The row maximizing F1
// wins; ties break on higher exact match, then lower Hamming loss.
// Per-variant failures are recorded in the row and the sweep continues.
SweepResult sweep(const Corpus& corpus, const std::vector<SweepVariant>& variants,
                  const CrossValidationOptions& options);

}  // namespace geotag
