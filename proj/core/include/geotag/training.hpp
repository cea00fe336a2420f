#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geotag/model.hpp"

namespace geotag {

class training_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Summed binary cross-entropy over all m positions; probabilities are
// clamped to [1e-7, 1 - 1e-7] before the logs.
double bce_loss(const std::vector<std::uint8_t>& y, const std::vector<double>& y_hat);

inline constexpr double kBceClamp = 1e-7;

// First/second moment estimates per parameter group plus the step count.
struct AdamState {
    Gradients m1;
    Gradients m2;
    std::uint64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

AdamState init_adam(const Model& model);

// One bias-corrected Adam update over every trainable parameter.
void adam_step(Model& model, const Gradients& grads, AdamState& state, double lr);

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochStats> epochs;
    std::uint64_t seed = 0;
    ModelConfig config;

    // CSV: epoch,mean_loss,seconds
    std::string to_csv() const;
};

// Mini-batch Adam training. Examples are put in a canonical order first
// (sorted by token sequence) and reshuffled each epoch from a permutation
// that depends only on (seed, epoch), so storage order never matters.
// Aborts with training_error naming epoch and batch if the loss goes
// non-finite.
TrainLog train(Model& model, const Corpus& corpus);

// Central finite differences against backward() over every trainable
// parameter (the frozen PAD row is skipped). Returns the max relative
// error |a - n| / max(|a|, |n|, 1e-12). Requires dropout == 0, and the
// loss must be differentiable at the given point: with zero-initialized
// biases, use an example whose true_length fills the window, otherwise
// all-PAD convolution windows sit exactly on the ReLU kink.
double grad_check(Model& model, const EncodedTweet& example, double epsilon);

}  // namespace geotag
