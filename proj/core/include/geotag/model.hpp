#pragma once

#include <cstdint>
#include <vector>

#include "geotag/config.hpp"
#include "geotag/embedding.hpp"
#include "geotag/rng.hpp"
#include "geotag/tensor.hpp"

namespace geotag {

class model_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One convolution layer inside a branch: `maps` filters of shape
// width x in_dim, applied valid (no padding), stride 1, ReLU after.
struct ConvLayer {
    std::size_t width = 0;
    std::size_t in_dim = 0;   // K on layer 1, maps on deeper layers
    std::size_t maps = 0;
    std::vector<float> weights;  // [f][r][c] row-major, maps*width*in_dim
    std::vector<float> biases;   // maps
};

// All conv layers of one filter width, stacked depth-deep; a single
// max-over-time pool follows the last layer.
struct ConvBranch {
    std::size_t width = 0;
    std::vector<ConvLayer> layers;
};

enum class Activation { Relu, Sigmoid };

struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<float> weights;  // out x in, row-major
    std::vector<float> biases;   // out
    Activation activation = Activation::Relu;
};

struct Model {
    ModelConfig config;
    Vocabulary vocab;
    EmbeddingMatrix embedding;
    std::vector<ConvBranch> branches;     // ascending width
    std::vector<DenseLayer> dense_stack;  // ReLU hidden layers
    DenseLayer output_layer;              // m sigmoid units
};

// -- shape arithmetic ------------------------------------------------------

// valid convolution output length
inline std::size_t conv_out_len(std::size_t in_len, std::size_t width) {
    return in_len - width + 1;
}

// non-overlapping windows with a partial final window
inline std::size_t pooled_len(std::size_t in_len, std::size_t window) {
    return (in_len + window - 1) / window;
}

// length after `depth` stacked convolutions of one width
std::size_t branch_conv_len(std::size_t m, std::size_t width, std::size_t depth);

// total flattened size across all branches
std::size_t flatten_size(const ModelConfig& config);

// -- construction ----------------------------------------------------------

// Glorot-uniform weights, zero biases, drawn from config.seed. The
// embedding table is adopted as-is (build_lookup seeds it separately).
Model init_model(const ModelConfig& config, const Vocabulary& vocab,
                 EmbeddingMatrix embedding);

// -- forward / backward ----------------------------------------------------

enum class Mode { Train, Infer };

struct BranchCache {
    std::vector<Matrix> pre;        // pre-activation per layer
    std::vector<Matrix> post;       // relu(pre)
    Matrix pooled;                  // pooled_len x maps
    std::vector<std::size_t> argmax;  // winning time index per pooled cell
};

struct ForwardCache {
    std::vector<std::uint32_t> indices;  // the encoded input, for embedding grads
    Matrix embedded;                     // m x K
    std::vector<BranchCache> branches;
    std::vector<double> flat;
    std::vector<std::vector<double>> dense_pre;
    std::vector<std::vector<double>> dense_post;   // after relu and dropout
    std::vector<std::vector<double>> dropout_scale;  // 0 or 1/(1-p) per unit
    std::vector<double> logits;
    std::vector<double> probs;
    bool train_mode = false;
};

// Same shapes as the trainable parameters, double precision.
struct LayerGrad {
    std::vector<double> weights;
    std::vector<double> biases;
};

struct Gradients {
    std::vector<double> embedding;  // empty when embeddings are frozen
    std::vector<std::vector<LayerGrad>> branches;
    std::vector<LayerGrad> dense_stack;
    LayerGrad output_layer;
};

Gradients zero_gradients(const Model& model);
void scale_gradients(Gradients& grads, double factor);
void accumulate_gradients(Gradients& into, const Gradients& from);

// elementwise max(0, x)
void relu_inplace(Matrix& x);
std::vector<double> relu(const std::vector<double>& x);

double sigmoid(double x);

// One conv layer, valid convolution + ReLU. Input rows shorter than the
// filter width throw model_error.
Matrix conv_forward(const Matrix& input, const ConvLayer& layer);

// Max over non-overlapping windows of size p (final window may be short).
// argmax_out, when given, records the winning row per (window, map) cell.
Matrix maxpool(const Matrix& feature_map, std::size_t window,
               std::vector<std::size_t>* argmax_out = nullptr);

// Full pass: embed -> conv branches -> pool -> flatten -> dense stack
// (dropout in train mode) -> sigmoid outputs. rng is required in train
// mode when dropout > 0.
ForwardCache forward(const Model& model, const EncodedTweet& enc, Mode mode,
                     Rng* rng = nullptr);

// Exact BCE gradients for every parameter, routed through the recorded
// argmax indices and dropout scales. `labels` are the m padded 0/1 labels.
Gradients backward(const Model& model, const ForwardCache& cache,
                   const std::vector<std::uint8_t>& labels);

// mask[i] = 1 iff probs[i] >= threshold
std::vector<std::uint8_t> predict(const std::vector<double>& probs, double threshold);

// Convenience: infer-mode forward + threshold from config.
std::vector<std::uint8_t> predict_mask(const Model& model, const EncodedTweet& enc);

}  // namespace geotag
