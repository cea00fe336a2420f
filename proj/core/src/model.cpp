#include "geotag/model.hpp"

#include <algorithm>
#include <cmath>

namespace geotag {

std::size_t branch_conv_len(std::size_t m, std::size_t width, std::size_t depth) {
    std::size_t len = m;
    for (std::size_t l = 0; l < depth; ++l) {
        if (len < width)
            throw model_error("conv input of length " + std::to_string(len) +
                              " is shorter than filter width " + std::to_string(width));
        len = conv_out_len(len, width);
    }
    return len;
}

std::size_t flatten_size(const ModelConfig& config) {
    std::size_t total = 0;
    for (const auto h : config.filter_widths)
        total += config.feature_maps *
                 pooled_len(branch_conv_len(config.m, h, config.conv_depth), config.pool_window);
    return total;
}

namespace {

void glorot_fill(std::vector<float>& weights, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& w : weights) w = static_cast<float>(rng.uniform(-bound, bound));
}

}  // namespace

Model init_model(const ModelConfig& config, const Vocabulary& vocab, EmbeddingMatrix embedding) {
    config.validate();
    if (embedding.vocab_size != vocab.size())
        throw model_error("embedding table rows do not match the vocabulary");
    if (embedding.dim != config.k)
        throw model_error("embedding dimension does not match config K");

    Model model;
    model.config = config;
    // branches are serialized by ascending width; keep the config in step
    std::sort(model.config.filter_widths.begin(), model.config.filter_widths.end());
    model.vocab = vocab;
    model.embedding = std::move(embedding);

    Rng rng(derive_seed(config.seed, 0x57494e49));  // "WINI"

    for (const auto h : model.config.filter_widths) {
        ConvBranch branch;
        branch.width = h;
        std::size_t in_dim = config.k;
        for (std::size_t l = 0; l < config.conv_depth; ++l) {
            ConvLayer layer;
            layer.width = h;
            layer.in_dim = in_dim;
            layer.maps = config.feature_maps;
            layer.weights.resize(layer.maps * h * in_dim);
            layer.biases.assign(layer.maps, 0.0f);
            glorot_fill(layer.weights, h * in_dim, h * layer.maps, rng);
            branch.layers.push_back(std::move(layer));
            in_dim = config.feature_maps;
        }
        model.branches.push_back(std::move(branch));
    }

    std::size_t in_dim = flatten_size(config);
    for (std::size_t l = 0; l < config.dense_depth; ++l) {
        DenseLayer layer;
        layer.in_dim = in_dim;
        layer.out_dim = config.dense_hidden;
        layer.weights.resize(layer.out_dim * layer.in_dim);
        layer.biases.assign(layer.out_dim, 0.0f);
        layer.activation = Activation::Relu;
        glorot_fill(layer.weights, layer.in_dim, layer.out_dim, rng);
        model.dense_stack.push_back(std::move(layer));
        in_dim = config.dense_hidden;
    }

    model.output_layer.in_dim = in_dim;
    model.output_layer.out_dim = config.m;
    model.output_layer.weights.resize(config.m * in_dim);
    model.output_layer.biases.assign(config.m, 0.0f);
    model.output_layer.activation = Activation::Sigmoid;
    glorot_fill(model.output_layer.weights, in_dim, config.m, rng);

    return model;
}

void relu_inplace(Matrix& x) {
    for (auto& v : x.data())
        if (v < 0.0) v = 0.0;
}

std::vector<double> relu(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

// conv layer without the ReLU, keeping the pre-activation for backward
Matrix conv_pre(const Matrix& input, const ConvLayer& layer) {
    if (input.rows() < layer.width)
        throw model_error("conv input of length " + std::to_string(input.rows()) +
                          " is shorter than filter width " + std::to_string(layer.width));
    if (input.cols() != layer.in_dim)
        throw model_error("conv input dimension mismatch");

    const std::size_t out_len = conv_out_len(input.rows(), layer.width);
    Matrix out(out_len, layer.maps);
    const std::size_t window = layer.width * layer.in_dim;
    for (std::size_t f = 0; f < layer.maps; ++f) {
        const float* wf = layer.weights.data() + f * window;
        const double bias = layer.biases[f];
        for (std::size_t i = 0; i < out_len; ++i) {
            double acc = bias;
            for (std::size_t r = 0; r < layer.width; ++r) {
                const double* in_row = input.row_ptr(i + r);
                const float* w_row = wf + r * layer.in_dim;
                for (std::size_t c = 0; c < layer.in_dim; ++c) acc += w_row[c] * in_row[c];
            }
            out(i, f) = acc;
        }
    }
    return out;
}

}  // namespace

Matrix conv_forward(const Matrix& input, const ConvLayer& layer) {
    Matrix out = conv_pre(input, layer);
    relu_inplace(out);
    return out;
}

Matrix maxpool(const Matrix& feature_map, std::size_t window, std::vector<std::size_t>* argmax_out) {
    const std::size_t rows = feature_map.rows();
    const std::size_t maps = feature_map.cols();
    const std::size_t out_rows = pooled_len(rows, window);
    Matrix out(out_rows, maps);
    if (argmax_out) argmax_out->assign(out_rows * maps, 0);
    for (std::size_t w = 0; w < out_rows; ++w) {
        const std::size_t begin = w * window;
        const std::size_t end = std::min(begin + window, rows);
        for (std::size_t f = 0; f < maps; ++f) {
            double best = feature_map(begin, f);
            std::size_t best_row = begin;
            for (std::size_t r = begin + 1; r < end; ++r) {
                if (feature_map(r, f) > best) {
                    best = feature_map(r, f);
                    best_row = r;
                }
            }
            out(w, f) = best;
            if (argmax_out) (*argmax_out)[w * maps + f] = best_row;
        }
    }
    return out;
}

namespace {

// pre = W x + b for a dense layer, double accumulation over float weights
std::vector<double> dense_pre(const DenseLayer& layer, const std::vector<double>& x) {
    std::vector<double> out(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const float* w = layer.weights.data() + o * layer.in_dim;
        double acc = layer.biases[o];
        for (std::size_t i = 0; i < layer.in_dim; ++i) acc += w[i] * x[i];
        out[o] = acc;
    }
    return out;
}

}  // namespace

ForwardCache forward(const Model& model, const EncodedTweet& enc, Mode mode, Rng* rng) {
    const auto& config = model.config;
    if (enc.indices.size() != config.m)
        throw model_error("encoded tweet length does not match config m");
    const bool train = mode == Mode::Train;
    const bool use_dropout = train && config.dropout > 0.0;
    if (use_dropout && rng == nullptr)
        throw model_error("train-mode forward with dropout needs an rng");

    ForwardCache cache;
    cache.train_mode = train;
    cache.indices = enc.indices;
    cache.embedded = embed(enc, model.embedding);

    cache.branches.resize(model.branches.size());
    cache.flat.reserve(flatten_size(config));
    for (std::size_t b = 0; b < model.branches.size(); ++b) {
        const auto& branch = model.branches[b];
        auto& bc = cache.branches[b];
        const Matrix* input = &cache.embedded;
        for (const auto& layer : branch.layers) {
            Matrix pre = conv_pre(*input, layer);
            Matrix post = pre;
            relu_inplace(post);
            bc.pre.push_back(std::move(pre));
            bc.post.push_back(std::move(post));
            input = &bc.post.back();
        }
        bc.pooled = maxpool(*input, config.pool_window, &bc.argmax);
        cache.flat.insert(cache.flat.end(), bc.pooled.data().begin(), bc.pooled.data().end());
    }

    const std::vector<double>* x = &cache.flat;
    for (const auto& layer : model.dense_stack) {
        std::vector<double> pre = dense_pre(layer, *x);
        std::vector<double> post = relu(pre);
        std::vector<double> scale;
        if (use_dropout) {
            scale.resize(post.size());
            const double keep_scale = 1.0 / (1.0 - config.dropout);
            for (std::size_t i = 0; i < post.size(); ++i) {
                scale[i] = rng->bernoulli(config.dropout) ? 0.0 : keep_scale;
                post[i] *= scale[i];
            }
        }
        cache.dense_pre.push_back(std::move(pre));
        cache.dropout_scale.push_back(std::move(scale));
        cache.dense_post.push_back(std::move(post));
        x = &cache.dense_post.back();
    }

    cache.logits = dense_pre(model.output_layer, *x);
    cache.probs.resize(cache.logits.size());
    for (std::size_t i = 0; i < cache.logits.size(); ++i) cache.probs[i] = sigmoid(cache.logits[i]);
    return cache;
}

Gradients zero_gradients(const Model& model) {
    Gradients g;
    if (model.config.embeddings_trainable)
        g.embedding.assign(model.embedding.data.size(), 0.0);
    g.branches.resize(model.branches.size());
    for (std::size_t b = 0; b < model.branches.size(); ++b) {
        for (const auto& layer : model.branches[b].layers) {
            LayerGrad lg;
            lg.weights.assign(layer.weights.size(), 0.0);
            lg.biases.assign(layer.biases.size(), 0.0);
            g.branches[b].push_back(std::move(lg));
        }
    }
    for (const auto& layer : model.dense_stack) {
        LayerGrad lg;
        lg.weights.assign(layer.weights.size(), 0.0);
        lg.biases.assign(layer.biases.size(), 0.0);
        g.dense_stack.push_back(std::move(lg));
    }
    g.output_layer.weights.assign(model.output_layer.weights.size(), 0.0);
    g.output_layer.biases.assign(model.output_layer.biases.size(), 0.0);
    return g;
}

void scale_gradients(Gradients& grads, double factor) {
    auto scale = [factor](std::vector<double>& v) {
        for (auto& x : v) x *= factor;
    };
    scale(grads.embedding);
    for (auto& branch : grads.branches)
        for (auto& layer : branch) {
            scale(layer.weights);
            scale(layer.biases);
        }
    for (auto& layer : grads.dense_stack) {
        scale(layer.weights);
        scale(layer.biases);
    }
    scale(grads.output_layer.weights);
    scale(grads.output_layer.biases);
}

void accumulate_gradients(Gradients& into, const Gradients& from) {
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(into.embedding, from.embedding);
    for (std::size_t b = 0; b < into.branches.size(); ++b)
        for (std::size_t l = 0; l < into.branches[b].size(); ++l) {
            add(into.branches[b][l].weights, from.branches[b][l].weights);
            add(into.branches[b][l].biases, from.branches[b][l].biases);
        }
    for (std::size_t l = 0; l < into.dense_stack.size(); ++l) {
        add(into.dense_stack[l].weights, from.dense_stack[l].weights);
        add(into.dense_stack[l].biases, from.dense_stack[l].biases);
    }
    add(into.output_layer.weights, from.output_layer.weights);
    add(into.output_layer.biases, from.output_layer.biases);
}

Gradients backward(const Model& model, const ForwardCache& cache,
                   const std::vector<std::uint8_t>& labels) {
    const auto& config = model.config;
    if (labels.size() != config.m) throw model_error("label vector length does not match config m");

    Gradients grads = zero_gradients(model);

    // d(summed BCE)/d(logit_k) = prob_k - y_k
    std::vector<double> dlogits(config.m);
    for (std::size_t i = 0; i < config.m; ++i)
        dlogits[i] = cache.probs[i] - static_cast<double>(labels[i]);

    // output layer
    const std::vector<double>& last_hidden =
        cache.dense_post.empty() ? cache.flat : cache.dense_post.back();
    std::vector<double> dx(last_hidden.size(), 0.0);
    {
        const auto& layer = model.output_layer;
        auto& lg = grads.output_layer;
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            const double d = dlogits[o];
            const float* w = layer.weights.data() + o * layer.in_dim;
            double* gw = lg.weights.data() + o * layer.in_dim;
            for (std::size_t i = 0; i < layer.in_dim; ++i) {
                gw[i] += d * last_hidden[i];
                dx[i] += d * w[i];
            }
            lg.biases[o] += d;
        }
    }

    // hidden dense layers, top down
    for (std::size_t l = model.dense_stack.size(); l-- > 0;) {
        const auto& layer = model.dense_stack[l];
        auto& lg = grads.dense_stack[l];
        const auto& pre = cache.dense_pre[l];
        const auto& scale = cache.dropout_scale[l];
        const std::vector<double>& input = l == 0 ? cache.flat : cache.dense_post[l - 1];

        std::vector<double> dpre(layer.out_dim);
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            double d = dx[o];
            if (!scale.empty()) d *= scale[o];
            dpre[o] = pre[o] > 0.0 ? d : 0.0;
        }
        std::vector<double> dinput(layer.in_dim, 0.0);
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            const double d = dpre[o];
            if (d == 0.0) continue;
            const float* w = layer.weights.data() + o * layer.in_dim;
            double* gw = lg.weights.data() + o * layer.in_dim;
            for (std::size_t i = 0; i < layer.in_dim; ++i) {
                gw[i] += d * input[i];
                dinput[i] += d * w[i];
            }
        }
        for (std::size_t o = 0; o < layer.out_dim; ++o) lg.biases[o] += dpre[o];
        dx = std::move(dinput);
    }

    // split the flatten gradient back into branches
    Matrix dembedded(config.m, config.k);
    std::size_t flat_offset = 0;
    for (std::size_t b = 0; b < model.branches.size(); ++b) {
        const auto& branch = model.branches[b];
        const auto& bc = cache.branches[b];
        const std::size_t pooled_cells = bc.pooled.size();

        // pool backward: route each pooled gradient to its argmax row
        const auto& final_post = bc.post.back();
        Matrix dpost(final_post.rows(), final_post.cols());
        const std::size_t maps = final_post.cols();
        for (std::size_t cell = 0; cell < pooled_cells; ++cell) {
            const double d = dx[flat_offset + cell];
            if (d == 0.0) continue;
            const std::size_t f = cell % maps;
            dpost(bc.argmax[cell], f) += d;
        }
        flat_offset += pooled_cells;

        // conv layers, deepest first
        for (std::size_t l = branch.layers.size(); l-- > 0;) {
            const auto& layer = branch.layers[l];
            auto& lg = grads.branches[b][l];
            const auto& pre = bc.pre[l];
            const Matrix& input = l == 0 ? cache.embedded : bc.post[l - 1];

            Matrix dinput(input.rows(), input.cols());
            const std::size_t window = layer.width * layer.in_dim;
            for (std::size_t f = 0; f < layer.maps; ++f) {
                const float* wf = layer.weights.data() + f * window;
                double* gwf = lg.weights.data() + f * window;
                double gbias = 0.0;
                for (std::size_t i = 0; i < pre.rows(); ++i) {
                    double d = dpost(i, f);
                    if (d == 0.0 || pre(i, f) <= 0.0) continue;
                    gbias += d;
                    for (std::size_t r = 0; r < layer.width; ++r) {
                        const double* in_row = input.row_ptr(i + r);
                        double* din_row = dinput.row_ptr(i + r);
                        const float* w_row = wf + r * layer.in_dim;
                        double* gw_row = gwf + r * layer.in_dim;
                        for (std::size_t c = 0; c < layer.in_dim; ++c) {
                            gw_row[c] += d * in_row[c];
                            din_row[c] += d * w_row[c];
                        }
                    }
                }
                lg.biases[f] += gbias;
            }
            if (l == 0) {
                for (std::size_t i = 0; i < dinput.size(); ++i)
                    dembedded.data()[i] += dinput.data()[i];
            } else {
                dpost = std::move(dinput);
            }
        }
    }

    // embedding rows; the PAD row stays frozen
    if (config.embeddings_trainable) {
        for (std::size_t i = 0; i < cache.indices.size(); ++i) {
            const auto idx = cache.indices[i];
            if (idx == kPadIndex) continue;
            double* grow = grads.embedding.data() + idx * config.k;
            const double* drow = dembedded.row_ptr(i);
            for (std::size_t j = 0; j < config.k; ++j) grow[j] += drow[j];
        }
    }

    return grads;
}

std::vector<std::uint8_t> predict(const std::vector<double>& probs, double threshold) {
    std::vector<std::uint8_t> mask(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) mask[i] = probs[i] >= threshold ? 1 : 0;
    return mask;
}

std::vector<std::uint8_t> predict_mask(const Model& model, const EncodedTweet& enc) {
    return predict(forward(model, enc, Mode::Infer).probs, model.config.threshold);
}

}  // namespace geotag
