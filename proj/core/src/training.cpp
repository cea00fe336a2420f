#include "geotag/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace geotag {

double bce_loss(const std::vector<std::uint8_t>& y, const std::vector<double>& y_hat) {
    if (y.size() != y_hat.size()) throw training_error("bce_loss: length mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double p = std::clamp(y_hat[i], kBceClamp, 1.0 - kBceClamp);
        loss -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    return loss;
}

AdamState init_adam(const Model& model) {
    AdamState state;
    state.m1 = zero_gradients(model);
    state.m2 = zero_gradients(model);
    return state;
}

namespace {

struct GroupRef {
    std::vector<float>* values;
    const std::vector<double>* grad;
    std::vector<double>* m1;
    std::vector<double>* m2;
    std::size_t skip;  // leading entries the sweep must not perturb (PAD row)
};

std::vector<GroupRef> collect_groups(Model& model, const Gradients* grads, AdamState* state) {
    std::vector<GroupRef> groups;
    auto push = [&](std::vector<float>& values, const std::vector<double>* g,
                    std::vector<double>* m1, std::vector<double>* m2, std::size_t skip) {
        groups.push_back({&values, g, m1, m2, skip});
    };
    if (model.config.embeddings_trainable)
        push(model.embedding.data, grads ? &grads->embedding : nullptr,
             state ? &state->m1.embedding : nullptr, state ? &state->m2.embedding : nullptr,
             model.config.k);
    for (std::size_t b = 0; b < model.branches.size(); ++b)
        for (std::size_t l = 0; l < model.branches[b].layers.size(); ++l) {
            auto& layer = model.branches[b].layers[l];
            push(layer.weights, grads ? &grads->branches[b][l].weights : nullptr,
                 state ? &state->m1.branches[b][l].weights : nullptr,
                 state ? &state->m2.branches[b][l].weights : nullptr, 0);
            push(layer.biases, grads ? &grads->branches[b][l].biases : nullptr,
                 state ? &state->m1.branches[b][l].biases : nullptr,
                 state ? &state->m2.branches[b][l].biases : nullptr, 0);
        }
    for (std::size_t l = 0; l < model.dense_stack.size(); ++l) {
        auto& layer = model.dense_stack[l];
        push(layer.weights, grads ? &grads->dense_stack[l].weights : nullptr,
             state ? &state->m1.dense_stack[l].weights : nullptr,
             state ? &state->m2.dense_stack[l].weights : nullptr, 0);
        push(layer.biases, grads ? &grads->dense_stack[l].biases : nullptr,
             state ? &state->m1.dense_stack[l].biases : nullptr,
             state ? &state->m2.dense_stack[l].biases : nullptr, 0);
    }
    push(model.output_layer.weights, grads ? &grads->output_layer.weights : nullptr,
         state ? &state->m1.output_layer.weights : nullptr,
         state ? &state->m2.output_layer.weights : nullptr, 0);
    push(model.output_layer.biases, grads ? &grads->output_layer.biases : nullptr,
         state ? &state->m1.output_layer.biases : nullptr,
         state ? &state->m2.output_layer.biases : nullptr, 0);
    return groups;
}

}  // namespace

void adam_step(Model& model, const Gradients& grads, AdamState& state, double lr) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (auto& group : collect_groups(model, &grads, &state)) {
        auto& values = *group.values;
        const auto& g = *group.grad;
        auto& m1 = *group.m1;
        auto& m2 = *group.m2;
        for (std::size_t i = 0; i < values.size(); ++i) {
            m1[i] = state.beta1 * m1[i] + (1.0 - state.beta1) * g[i];
            m2[i] = state.beta2 * m2[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m1[i] / bc1;
            const double v_hat = m2[i] / bc2;
            values[i] = static_cast<float>(static_cast<double>(values[i]) -
                                           lr * m_hat / (std::sqrt(v_hat) + state.epsilon));
        }
    }
}

std::string TrainLog::to_csv() const {
    std::ostringstream os;
    os << "epoch,mean_loss,seconds\n";
    char buf[96];
    for (const auto& e : epochs) {
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.3f\n", e.epoch, e.mean_loss, e.seconds);
        os << buf;
    }
    return os.str();
}

TrainLog train(Model& model, const Corpus& corpus) {
    const auto& config = model.config;
    TrainLog log;
    log.seed = config.seed;
    log.config = config;
    if (config.epochs == 0) return log;
    if (corpus.examples.empty()) throw training_error("train: empty corpus");

    // canonical example order, so storage order cannot influence training
    std::vector<std::size_t> order(corpus.examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = corpus.examples[a];
        const auto& eb = corpus.examples[b];
        return std::tie(ea.tokens, ea.mask) < std::tie(eb.tokens, eb.mask);
    });

    std::vector<EncodedTweet> encoded;
    encoded.reserve(order.size());
    for (const auto i : order) encoded.push_back(encode(corpus.examples[i], model.vocab, config.m));

    AdamState state = init_adam(model);
    Rng dropout_rng(derive_seed(config.seed, 0x44524f50));  // "DROP"
    const std::size_t n = encoded.size();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng shuffle_rng(derive_seed(derive_seed(config.seed, 0x45504f43), epoch));  // "EPOC"
        shuffle_rng.shuffle(perm);

        double epoch_loss = 0.0;
        std::size_t batch_id = 0;
        for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++batch_id) {
            const std::size_t end = std::min(begin + config.batch_size, n);
            const double batch_n = static_cast<double>(end - begin);

            Gradients batch_grads = zero_gradients(model);
            double batch_loss = 0.0;
            for (std::size_t j = begin; j < end; ++j) {
                const auto& ex = encoded[perm[j]];
                ForwardCache cache = forward(model, ex, Mode::Train, &dropout_rng);
                batch_loss += bce_loss(ex.labels, cache.probs);
                Gradients g = backward(model, cache, ex.labels);
                accumulate_gradients(batch_grads, g);
            }
            if (!std::isfinite(batch_loss))
                throw training_error("non-finite loss at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(batch_id));
            scale_gradients(batch_grads, 1.0 / batch_n);
            adam_step(model, batch_grads, state, config.learning_rate);
            epoch_loss += batch_loss;
        }

        const auto t1 = std::chrono::steady_clock::now();
        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = epoch_loss / static_cast<double>(n);
        stats.seconds = std::chrono::duration<double>(t1 - t0).count();
        log.epochs.push_back(stats);
    }
    return log;
}

double grad_check(Model& model, const EncodedTweet& example, double epsilon) {
    if (model.config.dropout != 0.0)
        throw training_error("grad_check requires dropout == 0");

    ForwardCache cache = forward(model, example, Mode::Train);
    const Gradients analytic = backward(model, cache, example.labels);

    auto loss_at = [&]() {
        return bce_loss(example.labels, forward(model, example, Mode::Train).probs);
    };

    double max_rel = 0.0;
    for (auto& group : collect_groups(model, &analytic, nullptr)) {
        auto& values = *group.values;
        const auto& grad = *group.grad;
        for (std::size_t i = group.skip; i < values.size(); ++i) {
            const float saved = values[i];
            const float hi = static_cast<float>(static_cast<double>(saved) + epsilon);
            const float lo = static_cast<float>(static_cast<double>(saved) - epsilon);
            values[i] = hi;
            const double loss_hi = loss_at();
            values[i] = lo;
            const double loss_lo = loss_at();
            values[i] = saved;
            // divide by the perturbation that actually landed in the float slot
            const double h = static_cast<double>(hi) - static_cast<double>(lo);
            const double numeric = (loss_hi - loss_lo) / h;
            const double a = grad[i];
            const double rel =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-12});
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace geotag
