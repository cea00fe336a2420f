#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geotag/model.hpp"

using namespace geotag;

namespace {

Vocabulary toy_vocab(std::size_t words) {
    Vocabulary vocab;
    for (std::size_t i = 0; i < words; ++i) vocab.add("w" + std::to_string(i));
    return vocab;
}

Model toy_model(ModelConfig config, std::size_t words = 12) {
    const auto vocab = toy_vocab(words);
    auto build = build_lookup(vocab, {}, config.k, config.seed + 17);
    return init_model(config, vocab, std::move(build.matrix));
}

ModelConfig small_config() {
    ModelConfig config;
    config.m = 8;
    config.k = 4;
    config.filter_widths = {2, 3};
    config.feature_maps = 4;
    config.pool_window = 5;
    config.conv_depth = 1;
    config.dense_depth = 1;
    config.dense_hidden = 6;
    config.dropout = 0.0;
    config.seed = 5;
    return config;
}

EncodedTweet toy_example(const Model& model, std::uint64_t seed) {
    Rng rng(seed);
    EncodedTweet enc;
    const std::size_t m = model.config.m;
    enc.true_length = 1 + rng.index(m);
    enc.indices.assign(m, kPadIndex);
    enc.labels.assign(m, 0);
    for (std::size_t i = 0; i < enc.true_length; ++i) {
        enc.indices[i] = 2 + static_cast<std::uint32_t>(rng.index(model.vocab.size() - 2));
        enc.labels[i] = rng.bernoulli(0.3);
    }
    return enc;
}

}  // namespace

TEST_CASE("relu definition and idempotence") {
    Matrix x(1, 3);
    x(0, 0) = -1.0;
    x(0, 1) = 0.0;
    x(0, 2) = 2.0;
    relu_inplace(x);
    CHECK(x(0, 0) == 0.0);
    CHECK(x(0, 1) == 0.0);
    CHECK(x(0, 2) == 2.0);

    const std::vector<double> v = {-3.5, 0.0, 0.25, 7.0, -0.001};
    CHECK(relu(relu(v)) == relu(v));
    CHECK(relu(std::vector<double>{0.0, 0.0}) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("conv_forward with degenerate filters") {
    ConvLayer layer;
    layer.width = 2;
    layer.in_dim = 3;
    layer.maps = 1;
    layer.weights.assign(1 * 2 * 3, 0.0f);
    Matrix input(5, 3, 1.0);

    SUBCASE("zero filter, bias 3") {
        layer.biases = {3.0f};
        const auto out = conv_forward(input, layer);
        CHECK(out.rows() == 4);
        for (std::size_t i = 0; i < out.rows(); ++i) CHECK(out(i, 0) == 3.0);
    }
    SUBCASE("zero filter, bias -3 clips to 0") {
        layer.biases = {-3.0f};
        const auto out = conv_forward(input, layer);
        for (std::size_t i = 0; i < out.rows(); ++i) CHECK(out(i, 0) == 0.0);
    }
}

TEST_CASE("conv_forward window sums match hand computation") {
    // 4x2 input, one 2x2 filter of ones, bias 0: outputs are window sums
    ConvLayer layer;
    layer.width = 2;
    layer.in_dim = 2;
    layer.maps = 1;
    layer.weights.assign(4, 1.0f);
    layer.biases = {0.0f};

    Matrix input(4, 2);
    const double values[4][2] = {{1, 2}, {3, 4}, {5, 6}, {7, 8}};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 2; ++c) input(r, c) = values[r][c];

    const auto out = conv_forward(input, layer);
    REQUIRE(out.rows() == 3);
    CHECK(out(0, 0) == doctest::Approx(1 + 2 + 3 + 4));
    CHECK(out(1, 0) == doctest::Approx(3 + 4 + 5 + 6));
    CHECK(out(2, 0) == doctest::Approx(5 + 6 + 7 + 8));
}

TEST_CASE("conv_forward rejects input shorter than the filter") {
    ConvLayer layer;
    layer.width = 4;
    layer.in_dim = 2;
    layer.maps = 1;
    layer.weights.assign(8, 0.0f);
    layer.biases = {0.0f};
    Matrix input(3, 2, 1.0);
    CHECK_THROWS_AS(static_cast<void>(conv_forward(input, layer)), model_error);
}

TEST_CASE("maxpool windows, partial tail, argmax bookkeeping") {
    SUBCASE("single full window") {
        Matrix fm(5, 1);
        const double vals[] = {1, 5, 2, 9, 3};
        for (std::size_t i = 0; i < 5; ++i) fm(i, 0) = vals[i];
        const auto out = maxpool(fm, 5);
        REQUIRE(out.rows() == 1);
        CHECK(out(0, 0) == 9.0);
    }
    SUBCASE("partial final window pools as-is") {
        Matrix fm(6, 1);
        const double vals[] = {1, 5, 2, 9, 3, 7};
        for (std::size_t i = 0; i < 6; ++i) fm(i, 0) = vals[i];
        std::vector<std::size_t> argmax;
        const auto out = maxpool(fm, 5, &argmax);
        REQUIRE(out.rows() == 2);
        CHECK(out(0, 0) == 9.0);
        CHECK(out(1, 0) == 7.0);
        CHECK(argmax == std::vector<std::size_t>{3, 5});
    }
    SUBCASE("constant map stays constant") {
        Matrix fm(7, 2, 4.25);
        const auto out = maxpool(fm, 3);
        REQUIRE(out.rows() == 3);
        for (std::size_t w = 0; w < out.rows(); ++w)
            for (std::size_t f = 0; f < 2; ++f) CHECK(out(w, f) == 4.25);
    }
    SUBCASE("max selection property on random maps") {
        Rng rng(31);
        Matrix fm(11, 3);
        for (auto& v : fm.data()) v = rng.uniform(-2.0, 2.0);
        const auto out = maxpool(fm, 4);
        for (std::size_t w = 0; w < out.rows(); ++w) {
            const std::size_t begin = w * 4;
            const std::size_t end = std::min<std::size_t>(begin + 4, 11);
            for (std::size_t f = 0; f < 3; ++f) {
                double best = fm(begin, f);
                for (std::size_t r = begin; r < end; ++r) best = std::max(best, fm(r, f));
                CHECK(out(w, f) == best);
            }
        }
    }
}

TEST_CASE("flatten size closed form") {
    // reference architecture: 128 * (ceil(59/5)+ceil(58/5)+ceil(57/5)) = 4608
    ModelConfig config;
    CHECK(flatten_size(config) == 4608);

    // grid of random valid configs against the ceil-sum formula
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        ModelConfig c;
        c.m = 10 + rng.index(70);
        c.k = 2 + rng.index(24);
        c.feature_maps = 1 + rng.index(32);
        c.pool_window = 1 + rng.index(7);
        c.conv_depth = 1 + rng.index(4);
        c.dense_depth = 1 + rng.index(3);
        c.filter_widths.clear();
        for (std::size_t h = 2; h <= 5; ++h)
            if (rng.bernoulli(0.5) && c.conv_depth * (h - 1) < c.m) c.filter_widths.push_back(h);
        if (c.filter_widths.empty()) c.filter_widths = {2};
        c.validate();

        std::size_t expected = 0;
        for (const auto h : c.filter_widths) {
            const std::size_t conv_len = c.m - c.conv_depth * (h - 1);
            expected += c.feature_maps * ((conv_len + c.pool_window - 1) / c.pool_window);
        }
        CHECK(flatten_size(c) == expected);
    }
}

TEST_CASE("forward produces m probabilities strictly inside (0,1)") {
    auto config = small_config();
    config.conv_depth = 2;
    config.dense_depth = 2;
    auto model = toy_model(config);
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const auto enc = toy_example(model, s);
        const auto cache = forward(model, enc, Mode::Infer);
        REQUIRE(cache.probs.size() == config.m);
        for (const auto p : cache.probs) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
        }
    }
}

TEST_CASE("infer mode is deterministic; dropout 0 makes train equal infer") {
    auto model = toy_model(small_config());
    const auto enc = toy_example(model, 3);
    const auto a = forward(model, enc, Mode::Infer);
    const auto b = forward(model, enc, Mode::Infer);
    CHECK(a.probs == b.probs);

    const auto c = forward(model, enc, Mode::Train);  // dropout == 0
    CHECK(a.probs == c.probs);
}

TEST_CASE("dropout zeroes roughly the configured fraction") {
    auto config = small_config();
    config.dropout = 0.2;
    config.dense_hidden = 10;
    auto model = toy_model(config);
    const auto enc = toy_example(model, 9);

    Rng rng(777);
    std::size_t zeroed = 0, total = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto cache = forward(model, enc, Mode::Train, &rng);
        for (const auto& layer_scale : cache.dropout_scale)
            for (const auto s : layer_scale) {
                zeroed += s == 0.0;
                ++total;
            }
    }
    REQUIRE(total == 10000);
    const double rate = static_cast<double>(zeroed) / static_cast<double>(total);
    CHECK(rate > 0.18);
    CHECK(rate < 0.22);

    // survivors are scaled by 1/(1-p)
    const auto cache = forward(model, enc, Mode::Train, &rng);
    for (const auto s : cache.dropout_scale[0]) CHECK((s == 0.0 || s == doctest::Approx(1.25)));
}

TEST_CASE("output length is m for assorted architectures") {
    for (const std::size_t depth : {1u, 2u}) {
        for (const std::size_t dense : {1u, 2u, 3u}) {
            auto config = small_config();
            config.conv_depth = depth;
            config.dense_depth = dense;
            auto model = toy_model(config);
            const auto enc = toy_example(model, depth * 10 + dense);
            CHECK(forward(model, enc, Mode::Infer).probs.size() == config.m);
        }
    }
}

TEST_CASE("predict thresholding") {
    CHECK(predict({0.9, 0.2, 0.51}, 0.5) == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(predict({0.5, 0.5}, 0.5) == std::vector<std::uint8_t>{1, 1});  // >= is inclusive
    // monotonic: raising the threshold never turns a 0 into a 1
    const std::vector<double> probs = {0.1, 0.4, 0.5, 0.6, 0.9};
    auto prev = predict(probs, 0.05);
    for (double t = 0.1; t < 1.0; t += 0.05) {
        const auto cur = predict(probs, t);
        for (std::size_t i = 0; i < probs.size(); ++i) CHECK(cur[i] <= prev[i]);
        prev = cur;
    }
}

TEST_CASE("init_model is deterministic in the seed and orders branches") {
    auto config = small_config();
    config.filter_widths = {3, 2};  // intentionally unsorted
    auto a = toy_model(config);
    auto b = toy_model(config);
    CHECK(a.branches.size() == 2);
    CHECK(a.branches[0].width == 2);
    CHECK(a.branches[1].width == 3);
    CHECK(a.config.filter_widths == std::vector<std::size_t>{2, 3});
    for (std::size_t i = 0; i < a.branches.size(); ++i)
        for (std::size_t l = 0; l < a.branches[i].layers.size(); ++l)
            CHECK(a.branches[i].layers[l].weights == b.branches[i].layers[l].weights);
}

TEST_CASE("backward gives zero gradient for the PAD embedding row") {
    auto model = toy_model(small_config());
    auto enc = toy_example(model, 4);
    enc.true_length = 3;  // force real padding
    for (std::size_t i = 3; i < model.config.m; ++i) {
        enc.indices[i] = kPadIndex;
        enc.labels[i] = 0;
    }
    const auto cache = forward(model, enc, Mode::Train);
    const auto grads = backward(model, cache, enc.labels);
    REQUIRE(grads.embedding.size() == model.embedding.data.size());
    for (std::size_t j = 0; j < model.config.k; ++j) CHECK(grads.embedding[j] == 0.0);
}
