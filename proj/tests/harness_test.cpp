#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "geotag/harness.hpp"
#include "support/synth_fixtures.hpp"

using namespace geotag;

namespace {

ModelConfig cv_config() {
    ModelConfig config;
    config.m = 16;
    config.k = 8;
    config.filter_widths = {2, 3};
    config.feature_maps = 8;
    config.pool_window = 5;
    config.conv_depth = 1;
    config.dense_depth = 1;
    config.dense_hidden = 16;
    config.dropout = 0.0;
    config.epochs = 12;
    config.batch_size = 16;
    config.learning_rate = 0.005;
    config.seed = 77;
    return config;
}

}  // namespace

TEST_CASE("kfold_split sizes and determinism") {
    SUBCASE("n == k gives singleton folds") {
        const auto plan = kfold_split(10, 10, 1);
        std::map<std::size_t, std::size_t> sizes;
        for (const auto f : plan.assignments) ++sizes[f];
        CHECK(sizes.size() == 10);
        for (const auto& [fold, size] : sizes) CHECK(size == 1);
    }
    SUBCASE("103 into 10: three folds of 11, seven of 10") {
        const auto plan = kfold_split(103, 10, 5);
        std::map<std::size_t, std::size_t> sizes;
        for (const auto f : plan.assignments) ++sizes[f];
        std::size_t elevens = 0, tens = 0;
        for (const auto& [fold, size] : sizes) {
            if (size == 11) ++elevens;
            else if (size == 10) ++tens;
        }
        CHECK(elevens == 3);
        CHECK(tens == 7);
    }
    SUBCASE("deterministic in (n, k, seed)") {
        CHECK(kfold_split(50, 5, 9).assignments == kfold_split(50, 5, 9).assignments);
        CHECK(kfold_split(50, 5, 9).assignments != kfold_split(50, 5, 10).assignments);
    }
    SUBCASE("n < k is an error") {
        CHECK_THROWS_AS(static_cast<void>(kfold_split(3, 10, 1)), harness_error);
    }
    SUBCASE("every example lands in exactly one fold") {
        const auto plan = kfold_split(64, 7, 3);
        CHECK(plan.assignments.size() == 64);
        std::size_t covered = 0;
        for (std::size_t f = 0; f < 7; ++f) covered += plan.fold_indices(f).size();
        CHECK(covered == 64);
        for (std::size_t f = 0; f < 7; ++f) {
            const auto held = plan.fold_indices(f);
            const auto rest = plan.train_indices(f);
            CHECK(held.size() + rest.size() == 64);
            std::set<std::size_t> overlap;
            std::set_intersection(held.begin(), held.end(), rest.begin(), rest.end(),
                                  std::inserter(overlap, overlap.end()));
            CHECK(overlap.empty());
        }
    }
}

TEST_CASE("cross_validate runs a small memorizable corpus end to end") {
    const auto corpus =
        synth_generate(test_support::small_gazetteer(), test_support::small_templates(), 60, 21);
    CrossValidationOptions options;
    options.folds = 2;
    const auto result = cross_validate(corpus, cv_config(), options);

    REQUIRE(result.folds.size() == 2);
    std::size_t scored = 0;
    for (const auto& fr : result.folds) scored += fr.metrics.count;
    CHECK(scored == corpus.examples.size());  // each example validated exactly once

    CHECK(result.mean.precision ==
          doctest::Approx((result.folds[0].metrics.precision +
                           result.folds[1].metrics.precision) / 2.0));
    CHECK(result.mean.f1 ==
          doctest::Approx((result.folds[0].metrics.f1 + result.folds[1].metrics.f1) / 2.0));
    CHECK(result.mean.hamming_loss ==
          doctest::Approx((result.folds[0].metrics.hamming_loss +
                           result.folds[1].metrics.hamming_loss) / 2.0));
    CHECK(result.mean.label_length == cv_config().m);
}

TEST_CASE("cross_validate does not leak held-out tokens into the fold vocabulary") {
    // gazetteer entries that appear in exactly one example each
    Gazetteer gaz;
    for (int i = 0; i < 12; ++i) gaz.entries.push_back({"uniqueplace" + std::to_string(i)});
    const auto corpus = synth_generate(gaz, {"quake in {LOC}"}, 12, 2);

    auto config = cv_config();
    config.epochs = 1;
    const auto plan = kfold_split(corpus.examples.size(), 3, config.seed);

    // rebuild what each fold's training vocabulary must look like
    for (std::size_t fold = 0; fold < 3; ++fold) {
        Corpus train_corpus;
        for (const auto i : plan.train_indices(fold))
            train_corpus.examples.push_back(corpus.examples[i]);
        const auto vocab = build_vocab(train_corpus);
        for (const auto i : plan.fold_indices(fold)) {
            const auto& unique_token = corpus.examples[i].tokens.back();
            CHECK_FALSE(vocab.contains(unique_token));
        }
    }

    // the global-vocabulary protocol, by contrast, sees every token
    const auto global = build_vocab(corpus);
    for (const auto& ex : corpus.examples) CHECK(global.contains(ex.tokens.back()));
}

TEST_CASE("cross_validate is deterministic") {
    const auto corpus =
        synth_generate(test_support::small_gazetteer(), test_support::small_templates(), 40, 4);
    auto config = cv_config();
    config.epochs = 2;
    CrossValidationOptions options;
    options.folds = 2;
    const auto a = cross_validate(corpus, config, options);
    const auto b = cross_validate(corpus, config, options);
    CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("sweep spec parsing") {
    ModelConfig base = cv_config();
    const auto variants = parse_sweep_spec(
        "# single widths\n"
        "filter_widths=2\n"
        "filter_widths=2,3 ; conv_depth=2\n"
        "dropout=0\n",
        base);
    REQUIRE(variants.size() == 3);
    CHECK(variants[0].config.filter_widths == std::vector<std::size_t>{2});
    CHECK(variants[0].config.conv_depth == base.conv_depth);
    CHECK(variants[1].config.filter_widths == std::vector<std::size_t>{2, 3});
    CHECK(variants[1].config.conv_depth == 2);
    CHECK(variants[2].config.dropout == 0.0);
    CHECK(variants[1].label == "filter_widths=2,3;conv_depth=2");

    CHECK_THROWS_AS(static_cast<void>(parse_sweep_spec("", base)), harness_error);
    CHECK_THROWS_AS(static_cast<void>(parse_sweep_spec("nonsense\n", base)), harness_error);
    CHECK_THROWS_AS(static_cast<void>(parse_sweep_spec("bogus_key=3\n", base)), harness_error);
}

TEST_CASE("paper-shaped filter sweep spec has the 15 width combinations") {
    ModelConfig base = cv_config();
    std::string spec;
    const std::vector<std::string> combos = {
        "2", "3", "4", "5", "2,3", "2,4", "2,5", "3,4", "3,5", "4,5",
        "2,3,4", "2,3,5", "2,4,5", "3,4,5", "2,3,4,5"};
    for (const auto& c : combos) spec += "filter_widths=" + c + "\n";
    const auto variants = parse_sweep_spec(spec, base);
    CHECK(variants.size() == 15);
    std::set<std::vector<std::size_t>> seen;
    for (const auto& v : variants) seen.insert(v.config.filter_widths);
    CHECK(seen.size() == 15);
}

TEST_CASE("sweep of one variant matches cross_validate and marks it best") {
    const auto corpus =
        synth_generate(test_support::small_gazetteer(), test_support::small_templates(), 40, 8);
    auto config = cv_config();
    config.epochs = 2;
    CrossValidationOptions options;
    options.folds = 2;

    const auto cv = cross_validate(corpus, config, options);
    const auto result = sweep(corpus, {{"base", config}}, options);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].ok);
    CHECK(result.rows[0].best);
    CHECK(result.rows[0].mean.f1 == doctest::Approx(cv.mean.f1));
    CHECK(metrics_csv_row(result.rows[0].mean) == metrics_csv_row(cv.mean));
}

TEST_CASE("sweep records per-variant failures and continues") {
    const auto corpus =
        synth_generate(test_support::small_gazetteer(), test_support::small_templates(), 40, 8);
    auto good = cv_config();
    good.epochs = 1;
    auto bad = good;
    bad.m = 4;
    bad.filter_widths = {5};  // invalid: width exceeds the sequence length
    CrossValidationOptions options;
    options.folds = 2;

    const auto result = sweep(corpus, {{"good", good}, {"bad", bad}}, options);
    REQUIRE(result.rows.size() == 2);
    CHECK(result.rows[0].ok);
    CHECK(result.rows[0].best);
    CHECK_FALSE(result.rows[1].ok);
    CHECK_FALSE(result.rows[1].error.empty());

    const auto table = result.to_table();
    CHECK(table.find("good") != std::string::npos);
    CHECK(table.find("FAILED") != std::string::npos);
}

TEST_CASE("sweep output is byte reproducible") {
    const auto corpus =
        synth_generate(test_support::small_gazetteer(), test_support::small_templates(), 40, 8);
    auto config = cv_config();
    config.epochs = 2;
    CrossValidationOptions options;
    options.folds = 2;
    const std::vector<SweepVariant> variants = {{"a", config}, {"b", config}};
    CHECK(sweep(corpus, variants, options).to_table() == sweep(corpus, variants, options).to_table());
    CHECK(sweep(corpus, variants, options).to_csv() == sweep(corpus, variants, options).to_csv());
}
