#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "metades/des.hpp"
#include "metades/naive_bayes.hpp"
#include "metades/rng.hpp"

using namespace metades;
using metades::testing::random_pool;

namespace {

constexpr std::array<CombinationMode, 3> kAllModes{
    CombinationMode::selection, CombinationMode::weighting, CombinationMode::hybrid};

/// Zero-weight classifier whose bias row makes it vote `label` everywhere.
LinearClassifier constant_member(int label, int n_classes, std::size_t d = 2) {
    std::vector<double> biases(static_cast<std::size_t>(n_classes), 0.0);
    biases[static_cast<std::size_t>(label)] = 1.0;
    return LinearClassifier(std::vector<double>(n_classes * d, 0.0), std::move(biases));
}

Pool constant_pool(const std::vector<int>& labels, int n_classes) {
    Pool pool;
    for (const int label : labels) pool.members.push_back(constant_member(label, n_classes));
    pool.trained_on.resize(labels.size());
    return pool;
}

/// Deterministic estimator used to probe wiring: logistic of the flattened sum.
struct SumEstimator final : CompetenceEstimator {
    std::size_t n;
    explicit SumEstimator(std::size_t n_inputs) : n(n_inputs) {}
    double competence(std::span<const double> v) const override {
        double s = 0.0;
        for (const double x : v) s += x;
        return 1.0 / (1.0 + std::exp(-s));
    }
    std::size_t n_inputs() const override { return n; }
};

struct Harness {
    Partition part;
    Pool pool;
    NaiveBayesModel model;
    DselCache cache;
    DesConfig config;
};

/// Small but real pipeline: banana data, bagged perceptrons, trained
/// meta-classifier.
Harness make_harness() {
    const Dataset data = generate_banana(240, 77);
    Partition part = make_partition(data, 5);
    Pool pool = bagging_pool(part.train, 15, {}, 11);
    MetaTrainingConfig meta_config;
    meta_config.use_all_on_empty_selection = true;
    const MetaDataset meta = build_meta_dataset(pool, part.meta_train, meta_config);
    auto trained = train_meta(meta, 0.75, 3);
    DselCache cache = build_dsel_cache(pool, part.dsel);
    return {std::move(part), std::move(pool), std::move(trained.model), std::move(cache), {}};
}

}  // namespace

TEST_CASE("combination modes round-trip through their names") {
    CHECK(to_string(CombinationMode::selection) == "S");
    CHECK(to_string(CombinationMode::weighting) == "W");
    CHECK(to_string(CombinationMode::hybrid) == "H");
    for (const auto mode : kAllModes)
        CHECK(combination_mode_from_string(to_string(mode)) == mode);
    CHECK(combination_mode_from_string("selection") == CombinationMode::selection);
    CHECK(combination_mode_from_string("w") == CombinationMode::weighting);
    CHECK(combination_mode_from_string("hybrid") == CombinationMode::hybrid);
    CHECK_THROWS_AS(combination_mode_from_string("X"), std::invalid_argument);
    CHECK_THROWS_AS(combination_mode_from_string(""), std::invalid_argument);
}

TEST_CASE("des config bounds are enforced") {
    CHECK_NOTHROW(validate(DesConfig{}));
    DesConfig config;
    config.k = 0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
    config = {};
    config.k_p = 0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
    config = {};
    config.h_c = 1.0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
    config = {};
    config.h_c = 0.0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
    config = {};
    config.upsilon = 0.0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
    config = {};
    config.upsilon = 1.0;
    CHECK_THROWS_AS(validate(config), std::invalid_argument);
}

TEST_CASE("majority vote counts pluralities and breaks ties by support") {
    CHECK(majority_vote(std::vector<int>{1, 1, 0}, 2) == 1);
    CHECK(majority_vote(std::vector<int>{0, 0, 1, 2}, 3) == 0);

    const std::vector<int> tied{0, 1};
    CHECK(majority_vote(tied, 2) == 0);  // no supports: lowest index
    CHECK(majority_vote(tied, 2, std::vector<double>{0.8, 0.6}) == 0);
    CHECK(majority_vote(tied, 2, std::vector<double>{0.6, 0.8}) == 1);
    CHECK(majority_vote(tied, 2, std::vector<double>{0.5, 0.5}) == 0);

    // Three-way count {1, 2, 2}: classes 1 and 2 tie, supports pick 2.
    const std::vector<int> three{2, 2, 1, 1, 0};
    CHECK(majority_vote(three, 3) == 1);
    CHECK(majority_vote(three, 3, std::vector<double>{0.0, 0.1, 0.9}) == 2);

    CHECK_THROWS_AS(majority_vote(std::vector<int>{}, 2), std::invalid_argument);
    CHECK_THROWS_AS(majority_vote(std::vector<int>{2}, 2), std::invalid_argument);
    CHECK_THROWS_AS(majority_vote(std::vector<int>{-1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(majority_vote(tied, 2, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("weighted vote sums competences per class") {
    CHECK(weighted_majority_vote(std::vector<int>{0, 1, 1}, std::vector<double>{0.9, 0.3, 0.3},
                                 2) == 0);
    CHECK(weighted_majority_vote(std::vector<int>{1, 0, 0}, std::vector<double>{0.9, 0.1, 0.1},
                                 2) == 1);
    CHECK(weighted_majority_vote(std::vector<int>{0, 1}, std::vector<double>{0.5, 0.5}, 2,
                                 std::vector<double>{0.2, 0.9}) == 1);

    CHECK_THROWS_AS(weighted_majority_vote(std::vector<int>{}, std::vector<double>{}, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        weighted_majority_vote(std::vector<int>{0, 1}, std::vector<double>{0.5}, 2),
        std::invalid_argument);
    CHECK_THROWS_AS(
        weighted_majority_vote(std::vector<int>{0}, std::vector<double>{-0.1}, 2),
        std::invalid_argument);
    CHECK_THROWS_AS(
        weighted_majority_vote(std::vector<int>{0, 1}, std::vector<double>{0.5, 0.5}, 2,
                               std::vector<double>{1.0, 2.0, 3.0}),
        std::invalid_argument);
}

TEST_CASE("equal weights reduce the weighted vote to the plain one") {
    Rng rng(71);
    const std::array<double, 4> scales{1e-3, 0.25, 1.0, 7.5};
    for (int trial = 0; trial < 200; ++trial) {
        const int l = 2 + static_cast<int>(rng.next_below(3));
        const std::size_t n = 1 + rng.next_below(12);
        std::vector<int> votes(n);
        for (int& v : votes) v = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(l)));
        std::vector<double> supports(static_cast<std::size_t>(l));
        for (double& s : supports) s = rng.next_double();
        const double c = scales[trial % scales.size()];
        CHECK(weighted_majority_vote(votes, std::vector<double>(n, c), l, supports) ==
              majority_vote(votes, l, supports));
    }
}

TEST_CASE("combine routes votes per mode") {
    const Pool pool = constant_pool({1, 1, 0}, 2);
    const std::vector<double> x{0.0, 0.0};
    CompetenceProfile competences;
    competences.deltas = {0.9, 0.8, 0.1};
    DesConfig config;

    config.mode = CombinationMode::selection;
    auto s = combine(pool, x, competences, config);
    CHECK(s.label == 1);
    CHECK(s.voter_ids == std::vector<std::size_t>{0, 1});
    CHECK_FALSE(s.fallback_used);
    CHECK(s.deltas == competences.deltas);

    config.mode = CombinationMode::weighting;
    auto w = combine(pool, x, competences, config);
    CHECK(w.label == 1);
    CHECK(w.voter_ids == std::vector<std::size_t>{0, 1, 2});
    CHECK_FALSE(w.fallback_used);

    config.mode = CombinationMode::hybrid;
    auto h = combine(pool, x, competences, config);
    CHECK(h.label == 1);
    CHECK(h.voter_ids == std::vector<std::size_t>{0, 1});
    CHECK_FALSE(h.fallback_used);
}

TEST_CASE("competence weighting can overturn the raw majority") {
    const Pool pool = constant_pool({1, 0, 0}, 2);
    const std::vector<double> x{0.0, 0.0};
    CHECK(pool_majority_vote(pool, x) == 0);

    CompetenceProfile competences;
    competences.deltas = {0.9, 0.1, 0.1};
    DesConfig config;
    config.mode = CombinationMode::weighting;
    CHECK(combine(pool, x, competences, config).label == 1);
    config.mode = CombinationMode::selection;  // only the competent member votes
    CHECK(combine(pool, x, competences, config).label == 1);
}

TEST_CASE("upsilon is a strict threshold and the fallback picks the best member") {
    const Pool pool = constant_pool({1, 0, 1}, 2);
    const std::vector<double> x{0.0, 0.0};
    DesConfig config;
    config.mode = CombinationMode::selection;

    CompetenceProfile level;
    level.deltas = {0.5, 0.5, 0.5};  // nobody clears upsilon = 0.5
    auto fell = combine(pool, x, level, config);
    CHECK(fell.fallback_used);
    CHECK(fell.voter_ids == std::vector<std::size_t>{0});
    CHECK(fell.label == 1);

    CompetenceProfile tied;
    tied.deltas = {0.2, 0.4, 0.4};  // argmax tie goes to the lower index
    auto best = combine(pool, x, tied, config);
    CHECK(best.fallback_used);
    CHECK(best.voter_ids == std::vector<std::size_t>{1});
    CHECK(best.label == 0);

    config.mode = CombinationMode::weighting;  // weighting never falls back
    auto weighted = combine(pool, x, tied, config);
    CHECK_FALSE(weighted.fallback_used);
    CHECK(weighted.label == 1);  // 0.2 + 0.4 for class 1 vs 0.4 for class 0

    CompetenceProfile barely;
    barely.deltas = {0.5, 0.5000001, 0.5};
    config.mode = CombinationMode::hybrid;
    auto one = combine(pool, x, barely, config);
    CHECK_FALSE(one.fallback_used);
    CHECK(one.voter_ids == std::vector<std::size_t>{1});
    CHECK(one.label == 0);
}

TEST_CASE("combine rejects a mismatched competence profile") {
    const Pool pool = constant_pool({1, 0, 1}, 2);
    CompetenceProfile competences;
    competences.deltas = {0.9, 0.8};
    CHECK_THROWS_AS(combine(pool, std::vector<double>{0.0, 0.0}, competences, DesConfig{}),
                    std::invalid_argument);
}

TEST_CASE("degenerate competences collapse the modes onto simpler rules") {
    Rng rng(72);
    DesConfig config;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + rng.next_below(9);
        const int l = 2 + static_cast<int>(rng.next_below(2));
        const Pool pool = random_pool(rng, m, 3, l);
        std::vector<double> x(3);
        for (double& v : x) v = 2.0 * rng.next_double() - 1.0;

        // All deltas equal: weighting must match the whole-pool majority.
        CompetenceProfile flat;
        flat.deltas.assign(m, 0.1 + 0.8 * rng.next_double());
        config.mode = CombinationMode::weighting;
        CHECK(combine(pool, x, flat, config).label == pool_majority_vote(pool, x));

        // Equal deltas on the selected set: hybrid must match selection.
        CompetenceProfile split;
        split.deltas.assign(m, 0.1);
        const std::size_t n_selected = 1 + rng.next_below(m);
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (std::size_t i = 0; i < n_selected; ++i) split.deltas[order[i]] = 0.8;
        config.mode = CombinationMode::selection;
        const auto s = combine(pool, x, split, config);
        config.mode = CombinationMode::hybrid;
        const auto h = combine(pool, x, split, config);
        CHECK(s.label == h.label);
        CHECK(s.voter_ids == h.voter_ids);
    }
}

TEST_CASE("estimate_competences wires the meta pipeline together") {
    Rng rng(73);
    const Dataset dsel = metades::testing::random_dataset(rng, 40, 2, 2);
    const Pool pool = random_pool(rng, 6, 2, 2);
    const DselCache cache = build_dsel_cache(pool, dsel);
    DesConfig config;
    config.k = 5;
    config.k_p = 3;
    const SumEstimator estimator(2 * config.k + config.k_p + 2);

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x{rng.next_double(), rng.next_double()};
        const auto got = estimate_competences(pool, estimator, x, dsel, cache, config);
        REQUIRE(got.deltas.size() == pool.size());

        const auto region = knn_region(x, dsel, config.k);
        const auto profile = output_profile(pool, x);
        const auto hood =
            profile_neighbors(profile, cache.profiles, cache.labels, config.k_p);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            const MetaVector v =
                extract_meta_vector(pool.members[i], i, x, dsel, region, hood);
            CHECK(got.deltas[i] == estimator.competence(v.flatten()));
        }
    }
}

TEST_CASE("estimate_competences validates its inputs") {
    Rng rng(74);
    const Dataset dsel = metades::testing::random_dataset(rng, 30, 2, 2);
    const Pool pool = random_pool(rng, 4, 2, 2);
    const DselCache cache = build_dsel_cache(pool, dsel);
    const std::vector<double> x{0.5, 0.5};

    const SumEstimator wrong_width(5);
    CHECK_THROWS_AS(estimate_competences(pool, wrong_width, x, dsel, cache, DesConfig{}),
                    std::invalid_argument);

    DselCache truncated = cache;
    truncated.profiles.pop_back();
    const SumEstimator estimator(2 * 7 + 5 + 2);
    CHECK_THROWS_AS(estimate_competences(pool, estimator, x, dsel, truncated, DesConfig{}),
                    std::invalid_argument);
}

TEST_CASE("identical members always get identical competences") {
    Rng rng(75);
    const Dataset dsel = metades::testing::random_dataset(rng, 30, 2, 2);
    Pool pool = random_pool(rng, 3, 2, 2);
    pool.members.push_back(pool.members[0]);
    pool.trained_on.push_back({});
    const DselCache cache = build_dsel_cache(pool, dsel);
    const SumEstimator estimator(2 * 7 + 5 + 2);

    for (int trial = 0; trial < 25; ++trial) {
        const std::vector<double> x{rng.next_double(), rng.next_double()};
        const auto deltas =
            estimate_competences(pool, estimator, x, dsel, cache, DesConfig{}).deltas;
        CHECK(deltas[0] == deltas[3]);
    }
}

TEST_CASE("the full pipeline classifies held-out banana data") {
    const Harness h = make_harness();

    const auto results = evaluate_modes(h.pool, h.model, h.part.test, h.part.dsel, h.cache,
                                        h.config, kAllModes);
    REQUIRE(results.size() == 3);
    for (const auto& r : results) {
        CHECK(r.predicted.size() == h.part.test.n_rows());
        CHECK(r.diagnostics.size() == h.part.test.n_rows());
        std::size_t correct = 0;
        for (std::size_t i = 0; i < r.predicted.size(); ++i) {
            CHECK(r.predicted[i] >= 0);
            CHECK(r.predicted[i] < 2);
            if (r.predicted[i] == h.part.test.label(i)) ++correct;
        }
        CHECK(r.accuracy ==
              static_cast<double>(correct) / static_cast<double>(r.predicted.size()));
        for (const auto& d : r.diagnostics) {
            CHECK(d.deltas.size() == h.pool.size());
            CHECK_FALSE(d.voter_ids.empty());
        }
        CHECK(r.accuracy > 0.5);  // well above chance on this easy problem
    }

    // Weighting always includes the whole pool.
    for (const auto& d : results[1].diagnostics)
        CHECK(d.voter_ids.size() == h.pool.size());

    // Each mode result equals a standalone evaluation of that mode.
    for (std::size_t m = 0; m < kAllModes.size(); ++m) {
        DesConfig config = h.config;
        config.mode = kAllModes[m];
        const auto solo = evaluate(h.pool, h.model, h.part.test, h.part.dsel, h.cache, config);
        CHECK(solo.predicted == results[m].predicted);
        CHECK(solo.accuracy == results[m].accuracy);
        CHECK(solo.diagnostics.empty());
    }
}

TEST_CASE("classify_query matches the batch evaluation") {
    const Harness h = make_harness();
    DesConfig config = h.config;
    config.mode = CombinationMode::hybrid;
    const auto batch = evaluate(h.pool, h.model, h.part.test, h.part.dsel, h.cache, config,
                                Exec::serial, true);
    for (std::size_t row = 0; row < 10; ++row) {
        const auto x = h.part.test.row(row);
        const auto one = classify_query(h.pool, h.model, x, h.part.dsel, h.cache, config);
        CHECK(one.label == batch.predicted[row]);
        CHECK(one.voter_ids == batch.diagnostics[row].voter_ids);
        CHECK(one.deltas == batch.diagnostics[row].deltas);
    }
}

TEST_CASE("serial and parallel evaluation agree bit for bit") {
    const Harness h = make_harness();
    const auto serial = evaluate_modes(h.pool, h.model, h.part.test, h.part.dsel, h.cache,
                                       h.config, kAllModes, Exec::serial);
    const auto parallel = evaluate_modes(h.pool, h.model, h.part.test, h.part.dsel, h.cache,
                                         h.config, kAllModes, Exec::parallel);
    for (std::size_t m = 0; m < kAllModes.size(); ++m) {
        CHECK(serial[m].predicted == parallel[m].predicted);
        CHECK(serial[m].accuracy == parallel[m].accuracy);
        for (std::size_t row = 0; row < serial[m].diagnostics.size(); ++row)
            CHECK(serial[m].diagnostics[row].deltas == parallel[m].diagnostics[row].deltas);
    }
}

TEST_CASE("evaluate_modes validates its inputs") {
    const Harness h = make_harness();
    CHECK_THROWS_AS(evaluate_modes(h.pool, h.model, h.part.test, h.part.dsel, h.cache, h.config,
                                   std::span<const CombinationMode>{}),
                    std::invalid_argument);

    const Dataset narrow({0.0, 1.0}, {0, 1}, 2);
    CHECK_THROWS_AS(evaluate_modes(h.pool, h.model, narrow, h.part.dsel, h.cache, h.config,
                                   kAllModes),
                    std::invalid_argument);
}

TEST_CASE("a single-member pool works in every mode") {
    const Pool pool = constant_pool({1}, 2);
    const std::vector<double> x{0.0, 0.0};
    CHECK(pool_majority_vote(pool, x) == 1);

    DesConfig config;
    CompetenceProfile low;
    low.deltas = {0.1};
    config.mode = CombinationMode::selection;
    auto s = combine(pool, x, low, config);
    CHECK(s.fallback_used);
    CHECK(s.label == 1);
    config.mode = CombinationMode::weighting;
    auto w = combine(pool, x, low, config);
    CHECK_FALSE(w.fallback_used);
    CHECK(w.label == 1);
}
