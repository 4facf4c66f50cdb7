#include "metades/des.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

namespace metades {

std::string to_string(CombinationMode mode) {
    switch (mode) {
        case CombinationMode::selection: return "S";
        case CombinationMode::weighting: return "W";
        case CombinationMode::hybrid: return "H";
    }
    throw std::invalid_argument("to_string: unknown combination mode");
}

CombinationMode combination_mode_from_string(const std::string& name) {
    if (name == "S" || name == "s" || name == "selection") return CombinationMode::selection;
    if (name == "W" || name == "w" || name == "weighting") return CombinationMode::weighting;
    if (name == "H" || name == "h" || name == "hybrid") return CombinationMode::hybrid;
    throw std::invalid_argument("combination_mode_from_string: unknown mode \"" + name + "\"");
}

void validate(const DesConfig& config) {
    if (config.k == 0 || config.k_p == 0)
        throw std::invalid_argument("DesConfig: k and k_p must be positive");
    if (!(config.h_c > 0.0 && config.h_c < 1.0))
        throw std::invalid_argument("DesConfig: h_c must be in (0, 1)");
    if (!(config.upsilon > 0.0 && config.upsilon < 1.0))
        throw std::invalid_argument("DesConfig: upsilon must be in (0, 1)");
}

DselCache build_dsel_cache(const Pool& pool, const Dataset& dsel, Exec exec) {
    DselCache cache;
    cache.profiles = output_profiles(pool, dsel, exec);
    cache.labels.resize(dsel.n_rows());
    for (std::size_t i = 0; i < dsel.n_rows(); ++i) cache.labels[i] = dsel.label(i);
    return cache;
}

CompetenceProfile estimate_competences(const Pool& pool, const CompetenceEstimator& estimator,
                                       std::span<const double> x, const Dataset& dsel,
                                       const DselCache& cache, const DesConfig& config) {
    validate(config);
    if (cache.profiles.size() != dsel.n_rows())
        throw std::invalid_argument("estimate_competences: cache does not match dsel");
    const std::size_t expected = 2 * config.k + config.k_p + 2;
    if (estimator.n_inputs() != expected)
        throw std::invalid_argument("estimate_competences: estimator input length mismatch");

    const auto region = knn_region(x, dsel, config.k);
    const auto query_profile = output_profile(pool, x);
    const auto hood = profile_neighbors(query_profile, cache.profiles, cache.labels, config.k_p);

    CompetenceProfile competences;
    competences.deltas.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const MetaVector v = extract_meta_vector(pool.members[i], i, x, dsel, region, hood,
                                                 config.features);
        competences.deltas.push_back(estimator.competence(v.flatten()));
    }
    return competences;
}

namespace {

/// Argmax with the shared tie policy: score tie → highest tiebreak support →
/// lowest class index.
int pick_class(std::span<const double> scores, std::span<const double> tiebreak_supports) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
        if (scores[c] > scores[best]) best = c;
    if (tiebreak_supports.empty()) return static_cast<int>(best);

    std::size_t winner = scores.size();
    for (std::size_t c = 0; c < scores.size(); ++c) {
        if (scores[c] != scores[best]) continue;
        if (winner == scores.size() || tiebreak_supports[c] > tiebreak_supports[winner])
            winner = c;
    }
    return static_cast<int>(winner);
}

std::vector<double> mean_voter_supports(const Pool& pool, std::span<const double> x,
                                        std::span<const std::size_t> voter_ids) {
    std::vector<double> mean(static_cast<std::size_t>(pool.n_classes()), 0.0);
    for (const std::size_t id : voter_ids) {
        const auto s = pool.members[id].supports(x);
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += s[c];
    }
    for (double& v : mean) v /= static_cast<double>(voter_ids.size());
    return mean;
}

}  // namespace

int majority_vote(std::span<const int> votes, int n_classes,
                  std::span<const double> tiebreak_supports) {
    if (votes.empty()) throw std::invalid_argument("majority_vote: no votes");
    if (!tiebreak_supports.empty() &&
        tiebreak_supports.size() != static_cast<std::size_t>(n_classes))
        throw std::invalid_argument("majority_vote: support vector length mismatch");
    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    for (const int v : votes) {
        if (v < 0 || v >= n_classes) throw std::invalid_argument("majority_vote: vote out of range");
        counts[static_cast<std::size_t>(v)] += 1.0;
    }
    return pick_class(counts, tiebreak_supports);
}

int weighted_majority_vote(std::span<const int> votes, std::span<const double> weights,
                           int n_classes, std::span<const double> tiebreak_supports) {
    if (votes.empty()) throw std::invalid_argument("weighted_majority_vote: no votes");
    if (votes.size() != weights.size())
        throw std::invalid_argument("weighted_majority_vote: weight count mismatch");
    if (!tiebreak_supports.empty() &&
        tiebreak_supports.size() != static_cast<std::size_t>(n_classes))
        throw std::invalid_argument("weighted_majority_vote: support vector length mismatch");
    std::vector<double> sums(static_cast<std::size_t>(n_classes), 0.0);
    for (std::size_t i = 0; i < votes.size(); ++i) {
        const int v = votes[i];
        if (v < 0 || v >= n_classes)
            throw std::invalid_argument("weighted_majority_vote: vote out of range");
        if (weights[i] < 0.0)
            throw std::invalid_argument("weighted_majority_vote: negative weight");
        sums[static_cast<std::size_t>(v)] += weights[i];
    }
    return pick_class(sums, tiebreak_supports);
}

QueryDecision combine(const Pool& pool, std::span<const double> x,
                      const CompetenceProfile& competences, const DesConfig& config) {
    validate(config);
    if (competences.deltas.size() != pool.size())
        throw std::invalid_argument("combine: competence profile length mismatch");

    QueryDecision decision;
    decision.deltas = competences.deltas;

    if (config.mode == CombinationMode::weighting) {
        decision.voter_ids.resize(pool.size());
        std::iota(decision.voter_ids.begin(), decision.voter_ids.end(), std::size_t{0});
    } else {
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (competences.deltas[i] > config.upsilon) decision.voter_ids.push_back(i);
        if (decision.voter_ids.empty()) {
            // No member cleared upsilon: the single most competent one decides.
            std::size_t best = 0;
            for (std::size_t i = 1; i < pool.size(); ++i)
                if (competences.deltas[i] > competences.deltas[best]) best = i;
            decision.fallback_used = true;
            decision.voter_ids.push_back(best);
            decision.label = pool.members[best].classify(x);
            return decision;
        }
    }

    std::vector<int> votes;
    votes.reserve(decision.voter_ids.size());
    for (const std::size_t id : decision.voter_ids)
        votes.push_back(pool.members[id].classify(x));
    const auto supports = mean_voter_supports(pool, x, decision.voter_ids);

    if (config.mode == CombinationMode::selection) {
        decision.label = majority_vote(votes, pool.n_classes(), supports);
    } else {
        std::vector<double> weights;
        weights.reserve(decision.voter_ids.size());
        for (const std::size_t id : decision.voter_ids)
            weights.push_back(competences.deltas[id]);
        decision.label = weighted_majority_vote(votes, weights, pool.n_classes(), supports);
    }
    return decision;
}

QueryDecision classify_query(const Pool& pool, const CompetenceEstimator& estimator,
                             std::span<const double> x, const Dataset& dsel,
                             const DselCache& cache, const DesConfig& config) {
    return combine(pool, x, estimate_competences(pool, estimator, x, dsel, cache, config), config);
}

int pool_majority_vote(const Pool& pool, std::span<const double> x) {
    std::vector<int> votes;
    votes.reserve(pool.size());
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (const auto& member : pool.members) votes.push_back(member.classify(x));
    return majority_vote(votes, pool.n_classes(), mean_voter_supports(pool, x, all));
}

EvaluationResult evaluate(const Pool& pool, const CompetenceEstimator& estimator,
                          const Dataset& test, const Dataset& dsel, const DselCache& cache,
                          const DesConfig& config, Exec exec, bool keep_diagnostics) {
    const auto results = evaluate_modes(pool, estimator, test, dsel, cache, config,
                                        std::array{config.mode}, exec);
    EvaluationResult out = results.front();
    if (!keep_diagnostics) out.diagnostics.clear();
    return out;
}

std::vector<EvaluationResult> evaluate_modes(const Pool& pool,
                                             const CompetenceEstimator& estimator,
                                             const Dataset& test, const Dataset& dsel,
                                             const DselCache& cache, const DesConfig& config,
                                             std::span<const CombinationMode> modes, Exec exec) {
    validate(config);
    if (modes.empty()) throw std::invalid_argument("evaluate_modes: no modes requested");
    if (test.n_features() != dsel.n_features())
        throw std::invalid_argument("evaluate_modes: test/dsel feature count mismatch");

    std::vector<EvaluationResult> results(modes.size());
    for (auto& r : results) {
        r.predicted.resize(test.n_rows());
        r.diagnostics.resize(test.n_rows());
    }

    for_each_index(test.n_rows(), exec, [&](std::size_t row) {
        const auto x = test.row(row);
        auto competences = estimate_competences(pool, estimator, x, dsel, cache, config);
        competences.query_id = row;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            DesConfig mode_config = config;
            mode_config.mode = modes[m];
            QueryDecision decision = combine(pool, x, competences, mode_config);
            results[m].predicted[row] = decision.label;
            results[m].diagnostics[row] = std::move(decision);
        }
    });

    for (auto& r : results) {
        std::size_t correct = 0;
        for (std::size_t row = 0; row < test.n_rows(); ++row)
            if (r.predicted[row] == test.label(row)) ++correct;
        r.accuracy = static_cast<double>(correct) / static_cast<double>(test.n_rows());
    }
    return results;
}

}  // namespace metades
