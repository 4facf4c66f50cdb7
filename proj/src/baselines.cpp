#include "metades/baselines.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

#include "metades/region.hpp"

namespace metades {

namespace {

constexpr std::array<Baseline, 7> kAllBaselines{Baseline::knora_e, Baseline::knora_u,
                                                Baseline::ola,     Baseline::lca,
                                                Baseline::mla,     Baseline::mcb,
                                                Baseline::knop};

bool member_correct(const DselCache& cache, std::size_t row, std::size_t member) {
    return cache.profiles[row].entries[member] == cache.labels[row];
}

void check_cache(const Dataset& dsel, const DselCache& cache) {
    if (cache.profiles.size() != dsel.n_rows() || cache.labels.size() != dsel.n_rows())
        throw std::invalid_argument("baseline: cache does not match dsel");
}

BaselineDecision equal_vote(const Pool& pool, std::span<const double> x,
                            std::vector<std::size_t> voter_ids) {
    std::vector<int> votes;
    votes.reserve(voter_ids.size());
    for (const std::size_t id : voter_ids) votes.push_back(pool.members[id].classify(x));
    BaselineDecision decision;
    decision.label = majority_vote(votes, pool.n_classes());
    decision.voter_ids = std::move(voter_ids);
    return decision;
}

BaselineDecision single_member(const Pool& pool, std::span<const double> x, std::size_t member) {
    BaselineDecision decision;
    decision.label = pool.members[member].classify(x);
    decision.voter_ids.push_back(member);
    return decision;
}

std::vector<std::size_t> whole_pool(const Pool& pool) {
    std::vector<std::size_t> ids(pool.size());
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return ids;
}

/// Weighted vote over members with positive counts; all-zero counts revert to
/// the plain pool vote.
BaselineDecision counting_vote(const Pool& pool, std::span<const double> x,
                               std::span<const double> counts) {
    BaselineDecision decision;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] <= 0.0) continue;
        decision.voter_ids.push_back(i);
        decision.weights.push_back(counts[i]);
    }
    if (decision.voter_ids.empty()) return equal_vote(pool, x, whole_pool(pool));
    std::vector<int> votes;
    votes.reserve(decision.voter_ids.size());
    for (const std::size_t id : decision.voter_ids) votes.push_back(pool.members[id].classify(x));
    decision.label = weighted_majority_vote(votes, decision.weights, pool.n_classes());
    return decision;
}

/// OLA over an explicit neighbor list: argmax regional accuracy, ties to the
/// lower member index.
std::size_t ola_pick(const Pool& pool, const DselCache& cache,
                     std::span<const std::size_t> neighbors) {
    std::size_t best = 0;
    std::size_t best_correct = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::size_t correct = 0;
        for (const std::size_t n : neighbors)
            if (member_correct(cache, n, i)) ++correct;
        if (i == 0 || correct > best_correct) {
            best = i;
            best_correct = correct;
        }
    }
    return best;
}

}  // namespace

std::span<const Baseline> all_baselines() { return kAllBaselines; }

std::string to_string(Baseline baseline) {
    switch (baseline) {
        case Baseline::knora_e: return "KNORA-E";
        case Baseline::knora_u: return "KNORA-U";
        case Baseline::ola: return "OLA";
        case Baseline::lca: return "LCA";
        case Baseline::mla: return "MLA";
        case Baseline::mcb: return "MCB";
        case Baseline::knop: return "KNOP";
    }
    throw std::invalid_argument("to_string: unknown baseline");
}

Baseline baseline_from_string(const std::string& name) {
    for (const Baseline b : kAllBaselines)
        if (to_string(b) == name) return b;
    throw std::invalid_argument("baseline_from_string: unknown baseline \"" + name + "\"");
}

BaselineDecision knora_eliminate(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                                 const DselCache& cache, std::size_t k) {
    check_cache(dsel, cache);
    const auto region = knn_region(x, dsel, k);
    for (std::size_t kk = k; kk >= 1; --kk) {
        std::vector<std::size_t> selected;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            bool all_correct = true;
            for (std::size_t n = 0; n < kk && all_correct; ++n)
                all_correct = member_correct(cache, region.neighbor_ids[n], i);
            if (all_correct) selected.push_back(i);
        }
        if (!selected.empty()) return equal_vote(pool, x, std::move(selected));
    }
    return equal_vote(pool, x, whole_pool(pool));
}

BaselineDecision knora_union(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                             const DselCache& cache, std::size_t k) {
    check_cache(dsel, cache);
    const auto region = knn_region(x, dsel, k);
    std::vector<double> counts(pool.size(), 0.0);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (const std::size_t n : region.neighbor_ids)
            if (member_correct(cache, n, i)) counts[i] += 1.0;
    return counting_vote(pool, x, counts);
}

BaselineDecision ola(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k) {
    check_cache(dsel, cache);
    const auto region = knn_region(x, dsel, k);
    return single_member(pool, x, ola_pick(pool, cache, region.neighbor_ids));
}

BaselineDecision lca(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k) {
    check_cache(dsel, cache);
    const auto region = knn_region(x, dsel, k);
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const int predicted = pool.members[i].classify(x);
        std::size_t same_class = 0;
        std::size_t correct = 0;
        for (const std::size_t n : region.neighbor_ids) {
            if (cache.labels[n] != predicted) continue;
            ++same_class;
            if (member_correct(cache, n, i)) ++correct;
        }
        const double score =
            same_class > 0 ? static_cast<double>(correct) / static_cast<double>(same_class) : 0.0;
        if (score > best_score) {
            best = i;
            best_score = score;
        }
    }
    return single_member(pool, x, best);
}

BaselineDecision mla(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k, double epsilon) {
    check_cache(dsel, cache);
    if (!(epsilon > 0.0)) throw std::invalid_argument("mla: epsilon must be positive");
    const auto region = knn_region(x, dsel, k);
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const int predicted = pool.members[i].classify(x);
        double weight_sum = 0.0;
        double correct_sum = 0.0;
        for (std::size_t n = 0; n < region.neighbor_ids.size(); ++n) {
            const std::size_t id = region.neighbor_ids[n];
            if (cache.labels[id] != predicted) continue;
            const double w = 1.0 / (region.distances[n] + epsilon);
            weight_sum += w;
            if (member_correct(cache, id, i)) correct_sum += w;
        }
        const double score = weight_sum > 0.0 ? correct_sum / weight_sum : 0.0;
        if (score > best_score) {
            best = i;
            best_score = score;
        }
    }
    return single_member(pool, x, best);
}

BaselineDecision mcb(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k, double threshold) {
    check_cache(dsel, cache);
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw std::invalid_argument("mcb: threshold must be in [0, 1]");
    const auto region = knn_region(x, dsel, k);
    const auto query_profile = output_profile(pool, x);
    const auto m = static_cast<double>(pool.size());

    std::vector<std::size_t> filtered;
    for (const std::size_t n : region.neighbor_ids) {
        std::size_t agreements = 0;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (cache.profiles[n].entries[i] == query_profile.entries[i]) ++agreements;
        if (static_cast<double>(agreements) / m >= threshold) filtered.push_back(n);
    }
    const auto& neighbors = filtered.empty() ? region.neighbor_ids : filtered;
    return single_member(pool, x, ola_pick(pool, cache, neighbors));
}

BaselineDecision knop(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                      const DselCache& cache, std::size_t k_profiles) {
    check_cache(dsel, cache);
    const auto query_profile = output_profile(pool, x);
    const auto hood =
        profile_neighbors(query_profile, cache.profiles, cache.labels, k_profiles);
    std::vector<double> counts(pool.size(), 0.0);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (const std::size_t n : hood.profile_ids)
            if (member_correct(cache, n, i)) counts[i] += 1.0;
    return counting_vote(pool, x, counts);
}

BaselineDecision classify_baseline(Baseline baseline, const Pool& pool, std::span<const double> x,
                                   const Dataset& dsel, const DselCache& cache,
                                   const BaselineConfig& config) {
    switch (baseline) {
        case Baseline::knora_e: return knora_eliminate(pool, x, dsel, cache, config.k);
        case Baseline::knora_u: return knora_union(pool, x, dsel, cache, config.k);
        case Baseline::ola: return ola(pool, x, dsel, cache, config.k);
        case Baseline::lca: return lca(pool, x, dsel, cache, config.k);
        case Baseline::mla: return mla(pool, x, dsel, cache, config.k, config.mla_epsilon);
        case Baseline::mcb: return mcb(pool, x, dsel, cache, config.k, config.mcb_threshold);
        case Baseline::knop: return knop(pool, x, dsel, cache, config.k_profiles);
    }
    throw std::invalid_argument("classify_baseline: unknown baseline");
}

double evaluate_baseline(Baseline baseline, const Pool& pool, const Dataset& test,
                         const Dataset& dsel, const DselCache& cache,
                         const BaselineConfig& config, Exec exec) {
    std::vector<int> predicted(test.n_rows());
    for_each_index(test.n_rows(), exec, [&](std::size_t row) {
        predicted[row] = classify_baseline(baseline, pool, test.row(row), dsel, cache, config).label;
    });
    std::size_t correct = 0;
    for (std::size_t row = 0; row < test.n_rows(); ++row)
        if (predicted[row] == test.label(row)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(test.n_rows());
}

}  // namespace metades
