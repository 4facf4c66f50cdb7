#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metades/base.hpp"
#include "metades/dataset.hpp"
#include "metades/meta_features.hpp"
#include "metades/naive_bayes.hpp"
#include "metades/parallel.hpp"
#include "metades/region.hpp"

namespace metades {

enum class CombinationMode { selection, weighting, hybrid };

std::string to_string(CombinationMode mode);
CombinationMode combination_mode_from_string(const std::string& name);

struct DesConfig {
    std::size_t k = 7;
    std::size_t k_p = 5;
    double h_c = 0.70;
    double upsilon = 0.5;
    CombinationMode mode = CombinationMode::hybrid;
    MetaFeatureOptions features;
};

void validate(const DesConfig& config);

/// Competence of every pool member for one query.
struct CompetenceProfile {
    std::vector<double> deltas;
    std::size_t query_id = 0;
};

/// Per-(pool, selection-dataset) precomputation: output profiles and labels of
/// every selection row, built once and read-only afterwards.
struct DselCache {
    std::vector<OutputProfile> profiles;
    std::vector<int> labels;
};

DselCache build_dsel_cache(const Pool& pool, const Dataset& dsel, Exec exec = Exec::parallel);

CompetenceProfile estimate_competences(const Pool& pool, const CompetenceEstimator& estimator,
                                       std::span<const double> x, const Dataset& dsel,
                                       const DselCache& cache, const DesConfig& config);

/// Plurality vote. Vote ties go to the tied class with the highest entry in
/// `tiebreak_supports` (per-class mean posterior of the voters); residual ties
/// to the lowest class index. An empty support span skips that stage.
int majority_vote(std::span<const int> votes, int n_classes,
                  std::span<const double> tiebreak_supports = {});

/// Argmax of per-class summed weights, same tie-breaking as majority_vote.
/// Weights accumulate per class in vote order.
int weighted_majority_vote(std::span<const int> votes, std::span<const double> weights,
                           int n_classes, std::span<const double> tiebreak_supports = {});

struct QueryDecision {
    int label = 0;
    std::vector<std::size_t> voter_ids;  // members that took part in the vote
    std::vector<double> deltas;          // full competence profile
    bool fallback_used = false;          // no member exceeded upsilon
};

/// Applies the configured combination mode to an already-estimated competence
/// profile. Selection and hybrid fall back to the single highest-delta member
/// (ties to lower index) when nothing clears upsilon.
QueryDecision combine(const Pool& pool, std::span<const double> x,
                      const CompetenceProfile& competences, const DesConfig& config);

QueryDecision classify_query(const Pool& pool, const CompetenceEstimator& estimator,
                             std::span<const double> x, const Dataset& dsel,
                             const DselCache& cache, const DesConfig& config);

/// Whole-pool majority vote, no competence weighting.
int pool_majority_vote(const Pool& pool, std::span<const double> x);

struct EvaluationResult {
    double accuracy = 0.0;
    std::vector<int> predicted;
    std::vector<QueryDecision> diagnostics;  // empty unless requested
};

EvaluationResult evaluate(const Pool& pool, const CompetenceEstimator& estimator,
                          const Dataset& test, const Dataset& dsel, const DselCache& cache,
                          const DesConfig& config, Exec exec = Exec::parallel,
                          bool keep_diagnostics = false);

/// Evaluates several combination modes on the same test set, estimating each
/// query's competence profile once and reusing it across modes. Results are
/// ordered like `modes`.
std::vector<EvaluationResult> evaluate_modes(const Pool& pool,
                                             const CompetenceEstimator& estimator,
                                             const Dataset& test, const Dataset& dsel,
                                             const DselCache& cache, const DesConfig& config,
                                             std::span<const CombinationMode> modes,
                                             Exec exec = Exec::parallel);

}  // namespace metades
