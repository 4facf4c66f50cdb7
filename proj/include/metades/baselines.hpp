#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metades/base.hpp"
#include "metades/dataset.hpp"
#include "metades/des.hpp"
#include "metades/parallel.hpp"

namespace metades {

/// Classical dynamic-selection baselines. All consult the K nearest selection
/// rows (profile space for KNOP, feature space otherwise), then vote; vote
/// ties go to the lowest class index, selection-score ties to the lowest
/// member index.
enum class Baseline { knora_e, knora_u, ola, lca, mla, mcb, knop };

std::span<const Baseline> all_baselines();
std::string to_string(Baseline baseline);
Baseline baseline_from_string(const std::string& name);

struct BaselineConfig {
    std::size_t k = 7;
    std::size_t k_profiles = 7;   // KNOP profile-neighborhood size
    double mcb_threshold = 0.7;   // minimum profile-agreement fraction
    double mla_epsilon = 1e-12;   // inverse-distance regularizer
};

struct BaselineDecision {
    int label = 0;
    std::vector<std::size_t> voter_ids;
    std::vector<double> weights;  // parallel to voter_ids; empty for equal-weight votes
};

/// KNORA-Eliminate: members correct on all K neighbors; K shrinks until the
/// set is nonempty, reaching the whole pool at K=0.
BaselineDecision knora_eliminate(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                                 const DselCache& cache, std::size_t k);

/// KNORA-Union: one vote per correctly classified neighbor. A pool with no
/// correct neighbor anywhere falls back to the plain pool vote.
BaselineDecision knora_union(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                             const DselCache& cache, std::size_t k);

/// Overall local accuracy: the single member most accurate on the region.
BaselineDecision ola(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k);

/// Local class accuracy: accuracy restricted to neighbors whose true label
/// equals the member's prediction for x; empty restriction scores 0.
BaselineDecision lca(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k);

/// Modified local accuracy: LCA with neighbors weighted by 1/(distance + eps).
BaselineDecision mla(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k, double epsilon = 1e-12);

/// Multiple classifier behavior: drops neighbors whose output profile agrees
/// with the query's on less than `threshold` of the members, then applies OLA;
/// an empty filtered region reverts to unfiltered OLA.
BaselineDecision mcb(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                     const DselCache& cache, std::size_t k, double threshold = 0.7);

/// K-nearest output profiles: KNORA-Union counting over the K_p most similar
/// output profiles instead of feature-space neighbors.
BaselineDecision knop(const Pool& pool, std::span<const double> x, const Dataset& dsel,
                      const DselCache& cache, std::size_t k_profiles);

BaselineDecision classify_baseline(Baseline baseline, const Pool& pool, std::span<const double> x,
                                   const Dataset& dsel, const DselCache& cache,
                                   const BaselineConfig& config);

double evaluate_baseline(Baseline baseline, const Pool& pool, const Dataset& test,
                         const Dataset& dsel, const DselCache& cache,
                         const BaselineConfig& config, Exec exec = Exec::parallel);

}  // namespace metades
