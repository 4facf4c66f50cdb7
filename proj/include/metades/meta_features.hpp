#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metades/base.hpp"
#include "metades/dataset.hpp"
#include "metades/parallel.hpp"
#include "metades/region.hpp"

namespace metades {

/// Meta-features describing one (classifier, sample) pair. Flattened length is
/// 2K + K_p + 2.
struct MetaVector {
    std::vector<double> f1;  // K: neighbor correctness (0/1)
    std::vector<double> f2;  // K: posterior assigned to each neighbor's true class
    double f3 = 0.0;         // accuracy over the region, mean of f1
    std::vector<double> f4;  // K_p: profile-neighborhood agreement (0/1)
    double f5 = 0.0;         // confidence: distance to the decision boundary
    std::optional<int> label;  // 1 = competent, 0 = incompetent; unset at query time
    std::size_t classifier_id = 0;
    std::size_t sample_id = 0;

    std::vector<double> flatten() const;  // f1, f2, f3, f4, f5 in order
};

struct MetaDataset {
    std::vector<MetaVector> vectors;
    std::size_t k = 0;
    std::size_t k_p = 0;

    std::size_t size() const { return vectors.size(); }
};

/// Which blocks of the meta-vector are populated. Disabled groups stay at
/// zero so the flattened length never changes.
struct MetaFeatureOptions {
    bool use_f1 = true;
    bool use_f2 = true;
    bool use_f3 = true;
    bool use_f4 = true;
    bool use_f5 = true;
};

/// Fraction of pool members voting for the plurality class, ties by lowest
/// class index.
double consensus_degree(const OutputProfile& profile, int n_classes);

/// Rows whose pool consensus stays strictly below `h_c`.
std::vector<std::size_t> select_meta_training_samples(const std::vector<OutputProfile>& profiles,
                                                      int n_classes, double h_c);

/// Builds one meta-vector for member `classifier_id` at a query with the given
/// feature-space region and profile neighborhood.
MetaVector extract_meta_vector(const LinearClassifier& member, std::size_t classifier_id,
                               std::span<const double> query, const Dataset& reference,
                               const RegionOfCompetence& region,
                               const ProfileNeighborhood& profiles,
                               const MetaFeatureOptions& options = {});

struct MetaTrainingConfig {
    std::size_t k = 7;
    std::size_t k_p = 5;
    double h_c = 0.70;
    MetaFeatureOptions features;
    /// With selection enabled, fall back to every row when none passes the
    /// consensus filter instead of failing.
    bool use_all_on_empty_selection = false;
};

/// Labeled meta-dataset over `meta_train`: for each selected row (leave-one-out
/// neighborhoods within `meta_train` itself) and each pool member, one vector
/// labeled by the member's correctness on that row. Ordered by (row, member).
MetaDataset build_meta_dataset(const Pool& pool, const Dataset& meta_train,
                               const MetaTrainingConfig& config, Exec exec = Exec::parallel);

void export_meta_dataset_csv(const MetaDataset& meta, const std::string& path);

}  // namespace metades
