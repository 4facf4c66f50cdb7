#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "metades/base.hpp"
#include "metades/dataset.hpp"
#include "metades/parallel.hpp"

namespace metades {

/// K nearest neighbors of a query in feature space, nearest first.
struct RegionOfCompetence {
    std::vector<std::size_t> neighbor_ids;
    std::vector<double> distances;  // Euclidean, parallel to neighbor_ids
};

/// Nearest neighbors by squared Euclidean distance, ties broken by lower row
/// index. `exclude` removes one reference row from consideration (leave-one-out
/// over the reference set itself).
RegionOfCompetence knn_region(std::span<const double> query, const Dataset& reference,
                              std::size_t k,
                              std::optional<std::size_t> exclude = std::nullopt);

/// Crisp decisions of every pool member on one sample.
struct OutputProfile {
    std::vector<int> entries;  // entries[i] = member i's predicted class
};

OutputProfile output_profile(const Pool& pool, std::span<const double> x);

/// Profiles for every row of `data`, in row order.
std::vector<OutputProfile> output_profiles(const Pool& pool, const Dataset& data,
                                           Exec exec = Exec::parallel);

/// Squared distance between profiles under one-hot encoding of each entry:
/// twice the number of members that disagree.
double profile_distance_sq(const OutputProfile& a, const OutputProfile& b);

/// K_p most similar output profiles, most similar first.
struct ProfileNeighborhood {
    std::vector<std::size_t> profile_ids;
    std::vector<int> labels;                 // true labels of the matched rows
    std::vector<OutputProfile> profiles;
    std::vector<double> distances;           // squared one-hot distances
};

ProfileNeighborhood profile_neighbors(const OutputProfile& query,
                                      std::span<const OutputProfile> reference,
                                      std::span<const int> labels, std::size_t k_p,
                                      std::optional<std::size_t> exclude = std::nullopt);

}  // namespace metades
