#include "metades/region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metades {

namespace {

/// Partial sort of (key, index) pairs: smallest k by key, ties by lower index.
void take_smallest(std::vector<std::pair<double, std::size_t>>& scored, std::size_t k) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                      scored.end());
}

}  // namespace

RegionOfCompetence knn_region(std::span<const double> query, const Dataset& reference,
                              std::size_t k, std::optional<std::size_t> exclude) {
    if (k == 0) throw std::invalid_argument("knn_region: k must be positive");
    if (query.size() != reference.n_features())
        throw std::invalid_argument("knn_region: feature count mismatch");
    const std::size_t available = reference.n_rows() - (exclude ? 1 : 0);
    if (available < k) throw std::invalid_argument("knn_region: fewer than k reference rows");

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(available);
    for (std::size_t i = 0; i < reference.n_rows(); ++i) {
        if (exclude && *exclude == i) continue;
        const auto row = reference.row(i);
        double d2 = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) {
            const double diff = query[j] - row[j];
            d2 += diff * diff;
        }
        scored.emplace_back(d2, i);
    }
    take_smallest(scored, k);

    RegionOfCompetence region;
    region.neighbor_ids.reserve(k);
    region.distances.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        region.neighbor_ids.push_back(scored[i].second);
        region.distances.push_back(std::sqrt(scored[i].first));
    }
    return region;
}

OutputProfile output_profile(const Pool& pool, std::span<const double> x) {
    OutputProfile profile;
    profile.entries.reserve(pool.size());
    for (const auto& member : pool.members) profile.entries.push_back(member.classify(x));
    return profile;
}

std::vector<OutputProfile> output_profiles(const Pool& pool, const Dataset& data, Exec exec) {
    std::vector<OutputProfile> profiles(data.n_rows());
    for_each_index(data.n_rows(), exec,
                   [&](std::size_t i) { profiles[i] = output_profile(pool, data.row(i)); });
    return profiles;
}

double profile_distance_sq(const OutputProfile& a, const OutputProfile& b) {
    if (a.entries.size() != b.entries.size())
        throw std::invalid_argument("profile_distance_sq: profile length mismatch");
    std::size_t disagreements = 0;
    for (std::size_t i = 0; i < a.entries.size(); ++i)
        if (a.entries[i] != b.entries[i]) ++disagreements;
    return 2.0 * static_cast<double>(disagreements);
}

ProfileNeighborhood profile_neighbors(const OutputProfile& query,
                                      std::span<const OutputProfile> reference,
                                      std::span<const int> labels, std::size_t k_p,
                                      std::optional<std::size_t> exclude) {
    if (k_p == 0) throw std::invalid_argument("profile_neighbors: k_p must be positive");
    if (reference.size() != labels.size())
        throw std::invalid_argument("profile_neighbors: labels do not match reference profiles");
    const std::size_t available = reference.size() - (exclude ? 1 : 0);
    if (available < k_p) throw std::invalid_argument("profile_neighbors: fewer than k_p profiles");

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(available);
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (exclude && *exclude == i) continue;
        scored.emplace_back(profile_distance_sq(query, reference[i]), i);
    }
    take_smallest(scored, k_p);

    ProfileNeighborhood hood;
    hood.profile_ids.reserve(k_p);
    hood.labels.reserve(k_p);
    hood.profiles.reserve(k_p);
    hood.distances.reserve(k_p);
    for (std::size_t i = 0; i < k_p; ++i) {
        const std::size_t id = scored[i].second;
        hood.profile_ids.push_back(id);
        hood.labels.push_back(labels[id]);
        hood.profiles.push_back(reference[id]);
        hood.distances.push_back(scored[i].first);
    }
    return hood;
}

}  // namespace metades
