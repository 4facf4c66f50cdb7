#include "metades/meta_features.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace metades {

std::vector<double> MetaVector::flatten() const {
    std::vector<double> out;
    out.reserve(f1.size() + f2.size() + 1 + f4.size() + 1);
    out.insert(out.end(), f1.begin(), f1.end());
    out.insert(out.end(), f2.begin(), f2.end());
    out.push_back(f3);
    out.insert(out.end(), f4.begin(), f4.end());
    out.push_back(f5);
    return out;
}

double consensus_degree(const OutputProfile& profile, int n_classes) {
    if (profile.entries.empty()) throw std::invalid_argument("consensus_degree: empty profile");
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (const int entry : profile.entries) ++counts[static_cast<std::size_t>(entry)];
    const std::size_t top = *std::max_element(counts.begin(), counts.end());
    return static_cast<double>(top) / static_cast<double>(profile.entries.size());
}

std::vector<std::size_t> select_meta_training_samples(const std::vector<OutputProfile>& profiles,
                                                      int n_classes, double h_c) {
    if (!(h_c > 0.0 && h_c <= 1.0))
        throw std::invalid_argument("select_meta_training_samples: h_c must be in (0, 1]");
    std::vector<std::size_t> selected;
    for (std::size_t j = 0; j < profiles.size(); ++j)
        if (consensus_degree(profiles[j], n_classes) < h_c) selected.push_back(j);
    return selected;
}

MetaVector extract_meta_vector(const LinearClassifier& member, std::size_t classifier_id,
                               std::span<const double> query, const Dataset& reference,
                               const RegionOfCompetence& region,
                               const ProfileNeighborhood& profiles,
                               const MetaFeatureOptions& options) {
    MetaVector v;
    v.classifier_id = classifier_id;
    const std::size_t k = region.neighbor_ids.size();
    const std::size_t k_p = profiles.profile_ids.size();
    v.f1.assign(k, 0.0);
    v.f2.assign(k, 0.0);
    v.f4.assign(k_p, 0.0);

    std::size_t correct_in_region = 0;
    for (std::size_t idx = 0; idx < k; ++idx) {
        const std::size_t neighbor = region.neighbor_ids[idx];
        const auto x = reference.row(neighbor);
        const int truth = reference.label(neighbor);
        if (member.classify(x) == truth) {
            ++correct_in_region;
            if (options.use_f1) v.f1[idx] = 1.0;
        }
        if (options.use_f2)
            v.f2[idx] = member.supports(x)[static_cast<std::size_t>(truth)];
    }
    // f3 is the regional accuracy; it stays meaningful even with f1 masked out.
    if (options.use_f3 && k > 0)
        v.f3 = static_cast<double>(correct_in_region) / static_cast<double>(k);

    if (options.use_f4) {
        for (std::size_t idx = 0; idx < k_p; ++idx)
            if (profiles.profiles[idx].entries[classifier_id] == profiles.labels[idx])
                v.f4[idx] = 1.0;
    }
    if (options.use_f5) v.f5 = member.decision_distance(query);
    return v;
}

MetaDataset build_meta_dataset(const Pool& pool, const Dataset& meta_train,
                               const MetaTrainingConfig& config, Exec exec) {
    if (config.k == 0 || config.k_p == 0)
        throw std::invalid_argument("build_meta_dataset: k and k_p must be positive");
    if (meta_train.n_rows() <= config.k)
        throw std::invalid_argument("build_meta_dataset: need more than k rows for leave-one-out");
    if (meta_train.n_rows() <= config.k_p)
        throw std::invalid_argument("build_meta_dataset: need more than k_p rows for leave-one-out");

    const auto profiles = output_profiles(pool, meta_train, exec);
    std::vector<std::size_t> selected =
        select_meta_training_samples(profiles, meta_train.n_classes(), config.h_c);
    if (selected.empty()) {
        if (!config.use_all_on_empty_selection)
            throw std::runtime_error(
                "build_meta_dataset: no rows below the consensus threshold; "
                "lower h_c or enable use_all_on_empty_selection");
        selected.resize(meta_train.n_rows());
        std::iota(selected.begin(), selected.end(), std::size_t{0});
    }

    std::vector<int> labels(meta_train.n_rows());
    for (std::size_t j = 0; j < meta_train.n_rows(); ++j) labels[j] = meta_train.label(j);

    const std::size_t m = pool.size();
    MetaDataset meta;
    meta.k = config.k;
    meta.k_p = config.k_p;
    meta.vectors.resize(selected.size() * m);

    for_each_index(selected.size(), exec, [&](std::size_t s) {
        const std::size_t j = selected[s];
        const auto x = meta_train.row(j);
        const auto region = knn_region(x, meta_train, config.k, j);
        const auto hood = profile_neighbors(profiles[j], profiles, labels, config.k_p, j);
        for (std::size_t i = 0; i < m; ++i) {
            MetaVector v = extract_meta_vector(pool.members[i], i, x, meta_train, region, hood,
                                               config.features);
            v.sample_id = j;
            v.label = pool.members[i].classify(x) == meta_train.label(j) ? 1 : 0;
            meta.vectors[s * m + i] = std::move(v);
        }
    });
    return meta;
}

void export_meta_dataset_csv(const MetaDataset& meta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_meta_dataset_csv: cannot open " + path);
    out << "sample_id,classifier_id";
    for (std::size_t i = 0; i < meta.k; ++i) out << ",f1_" << i;
    for (std::size_t i = 0; i < meta.k; ++i) out << ",f2_" << i;
    out << ",f3";
    for (std::size_t i = 0; i < meta.k_p; ++i) out << ",f4_" << i;
    out << ",f5,label\n";
    out.precision(17);
    for (const auto& v : meta.vectors) {
        out << v.sample_id << ',' << v.classifier_id;
        for (const double x : v.flatten()) out << ',' << x;
        out << ',' << (v.label ? *v.label : -1) << '\n';
    }
}

}  // namespace metades
