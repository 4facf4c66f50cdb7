#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metades {

/// Immutable labeled dataset: row-major feature matrix plus dense integer
/// class labels in [0, n_classes). Construction validates that every label is
/// in range, every class occurs at least once and all features are finite.
class Dataset {
public:
    Dataset(std::vector<double> features, std::vector<int> labels, int n_classes,
            std::vector<std::string> feature_names = {});

    std::size_t n_rows() const { return labels_.size(); }
    std::size_t n_features() const { return n_features_; }
    int n_classes() const { return n_classes_; }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * n_features_, n_features_};
    }
    int label(std::size_t i) const { return labels_[i]; }

    const std::vector<double>& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

    /// Number of rows carrying each class label.
    std::vector<std::size_t> class_counts() const;

    /// New dataset holding the given rows (in the given order).
    Dataset subset(std::span<const std::size_t> rows) const;

    bool operator==(const Dataset& other) const = default;

private:
    std::vector<double> features_;
    std::vector<int> labels_;
    std::size_t n_features_;
    int n_classes_;
    std::vector<std::string> feature_names_;
};

/// The four disjoint parts of the experimental protocol: half the data for
/// classifier generation and meta-training (split evenly), a quarter for the
/// dynamic selection set and a quarter for testing.
struct Partition {
    Dataset train;
    Dataset meta_train;
    Dataset dsel;
    Dataset test;
};

/// Loads a comma-separated file. A header row is assumed iff any cell of the
/// first row is non-numeric. Labels may be arbitrary discrete strings and are
/// re-encoded as dense integers in order of first appearance.
Dataset load_csv(const std::string& path, std::size_t label_column);
Dataset load_csv(const std::string& path, const std::string& label_column);
/// Label taken from the last column.
Dataset load_csv(const std::string& path);

/// Splits class-by-class so each part's class counts are within one sample of
/// fraction * class size. Row indices into `data`, one vector per fraction,
/// each sorted ascending; deterministic in `seed`.
std::vector<std::vector<std::size_t>> stratified_split_indices(
    std::span<const int> labels, int n_classes, std::span<const double> fractions,
    std::uint64_t seed);

std::vector<Dataset> stratified_split(const Dataset& data,
                                      std::span<const double> fractions,
                                      std::uint64_t seed);

/// 50/25/25 split into training, dynamic selection and test, with the
/// training half further split evenly into pool-training and meta-training.
Partition make_partition(const Dataset& data, std::uint64_t seed);

/// Two interleaved banana-shaped arcs (radius 5) with isotropic Gaussian
/// noise, balanced classes. Pure function of (n, seed, noise).
Dataset generate_banana(std::size_t n, std::uint64_t seed, double noise = 1.0);

/// Two curved-spine classes with class-dependent noise, balanced. Pure
/// function of (n, seed, noise).
Dataset generate_lithuanian(std::size_t n, std::uint64_t seed, double noise = 1.0);

}  // namespace metades
