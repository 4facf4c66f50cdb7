#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metades/meta_features.hpp"

namespace metades {

/// Maps a flattened meta-vector to the probability that the (classifier,
/// sample) pair it describes is competent.
class CompetenceEstimator {
public:
    virtual ~CompetenceEstimator() = default;
    virtual double competence(std::span<const double> meta_vector) const = 0;
    virtual std::size_t n_inputs() const = 0;
};

/// Gaussian Naive Bayes over two classes (incompetent = 0, competent = 1).
/// Posteriors are evaluated in log space with a shared variance floor.
class NaiveBayesModel : public CompetenceEstimator {
public:
    NaiveBayesModel(std::array<double, 2> priors, std::vector<double> means,
                    std::vector<double> variances, double variance_floor);

    double competence(std::span<const double> meta_vector) const override;
    std::size_t n_inputs() const override { return means_.size() / 2; }

    /// Both class posteriors p(class | v), summing to 1.
    std::array<double, 2> posteriors(std::span<const double> meta_vector) const;

    /// Unnormalized log joint log p(class) + sum log N(v_d; mu, sigma^2).
    std::array<double, 2> log_joint(std::span<const double> meta_vector) const;

    const std::array<double, 2>& priors() const { return priors_; }
    const std::vector<double>& means() const { return means_; }      // 2 x F, row-major
    const std::vector<double>& variances() const { return variances_; }
    double variance_floor() const { return variance_floor_; }

    double validation_accuracy = 0.0;
    std::size_t k = 0;
    std::size_t k_p = 0;

    bool operator==(const NaiveBayesModel& other) const;

private:
    std::array<double, 2> priors_;
    std::vector<double> means_;
    std::vector<double> variances_;
    double variance_floor_;
};

struct MetaTrainResult {
    NaiveBayesModel model;
    double validation_accuracy;  // on the held-out quarter, 1.0 when none held out
};

/// Fits the meta-classifier on a stratified `train_fraction` of the labeled
/// vectors and scores the remainder. Both meta-labels must be present.
MetaTrainResult train_meta(const MetaDataset& meta, double train_fraction = 0.75,
                           std::uint64_t seed = 0);

std::string meta_model_to_json(const NaiveBayesModel& model);
NaiveBayesModel meta_model_from_json(const std::string& text);
void save_meta_model(const NaiveBayesModel& model, const std::string& path);
NaiveBayesModel load_meta_model(const std::string& path);

}  // namespace metades
