#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metades/dataset.hpp"
#include "metades/parallel.hpp"

namespace metades {

/// Multi-class linear classifier: one weight row and bias per class, argmax
/// decision. Calibrated posteriors come from a softmax over the raw scores
/// (which reduces to a logistic of the signed margin for two classes).
class LinearClassifier {
public:
    LinearClassifier(std::vector<double> weights, std::vector<double> biases,
                     double calibration_slope = 1.0);

    int n_classes() const { return static_cast<int>(biases_.size()); }
    std::size_t n_features() const { return n_features_; }
    double calibration_slope() const { return calibration_slope_; }

    std::span<const double> weights_for(int c) const {
        return {weights_.data() + static_cast<std::size_t>(c) * n_features_, n_features_};
    }
    double bias_for(int c) const { return biases_[static_cast<std::size_t>(c)]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& biases() const { return biases_; }

    /// Raw per-class scores w_c . x + b_c.
    std::vector<double> scores(std::span<const double> x) const;

    /// Argmax of scores; ties go to the lowest class index.
    int classify(std::span<const double> x) const;

    /// Softmax of slope-scaled scores. Entries in [0,1], sum 1.
    std::vector<double> supports(std::span<const double> x) const;

    /// Perpendicular distance from x to the decision boundary: the minimum
    /// over pairwise boundaries between the predicted class and every other
    /// class. A zero-norm pairwise boundary contributes distance 0.
    double decision_distance(std::span<const double> x) const;

    bool operator==(const LinearClassifier& other) const = default;

private:
    std::vector<double> weights_;  // row-major, n_classes x n_features
    std::vector<double> biases_;
    std::size_t n_features_;
    double calibration_slope_;
};

struct PerceptronConfig {
    std::size_t epochs = 100;
    double learning_rate = 0.1;
    double calibration_slope = 1.0;
};

/// Online multi-class perceptron: shuffled passes with winner-update /
/// loser-downdate. Deterministic in `seed`.
LinearClassifier train_perceptron(const Dataset& data, const PerceptronConfig& config,
                                  std::uint64_t seed);

/// Bagged pool of perceptrons. `trained_on[i]` records member i's bootstrap
/// index multiset for audit.
struct Pool {
    std::vector<LinearClassifier> members;
    std::vector<std::vector<std::size_t>> trained_on;

    std::size_t size() const { return members.size(); }
    int n_classes() const { return members.front().n_classes(); }
    std::size_t n_features() const { return members.front().n_features(); }
};

/// Trains `m` members on independent N-sample bootstraps of `data`. A
/// bootstrap that misses a class is redrawn, up to 100 retries per member.
/// Per-member seeds are derived up front, so both execution policies give
/// bit-identical pools.
Pool bagging_pool(const Dataset& data, std::size_t m, const PerceptronConfig& config,
                  std::uint64_t seed, Exec exec = Exec::parallel);

std::string pool_to_json(const Pool& pool);
Pool pool_from_json(const std::string& text);
void save_pool(const Pool& pool, const std::string& path);
Pool load_pool(const std::string& path);

}  // namespace metades
