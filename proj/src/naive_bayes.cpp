#include "metades/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "metades/rng.hpp"

namespace metades {

NaiveBayesModel::NaiveBayesModel(std::array<double, 2> priors, std::vector<double> means,
                                 std::vector<double> variances, double variance_floor)
    : priors_(priors),
      means_(std::move(means)),
      variances_(std::move(variances)),
      variance_floor_(variance_floor) {
    if (!(priors_[0] > 0.0) || !(priors_[1] > 0.0) ||
        std::abs(priors_[0] + priors_[1] - 1.0) > 1e-9)
        throw std::invalid_argument("NaiveBayesModel: priors must be positive and sum to 1");
    if (means_.empty() || means_.size() % 2 != 0 || means_.size() != variances_.size())
        throw std::invalid_argument("NaiveBayesModel: parameter shape mismatch");
    if (!(variance_floor_ > 0.0))
        throw std::invalid_argument("NaiveBayesModel: variance floor must be positive");
    for (double& v : variances_) {
        if (!std::isfinite(v)) throw std::invalid_argument("NaiveBayesModel: non-finite variance");
        v = std::max(v, variance_floor_);
    }
}

std::array<double, 2> NaiveBayesModel::log_joint(std::span<const double> meta_vector) const {
    const std::size_t f = n_inputs();
    if (meta_vector.size() != f)
        throw std::invalid_argument("NaiveBayesModel: meta-vector length mismatch");
    std::array<double, 2> lj{std::log(priors_[0]), std::log(priors_[1])};
    constexpr double log_2pi = 1.8378770664093453;  // log(2*pi)
    for (std::size_t c = 0; c < 2; ++c) {
        const double* mu = means_.data() + c * f;
        const double* var = variances_.data() + c * f;
        for (std::size_t d = 0; d < f; ++d) {
            const double diff = meta_vector[d] - mu[d];
            lj[c] += -0.5 * (log_2pi + std::log(var[d])) - diff * diff / (2.0 * var[d]);
        }
    }
    return lj;
}

std::array<double, 2> NaiveBayesModel::posteriors(std::span<const double> meta_vector) const {
    const auto lj = log_joint(meta_vector);
    const double hi = std::max(lj[0], lj[1]);
    const double e0 = std::exp(lj[0] - hi);
    const double e1 = std::exp(lj[1] - hi);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

double NaiveBayesModel::competence(std::span<const double> meta_vector) const {
    return posteriors(meta_vector)[1];
}

bool NaiveBayesModel::operator==(const NaiveBayesModel& other) const {
    return priors_ == other.priors_ && means_ == other.means_ && variances_ == other.variances_ &&
           variance_floor_ == other.variance_floor_ &&
           validation_accuracy == other.validation_accuracy && k == other.k && k_p == other.k_p;
}

namespace {

struct FlatMeta {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t n_features = 0;
};

FlatMeta flatten_labeled(const MetaDataset& meta) {
    FlatMeta flat;
    flat.rows.reserve(meta.size());
    flat.labels.reserve(meta.size());
    for (const auto& v : meta.vectors) {
        if (!v.label) throw std::invalid_argument("train_meta: unlabeled meta-vector");
        if (*v.label != 0 && *v.label != 1)
            throw std::invalid_argument("train_meta: meta-label must be 0 or 1");
        flat.rows.push_back(v.flatten());
        flat.labels.push_back(*v.label);
    }
    if (flat.rows.empty()) throw std::invalid_argument("train_meta: empty meta-dataset");
    flat.n_features = flat.rows.front().size();
    for (const auto& row : flat.rows)
        if (row.size() != flat.n_features)
            throw std::invalid_argument("train_meta: inconsistent meta-vector lengths");
    return flat;
}

NaiveBayesModel fit_gaussian_nb(const FlatMeta& flat, std::span<const std::size_t> train) {
    const std::size_t f = flat.n_features;
    std::array<std::size_t, 2> counts{0, 0};
    std::vector<double> means(2 * f, 0.0);
    for (const std::size_t i : train) {
        const auto c = static_cast<std::size_t>(flat.labels[i]);
        ++counts[c];
        for (std::size_t d = 0; d < f; ++d) means[c * f + d] += flat.rows[i][d];
    }
    if (counts[0] == 0 || counts[1] == 0)
        throw std::invalid_argument("train_meta: both meta-classes must appear in training rows");
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t d = 0; d < f; ++d) means[c * f + d] /= static_cast<double>(counts[c]);

    std::vector<double> variances(2 * f, 0.0);
    for (const std::size_t i : train) {
        const auto c = static_cast<std::size_t>(flat.labels[i]);
        for (std::size_t d = 0; d < f; ++d) {
            const double diff = flat.rows[i][d] - means[c * f + d];
            variances[c * f + d] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t d = 0; d < f; ++d) variances[c * f + d] /= static_cast<double>(counts[c]);

    // Floor scaled from the spread of the training features, so pure-class
    // binary columns (raw variance 0) still give finite likelihoods.
    const std::size_t n = train.size();
    double max_feature_var = 0.0;
    for (std::size_t d = 0; d < f; ++d) {
        double mean = 0.0;
        for (const std::size_t i : train) mean += flat.rows[i][d];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const std::size_t i : train) {
            const double diff = flat.rows[i][d] - mean;
            var += diff * diff;
        }
        max_feature_var = std::max(max_feature_var, var / static_cast<double>(n));
    }
    const double floor = std::max(1e-12, 1e-9 * max_feature_var);

    const std::array<double, 2> priors{
        static_cast<double>(counts[0]) / static_cast<double>(n),
        static_cast<double>(counts[1]) / static_cast<double>(n)};
    return NaiveBayesModel(priors, std::move(means), std::move(variances), floor);
}

}  // namespace

MetaTrainResult train_meta(const MetaDataset& meta, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw std::invalid_argument("train_meta: train fraction must be in (0, 1]");
    const FlatMeta flat = flatten_labeled(meta);

    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> val_rows;
    if (train_fraction == 1.0) {
        train_rows.resize(flat.rows.size());
        std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    } else {
        auto parts = stratified_split_indices(flat.labels, 2,
                                              std::array{train_fraction, 1.0 - train_fraction},
                                              seed);
        train_rows = std::move(parts[0]);
        val_rows = std::move(parts[1]);
    }

    NaiveBayesModel model = fit_gaussian_nb(flat, train_rows);
    model.k = meta.k;
    model.k_p = meta.k_p;

    double accuracy = 1.0;
    if (!val_rows.empty()) {
        std::size_t correct = 0;
        for (const std::size_t i : val_rows) {
            const auto post = model.posteriors(flat.rows[i]);
            const int predicted = post[1] > post[0] ? 1 : 0;
            if (predicted == flat.labels[i]) ++correct;
        }
        accuracy = static_cast<double>(correct) / static_cast<double>(val_rows.size());
    }
    model.validation_accuracy = accuracy;
    return {std::move(model), accuracy};
}

std::string meta_model_to_json(const NaiveBayesModel& model) {
    nlohmann::ordered_json j;
    j["format"] = "metades-meta-model";
    j["version"] = 1;
    j["k"] = model.k;
    j["k_p"] = model.k_p;
    j["n_inputs"] = model.n_inputs();
    j["priors"] = model.priors();
    j["means"] = model.means();
    j["variances"] = model.variances();
    j["variance_floor"] = model.variance_floor();
    j["validation_accuracy"] = model.validation_accuracy;
    return j.dump(2);
}

NaiveBayesModel meta_model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("meta_model_from_json: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "metades-meta-model")
        throw std::runtime_error("meta_model_from_json: not a meta-model file");
    if (j.value("version", 0) != 1)
        throw std::runtime_error("meta_model_from_json: unsupported version");

    const auto priors = j.at("priors").get<std::array<double, 2>>();
    auto means = j.at("means").get<std::vector<double>>();
    auto variances = j.at("variances").get<std::vector<double>>();
    const auto n_inputs = j.at("n_inputs").get<std::size_t>();
    if (means.size() != 2 * n_inputs || variances.size() != 2 * n_inputs)
        throw std::runtime_error("meta_model_from_json: parameter shape mismatch");
    NaiveBayesModel model(priors, std::move(means), std::move(variances),
                          j.at("variance_floor").get<double>());
    model.k = j.at("k").get<std::size_t>();
    model.k_p = j.at("k_p").get<std::size_t>();
    model.validation_accuracy = j.at("validation_accuracy").get<double>();
    return model;
}

void save_meta_model(const NaiveBayesModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_meta_model: cannot open " + path);
    out << meta_model_to_json(model) << '\n';
}

NaiveBayesModel load_meta_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_meta_model: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return meta_model_from_json(text);
}

}  // namespace metades
