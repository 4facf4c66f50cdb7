#include "metades/base.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "metades/rng.hpp"

namespace metades {

LinearClassifier::LinearClassifier(std::vector<double> weights, std::vector<double> biases,
                                   double calibration_slope)
    : weights_(std::move(weights)),
      biases_(std::move(biases)),
      calibration_slope_(calibration_slope) {
    if (biases_.size() < 2) throw std::invalid_argument("LinearClassifier: need at least 2 classes");
    if (weights_.empty() || weights_.size() % biases_.size() != 0)
        throw std::invalid_argument("LinearClassifier: weight matrix shape mismatch");
    if (!(calibration_slope_ > 0.0))
        throw std::invalid_argument("LinearClassifier: calibration slope must be positive");
    n_features_ = weights_.size() / biases_.size();
}

std::vector<double> LinearClassifier::scores(std::span<const double> x) const {
    if (x.size() != n_features_) throw std::invalid_argument("scores: feature count mismatch");
    std::vector<double> out(biases_.size());
    for (std::size_t c = 0; c < biases_.size(); ++c) {
        const double* w = weights_.data() + c * n_features_;
        double s = biases_[c];
        for (std::size_t d = 0; d < n_features_; ++d) s += w[d] * x[d];
        out[c] = s;
    }
    return out;
}

int LinearClassifier::classify(std::span<const double> x) const {
    const auto s = scores(x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.size(); ++c)
        if (s[c] > s[best]) best = c;
    return static_cast<int>(best);
}

std::vector<double> LinearClassifier::supports(std::span<const double> x) const {
    auto s = scores(x);
    double hi = *std::max_element(s.begin(), s.end());
    double sum = 0.0;
    for (double& v : s) {
        v = std::exp(calibration_slope_ * (v - hi));
        sum += v;
    }
    for (double& v : s) v /= sum;
    return s;
}

double LinearClassifier::decision_distance(std::span<const double> x) const {
    const int p = classify(x);
    const double* wp = weights_.data() + static_cast<std::size_t>(p) * n_features_;
    double best = std::numeric_limits<double>::infinity();
    for (int q = 0; q < n_classes(); ++q) {
        if (q == p) continue;
        const double* wq = weights_.data() + static_cast<std::size_t>(q) * n_features_;
        double margin = biases_[static_cast<std::size_t>(p)] - biases_[static_cast<std::size_t>(q)];
        double norm_sq = 0.0;
        for (std::size_t d = 0; d < n_features_; ++d) {
            const double diff = wp[d] - wq[d];
            margin += diff * x[d];
            norm_sq += diff * diff;
        }
        const double dist = norm_sq > 0.0 ? std::abs(margin) / std::sqrt(norm_sq) : 0.0;
        best = std::min(best, dist);
    }
    return best;
}

LinearClassifier train_perceptron(const Dataset& data, const PerceptronConfig& config,
                                  std::uint64_t seed) {
    if (config.epochs == 0) throw std::invalid_argument("train_perceptron: epochs must be positive");
    if (!(config.learning_rate > 0.0))
        throw std::invalid_argument("train_perceptron: learning rate must be positive");
    const std::size_t n = data.n_rows();
    const std::size_t d = data.n_features();
    const auto l = static_cast<std::size_t>(data.n_classes());

    std::vector<double> w(l * d, 0.0);
    std::vector<double> b(l, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (const std::size_t i : order) {
            const auto x = data.row(i);
            std::size_t pred = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < l; ++c) {
                double s = b[c];
                const double* wc = w.data() + c * d;
                for (std::size_t k = 0; k < d; ++k) s += wc[k] * x[k];
                if (s > best) {
                    best = s;
                    pred = c;
                }
            }
            const auto truth = static_cast<std::size_t>(data.label(i));
            if (pred == truth) continue;
            double* wt = w.data() + truth * d;
            double* wp = w.data() + pred * d;
            for (std::size_t k = 0; k < d; ++k) {
                wt[k] += config.learning_rate * x[k];
                wp[k] -= config.learning_rate * x[k];
            }
            b[truth] += config.learning_rate;
            b[pred] -= config.learning_rate;
        }
    }
    return LinearClassifier(std::move(w), std::move(b), config.calibration_slope);
}

namespace {

std::vector<std::size_t> draw_bootstrap(const Dataset& data, Rng& rng) {
    const std::size_t n = data.n_rows();
    const auto l = static_cast<std::size_t>(data.n_classes());
    std::vector<std::size_t> indices(n);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<bool> seen(l, false);
        for (std::size_t i = 0; i < n; ++i) {
            indices[i] = rng.next_below(n);
            seen[static_cast<std::size_t>(data.label(indices[i]))] = true;
        }
        if (std::all_of(seen.begin(), seen.end(), [](bool s) { return s; })) return indices;
    }
    throw std::runtime_error("bagging_pool: could not draw a bootstrap containing every class");
}

}  // namespace

Pool bagging_pool(const Dataset& data, std::size_t m, const PerceptronConfig& config,
                  std::uint64_t seed, Exec exec) {
    if (m == 0) throw std::invalid_argument("bagging_pool: pool size must be positive");
    Pool pool;
    pool.members.reserve(m);
    pool.trained_on.resize(m);

    // Bootstraps are drawn sequentially from per-member derived streams so the
    // parallel path trains on exactly the same resamples as the serial one.
    std::vector<std::uint64_t> train_seeds(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rng boot(derive_seed(seed, 2 * i));
        pool.trained_on[i] = draw_bootstrap(data, boot);
        train_seeds[i] = derive_seed(seed, 2 * i + 1);
    }

    std::vector<LinearClassifier> members(
        m, LinearClassifier(std::vector<double>(2 * data.n_features(), 0.0), {0.0, 0.0}));
    for_each_index(m, exec, [&](std::size_t i) {
        const Dataset sample = data.subset(pool.trained_on[i]);
        members[i] = train_perceptron(sample, config, train_seeds[i]);
    });
    pool.members = std::move(members);
    return pool;
}

std::string pool_to_json(const Pool& pool) {
    nlohmann::ordered_json j;
    j["format"] = "metades-pool";
    j["version"] = 1;
    j["pool_size"] = pool.size();
    j["n_features"] = pool.n_features();
    j["n_classes"] = pool.n_classes();
    auto members = nlohmann::ordered_json::array();
    for (const auto& member : pool.members) {
        nlohmann::ordered_json mj;
        mj["weights"] = member.weights();
        mj["biases"] = member.biases();
        mj["calibration_slope"] = member.calibration_slope();
        members.push_back(std::move(mj));
    }
    j["members"] = std::move(members);
    auto trained = nlohmann::ordered_json::array();
    for (const auto& indices : pool.trained_on) trained.push_back(indices);
    j["trained_on"] = std::move(trained);
    return j.dump(2);
}

Pool pool_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("pool_from_json: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "metades-pool")
        throw std::runtime_error("pool_from_json: not a pool file");
    if (j.value("version", 0) != 1)
        throw std::runtime_error("pool_from_json: unsupported version");

    Pool pool;
    const auto n_features = j.at("n_features").get<std::size_t>();
    const auto n_classes = j.at("n_classes").get<std::size_t>();
    for (const auto& mj : j.at("members")) {
        auto weights = mj.at("weights").get<std::vector<double>>();
        auto biases = mj.at("biases").get<std::vector<double>>();
        if (biases.size() != n_classes || weights.size() != n_classes * n_features)
            throw std::runtime_error("pool_from_json: member shape mismatch");
        pool.members.emplace_back(std::move(weights), std::move(biases),
                                  mj.at("calibration_slope").get<double>());
    }
    if (pool.members.empty()) throw std::runtime_error("pool_from_json: empty pool");
    if (j.contains("trained_on"))
        pool.trained_on = j.at("trained_on").get<std::vector<std::vector<std::size_t>>>();
    return pool;
}

void save_pool(const Pool& pool, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_pool: cannot open " + path);
    out << pool_to_json(pool) << '\n';
}

Pool load_pool(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pool: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return pool_from_json(text);
}

}  // namespace metades
