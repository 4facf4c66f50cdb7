#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "metades/base.hpp"
#include "metades/dataset.hpp"
#include "metades/rng.hpp"

namespace metades::testing {

/// Uniform features in [0, 1) with every class guaranteed present.
inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d, int l) {
    std::vector<double> features(n * d);
    for (double& v : features) v = rng.next_double();
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = static_cast<int>(i % static_cast<std::size_t>(l));
    rng.shuffle(labels);
    return Dataset(std::move(features), std::move(labels), l);
}

/// Random linear member with weights and biases in [-1, 1).
inline LinearClassifier random_member(Rng& rng, std::size_t d, int l) {
    std::vector<double> weights(static_cast<std::size_t>(l) * d);
    std::vector<double> biases(static_cast<std::size_t>(l));
    for (double& w : weights) w = 2.0 * rng.next_double() - 1.0;
    for (double& b : biases) b = 2.0 * rng.next_double() - 1.0;
    return LinearClassifier(std::move(weights), std::move(biases));
}

inline Pool random_pool(Rng& rng, std::size_t m, std::size_t d, int l) {
    Pool pool;
    for (std::size_t i = 0; i < m; ++i) pool.members.push_back(random_member(rng, d, l));
    return pool;
}

/// Two well-separated Gaussian-free blobs around (0,0) and (10,10).
inline Dataset blob_dataset(Rng& rng, std::size_t per_class) {
    std::vector<double> features;
    std::vector<int> labels;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const bool second = i >= per_class;
        const double cx = second ? 10.0 : 0.0;
        features.push_back(cx + rng.next_double() - 0.5);
        features.push_back(cx + rng.next_double() - 0.5);
        labels.push_back(second ? 1 : 0);
    }
    return Dataset(std::move(features), std::move(labels), 2);
}

/// Fresh path under the system temp directory; removed on destruction.
class TempFile {
public:
    explicit TempFile(const std::string& name)
        : path_((std::filesystem::temp_directory_path() / name).string()) {
        std::filesystem::remove(path_);
    }
    ~TempFile() { std::filesystem::remove(path_); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_((std::filesystem::temp_directory_path() / name).string()) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace metades::testing
