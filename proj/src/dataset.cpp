#include "metades/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <variant>

#include "metades/rng.hpp"

namespace metades {

Dataset::Dataset(std::vector<double> features, std::vector<int> labels, int n_classes,
                 std::vector<std::string> feature_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      n_classes_(n_classes),
      feature_names_(std::move(feature_names)) {
    if (n_classes_ < 1) throw std::invalid_argument("dataset: n_classes must be positive");
    if (labels_.empty()) throw std::invalid_argument("dataset: no rows");
    if (features_.size() % labels_.size() != 0)
        throw std::invalid_argument("dataset: feature matrix size not a multiple of row count");
    n_features_ = features_.size() / labels_.size();
    if (n_features_ == 0) throw std::invalid_argument("dataset: no feature columns");
    if (!feature_names_.empty() && feature_names_.size() != n_features_)
        throw std::invalid_argument("dataset: feature_names length mismatch");

    std::vector<bool> seen(static_cast<std::size_t>(n_classes_), false);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || labels_[i] >= n_classes_)
            throw std::invalid_argument("dataset: label out of range at row " + std::to_string(i));
        seen[static_cast<std::size_t>(labels_[i])] = true;
    }
    for (int c = 0; c < n_classes_; ++c) {
        if (!seen[static_cast<std::size_t>(c)])
            throw std::invalid_argument("dataset: class " + std::to_string(c) + " has no samples");
    }
    for (double v : features_) {
        if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature value");
    }
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes_), 0);
    for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<double> features;
    features.reserve(rows.size() * n_features_);
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) {
        const auto src = row(r);
        features.insert(features.end(), src.begin(), src.end());
        labels.push_back(labels_[r]);
    }
    return Dataset(std::move(features), std::move(labels), n_classes_, feature_names_);
}

namespace {

constexpr std::size_t kLastColumn = static_cast<std::size_t>(-1);

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool parse_number(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

Dataset load_csv_impl(const std::string& path,
                      const std::variant<std::size_t, std::string>& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        rows.push_back(split_line(line));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: '" + path + "' has no data rows");

    // Header iff any cell of the first row is non-numeric.
    bool has_header = false;
    for (const auto& cell : rows.front()) {
        double unused;
        if (!parse_number(cell, unused)) {
            has_header = true;
            break;
        }
    }

    std::vector<std::string> header;
    std::size_t first_data_row = 0;
    if (has_header) {
        for (const auto& cell : rows.front()) header.push_back(trim(cell));
        first_data_row = 1;
        if (rows.size() == 1) throw std::runtime_error("load_csv: header but no data rows");
    }

    const std::size_t n_columns = rows[first_data_row].size();
    if (n_columns < 2) throw std::runtime_error("load_csv: need at least one feature and a label column");

    std::size_t label_idx;
    if (std::holds_alternative<std::size_t>(label_column)) {
        label_idx = std::get<std::size_t>(label_column);
        if (label_idx == kLastColumn) label_idx = n_columns - 1;
    } else {
        const std::string& name = std::get<std::string>(label_column);
        if (!has_header)
            throw std::runtime_error("load_csv: label column named '" + name + "' but file has no header");
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw std::runtime_error("load_csv: no column named '" + name + "'");
        label_idx = static_cast<std::size_t>(it - header.begin());
    }
    if (label_idx >= n_columns)
        throw std::runtime_error("load_csv: label column index " + std::to_string(label_idx) +
                                 " out of range (file has " + std::to_string(n_columns) + " columns)");

    std::vector<double> features;
    std::vector<int> labels;
    std::unordered_map<std::string, int> label_codes;  // first-appearance encoding
    std::vector<std::string> feature_names;
    if (has_header) {
        for (std::size_t c = 0; c < n_columns; ++c)
            if (c != label_idx) feature_names.push_back(header[c]);
    }

    for (std::size_t r = first_data_row; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != n_columns)
            throw std::runtime_error("load_csv: row " + std::to_string(r + 1) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(n_columns));
        for (std::size_t c = 0; c < n_columns; ++c) {
            if (c == label_idx) {
                const std::string key = trim(cells[c]);
                auto [it, inserted] = label_codes.try_emplace(key, static_cast<int>(label_codes.size()));
                labels.push_back(it->second);
            } else {
                double value;
                if (!parse_number(cells[c], value))
                    throw std::runtime_error("load_csv: non-numeric feature cell at row " +
                                             std::to_string(r + 1) + ", column " + std::to_string(c + 1));
                features.push_back(value);
            }
        }
    }

    if (label_codes.size() < 2)
        throw std::runtime_error("load_csv: '" + path + "' contains a single class");

    return Dataset(std::move(features), std::move(labels), static_cast<int>(label_codes.size()),
                   std::move(feature_names));
}

}  // namespace

Dataset load_csv(const std::string& path, std::size_t label_column) {
    return load_csv_impl(path, label_column);
}

Dataset load_csv(const std::string& path) { return load_csv_impl(path, kLastColumn); }

Dataset load_csv(const std::string& path, const std::string& label_column) {
    return load_csv_impl(path, label_column);
}

std::vector<std::vector<std::size_t>> stratified_split_indices(
    std::span<const int> labels, int n_classes, std::span<const double> fractions,
    std::uint64_t seed) {
    if (fractions.empty()) throw std::invalid_argument("stratified_split: no fractions");
    double total = 0.0;
    for (double f : fractions) {
        if (f <= 0.0) throw std::invalid_argument("stratified_split: fractions must be positive");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("stratified_split: fractions must sum to 1");

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);

    const std::size_t n_parts = fractions.size();
    for (int c = 0; c < n_classes; ++c) {
        if (by_class[static_cast<std::size_t>(c)].size() < n_parts)
            throw std::invalid_argument("stratified_split: class " + std::to_string(c) + " has " +
                                        std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
                                        " samples, fewer than " + std::to_string(n_parts) + " parts");
    }

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> parts(n_parts);
    for (int c = 0; c < n_classes; ++c) {
        auto& pool = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(pool);

        // Largest-remainder apportionment keeps each part within one sample
        // of fraction * class size.
        const auto class_size = static_cast<double>(pool.size());
        std::vector<std::size_t> counts(n_parts);
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        for (std::size_t p = 0; p < n_parts; ++p) {
            const double ideal = fractions[p] * class_size;
            counts[p] = static_cast<std::size_t>(std::floor(ideal));
            assigned += counts[p];
            remainders.emplace_back(ideal - std::floor(ideal), p);
        }
        std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t k = 0; k < pool.size() - assigned; ++k)
            ++counts[remainders[k].second];

        std::size_t cursor = 0;
        for (std::size_t p = 0; p < n_parts; ++p) {
            parts[p].insert(parts[p].end(), pool.begin() + cursor, pool.begin() + cursor + counts[p]);
            cursor += counts[p];
        }
    }

    for (auto& part : parts) std::sort(part.begin(), part.end());
    return parts;
}

std::vector<Dataset> stratified_split(const Dataset& data, std::span<const double> fractions,
                                      std::uint64_t seed) {
    const auto parts = stratified_split_indices(data.labels(), data.n_classes(), fractions, seed);
    std::vector<Dataset> out;
    out.reserve(parts.size());
    for (const auto& part : parts) out.push_back(data.subset(part));
    return out;
}

Partition make_partition(const Dataset& data, std::uint64_t seed) {
    const double outer[] = {0.5, 0.25, 0.25};
    auto coarse = stratified_split(data, outer, derive_seed(seed, 0));
    const double half[] = {0.5, 0.5};
    auto training_halves = stratified_split(coarse[0], half, derive_seed(seed, 1));
    return Partition{std::move(training_halves[0]), std::move(training_halves[1]),
                     std::move(coarse[1]), std::move(coarse[2])};
}

Dataset generate_banana(std::size_t n, std::uint64_t seed, double noise) {
    if (n < 4) throw std::invalid_argument("generate_banana: need at least 4 samples");
    const double radius = 5.0;
    const std::size_t n0 = n / 2;

    Rng rng(seed);
    std::vector<double> features(2 * n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool first = i < n0;
        const double u = rng.next_double();
        const double angle = first ? 0.125 * M_PI + u * 1.25 * M_PI
                                   : 0.375 * M_PI - u * 1.25 * M_PI;
        double x = radius * std::sin(angle) + rng.next_normal() * noise;
        double y = radius * std::cos(angle) + rng.next_normal() * noise;
        if (!first) {
            x -= 0.75 * radius;
            y -= 0.75 * radius;
        }
        features[2 * i] = x;
        features[2 * i + 1] = y;
        labels[i] = first ? 0 : 1;
    }
    return Dataset(std::move(features), std::move(labels), 2, {"x", "y"});
}

Dataset generate_lithuanian(std::size_t n, std::uint64_t seed, double noise) {
    if (n < 4) throw std::invalid_argument("generate_lithuanian: need at least 4 samples");
    const double radius = 6.0;
    const std::size_t n0 = n / 2;

    // Two opposing crescent spines; the second class is noisier.
    Rng rng(seed);
    std::vector<double> features(2 * n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool first = i < n0;
        const double t = rng.next_double() * M_PI;
        const double spread = first ? 0.8 * noise : 1.2 * noise;
        double x, y;
        if (first) {
            x = radius * std::cos(t);
            y = radius * std::sin(t);
        } else {
            x = radius - radius * std::cos(t);
            y = 0.5 * radius - radius * std::sin(t);
        }
        features[2 * i] = x + rng.next_normal() * spread;
        features[2 * i + 1] = y + rng.next_normal() * spread;
        labels[i] = first ? 0 : 1;
    }
    return Dataset(std::move(features), std::move(labels), 2, {"x", "y"});
}

}  // namespace metades
