#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace metades {

/// Average ranks (1-based, ascending) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

struct KruskalWallisResult {
    double h = 0.0;       // tie-corrected statistic
    double p_value = 1.0; // chi-squared upper tail, g-1 degrees of freedom
};

KruskalWallisResult kruskal_wallis(std::span<const std::vector<double>> groups);

enum class WilcoxonDirection { none, a_greater, b_greater };

struct WilcoxonResult {
    double w = 0.0;        // min(w_plus, w_minus)
    double w_plus = 0.0;   // rank sum of pairs with a > b
    double w_minus = 0.0;
    double p_value = 1.0;  // two-sided
    WilcoxonDirection direction = WilcoxonDirection::none;
    std::size_t n_used = 0;  // pairs left after dropping zero differences
    bool exact = false;      // exact distribution (n_used <= 25) vs normal approximation
};

/// Paired signed-rank test. Zero differences are dropped; tied absolute
/// differences share average ranks. For n_used <= 25 the p-value comes from
/// the exact sign-flip distribution conditioned on the observed ranks,
/// otherwise from the normal approximation with tie and continuity
/// corrections.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Mean/stddev accuracy matrix, datasets by methods, in percent.
struct AccuracyTable {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    std::vector<double> means;    // row-major, datasets x methods
    std::vector<double> stddevs;  // same shape; zero when unknown

    std::size_t n_methods() const { return methods.size(); }
    std::size_t n_datasets() const { return datasets.size(); }
    double mean(std::size_t dataset, std::size_t method) const {
        return means[dataset * methods.size() + method];
    }
    double stddev(std::size_t dataset, std::size_t method) const {
        return stddevs[dataset * methods.size() + method];
    }
    std::vector<double> method_column(std::size_t method) const;
};

void validate(const AccuracyTable& table);

/// Per-method mean rank across datasets: within each dataset the best
/// (highest-mean) method gets rank 1, ties averaged.
std::vector<double> friedman_mean_ranks(const AccuracyTable& table);

/// CSV with methods as columns and datasets as rows; cells are either
/// "mean(std)" or a bare mean.
AccuracyTable load_accuracy_table_csv(const std::string& path);
void save_accuracy_table_csv(const AccuracyTable& table, const std::string& path,
                             int precision = 2);

}  // namespace metades
