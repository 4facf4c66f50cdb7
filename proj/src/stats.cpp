#include "metades/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace metades {

namespace {

void require_finite(std::span<const double> values, const char* who) {
    for (const double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite value");
}

/// Sum of t^3 - t over tie groups of a sorted sequence.
double tie_term(std::span<const double> sorted) {
    double sum = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

double chi_squared_upper_tail(double x, double df) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double normal_two_sided_p(double z) {
    return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    require_finite(values, "average_ranks");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
        i = j;
    }
    return ranks;
}

KruskalWallisResult kruskal_wallis(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw std::invalid_argument("kruskal_wallis: need at least 2 groups");
    std::vector<double> pooled;
    for (const auto& g : groups) {
        if (g.empty()) throw std::invalid_argument("kruskal_wallis: empty group");
        require_finite(g, "kruskal_wallis");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    const auto n = static_cast<double>(pooled.size());
    const auto ranks = average_ranks(pooled);

    double h = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
        h += rank_sum * rank_sum / static_cast<double>(g.size());
        offset += g.size();
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    const double correction = 1.0 - tie_term(sorted) / (n * n * n - n);
    if (correction <= 0.0) return {0.0, 1.0};  // every pooled value identical
    h /= correction;
    h = std::max(h, 0.0);

    const auto df = static_cast<double>(groups.size() - 1);
    return {h, chi_squared_upper_tail(h, df)};
}

namespace {

/// Exact two-sided p-value of the sign-flip distribution conditioned on the
/// observed (tie-averaged) ranks. Works on doubled ranks so every subset sum
/// is an integer.
double wilcoxon_exact_p(std::span<const double> ranks, double w_plus) {
    const std::size_t n = ranks.size();
    const std::size_t total2 = n * (n + 1);  // sum of doubled ranks
    std::vector<double> dp(total2 + 1, 0.0);
    dp[0] = 1.0;
    for (const double r : ranks) {
        const auto r2 = static_cast<std::size_t>(std::llround(2.0 * r));
        for (std::size_t s = total2; s >= r2; --s) dp[s] += dp[s - r2];
    }
    const double mu2 = static_cast<double>(total2) / 2.0;
    const double dev = std::abs(std::llround(2.0 * w_plus) - mu2);
    double tail = 0.0;
    for (std::size_t s = 0; s <= total2; ++s)
        if (std::abs(static_cast<double>(s) - mu2) >= dev) tail += dp[s];
    return tail / std::pow(2.0, static_cast<double>(n));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("wilcoxon_signed_rank: length mismatch");
    if (a.empty()) throw std::invalid_argument("wilcoxon_signed_rank: empty input");
    require_finite(a, "wilcoxon_signed_rank");
    require_finite(b, "wilcoxon_signed_rank");

    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }

    WilcoxonResult result;
    result.n_used = diffs.size();
    if (diffs.empty()) return result;  // every pair tied: no evidence either way

    std::vector<double> abs_diffs(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) abs_diffs[i] = std::abs(diffs[i]);
    const auto ranks = average_ranks(abs_diffs);
    for (std::size_t i = 0; i < diffs.size(); ++i)
        (diffs[i] > 0.0 ? result.w_plus : result.w_minus) += ranks[i];
    result.w = std::min(result.w_plus, result.w_minus);
    if (result.w_plus > result.w_minus)
        result.direction = WilcoxonDirection::a_greater;
    else if (result.w_minus > result.w_plus)
        result.direction = WilcoxonDirection::b_greater;

    const auto n = static_cast<double>(diffs.size());
    if (diffs.size() <= 25) {
        result.exact = true;
        result.p_value = wilcoxon_exact_p(ranks, result.w_plus);
        return result;
    }

    const double mu = n * (n + 1.0) / 4.0;
    std::vector<double> sorted = abs_diffs;
    std::sort(sorted.begin(), sorted.end());
    const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(sorted) / 48.0;
    if (variance <= 0.0) {
        result.p_value = 1.0;
        return result;
    }
    const double z = (result.w - mu + 0.5) / std::sqrt(variance);
    result.p_value = normal_two_sided_p(z);
    return result;
}

std::vector<double> AccuracyTable::method_column(std::size_t method) const {
    std::vector<double> column(datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) column[d] = mean(d, method);
    return column;
}

void validate(const AccuracyTable& table) {
    if (table.methods.empty() || table.datasets.empty())
        throw std::invalid_argument("AccuracyTable: empty methods or datasets");
    const std::size_t cells = table.methods.size() * table.datasets.size();
    if (table.means.size() != cells || table.stddevs.size() != cells)
        throw std::invalid_argument("AccuracyTable: matrix shape mismatch");
    for (const double v : table.means)
        if (!(v >= 0.0 && v <= 100.0))
            throw std::invalid_argument("AccuracyTable: mean outside [0, 100]");
    for (const double v : table.stddevs)
        if (!(v >= 0.0 && v <= 100.0))
            throw std::invalid_argument("AccuracyTable: stddev outside [0, 100]");
}

std::vector<double> friedman_mean_ranks(const AccuracyTable& table) {
    validate(table);
    std::vector<double> mean_ranks(table.n_methods(), 0.0);
    std::vector<double> negated(table.n_methods());
    for (std::size_t d = 0; d < table.n_datasets(); ++d) {
        for (std::size_t m = 0; m < table.n_methods(); ++m) negated[m] = -table.mean(d, m);
        const auto ranks = average_ranks(negated);  // rank 1 = highest accuracy
        for (std::size_t m = 0; m < table.n_methods(); ++m) mean_ranks[m] += ranks[m];
    }
    for (double& r : mean_ranks) r /= static_cast<double>(table.n_datasets());
    return mean_ranks;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& text, std::size_t row, std::size_t col) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &consumed);
    } catch (const std::exception&) {
        consumed = 0;
    }
    if (consumed != text.size() || text.empty())
        throw std::runtime_error("accuracy table: bad numeric cell at row " +
                                 std::to_string(row) + ", column " + std::to_string(col));
    return value;
}

}  // namespace

AccuracyTable load_accuracy_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_accuracy_table_csv: cannot open " + path);

    AccuracyTable table;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_accuracy_table_csv: empty file " + path);
    auto header = split_csv_line(line);
    if (header.size() < 2)
        throw std::runtime_error("load_accuracy_table_csv: header needs at least one method");
    for (std::size_t i = 1; i < header.size(); ++i) table.methods.push_back(trim(header[i]));

    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("load_accuracy_table_csv: row " + std::to_string(row_number) +
                                     " has " + std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        table.datasets.push_back(trim(cells[0]));
        for (std::size_t i = 1; i < cells.size(); ++i) {
            const std::string cell = trim(cells[i]);
            const auto open = cell.find('(');
            if (open == std::string::npos) {
                table.means.push_back(parse_number(cell, row_number, i + 1));
                table.stddevs.push_back(0.0);
            } else {
                if (cell.back() != ')')
                    throw std::runtime_error("accuracy table: unclosed parenthesis at row " +
                                             std::to_string(row_number) + ", column " +
                                             std::to_string(i + 1));
                table.means.push_back(parse_number(cell.substr(0, open), row_number, i + 1));
                table.stddevs.push_back(parse_number(
                    cell.substr(open + 1, cell.size() - open - 2), row_number, i + 1));
            }
        }
    }
    validate(table);
    return table;
}

void save_accuracy_table_csv(const AccuracyTable& table, const std::string& path, int precision) {
    validate(table);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_accuracy_table_csv: cannot open " + path);
    out << "dataset";
    for (const auto& m : table.methods) out << ',' << m;
    out << '\n';
    out.setf(std::ios::fixed);
    out.precision(precision);
    for (std::size_t d = 0; d < table.n_datasets(); ++d) {
        out << table.datasets[d];
        for (std::size_t m = 0; m < table.n_methods(); ++m)
            out << ',' << table.mean(d, m) << '(' << table.stddev(d, m) << ')';
        out << '\n';
    }
}

}  // namespace metades
