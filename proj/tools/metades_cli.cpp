#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "metades/bench.hpp"
#include "metades/stats.hpp"

namespace {

int command_run(const std::string& config_path, bool serial) {
    const metades::ExperimentConfig config = metades::load_experiment_config(config_path);
    const metades::Exec exec = serial ? metades::Exec::serial : metades::Exec::parallel;
    const metades::RunResult result = metades::run_experiment(config, exec);

    std::printf("dataset: %s (%s, %zu replications, pool %zu)\n", result.dataset_name.c_str(),
                config.dataset.c_str(), config.replications, config.pool_size);
    std::printf("%-14s %s\n", "method", "mean(std)%");
    for (std::size_t m = 0; m < result.methods.size(); ++m)
        std::printf("%-14s %.2f(%.2f)\n", result.methods[m].c_str(),
                    result.mean_accuracy[m] * 100.0, result.stddev_accuracy[m] * 100.0);
    if (!config.out_dir.empty())
        std::printf("result written to %s/%s_result.json\n", config.out_dir.c_str(),
                    config.name.c_str());
    return 0;
}

int command_tables(const std::vector<std::string>& inputs, const std::string& format,
                   const std::string& out_path, const std::string& wilcoxon_reference,
                   bool friedman) {
    std::vector<metades::RunResult> results;
    results.reserve(inputs.size());
    for (const auto& path : inputs) results.push_back(metades::load_run_result(path));

    const metades::AccuracyTable table = metades::build_accuracy_table(results);
    metades::TableOptions options;
    options.friedman_row = friedman;
    options.wilcoxon_reference = wilcoxon_reference;
    const std::string rendered = format == "csv" ? metades::render_table_csv(table, options)
                                                 : metades::render_table_markdown(table, options);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << rendered;
        std::printf("table written to %s\n", out_path.c_str());
    }
    return 0;
}

const char* direction_name(metades::WilcoxonDirection direction) {
    switch (direction) {
        case metades::WilcoxonDirection::a_greater: return "first column higher";
        case metades::WilcoxonDirection::b_greater: return "second column higher";
        case metades::WilcoxonDirection::none: return "no direction";
    }
    return "?";
}

std::size_t find_method(const metades::AccuracyTable& table, const std::string& name) {
    for (std::size_t m = 0; m < table.methods.size(); ++m)
        if (table.methods[m] == name) return m;
    throw std::runtime_error("no method column named '" + name + "'");
}

int command_stats(const std::string& table_path, const std::string& test, const std::string& a,
                  const std::string& b) {
    const metades::AccuracyTable table = metades::load_accuracy_table_csv(table_path);
    if (test == "friedman") {
        const auto ranks = metades::friedman_mean_ranks(table);
        for (std::size_t m = 0; m < table.methods.size(); ++m)
            std::printf("%-14s %.4f\n", table.methods[m].c_str(), ranks[m]);
        return 0;
    }
    if (test == "kruskal") {
        std::vector<std::vector<double>> groups;
        groups.reserve(table.methods.size());
        for (std::size_t m = 0; m < table.methods.size(); ++m)
            groups.push_back(table.method_column(m));
        const auto result = metades::kruskal_wallis(groups);
        std::printf("H = %.6f\np = %.6g\n", result.h, result.p_value);
        return 0;
    }
    // wilcoxon
    if (a.empty() || b.empty())
        throw std::runtime_error("--test wilcoxon requires --a and --b method names");
    const auto column_a = table.method_column(find_method(table, a));
    const auto column_b = table.method_column(find_method(table, b));
    const auto result = metades::wilcoxon_signed_rank(column_a, column_b);
    std::printf("n used = %zu\nW+ = %.1f\nW- = %.1f\nW = %.1f\np = %.6g (%s)\ndirection: %s\n",
                result.n_used, result.w_plus, result.w_minus, result.w, result.p_value,
                result.exact ? "exact" : "normal approximation", direction_name(result.direction));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"META-DES dynamic ensemble selection benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    bool serial = false;
    auto* run = app.add_subcommand("run", "Run a benchmark experiment from a config file");
    run->add_option("--config", config_path, "flat key=value config file")->required();
    run->add_flag("--serial", serial, "use the serial reference path instead of OpenMP");

    std::vector<std::string> inputs;
    std::string format = "md";
    std::string out_path;
    std::string wilcoxon_reference;
    bool no_friedman = false;
    auto* tables = app.add_subcommand("tables", "Render a comparison table from run results");
    tables->add_option("--in", inputs, "run-result JSON files")->required()->expected(-1);
    tables->add_option("--format", format, "md or csv")
        ->check(CLI::IsMember({"md", "csv"}));
    tables->add_option("--out", out_path, "output file (default: stdout)");
    tables->add_option("--wilcoxon-ref", wilcoxon_reference,
                       "method column to compare against every other column");
    tables->add_flag("--no-friedman", no_friedman, "omit the Friedman rank row");

    std::string table_path;
    std::string test;
    std::string method_a;
    std::string method_b;
    auto* stats = app.add_subcommand("stats", "Statistical tests over an accuracy-table CSV");
    stats->add_option("--table", table_path, "accuracy table CSV")->required();
    stats->add_option("--test", test, "wilcoxon, friedman or kruskal")
        ->required()
        ->check(CLI::IsMember({"wilcoxon", "friedman", "kruskal"}));
    stats->add_option("--a", method_a, "first method column (wilcoxon)");
    stats->add_option("--b", method_b, "second method column (wilcoxon)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return command_run(config_path, serial);
        if (tables->parsed())
            return command_tables(inputs, format, out_path, wilcoxon_reference, !no_friedman);
        return command_stats(table_path, test, method_a, method_b);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
