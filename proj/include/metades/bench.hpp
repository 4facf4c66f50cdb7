#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "metades/base.hpp"
#include "metades/baselines.hpp"
#include "metades/dataset.hpp"
#include "metades/des.hpp"
#include "metades/parallel.hpp"
#include "metades/stats.hpp"

namespace metades {

/// Full description of one benchmark run. Loadable from a flat key=value file
/// (one pair per line, '#' comments); every field has a config key of the
/// same name documented in the README.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string dataset = "banana";  // "banana", "lithuanian" or "csv"
    std::string csv_path;
    std::string label_column;  // "": last column; digits: index; otherwise header name
    std::size_t n = 1000;      // synthetic sample count
    double noise = 1.0;
    std::size_t replications = 20;
    std::size_t pool_size = 100;
    PerceptronConfig perceptron;
    DesConfig des;  // mode field is ignored; `modes` below selects what runs
    std::vector<CombinationMode> modes{CombinationMode::selection, CombinationMode::weighting,
                                       CombinationMode::hybrid};
    std::vector<Baseline> baselines;
    BaselineConfig baseline_config;
    bool include_majority_vote = true;
    bool normalize = true;    // min-max fitted on the pool-training part only
    bool diagnostics = false;  // per-query JSON-lines, needs out_dir
    std::uint64_t master_seed = 42;
    std::string out_dir;  // "": keep results in memory only
};

void validate(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_string(const ExperimentConfig& config);

/// Report column order: META-DES modes, then the plain pool vote, then
/// baselines.
std::vector<std::string> method_names(const ExperimentConfig& config);

std::uint64_t replication_seed(const ExperimentConfig& config, std::size_t replication);

/// The experiment's dataset: synthetic sets are generated from a seed derived
/// from the master seed (shared by every replication), CSV sets are loaded
/// from disk.
Dataset load_experiment_dataset(const ExperimentConfig& config);

/// Min-max feature scaling fitted on one partition and applied to the rest;
/// constant features map to 0.
struct MinMaxScaler {
    std::vector<double> mins;
    std::vector<double> ranges;

    static MinMaxScaler fit(const Dataset& data);
    Dataset transform(const Dataset& data) const;
};

struct ReplicationOutcome {
    std::uint64_t seed = 0;
    std::vector<double> accuracies;  // method_names order
    double meta_validation_accuracy = 0.0;
};

/// One full replication: split, pool, meta-training, evaluation of every
/// configured method. Pure function of (config, data, replication index), so
/// any replication can be reproduced in isolation.
ReplicationOutcome run_single_replication(const ExperimentConfig& config, const Dataset& data,
                                          std::size_t replication, Exec exec = Exec::parallel,
                                          std::ostream* diagnostics = nullptr);
ReplicationOutcome run_single_replication(const ExperimentConfig& config, std::size_t replication,
                                          Exec exec = Exec::parallel);

struct RunResult {
    std::string dataset_name;
    std::vector<std::string> methods;
    std::vector<std::uint64_t> replication_seeds;
    std::vector<std::vector<double>> accuracies;  // replications x methods, in [0,1]
    std::vector<double> mean_accuracy;            // per method
    std::vector<double> stddev_accuracy;          // sample stddev (n-1)
    std::vector<double> meta_validation_accuracies;  // per replication
    std::vector<std::string> diagnostics_paths;
    ExperimentConfig config;
};

RunResult run_experiment(const ExperimentConfig& config, Exec exec = Exec::parallel);

std::string run_result_to_json(const RunResult& result);
RunResult run_result_from_json(const std::string& text);
void save_run_result(const RunResult& result, const std::string& path);
RunResult load_run_result(const std::string& path);

/// One row per run (dataset), one column per method, cells in percent. Every
/// run must share the same method list.
AccuracyTable build_accuracy_table(std::span<const RunResult> results);

struct TableOptions {
    bool friedman_row = true;
    std::string wilcoxon_reference;  // method name; "" disables the Wilcoxon row
};

std::string render_table_markdown(const AccuracyTable& table, const TableOptions& options = {});
std::string render_table_csv(const AccuracyTable& table, const TableOptions& options = {});

/// Reads the data rows of a rendered markdown table back (statistics rows are
/// skipped); values carry the rendered precision.
AccuracyTable parse_table_markdown(const std::string& text);

}  // namespace metades
