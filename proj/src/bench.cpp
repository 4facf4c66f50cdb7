#include "metades/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "metades/meta_features.hpp"
#include "metades/naive_bayes.hpp"
#include "metades/rng.hpp"

namespace metades {

namespace {

/// Seed stream for synthetic dataset generation, far above any plausible
/// replication index so the two derive_seed families never collide.
constexpr std::uint64_t kDatasetStream = 0xDA7A5EEDull;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw std::invalid_argument("config key '" + key + "': bad value '" + value + "'");
}

double parse_double(const std::string& value, const std::string& key) {
    std::size_t consumed = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &consumed);
    } catch (const std::exception&) {
        bad_value(key, value);
    }
    if (consumed != value.size() || value.empty()) bad_value(key, value);
    return out;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    std::size_t consumed = 0;
    unsigned long long out = 0;
    try {
        out = std::stoull(value, &consumed);
    } catch (const std::exception&) {
        bad_value(key, value);
    }
    if (consumed != value.size() || value.empty()) bad_value(key, value);
    return out;
}

std::size_t parse_size(const std::string& value, const std::string& key) {
    return static_cast<std::size_t>(parse_u64(value, key));
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    bad_value(key, value);
}

std::vector<std::string> features_to_list(const MetaFeatureOptions& options) {
    std::vector<std::string> names;
    if (options.use_f1) names.emplace_back("f1");
    if (options.use_f2) names.emplace_back("f2");
    if (options.use_f3) names.emplace_back("f3");
    if (options.use_f4) names.emplace_back("f4");
    if (options.use_f5) names.emplace_back("f5");
    return names;
}

MetaFeatureOptions features_from_list(const std::vector<std::string>& names) {
    MetaFeatureOptions options{false, false, false, false, false};
    for (const auto& name : names) {
        if (name == "f1") options.use_f1 = true;
        else if (name == "f2") options.use_f2 = true;
        else if (name == "f3") options.use_f3 = true;
        else if (name == "f4") options.use_f4 = true;
        else if (name == "f5") options.use_f5 = true;
        else throw std::invalid_argument("config: unknown meta-feature '" + name + "'");
    }
    if (names.empty()) throw std::invalid_argument("config: feature list cannot be empty");
    return options;
}

std::vector<std::string> modes_to_list(const std::vector<CombinationMode>& modes) {
    std::vector<std::string> names;
    names.reserve(modes.size());
    for (const CombinationMode m : modes) names.push_back(to_string(m));
    return names;
}

std::vector<std::string> baselines_to_list(const std::vector<Baseline>& baselines) {
    std::vector<std::string> names;
    names.reserve(baselines.size());
    for (const Baseline b : baselines) names.push_back(to_string(b));
    return names;
}

std::vector<Baseline> baselines_from_value(const std::string& value) {
    if (value == "none" || value.empty()) return {};
    std::vector<Baseline> baselines;
    if (value == "all") {
        const auto all = all_baselines();
        return {all.begin(), all.end()};
    }
    for (const auto& name : split_list(value)) baselines.push_back(baseline_from_string(name));
    return baselines;
}

std::string join(const std::vector<std::string>& items, const std::string& sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += sep;
        out += items[i];
    }
    return out;
}

std::string double_to_string(double value) { return nlohmann::json(value).dump(); }

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
    if (key == "name") c.name = value;
    else if (key == "dataset") c.dataset = value;
    else if (key == "csv_path") c.csv_path = value;
    else if (key == "label_column") c.label_column = value;
    else if (key == "n") c.n = parse_size(value, key);
    else if (key == "noise") c.noise = parse_double(value, key);
    else if (key == "replications") c.replications = parse_size(value, key);
    else if (key == "pool_size") c.pool_size = parse_size(value, key);
    else if (key == "epochs") c.perceptron.epochs = parse_size(value, key);
    else if (key == "learning_rate") c.perceptron.learning_rate = parse_double(value, key);
    else if (key == "calibration_slope") c.perceptron.calibration_slope = parse_double(value, key);
    else if (key == "k") {
        c.des.k = parse_size(value, key);
        c.baseline_config.k = c.des.k;  // one neighborhood size for all methods
    } else if (key == "k_p") c.des.k_p = parse_size(value, key);
    else if (key == "h_c") c.des.h_c = parse_double(value, key);
    else if (key == "upsilon") c.des.upsilon = parse_double(value, key);
    else if (key == "features") c.des.features = features_from_list(split_list(value));
    else if (key == "modes") {
        c.modes.clear();
        for (const auto& name : split_list(value))
            c.modes.push_back(combination_mode_from_string(name));
    } else if (key == "baselines") c.baselines = baselines_from_value(value);
    else if (key == "include_majority_vote") c.include_majority_vote = parse_bool(value, key);
    else if (key == "mcb_threshold") c.baseline_config.mcb_threshold = parse_double(value, key);
    else if (key == "knop_k") c.baseline_config.k_profiles = parse_size(value, key);
    else if (key == "mla_epsilon") c.baseline_config.mla_epsilon = parse_double(value, key);
    else if (key == "normalize") c.normalize = parse_bool(value, key);
    else if (key == "diagnostics") c.diagnostics = parse_bool(value, key);
    else if (key == "master_seed") c.master_seed = parse_u64(value, key);
    else if (key == "out_dir") c.out_dir = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

template <typename T>
void require_no_duplicates(const std::vector<T>& items, const char* what) {
    std::set<T> seen(items.begin(), items.end());
    if (seen.size() != items.size())
        throw std::invalid_argument(std::string("config: duplicate entries in ") + what);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["dataset"] = c.dataset;
    j["csv_path"] = c.csv_path;
    j["label_column"] = c.label_column;
    j["n"] = c.n;
    j["noise"] = c.noise;
    j["replications"] = c.replications;
    j["pool_size"] = c.pool_size;
    j["epochs"] = c.perceptron.epochs;
    j["learning_rate"] = c.perceptron.learning_rate;
    j["calibration_slope"] = c.perceptron.calibration_slope;
    j["k"] = c.des.k;
    j["k_p"] = c.des.k_p;
    j["h_c"] = c.des.h_c;
    j["upsilon"] = c.des.upsilon;
    j["features"] = features_to_list(c.des.features);
    j["modes"] = modes_to_list(c.modes);
    j["baselines"] = baselines_to_list(c.baselines);
    j["include_majority_vote"] = c.include_majority_vote;
    j["mcb_threshold"] = c.baseline_config.mcb_threshold;
    j["knop_k"] = c.baseline_config.k_profiles;
    j["mla_epsilon"] = c.baseline_config.mla_epsilon;
    j["normalize"] = c.normalize;
    j["diagnostics"] = c.diagnostics;
    j["master_seed"] = c.master_seed;
    j["out_dir"] = c.out_dir;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.name = j.at("name").get<std::string>();
    c.dataset = j.at("dataset").get<std::string>();
    c.csv_path = j.at("csv_path").get<std::string>();
    c.label_column = j.at("label_column").get<std::string>();
    c.n = j.at("n").get<std::size_t>();
    c.noise = j.at("noise").get<double>();
    c.replications = j.at("replications").get<std::size_t>();
    c.pool_size = j.at("pool_size").get<std::size_t>();
    c.perceptron.epochs = j.at("epochs").get<std::size_t>();
    c.perceptron.learning_rate = j.at("learning_rate").get<double>();
    c.perceptron.calibration_slope = j.at("calibration_slope").get<double>();
    c.des.k = j.at("k").get<std::size_t>();
    c.des.k_p = j.at("k_p").get<std::size_t>();
    c.des.h_c = j.at("h_c").get<double>();
    c.des.upsilon = j.at("upsilon").get<double>();
    c.des.features = features_from_list(j.at("features").get<std::vector<std::string>>());
    c.modes.clear();
    for (const auto& name : j.at("modes").get<std::vector<std::string>>())
        c.modes.push_back(combination_mode_from_string(name));
    c.baselines.clear();
    for (const auto& name : j.at("baselines").get<std::vector<std::string>>())
        c.baselines.push_back(baseline_from_string(name));
    c.include_majority_vote = j.at("include_majority_vote").get<bool>();
    c.baseline_config.k = c.des.k;
    c.baseline_config.mcb_threshold = j.at("mcb_threshold").get<double>();
    c.baseline_config.k_profiles = j.at("knop_k").get<std::size_t>();
    c.baseline_config.mla_epsilon = j.at("mla_epsilon").get<double>();
    c.normalize = j.at("normalize").get<bool>();
    c.diagnostics = j.at("diagnostics").get<bool>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.out_dir = j.at("out_dir").get<std::string>();
    return c;
}

void write_diagnostics_line(std::ostream& out, std::size_t replication, const std::string& method,
                            std::size_t query, std::span<const std::size_t> selected,
                            std::span<const double> deltas, int predicted, int truth,
                            bool fallback) {
    nlohmann::ordered_json j;
    j["replication"] = replication;
    j["method"] = method;
    j["query"] = query;
    j["selected"] = std::vector<std::size_t>(selected.begin(), selected.end());
    j["deltas"] = std::vector<double>(deltas.begin(), deltas.end());
    j["predicted"] = predicted;
    j["truth"] = truth;
    j["fallback"] = fallback;
    out << j.dump() << '\n';
}

}  // namespace

void validate(const ExperimentConfig& config) {
    if (config.name.empty() || config.name.find('/') != std::string::npos)
        throw std::invalid_argument("config: name must be nonempty and contain no '/'");
    if (config.dataset != "banana" && config.dataset != "lithuanian" && config.dataset != "csv")
        throw std::invalid_argument("config: dataset must be banana, lithuanian or csv");
    if (config.dataset == "csv" && config.csv_path.empty())
        throw std::invalid_argument("config: dataset=csv requires csv_path");
    if (config.dataset != "csv" && config.n < 8)
        throw std::invalid_argument("config: synthetic n must be at least 8");
    if (!(config.noise > 0.0)) throw std::invalid_argument("config: noise must be positive");
    if (config.replications == 0)
        throw std::invalid_argument("config: replications must be at least 1");
    if (config.pool_size == 0) throw std::invalid_argument("config: pool_size must be at least 1");
    if (config.perceptron.epochs == 0)
        throw std::invalid_argument("config: epochs must be at least 1");
    if (!(config.perceptron.learning_rate > 0.0))
        throw std::invalid_argument("config: learning_rate must be positive");
    if (!(config.perceptron.calibration_slope > 0.0))
        throw std::invalid_argument("config: calibration_slope must be positive");
    validate(config.des);
    if (config.baseline_config.k == 0 || config.baseline_config.k_profiles == 0)
        throw std::invalid_argument("config: baseline neighborhood sizes must be at least 1");
    if (!(config.baseline_config.mcb_threshold >= 0.0 && config.baseline_config.mcb_threshold <= 1.0))
        throw std::invalid_argument("config: mcb_threshold must be in [0, 1]");
    if (!(config.baseline_config.mla_epsilon > 0.0))
        throw std::invalid_argument("config: mla_epsilon must be positive");
    require_no_duplicates(config.modes, "modes");
    require_no_duplicates(config.baselines, "baselines");
    if (config.modes.empty() && config.baselines.empty() && !config.include_majority_vote)
        throw std::invalid_argument("config: no methods to evaluate");
    if (config.diagnostics && config.out_dir.empty())
        throw std::invalid_argument("config: diagnostics requires out_dir");
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_experiment_config: cannot open " + path);
    ExperimentConfig config;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("load_experiment_config: line " +
                                     std::to_string(line_number) + " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("load_experiment_config: empty key on line " +
                                     std::to_string(line_number));
        apply_config_value(config, key, value);
    }
    validate(config);
    return config;
}

std::string experiment_config_to_string(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "name = " << config.name << '\n';
    out << "dataset = " << config.dataset << '\n';
    out << "csv_path = " << config.csv_path << '\n';
    out << "label_column = " << config.label_column << '\n';
    out << "n = " << config.n << '\n';
    out << "noise = " << double_to_string(config.noise) << '\n';
    out << "replications = " << config.replications << '\n';
    out << "pool_size = " << config.pool_size << '\n';
    out << "epochs = " << config.perceptron.epochs << '\n';
    out << "learning_rate = " << double_to_string(config.perceptron.learning_rate) << '\n';
    out << "calibration_slope = " << double_to_string(config.perceptron.calibration_slope) << '\n';
    out << "k = " << config.des.k << '\n';
    out << "k_p = " << config.des.k_p << '\n';
    out << "h_c = " << double_to_string(config.des.h_c) << '\n';
    out << "upsilon = " << double_to_string(config.des.upsilon) << '\n';
    out << "features = " << join(features_to_list(config.des.features)) << '\n';
    out << "modes = " << join(modes_to_list(config.modes)) << '\n';
    out << "baselines = "
        << (config.baselines.empty() ? "none" : join(baselines_to_list(config.baselines))) << '\n';
    out << "include_majority_vote = " << (config.include_majority_vote ? "true" : "false") << '\n';
    out << "mcb_threshold = " << double_to_string(config.baseline_config.mcb_threshold) << '\n';
    out << "knop_k = " << config.baseline_config.k_profiles << '\n';
    out << "mla_epsilon = " << double_to_string(config.baseline_config.mla_epsilon) << '\n';
    out << "normalize = " << (config.normalize ? "true" : "false") << '\n';
    out << "diagnostics = " << (config.diagnostics ? "true" : "false") << '\n';
    out << "master_seed = " << config.master_seed << '\n';
    out << "out_dir = " << config.out_dir << '\n';
    return out.str();
}

std::vector<std::string> method_names(const ExperimentConfig& config) {
    std::vector<std::string> names;
    for (const CombinationMode mode : config.modes)
        names.push_back("META-DES." + to_string(mode));
    if (config.include_majority_vote) names.emplace_back("MV");
    for (const Baseline b : config.baselines) names.push_back(to_string(b));
    return names;
}

std::uint64_t replication_seed(const ExperimentConfig& config, std::size_t replication) {
    return derive_seed(config.master_seed, replication);
}

Dataset load_experiment_dataset(const ExperimentConfig& config) {
    validate(config);
    if (config.dataset == "banana")
        return generate_banana(config.n, derive_seed(config.master_seed, kDatasetStream),
                               config.noise);
    if (config.dataset == "lithuanian")
        return generate_lithuanian(config.n, derive_seed(config.master_seed, kDatasetStream),
                                   config.noise);
    if (config.label_column.empty()) return load_csv(config.csv_path);
    if (std::all_of(config.label_column.begin(), config.label_column.end(),
                    [](unsigned char ch) { return std::isdigit(ch); }))
        return load_csv(config.csv_path, parse_size(config.label_column, "label_column"));
    return load_csv(config.csv_path, config.label_column);
}

MinMaxScaler MinMaxScaler::fit(const Dataset& data) {
    MinMaxScaler scaler;
    const std::size_t f = data.n_features();
    scaler.mins.assign(f, std::numeric_limits<double>::infinity());
    std::vector<double> maxs(f, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        const auto row = data.row(i);
        for (std::size_t d = 0; d < f; ++d) {
            scaler.mins[d] = std::min(scaler.mins[d], row[d]);
            maxs[d] = std::max(maxs[d], row[d]);
        }
    }
    scaler.ranges.resize(f);
    for (std::size_t d = 0; d < f; ++d) scaler.ranges[d] = maxs[d] - scaler.mins[d];
    return scaler;
}

Dataset MinMaxScaler::transform(const Dataset& data) const {
    if (data.n_features() != mins.size())
        throw std::invalid_argument("MinMaxScaler: feature count mismatch");
    std::vector<double> features(data.features());
    const std::size_t f = mins.size();
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        for (std::size_t d = 0; d < f; ++d) {
            double& v = features[i * f + d];
            v = ranges[d] > 0.0 ? (v - mins[d]) / ranges[d] : 0.0;
        }
    return Dataset(std::move(features), data.labels(), data.n_classes(), data.feature_names());
}

ReplicationOutcome run_single_replication(const ExperimentConfig& config, const Dataset& data,
                                          std::size_t replication, Exec exec,
                                          std::ostream* diagnostics) {
    validate(config);
    if (replication >= config.replications)
        throw std::invalid_argument("run_single_replication: replication index out of range");

    const std::uint64_t seed = replication_seed(config, replication);
    Partition part = make_partition(data, derive_seed(seed, 0));
    if (config.normalize) {
        const MinMaxScaler scaler = MinMaxScaler::fit(part.train);
        part.train = scaler.transform(part.train);
        part.meta_train = scaler.transform(part.meta_train);
        part.dsel = scaler.transform(part.dsel);
        part.test = scaler.transform(part.test);
    }

    const Pool pool =
        bagging_pool(part.train, config.pool_size, config.perceptron, derive_seed(seed, 1), exec);

    MetaTrainingConfig meta_config;
    meta_config.k = config.des.k;
    meta_config.k_p = config.des.k_p;
    meta_config.h_c = config.des.h_c;
    meta_config.features = config.des.features;
    meta_config.use_all_on_empty_selection = true;
    const MetaDataset meta = build_meta_dataset(pool, part.meta_train, meta_config, exec);
    const MetaTrainResult trained = train_meta(meta, 0.75, derive_seed(seed, 2));
    const DselCache cache = build_dsel_cache(pool, part.dsel, exec);

    ReplicationOutcome outcome;
    outcome.seed = seed;
    outcome.meta_validation_accuracy = trained.validation_accuracy;

    if (!config.modes.empty()) {
        const auto mode_results = evaluate_modes(pool, trained.model, part.test, part.dsel, cache,
                                                 config.des, config.modes, exec);
        for (std::size_t m = 0; m < config.modes.size(); ++m) {
            outcome.accuracies.push_back(mode_results[m].accuracy);
            if (diagnostics) {
                const std::string method = "META-DES." + to_string(config.modes[m]);
                for (std::size_t q = 0; q < part.test.n_rows(); ++q) {
                    const QueryDecision& d = mode_results[m].diagnostics[q];
                    write_diagnostics_line(*diagnostics, replication, method, q, d.voter_ids,
                                           d.deltas, d.label, part.test.label(q), d.fallback_used);
                }
            }
        }
    }

    if (config.include_majority_vote) {
        std::vector<int> predicted(part.test.n_rows());
        for_each_index(part.test.n_rows(), exec, [&](std::size_t q) {
            predicted[q] = pool_majority_vote(pool, part.test.row(q));
        });
        std::size_t correct = 0;
        for (std::size_t q = 0; q < part.test.n_rows(); ++q) {
            if (predicted[q] == part.test.label(q)) ++correct;
            if (diagnostics)
                write_diagnostics_line(*diagnostics, replication, "MV", q, {}, {}, predicted[q],
                                       part.test.label(q), false);
        }
        outcome.accuracies.push_back(static_cast<double>(correct) /
                                     static_cast<double>(part.test.n_rows()));
    }

    for (const Baseline baseline : config.baselines) {
        BaselineConfig baseline_config = config.baseline_config;
        baseline_config.k = config.des.k;
        if (diagnostics) {
            std::size_t correct = 0;
            for (std::size_t q = 0; q < part.test.n_rows(); ++q) {
                const BaselineDecision d = classify_baseline(baseline, pool, part.test.row(q),
                                                             part.dsel, cache, baseline_config);
                if (d.label == part.test.label(q)) ++correct;
                write_diagnostics_line(*diagnostics, replication, to_string(baseline), q,
                                       d.voter_ids, d.weights, d.label, part.test.label(q), false);
            }
            outcome.accuracies.push_back(static_cast<double>(correct) /
                                         static_cast<double>(part.test.n_rows()));
        } else {
            outcome.accuracies.push_back(evaluate_baseline(baseline, pool, part.test, part.dsel,
                                                           cache, baseline_config, exec));
        }
    }
    return outcome;
}

ReplicationOutcome run_single_replication(const ExperimentConfig& config, std::size_t replication,
                                          Exec exec) {
    return run_single_replication(config, load_experiment_dataset(config), replication, exec);
}

RunResult run_experiment(const ExperimentConfig& config, Exec exec) {
    validate(config);
    const Dataset data = load_experiment_dataset(config);

    RunResult result;
    result.dataset_name = config.name;
    result.methods = method_names(config);
    result.config = config;

    const bool persist = !config.out_dir.empty();
    if (persist) std::filesystem::create_directories(config.out_dir);
    const bool diagnostics = config.diagnostics && persist;

    for (std::size_t r = 0; r < config.replications; ++r) {
        std::optional<std::ofstream> diag_stream;
        std::string diag_path;
        if (diagnostics) {
            diag_path = config.out_dir + "/" + config.name + "_rep" + std::to_string(r) + ".jsonl";
            diag_stream.emplace(diag_path);
            if (!*diag_stream)
                throw std::runtime_error("run_experiment: cannot open " + diag_path);
        }
        try {
            ReplicationOutcome outcome = run_single_replication(
                config, data, r, exec, diagnostics ? &*diag_stream : nullptr);
            result.replication_seeds.push_back(outcome.seed);
            result.accuracies.push_back(std::move(outcome.accuracies));
            result.meta_validation_accuracies.push_back(outcome.meta_validation_accuracy);
        } catch (const std::exception& e) {
            throw std::runtime_error("replication " + std::to_string(r) + ": " + e.what());
        }
        if (diagnostics) result.diagnostics_paths.push_back(diag_path);
    }

    const auto n = static_cast<double>(config.replications);
    result.mean_accuracy.assign(result.methods.size(), 0.0);
    result.stddev_accuracy.assign(result.methods.size(), 0.0);
    for (std::size_t m = 0; m < result.methods.size(); ++m) {
        double sum = 0.0;
        for (const auto& row : result.accuracies) sum += row[m];
        const double mean = sum / n;
        result.mean_accuracy[m] = mean;
        if (config.replications > 1) {
            double ss = 0.0;
            for (const auto& row : result.accuracies) ss += (row[m] - mean) * (row[m] - mean);
            result.stddev_accuracy[m] = std::sqrt(ss / (n - 1.0));
        }
    }

    if (persist)
        save_run_result(result, config.out_dir + "/" + config.name + "_result.json");
    return result;
}

std::string run_result_to_json(const RunResult& result) {
    nlohmann::ordered_json j;
    j["format"] = "metades-run-result";
    j["version"] = 1;
    j["dataset"] = result.dataset_name;
    j["config"] = config_to_json(result.config);
    j["methods"] = result.methods;
    j["replication_seeds"] = result.replication_seeds;
    j["accuracies"] = result.accuracies;
    j["mean_accuracy"] = result.mean_accuracy;
    j["stddev_accuracy"] = result.stddev_accuracy;
    j["meta_validation_accuracies"] = result.meta_validation_accuracies;
    j["diagnostics_paths"] = result.diagnostics_paths;
    return j.dump(2);
}

RunResult run_result_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("run_result_from_json: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "metades-run-result")
        throw std::runtime_error("run_result_from_json: not a run-result file");
    if (j.value("version", 0) != 1)
        throw std::runtime_error("run_result_from_json: unsupported version");

    RunResult result;
    result.dataset_name = j.at("dataset").get<std::string>();
    result.config = config_from_json(j.at("config"));
    result.methods = j.at("methods").get<std::vector<std::string>>();
    result.replication_seeds = j.at("replication_seeds").get<std::vector<std::uint64_t>>();
    result.accuracies = j.at("accuracies").get<std::vector<std::vector<double>>>();
    result.mean_accuracy = j.at("mean_accuracy").get<std::vector<double>>();
    result.stddev_accuracy = j.at("stddev_accuracy").get<std::vector<double>>();
    result.meta_validation_accuracies =
        j.at("meta_validation_accuracies").get<std::vector<double>>();
    result.diagnostics_paths = j.at("diagnostics_paths").get<std::vector<std::string>>();

    if (result.accuracies.size() != result.config.replications ||
        result.replication_seeds.size() != result.config.replications)
        throw std::runtime_error("run_result_from_json: replication count mismatch");
    for (const auto& row : result.accuracies) {
        if (row.size() != result.methods.size())
            throw std::runtime_error("run_result_from_json: method count mismatch");
        for (const double a : row)
            if (!(a >= 0.0 && a <= 1.0))
                throw std::runtime_error("run_result_from_json: accuracy outside [0, 1]");
    }
    return result;
}

void save_run_result(const RunResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_run_result: cannot open " + path);
    out << run_result_to_json(result) << '\n';
}

RunResult load_run_result(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_run_result: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return run_result_from_json(text);
}

AccuracyTable build_accuracy_table(std::span<const RunResult> results) {
    if (results.empty()) throw std::invalid_argument("build_accuracy_table: no results");
    AccuracyTable table;
    table.methods = results.front().methods;
    for (const auto& result : results) {
        if (result.methods != table.methods)
            throw std::invalid_argument("build_accuracy_table: results disagree on methods");
        if (std::find(table.datasets.begin(), table.datasets.end(), result.dataset_name) !=
            table.datasets.end())
            throw std::invalid_argument("build_accuracy_table: duplicate dataset name '" +
                                        result.dataset_name + "'");
        table.datasets.push_back(result.dataset_name);
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            table.means.push_back(result.mean_accuracy[m] * 100.0);
            table.stddevs.push_back(result.stddev_accuracy[m] * 100.0);
        }
    }
    validate(table);
    return table;
}

namespace {

std::string format_cell(double mean, double stddev) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << mean << '(' << stddev << ')';
    return out.str();
}

std::string format_rank(double rank) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << rank;
    return out.str();
}

std::string format_p(const WilcoxonResult& w) {
    std::ostringstream out;
    out.precision(3);
    out << "p=" << w.p_value;
    switch (w.direction) {
        case WilcoxonDirection::a_greater: out << " (ref higher)"; break;
        case WilcoxonDirection::b_greater: out << " (ref lower)"; break;
        case WilcoxonDirection::none: out << " (no diff)"; break;
    }
    return out.str();
}

/// Rows of the rendered table: data rows plus optional statistics rows.
std::vector<std::vector<std::string>> table_rows(const AccuracyTable& table,
                                                 const TableOptions& options) {
    validate(table);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"dataset"};
    header.insert(header.end(), table.methods.begin(), table.methods.end());
    rows.push_back(std::move(header));

    for (std::size_t d = 0; d < table.n_datasets(); ++d) {
        std::vector<std::string> row{table.datasets[d]};
        for (std::size_t m = 0; m < table.n_methods(); ++m)
            row.push_back(format_cell(table.mean(d, m), table.stddev(d, m)));
        rows.push_back(std::move(row));
    }

    if (options.friedman_row) {
        const auto ranks = friedman_mean_ranks(table);
        std::vector<std::string> row{"Friedman rank"};
        for (const double r : ranks) row.push_back(format_rank(r));
        rows.push_back(std::move(row));
    }

    if (!options.wilcoxon_reference.empty()) {
        const auto it = std::find(table.methods.begin(), table.methods.end(),
                                  options.wilcoxon_reference);
        if (it == table.methods.end())
            throw std::invalid_argument("table: unknown Wilcoxon reference method '" +
                                        options.wilcoxon_reference + "'");
        const auto ref = static_cast<std::size_t>(it - table.methods.begin());
        const auto ref_column = table.method_column(ref);
        std::vector<std::string> row{"Wilcoxon vs " + options.wilcoxon_reference};
        for (std::size_t m = 0; m < table.n_methods(); ++m) {
            if (m == ref) {
                row.emplace_back("ref");
                continue;
            }
            row.push_back(format_p(wilcoxon_signed_rank(ref_column, table.method_column(m))));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string render_table_markdown(const AccuracyTable& table, const TableOptions& options) {
    const auto rows = table_rows(table, options);
    std::ostringstream out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << '|';
        for (const auto& cell : rows[r]) out << ' ' << cell << " |";
        out << '\n';
        if (r == 0) {
            out << '|';
            for (std::size_t c = 0; c < rows[0].size(); ++c) out << " --- |";
            out << '\n';
        }
    }
    return out.str();
}

std::string render_table_csv(const AccuracyTable& table, const TableOptions& options) {
    const auto rows = table_rows(table, options);
    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out << ',';
            out << row[c];
        }
        out << '\n';
    }
    return out.str();
}

AccuracyTable parse_table_markdown(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    AccuracyTable table;
    bool have_header = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line.front() != '|') continue;
        std::vector<std::string> cells;
        std::stringstream stream(line);
        std::string cell;
        std::getline(stream, cell, '|');  // leading empty segment
        while (std::getline(stream, cell, '|')) cells.push_back(trim(cell));
        if (!cells.empty() && cells.back().empty()) cells.pop_back();
        if (cells.empty()) continue;

        if (!have_header) {
            table.methods.assign(cells.begin() + 1, cells.end());
            have_header = true;
            continue;
        }
        const bool separator = std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
            return !c.empty() && c.find_first_not_of("-: ") == std::string::npos;
        });
        if (separator) continue;
        if (cells[0] == "Friedman rank" || cells[0].rfind("Wilcoxon", 0) == 0) continue;
        if (cells.size() != table.methods.size() + 1)
            throw std::runtime_error("parse_table_markdown: row '" + cells[0] +
                                     "' has the wrong cell count");
        table.datasets.push_back(cells[0]);
        for (std::size_t m = 1; m < cells.size(); ++m) {
            const std::string& value = cells[m];
            const auto open = value.find('(');
            std::size_t consumed = 0;
            double mean = 0.0;
            double stddev = 0.0;
            try {
                mean = std::stod(value.substr(0, open), &consumed);
                if (open != std::string::npos) {
                    if (value.back() != ')') throw std::runtime_error("");
                    stddev = std::stod(value.substr(open + 1, value.size() - open - 2));
                }
            } catch (const std::exception&) {
                throw std::runtime_error("parse_table_markdown: bad cell '" + value + "'");
            }
            table.means.push_back(mean);
            table.stddevs.push_back(stddev);
        }
    }
    if (!have_header) throw std::runtime_error("parse_table_markdown: no table found");
    validate(table);
    return table;
}

}  // namespace metades
