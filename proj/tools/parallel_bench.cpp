// Times the OpenMP kernels against the serial reference path on one
// replication-sized workload and verifies both produce identical results.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "metades/base.hpp"
#include "metades/bench.hpp"
#include "metades/dataset.hpp"
#include "metades/des.hpp"
#include "metades/meta_features.hpp"
#include "metades/naive_bayes.hpp"
#include "metades/parallel.hpp"
#include "metades/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_seconds(F&& fn) {
    const auto start = Clock::now();
    fn();
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool meta_equal(const metades::MetaDataset& a, const metades::MetaDataset& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.vectors[i].flatten() != b.vectors[i].flatten()) return false;
        if (a.vectors[i].label != b.vectors[i].label) return false;
        if (a.vectors[i].classifier_id != b.vectors[i].classifier_id) return false;
        if (a.vectors[i].sample_id != b.vectors[i].sample_id) return false;
    }
    return true;
}

void report(const char* kernel, double serial_s, double parallel_s, bool identical) {
    std::printf("%-18s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   identical: %s\n",
                kernel, serial_s, parallel_s, parallel_s > 0.0 ? serial_s / parallel_s : 0.0,
                identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 1000;
    std::size_t pool_size = 100;
    if (argc > 1) n = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) pool_size = std::strtoull(argv[2], nullptr, 10);

    std::printf("banana n=%zu, pool=%zu, threads=%d\n\n", n, pool_size,
                metades::max_threads());

    const metades::Dataset data = metades::generate_banana(n, 7);
    const metades::Partition part = metades::make_partition(data, 11);
    const metades::PerceptronConfig perceptron;
    bool all_identical = true;

    metades::Pool pool_serial;
    metades::Pool pool_parallel;
    const double pool_s = time_seconds([&] {
        pool_serial = metades::bagging_pool(part.train, pool_size, perceptron, 3,
                                            metades::Exec::serial);
    });
    const double pool_p = time_seconds([&] {
        pool_parallel = metades::bagging_pool(part.train, pool_size, perceptron, 3,
                                              metades::Exec::parallel);
    });
    const bool pool_same = pool_serial.members == pool_parallel.members &&
                           pool_serial.trained_on == pool_parallel.trained_on;
    all_identical &= pool_same;
    report("bagging_pool", pool_s, pool_p, pool_same);

    metades::MetaTrainingConfig meta_config;
    meta_config.use_all_on_empty_selection = true;
    metades::MetaDataset meta_serial;
    metades::MetaDataset meta_parallel;
    const double meta_s = time_seconds([&] {
        meta_serial = metades::build_meta_dataset(pool_serial, part.meta_train, meta_config,
                                                  metades::Exec::serial);
    });
    const double meta_p = time_seconds([&] {
        meta_parallel = metades::build_meta_dataset(pool_serial, part.meta_train, meta_config,
                                                    metades::Exec::parallel);
    });
    const bool meta_same = meta_equal(meta_serial, meta_parallel);
    all_identical &= meta_same;
    report("build_meta_dataset", meta_s, meta_p, meta_same);

    const metades::MetaTrainResult trained = metades::train_meta(meta_serial, 0.75, 5);
    const metades::DselCache cache =
        metades::build_dsel_cache(pool_serial, part.dsel, metades::Exec::serial);
    const metades::DesConfig des;
    const std::array modes{metades::CombinationMode::selection,
                           metades::CombinationMode::weighting,
                           metades::CombinationMode::hybrid};

    std::vector<metades::EvaluationResult> eval_serial;
    std::vector<metades::EvaluationResult> eval_parallel;
    const double eval_s = time_seconds([&] {
        eval_serial = metades::evaluate_modes(pool_serial, trained.model, part.test, part.dsel,
                                              cache, des, modes, metades::Exec::serial);
    });
    const double eval_p = time_seconds([&] {
        eval_parallel = metades::evaluate_modes(pool_serial, trained.model, part.test, part.dsel,
                                                cache, des, modes, metades::Exec::parallel);
    });
    bool eval_same = true;
    for (std::size_t m = 0; m < modes.size(); ++m)
        eval_same = eval_same && eval_serial[m].predicted == eval_parallel[m].predicted &&
                    eval_serial[m].accuracy == eval_parallel[m].accuracy;
    all_identical &= eval_same;
    report("evaluate_modes", eval_s, eval_p, eval_same);

    if (!all_identical) {
        std::printf("\nserial and parallel paths diverged\n");
        return 1;
    }
    std::printf("\nserial and parallel paths agree bit for bit\n");
    return 0;
}
