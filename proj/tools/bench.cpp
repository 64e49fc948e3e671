#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "footprint/classifiers.hpp"
#include "footprint/propagation.hpp"
#include "footprint/reference.hpp"
#include "footprint/rng.hpp"
#include "footprint/synthgen.hpp"

using namespace footprint;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimilarityMatrices random_matrices(std::uint64_t seed, int n_unlabeled, int n_labeled,
                                   int dimensions, int entries_per_column) {
    Rng rng(seed);
    SimilarityMatrices m;
    m.vocabulary.subspan_index = 0;
    for (int d = 0; d < dimensions; ++d)
        m.vocabulary.dims.emplace("tag" + std::to_string(d), d);

    auto make_column = [&](const std::string& id) {
        SparseHashtagVector col;
        col.account_id = id;
        std::vector<int> dims = rng.sample_without_replacement(
            dimensions, std::min(entries_per_column, dimensions));
        double sq = 0;
        for (int d : dims) {
            double w = static_cast<double>(1 + rng.bounded(9));
            col.entries.emplace_back(d, w);
            sq += w * w;
        }
        col.norm = std::sqrt(sq);
        return col;
    };

    char buf[32];
    for (int i = 0; i < n_unlabeled; ++i) {
        std::snprintf(buf, sizeof(buf), "u%06d", i);
        m.u.push_back(make_column(buf));
    }
    for (int j = 0; j < n_labeled; ++j) {
        std::snprintf(buf, sizeof(buf), "v%06d", j);
        m.v.push_back(make_column(buf));
        m.v_category.push_back(kCategories[rng.bounded(kCategoryCount)]);
    }
    return m;
}

void report(const char* name, double serial, double parallel, bool equal) {
    std::printf("%-28s %10.3fs %12.3fs %9.2fx   %s\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0, equal ? "outputs equal" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n\n");
#endif
    std::printf("%-28s %11s %13s %10s\n", "kernel", "serial", "parallel", "speedup");

    // Impermanent assignment: dense all-pairs reference vs sparse parallel.
    {
        SimilarityMatrices m = random_matrices(7, 2000, 400, 500, 20);
        auto t0 = std::chrono::steady_clock::now();
        auto serial = reference::assign_impermanent(m, 0.05);
        double serial_s = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        auto parallel = assign_impermanent(m, 0.05);
        double parallel_s = seconds_since(t0);

        bool equal = serial.size() == parallel.size();
        for (std::size_t i = 0; equal && i < serial.size(); ++i) {
            equal = serial[i].first == parallel[i].first &&
                    serial[i].second.category == parallel[i].second.category &&
                    serial[i].second.score == parallel[i].second.score &&
                    serial[i].second.matched_account == parallel[i].second.matched_account;
        }
        report("assign_impermanent", serial_s, parallel_s, equal);
    }

    // Single tree: exhaustive recursive oracle vs the sweep-based grower.
    {
        std::vector<LabeledSample> samples = generate_rule_dataset(11, 4000, 3);
        TrainConfig config;
        config.features_per_split = static_cast<int>(samples.front().values.size());
        config.bootstrap = false;

        auto t0 = std::chrono::steady_clock::now();
        Tree oracle = reference::train_tree(samples, config);
        double serial_s = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        Tree fast = train_tree(samples, config, 0);
        double parallel_s = seconds_since(t0);
        report("train_tree (full features)", serial_s, parallel_s,
               reference::trees_equal(oracle, fast));
    }

    // Forest: one thread vs all threads, byte-identical model required.
    {
        std::vector<LabeledSample> samples = generate_rule_dataset(13, 2000, 5);
        TrainConfig config;
        config.n_trees = 100;
        config.seed = 99;

#ifdef _OPENMP
        int max_threads = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        auto t0 = std::chrono::steady_clock::now();
        ForestModel one = train_forest(samples, config);
        double serial_s = seconds_since(t0);
#ifdef _OPENMP
        omp_set_num_threads(max_threads);
#endif
        t0 = std::chrono::steady_clock::now();
        ForestModel many = train_forest(samples, config);
        double parallel_s = seconds_since(t0);
        report("train_forest (1 vs max)", serial_s, parallel_s,
               one.to_json() == many.to_json());
    }
    return 0;
}
