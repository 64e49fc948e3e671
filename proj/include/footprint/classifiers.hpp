#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "footprint/category.hpp"
#include "footprint/features.hpp"

namespace footprint {

struct LabeledSample {
    std::string account_id;
    std::vector<double> values;
    Category label = Category::Uncategorized;
};

enum class ClassWeighting { None, InverseFrequency };

struct TrainConfig {
    int n_trees = 100;
    std::optional<int> max_depth;  // nullopt = grow to purity; 0 = root leaf
    int min_samples_split = 2;
    int features_per_split = 0;  // 0 = ceil(sqrt(d))
    bool bootstrap = true;
    ClassWeighting class_weighting = ClassWeighting::None;
    std::uint64_t seed = 0;
};

// Flattened tree: nodes in preorder, root at index 0. A split routes
// value <= threshold to `left`. A leaf stores (class-weighted) counts and
// the majority category (count ties fall to category order).
struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0;
    int left = -1;
    int right = -1;
    std::array<double, kCategoryCount> counts{};
    Category majority = Category::Uncategorized;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double oob_accuracy = -1;  // -1 when no out-of-bag samples exist
};

struct ForestModel {
    TrainConfig config;
    std::vector<std::string> feature_names;
    std::vector<Tree> trees;

    // Versioned JSON, round-trips bit-exactly (thresholds, counts, seed).
    std::string to_json() const;
    static ForestModel from_json(const std::string& text);
};

struct Prediction {
    std::string account_id;
    Category category = Category::Uncategorized;
    std::array<double, kCategoryCount> votes{};  // fractions summing to 1
};

// 1 - sum(p_c^2) over (possibly weighted) class counts. Throws EmptyNode
// when the counts sum to zero.
double gini_impurity(const std::vector<double>& counts);
double gini_impurity(const std::array<double, kCategoryCount>& counts);

struct SplitCandidate {
    int feature = -1;
    double threshold = 0;
    double child_impurity = 0;  // count-weighted mean of child impurities
};

// Exhaustive search over the candidate features and the midpoints between
// consecutive distinct sorted values; minimizes weighted child Gini. Ties
// break on (lower feature index, lower threshold). Zero-gain splits are kept
// (parity patterns resolve further down); returns nullopt only when the node
// is pure or no candidate feature offers a valid threshold.
std::optional<SplitCandidate> best_split(const std::vector<LabeledSample>& samples,
                                         const std::vector<std::size_t>& subset,
                                         const std::vector<int>& candidate_features,
                                         const std::array<double, kCategoryCount>& class_weights);
std::optional<SplitCandidate> best_split(const std::vector<LabeledSample>& samples,
                                         const std::vector<int>& candidate_features);

// Grows one tree over all given samples (no bootstrap here). Every node
// considers features_per_split random candidates drawn from tree_seed;
// growth stops on purity, max_depth, min_samples_split, or when no valid
// split exists.
Tree train_tree(const std::vector<LabeledSample>& samples, const TrainConfig& config,
                std::uint64_t tree_seed);

// n_trees trees, each on its own bootstrap resample (size n, with
// replacement) drawn from a per-tree seed derived from config.seed and the
// tree index. Bit-identical output for any thread count. Throws
// SingleClassTrainingSet when fewer than two classes are present.
ForestModel train_forest(const std::vector<LabeledSample>& samples, const TrainConfig& config);

// Majority vote of per-tree leaf majorities; vote ties fall to category
// order. Throws DimensionMismatch when the row width differs from the
// model's.
Prediction predict(const ForestModel& model, const FeatureVector& row);
std::vector<Prediction> predict_all(const ForestModel& model,
                                    const std::vector<FeatureVector>& rows);

// Uniform train/predict contract shared by the forest and the baselines.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual Prediction predict_one(const FeatureVector& row) const = 0;
    virtual std::string kind() const = 0;
};

std::unique_ptr<Classifier> make_forest_classifier(ForestModel model);

struct BaselineParams {
    int knn_k = 5;
    int lr_iterations = 500;
    double lr_learning_rate = 0.1;
    double nb_variance_floor = 1e-9;
    std::uint64_t seed = 0;
};

// kind: logistic-regression | knn | decision-tree | naive-bayes. "svm" is
// recognized but deliberately unsupported and throws UnsupportedKind, as
// does any unknown name.
std::unique_ptr<Classifier> train_baseline(const std::string& kind,
                                           const std::vector<LabeledSample>& samples,
                                           const BaselineParams& params = {});

// Dispatcher covering the baselines plus "random-forest".
std::unique_ptr<Classifier> train_kind(const std::string& kind,
                                       const std::vector<LabeledSample>& samples,
                                       const TrainConfig& forest_config,
                                       const BaselineParams& params = {});

}  // namespace footprint
