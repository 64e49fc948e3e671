#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "footprint/category.hpp"
#include "footprint/classifiers.hpp"

namespace footprint {

struct FoldAssignment {
    int k = 5;
    std::map<std::string, int> fold_of;
};

// Per-category seeded shuffle dealt round-robin, so every category's fold
// counts differ by at most one. Throws CategoryTooSmall naming the first
// category with fewer than k members.
FoldAssignment stratified_folds(const std::map<std::string, Category>& labels, int k,
                                std::uint64_t seed);

struct ConfusionMatrix {
    // rows = true category, columns = predicted
    std::array<std::array<std::int64_t, kCategoryCount>, kCategoryCount> m{};

    void add(Category truth, Category predicted) {
        m[category_index(truth)][category_index(predicted)] += 1;
    }
    std::int64_t total() const;
    std::int64_t trace() const;
};

struct CategoryMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::int64_t support = 0;           // true-category row total
    bool zero_denominator = false;      // precision or recall denominator was 0
};

struct MetricsReport {
    ConfusionMatrix confusion;
    std::array<CategoryMetrics, kCategoryCount> per_category;
    double accuracy = 0;
    double macro_f1 = 0;
    std::vector<double> fold_accuracies;  // filled by cross_validate

    std::string to_json() const;
    std::string to_markdown() const;
};

// Compares two account -> category maps over the same account set; throws
// AccountSetMismatch otherwise. The micro-precision = micro-recall =
// accuracy identity is asserted on every call.
MetricsReport evaluate(const std::map<std::string, Category>& truth,
                       const std::map<std::string, Category>& predicted);
MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion);

using TrainerFn = std::function<std::unique_ptr<Classifier>(
    const std::vector<LabeledSample>& train, std::uint64_t fold_seed)>;

struct CrossValidationReport {
    int k = 0;
    std::vector<double> fold_accuracies;
    double mean_accuracy = 0;
    MetricsReport pooled;  // over pooled out-of-fold predictions
    std::map<std::string, Prediction> out_of_fold;

    std::string to_json() const;
};

// Stratified k-fold CV: train on k-1 folds, score the held fold, pool the
// out-of-fold predictions. k must be >= 2 (k = 1 leaves nothing held out).
CrossValidationReport cross_validate_with(const std::vector<LabeledSample>& samples, int k,
                                          std::uint64_t seed, const TrainerFn& trainer);
CrossValidationReport cross_validate(const std::vector<LabeledSample>& samples,
                                     const TrainConfig& config, int k, std::uint64_t seed);

struct DepthAccuracy {
    int depth = 0;
    double accuracy = 0;
};

// One single tree per depth cap, trained on a fixed stratified 70/30 split
// (no bootstrap, so depth 0 is exactly the training majority class) and
// scored on the held-out 30%.
std::vector<DepthAccuracy> depth_sweep(const std::vector<LabeledSample>& samples,
                                       const TrainConfig& config, int min_depth, int max_depth,
                                       std::uint64_t seed);
std::string depth_sweep_csv(const std::vector<DepthAccuracy>& sweep);

enum class AgreementDenominator { ReferenceCategorySize, IntersectionSize };

struct AgreementReport {
    std::string reference_name;
    std::size_t reference_size = 0;  // reference accounts with a mapped label
    std::size_t intersection = 0;    // of those, also present in predictions
    std::size_t matched = 0;         // of those, categories agree under the mapping
    double agreement = 0;
    AgreementDenominator denominator = AgreementDenominator::ReferenceCategorySize;

    std::string to_json() const;
};

// Validates model predictions against an independently labeled reference
// sharing the account-id namespace. mapping lists (model category,
// reference label token) pairs; reference tokens compare case-insensitively.
AgreementReport cross_dataset_agreement(
    const std::map<std::string, Category>& predictions,
    const std::map<std::string, std::string>& reference,
    const std::vector<std::pair<Category, std::string>>& mapping,
    AgreementDenominator denominator = AgreementDenominator::ReferenceCategorySize,
    const std::string& reference_name = "reference");

struct RecheckReport {
    std::size_t covered = 0;
    std::size_t correct = 0;
    double accuracy = 0;
    std::array<CategoryMetrics, kCategoryCount> per_category;

    std::string to_json() const;
};

// Accuracy of predictions over the subset covered by post-hoc coded labels.
// Throws NoOverlap when the coded file shares no account with predictions.
RecheckReport manual_recheck_accuracy(const std::map<std::string, Category>& predictions,
                                      const std::map<std::string, Category>& coded);

}  // namespace footprint
