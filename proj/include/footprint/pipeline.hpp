#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "footprint/category.hpp"
#include "footprint/classifiers.hpp"
#include "footprint/corpus.hpp"
#include "footprint/evaluation.hpp"
#include "footprint/features.hpp"
#include "footprint/propagation.hpp"

namespace footprint {

// One archive to ingest.
struct DatasetSpec {
    std::string path;
    std::string schema = "auto";
    std::string language_filter;
    std::optional<std::pair<UtcTime, UtcTime>> timeframe;
    std::size_t buffer_cap = 200000;
    std::string spool_dir;
    bool track_active_days = false;
};

// Optional fifth stage: score the trained model against an independently
// labeled reference archive, plus an optional post-hoc coded sample of the
// primary accounts.
struct ValidationSpec {
    DatasetSpec dataset;
    std::string name = "reference";
    // (model category, reference label token) pairs; empty defaults to
    // FakeNews <-> NewsFeed.
    std::vector<std::pair<Category, std::string>> mapping;
    AgreementDenominator denominator = AgreementDenominator::ReferenceCategorySize;
    std::string recheck_path;  // CSV account_id,category over primary accounts
};

struct PipelineConfig {
    DatasetSpec dataset;
    std::string labels_path;     // operator-coded seed labels (optional)
    std::string rules_path;      // description rules; empty = built-in defaults
    std::string footprint_path;  // hashtag table; empty = built-in defaults
    bool use_description_rules = true;
    bool use_footprint_table = true;
    int footprint_min_hits = 2;
    PropagationConfig propagation;
    std::vector<std::string> features;  // empty = full default catalog
    int target_feature_count = 8;
    NormalizeAxis normalize = NormalizeAxis::Row;
    TrainConfig train;
    int k = 5;
    std::uint64_t seed = 1;
    std::string out_dir = "footprint-run";
    std::optional<ValidationSpec> validation;

    std::string to_json() const;
    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig load(const std::string& path);
};

struct StageReport {
    std::string name;
    std::size_t input_count = 0;
    std::size_t output_count = 0;
    double seconds = 0;  // surfaced only in the metadata file
    std::vector<std::string> warnings;
};

struct LabelCensus {
    std::array<std::size_t, kCategoryCount> per_category{};
    std::size_t labeled = 0;
    std::size_t uncategorized = 0;
};

struct RunReport {
    std::vector<StageReport> stages;
    IngestSummary ingest;
    LabelCensus seed_census;   // after seed labeling
    LabelCensus final_census;  // after propagation
    std::size_t propagated = 0;
    std::vector<std::string> selected_features;
    std::vector<std::pair<std::string, std::string>> dropped_features;
    CrossValidationReport cv;
    std::optional<AgreementReport> agreement;
    std::optional<RecheckReport> recheck;

    // Deterministic: no timings, thread counts or timestamps (those live in
    // the metadata JSON so reruns stay byte-comparable).
    std::string to_json() const;
    std::string to_markdown() const;
    std::string meta_json() const;
};

// Runs all stages in order, writing each stage's artifact into
// config.out_dir (labels, propagation report, feature matrix, model JSON,
// metrics, predictions) before the next stage starts, so a failure retains
// everything already produced. The directory is locked for the duration of
// the run. Census reconciliation (seed labeled + propagated = final
// labeled; final labeled + uncategorized = accounts) is asserted.
RunReport run_pipeline(const PipelineConfig& config);

struct ComparisonRow {
    std::string kind;
    double mean_accuracy = 0;
    std::vector<double> fold_accuracies;
    bool implemented = true;
    std::string note;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;  // mean accuracy descending
    std::string to_json() const;
    std::string to_markdown() const;
};

// Same CV protocol for the forest and every baseline kind; unimplemented
// kinds (svm) get a placeholder row. Reuses out_dir/features.csv from a
// prior run when present, otherwise runs the feature stages fresh.
ComparisonTable compare_classifiers(const PipelineConfig& config);

// Parsed features.csv artifact.
struct FeatureTable {
    std::vector<std::string> names;
    std::vector<FeatureVector> rows;
    std::map<std::string, Category> labels;  // rows with a category column
};

FeatureTable load_feature_matrix(const std::string& path);

// Labeled, non-degenerate rows as training samples.
std::vector<LabeledSample> samples_from_table(const FeatureTable& table);

LabelCensus census_of(const SeedLabelSet& labels, std::size_t account_count);

// Stage cores, shared between run_pipeline and the per-stage CLI entry
// points.

// Coded file, then description rules, then hashtag footprints, in that
// priority order.
SeedLabelSet build_seed_labels(const Dataset& dataset, const PipelineConfig& config,
                               std::vector<std::string>* warnings = nullptr);

struct FeatureStageResult {
    std::vector<std::string> selected;
    std::vector<std::pair<std::string, std::string>> dropped;
    CorrelationReport correlation;
    std::vector<FeatureVector> rows;  // normalized, selected columns only
};

// Extract, screen to target_feature_count, slice, normalize.
FeatureStageResult build_features(const Dataset& dataset, const PipelineConfig& config);

// Resolves feature names against the default catalog, falling back to the
// timing-extended one.
FeatureCatalog catalog_for(const std::vector<std::string>& names);

}  // namespace footprint
