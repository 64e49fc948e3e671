#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "footprint/category.hpp"
#include "footprint/corpus.hpp"

namespace footprint {

struct FeatureVector {
    std::string account_id;
    std::vector<double> values;
    bool degenerate = false;  // all-zero raw vector (excluded from training)
};

using FeatureExtractor = double (*)(const AggregateRecord&);

struct CatalogEntry {
    std::string name;
    FeatureExtractor extractor;
};

// Ordered, uniquely named candidate features, each a pure function of the
// per-account aggregate record.
class FeatureCatalog {
public:
    // The eight default behavioral features: tweet_count, retweet_count,
    // mention_count, avg_followers, avg_following, hashtag_count,
    // reply_count, like_count.
    static FeatureCatalog defaults();
    // Defaults plus per-active-day timing features (requires ingest with
    // active-day tracking; untracked accounts read as 0 days).
    static FeatureCatalog with_timing();

    void add(const std::string& name, FeatureExtractor extractor);
    FeatureCatalog subset(const std::vector<std::string>& names) const;

    const std::vector<CatalogEntry>& entries() const { return entries_; }
    std::vector<std::string> names() const;
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<CatalogEntry> entries_;
};

// Raw (unnormalized) features for one account. Throws UnknownAccount.
FeatureVector extract_features(const Dataset& dataset, const std::string& account_id,
                               const FeatureCatalog& catalog);

// Raw features for every account, ordered by account id.
std::vector<FeatureVector> extract_all_features(const Dataset& dataset,
                                                const FeatureCatalog& catalog);

struct CorrelationReport {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> r;  // symmetric, diagonal 1
    std::vector<double> mean_abs_r;      // per feature, off-diagonal mean
    std::vector<bool> constant;          // zero-variance features (r := 0 vs all)
    std::string to_json() const;
};

// Sample Pearson correlation over >= 3 rows. Constant features correlate 0
// against everything and are flagged. Throws TooFewSamples.
CorrelationReport pearson_matrix(const std::vector<FeatureVector>& rows,
                                 const std::vector<std::string>& feature_names);

struct SelectionResult {
    std::vector<std::string> selected;                       // surviving names, catalog order
    std::vector<std::pair<std::string, std::string>> dropped;  // (name, reason), in drop order
};

// Greedy multicollinearity elimination: while more than target_count
// survive, drop first any constant feature, then the survivor with the
// highest mean |r| against the other survivors. Name-order tie-breaks keep
// the result invariant to candidate permutation.
SelectionResult select_features(const CorrelationReport& report, std::size_t target_count);

enum class NormalizeAxis { Row, Column };

// Per-sample L1: each value divided by the row's sum of absolute values.
// All-zero rows come back unchanged with the degenerate flag set.
FeatureVector l1_normalize(const FeatureVector& raw);

// Normalizes a whole matrix in place; Column divides each feature by its
// column-wise absolute sum instead (sensitivity-analysis variant).
void normalize_features(std::vector<FeatureVector>& rows,
                        NormalizeAxis axis = NormalizeAxis::Row);

// CSV export: header = account_id, features..., optional category column.
std::string feature_matrix_csv(const std::vector<FeatureVector>& rows,
                               const std::vector<std::string>& feature_names,
                               const std::map<std::string, Category>* labels = nullptr);

// Round-trip-exact decimal rendering used by every CSV/JSON emitter.
std::string format_double(double v);

}  // namespace footprint
