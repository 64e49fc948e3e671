#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "footprint/category.hpp"
#include "footprint/classifiers.hpp"
#include "footprint/corpus.hpp"
#include "footprint/time.hpp"

namespace footprint {

// Behavioral profile of one planted category. Means are per account
// (tweets) or per tweet (ratios, rates); follower/following means
// parameterize a log-normal across accounts.
struct CategoryProfile {
    double mean_tweets = 50;
    double retweet_ratio = 0.5;
    double reply_ratio = 0.1;
    double mentions_per_tweet = 1.0;
    double hashtags_per_tweet = 1.0;
    double likes_per_tweet = 1.0;
    double mean_followers = 1000;
    double mean_following = 500;
    std::vector<std::string> hashtag_pool;
    std::vector<double> pool_weights;  // empty = uniform
};

struct GeneratorConfig {
    std::uint64_t seed = 1;
    std::array<int, kCategoryCount> accounts_per_category{100, 100, 100, 100};
    std::array<double, kCategoryCount> hashed_fraction{0.25, 0.25, 0.25, 0.25};
    UtcTime start = 0;
    UtcTime end = 0;
    double noise = 0.1;  // P(a hashtag draws from another category's pool)
    std::array<CategoryProfile, kCategoryCount> profiles;

    // Profiles calibrated to the published per-category activity ratios,
    // scaled to desk size; disjoint per-category hashtag pools; two-year
    // timeframe.
    static GeneratorConfig defaults();
};

using GroundTruth = std::map<std::string, Category>;

struct GenerationResult {
    std::string archive_path;  // canonical JSONL
    std::string labels_path;   // coded labels for unhashed accounts
    std::string truth_path;    // planted category for every account
    GroundTruth truth;
    std::size_t account_count = 0;
    std::size_t hashed_count = 0;
    std::size_t tweet_count = 0;
};

// Deterministic for a given config: same seed, byte-identical files. Hashed
// accounts get opaque hex ids, no description, and no labels.csv row.
GenerationResult generate(const GeneratorConfig& config, const std::string& out_dir);

struct VerificationReport {
    bool ok = true;
    std::vector<std::string> flags;
    std::string to_json() const;
};

// Checks empirical per-category means against the configured profiles
// within 3 standard errors, and hashtag pool purity against the noise
// level. An empty dataset passes vacuously.
VerificationReport verify_generation(const Dataset& dataset, const GeneratorConfig& config,
                                     const GroundTruth& truth);

// Feature rows whose label is a planted three-level threshold rule over the
// first three features (remaining columns are uniform noise). No shallower
// rule reproduces the labels, so a depth sweep must peak at depth >= 3.
std::vector<LabeledSample> generate_rule_dataset(std::uint64_t seed, int n_samples,
                                                 int n_noise_features = 3);

}  // namespace footprint
