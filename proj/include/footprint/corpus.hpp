#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "footprint/errors.hpp"
#include "footprint/time.hpp"

namespace footprint {

struct TweetRecord {
    std::string account_id;
    UtcTime timestamp = 0;
    std::string text;
    bool is_retweet = false;
    bool is_reply = false;
    std::int64_t like_count = 0;
    std::vector<std::string> hashtags;  // lowercase, '#'-stripped, non-empty
    std::vector<std::string> mentions;
    std::int64_t follower_count_at_tweet = 0;
    std::int64_t following_count_at_tweet = 0;
    std::string language_tag;
};

struct AccountProfile {
    std::string account_id;
    bool is_hashed = false;
    std::optional<std::string> display_name;
    std::optional<std::string> description;
    std::string primary_language;
    UtcTime first_seen = 0;
    UtcTime last_seen = 0;
};

// Per-account totals over every accepted tweet. Counts are exact sums; means
// are arithmetic means over tweets (0 for an account with no tweets).
struct AggregateRecord {
    std::int64_t tweet_count = 0;
    std::int64_t retweet_count = 0;
    std::int64_t mention_count = 0;
    std::int64_t hashtag_count = 0;
    std::int64_t reply_count = 0;
    std::int64_t like_count = 0;
    double follower_sum = 0;
    double following_sum = 0;
    std::int64_t active_days = -1;  // distinct UTC dates; -1 when not tracked

    double mean_followers() const {
        return tweet_count ? follower_sum / static_cast<double>(tweet_count) : 0.0;
    }
    double mean_following() const {
        return tweet_count ? following_sum / static_cast<double>(tweet_count) : 0.0;
    }
};

struct IngestSummary {
    std::string source_path;
    std::string schema;
    std::size_t row_count = 0;  // data rows read (header excluded)
    std::size_t accepted = 0;
    std::size_t account_count = 0;
    std::size_t hashed_account_count = 0;
    std::map<std::string, std::size_t> rejects;   // reason -> count
    std::map<std::string, std::size_t> warnings;  // non-fatal oddities
    std::size_t retweet_heuristic_rows = 0;       // "RT @" fallback fired

    std::size_t rejected_total() const;
    std::string to_json() const;
};

// A parsed archive. Accounts and aggregates live in memory; the tweet
// sequence stays in memory only up to the ingest buffer cap, past which it
// spills to a canonical-JSONL spool file and is re-streamed on demand.
class Dataset {
public:
    std::string name;
    std::map<std::string, AccountProfile> accounts;

    // Half-open observation window [start, end); end is one second past the
    // last accepted tweet.
    UtcTime start = 0;
    UtcTime end = 0;

    std::size_t tweet_count() const { return tweet_count_; }
    bool empty() const { return tweet_count_ == 0; }
    bool spilled() const { return !spool_path_.empty(); }
    const std::string& spool_path() const { return spool_path_; }

    const AccountProfile& profile(const std::string& account_id) const;
    const AggregateRecord& aggregates(const std::string& account_id) const;

    // Streams every tweet in ingest order. Reads the spool file when spilled,
    // so peak memory stays O(accounts + one row).
    void for_each_tweet(const std::function<void(const TweetRecord&)>& fn) const;

private:
    friend class DatasetBuilder;
    std::vector<TweetRecord> buffer_;
    std::string spool_path_;
    std::size_t tweet_count_ = 0;
    std::map<std::string, AggregateRecord> aggregates_;
};

// Incremental construction used by the archive parsers, the synthetic
// generator, and hand-built test fixtures.
class DatasetBuilder {
public:
    explicit DatasetBuilder(std::string name, std::size_t buffer_cap = 200000,
                            std::string spool_dir = "", bool track_active_days = false);

    void add(const TweetRecord& tweet, const std::optional<std::string>& display_name,
             const std::optional<std::string>& description);
    void add(const TweetRecord& tweet) { add(tweet, std::nullopt, std::nullopt); }

    Dataset finish();

private:
    void spill();

    Dataset ds_;
    std::size_t buffer_cap_;
    std::string spool_dir_;
    bool track_active_days_;
    std::map<std::string, std::vector<std::uint64_t>> day_bits_;
    std::map<std::string, std::int64_t> day_base_;
};

enum class ArchiveSchema { AllianceTsv, LinvillCsv, CanonicalJsonl };

// Names accepted: "alliance-tsv", "linvill-csv", "jsonl", "auto".
std::optional<ArchiveSchema> schema_from_string(const std::string& name);
const char* to_string(ArchiveSchema s);

struct IngestOptions {
    std::string language_filter;  // empty = keep everything
    std::optional<std::pair<UtcTime, UtcTime>> timeframe;  // half-open; outside rows rejected
    std::size_t buffer_cap = 200000;
    std::string spool_dir;  // where spilled tweets go; temp dir when empty
    bool track_active_days = false;
};

struct ParseResult {
    Dataset dataset;
    IngestSummary summary;
};

// Streams `path` row by row through the schema adapter. Malformed rows are
// rejected and counted, never fatal; a bad header is.
ParseResult parse_archive(const std::string& path, const std::string& schema,
                          const IngestOptions& options = {});

// Every maximal '#'-prefixed run of letters/digits/underscore, folded to
// lowercase, '#' stripped, in order of appearance, duplicates kept.
// Letter classification covers the Latin, Greek and Cyrillic blocks.
std::vector<std::string> extract_hashtags(const std::string& text);

// Lowercased @-handles from the text.
std::vector<std::string> extract_mentions(const std::string& text);

// An identity field counts as opaque when it is absent, empty, or a single
// run of >= 16 hex characters. An account is hashed when its description is
// opaque and its display name (if any) is too.
bool detect_hashed(const std::optional<std::string>& description,
                   const std::optional<std::string>& display_name = std::nullopt);

// Throws UnknownAccount for ids the dataset has never seen.
AggregateRecord account_aggregates(const Dataset& dataset, const std::string& account_id);

// For archives that carry an operator-coded per-account category column
// (linvill-csv), extract account -> raw category string.
std::map<std::string, std::string> extract_account_categories(const std::string& path,
                                                              const std::string& schema);

// Canonical JSONL serialization of one tweet (used by the spool and the
// synthetic generator). Keys are the TweetRecord field names; profile fields
// ride along as optional "display_name"/"description".
std::string tweet_to_jsonl(const TweetRecord& t,
                           const std::optional<std::string>& display_name = std::nullopt,
                           const std::optional<std::string>& description = std::nullopt);

}  // namespace footprint
