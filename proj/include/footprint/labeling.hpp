#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "footprint/category.hpp"
#include "footprint/corpus.hpp"

namespace footprint {

// Where a label came from, in descending priority. A higher-priority source
// silently overrides a lower one; two sources of the same priority that
// disagree are a data error.
enum class Provenance : std::uint8_t {
    CodedFile = 0,
    DescriptionRule = 1,
    HashtagFootprint = 2,
    Propagated = 3,
};

const char* to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view s);

struct SeedLabel {
    Category category = Category::Uncategorized;
    Provenance provenance = Provenance::CodedFile;
};

class SeedLabelSet {
public:
    // Applies the priority rule above. Throws DuplicateAccountConflict when
    // an equal-priority source disagrees; re-asserting the same category is
    // a no-op.
    void set(const std::string& account_id, Category category, Provenance provenance);

    bool has(const std::string& account_id) const { return labels_.count(account_id) > 0; }
    std::optional<SeedLabel> get(const std::string& account_id) const;
    std::size_t size() const { return labels_.size(); }
    std::size_t count(Provenance p) const;
    const std::map<std::string, SeedLabel>& entries() const { return labels_; }

private:
    std::map<std::string, SeedLabel> labels_;
};

// CSV with columns account_id, category (header optional) and an optional
// third provenance column, defaulting to coded-file. Unknown category tokens
// abort with the offending row named.
SeedLabelSet load_seed_labels(const std::string& path);
void save_seed_labels(const SeedLabelSet& labels, const std::string& path);

// One description-matching rule. Patterns match case-insensitively; a
// whole-word rule additionally requires non-alphanumeric (or string edge) on
// both sides of the match.
struct DescriptionRule {
    std::string pattern;
    bool whole_word = false;
    Category category = Category::Uncategorized;
};

// Flat key/value rule file, ordered, first match wins:
//   "local news" = fake-news
//   word:"ngo"   = organizations
// '#' starts a comment line.
std::vector<DescriptionRule> load_rules(const std::string& path);
const std::vector<DescriptionRule>& default_rules();

std::optional<Category> label_from_description(const std::string& description,
                                               const std::vector<DescriptionRule>& rules);

// Normalized hashtag -> category; a hashtag maps to at most one category.
using HashtagFootprintTable = std::map<std::string, Category>;

// CSV with columns hashtag, category. Conflicting duplicate hashtags abort.
HashtagFootprintTable load_footprint_table(const std::string& path);
const HashtagFootprintTable& default_footprint_table();

// Core decision rule: per-category hit counts over table hashtags, indexed
// by category_index. The winning category is the one used most often,
// provided its count reaches min_hits; equal counts fall back to the fixed
// category order.
std::optional<Category> label_from_hit_counts(
    const std::array<std::int64_t, kCategoryCount>& hits, int min_hits);

std::optional<Category> label_from_hashtag_footprint(const std::vector<TweetRecord>& tweets,
                                                     const HashtagFootprintTable& table,
                                                     int min_hits = 2);

// Bulk variant: one streaming pass over the dataset, returning a footprint
// label for every account that reaches min_hits and is not already labeled.
std::map<std::string, Category> footprint_labels(const Dataset& dataset,
                                                 const HashtagFootprintTable& table, int min_hits,
                                                 const SeedLabelSet& already_labeled);

}  // namespace footprint
