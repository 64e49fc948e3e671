#include "footprint/labeling.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "footprint/errors.hpp"

namespace footprint {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::CodedFile: return "coded-file";
        case Provenance::DescriptionRule: return "description-rule";
        case Provenance::HashtagFootprint: return "hashtag-footprint";
        case Provenance::Propagated: return "propagated";
    }
    return "?";
}

std::optional<Provenance> provenance_from_string(std::string_view s) {
    std::string key;
    for (char c : s)
        if (std::isalnum(static_cast<unsigned char>(c)))
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "codedfile" || key == "coded") return Provenance::CodedFile;
    if (key == "descriptionrule" || key == "description") return Provenance::DescriptionRule;
    if (key == "hashtagfootprint" || key == "footprint") return Provenance::HashtagFootprint;
    if (key == "propagated") return Provenance::Propagated;
    return std::nullopt;
}

void SeedLabelSet::set(const std::string& account_id, Category category, Provenance provenance) {
    auto it = labels_.find(account_id);
    if (it == labels_.end()) {
        labels_.emplace(account_id, SeedLabel{category, provenance});
        return;
    }
    SeedLabel& cur = it->second;
    if (provenance < cur.provenance) {
        cur = SeedLabel{category, provenance};
    } else if (provenance == cur.provenance && category != cur.category) {
        throw DuplicateAccountConflict("account " + account_id + " labeled both " +
                                       to_string(cur.category) + " and " + to_string(category) +
                                       " by equal-priority sources (" + to_string(provenance) +
                                       ")");
    }
    // lower-priority or repeated identical label: keep what we have
}

std::optional<SeedLabel> SeedLabelSet::get(const std::string& account_id) const {
    auto it = labels_.find(account_id);
    if (it == labels_.end()) return std::nullopt;
    return it->second;
}

std::size_t SeedLabelSet::count(Provenance p) const {
    std::size_t n = 0;
    for (const auto& [id, label] : labels_)
        if (label.provenance == p) ++n;
    return n;
}

SeedLabelSet load_seed_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UnreadableFile("cannot open labels file: " + path);
    SeedLabelSet out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> cols = split_csv_line(t);
        if (cols.size() < 2)
            throw SchemaMismatch("labels file row " + std::to_string(lineno) +
                                 ": expected account_id,category");
        std::string id = trim(cols[0]);
        std::string cat_token = trim(cols[1]);
        auto cat = category_from_string(cat_token);
        if (!cat) {
            // allow a header row in first position
            if (lineno == 1 && lower_ascii(id) == "account_id") continue;
            throw UnknownCategoryToken("labels file row " + std::to_string(lineno) +
                                       ": unknown category \"" + cat_token + "\"");
        }
        if (*cat == Category::Uncategorized)
            throw UnknownCategoryToken("labels file row " + std::to_string(lineno) +
                                       ": uncategorized is not a seed label");
        Provenance prov = Provenance::CodedFile;
        if (cols.size() >= 3 && !trim(cols[2]).empty()) {
            auto p = provenance_from_string(trim(cols[2]));
            if (!p)
                throw SchemaMismatch("labels file row " + std::to_string(lineno) +
                                     ": unknown provenance \"" + trim(cols[2]) + "\"");
            prov = *p;
        }
        out.set(id, *cat, prov);
    }
    return out;
}

void save_seed_labels(const SeedLabelSet& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UnreadableFile("cannot write labels file: " + path);
    out << "account_id,category,provenance\n";
    for (const auto& [id, label] : labels.entries())
        out << id << ',' << to_string(label.category) << ',' << to_string(label.provenance)
            << '\n';
}

std::optional<Category> label_from_description(const std::string& description,
                                               const std::vector<DescriptionRule>& rules) {
    if (description.empty()) return std::nullopt;
    const std::string hay = lower_ascii(description);
    for (const DescriptionRule& rule : rules) {
        if (rule.pattern.empty()) continue;
        const std::string needle = lower_ascii(rule.pattern);
        std::size_t pos = hay.find(needle);
        while (pos != std::string::npos) {
            if (!rule.whole_word) return rule.category;
            bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
            std::size_t end = pos + needle.size();
            bool right_ok = end >= hay.size() || !is_word_char(hay[end]);
            if (left_ok && right_ok) return rule.category;
            pos = hay.find(needle, pos + 1);
        }
    }
    return std::nullopt;
}

std::vector<DescriptionRule> load_rules(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UnreadableFile("cannot open rules file: " + path);
    std::vector<DescriptionRule> rules;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.rfind('=');
        if (eq == std::string::npos)
            throw InvalidConfig("rules file line " + std::to_string(lineno) +
                                ": expected pattern = category");
        std::string lhs = trim(t.substr(0, eq));
        std::string rhs = trim(t.substr(eq + 1));
        DescriptionRule rule;
        if (lhs.rfind("word:", 0) == 0) {
            rule.whole_word = true;
            lhs = trim(lhs.substr(5));
        }
        if (lhs.size() >= 2 && lhs.front() == '"' && lhs.back() == '"')
            lhs = lhs.substr(1, lhs.size() - 2);
        if (lhs.empty())
            throw InvalidConfig("rules file line " + std::to_string(lineno) + ": empty pattern");
        rule.pattern = lhs;
        auto cat = category_from_string(rhs);
        if (!cat || *cat == Category::Uncategorized)
            throw UnknownCategoryToken("rules file line " + std::to_string(lineno) +
                                       ": unknown category \"" + rhs + "\"");
        rule.category = *cat;
        rules.push_back(std::move(rule));
    }
    return rules;
}

namespace {

std::vector<DescriptionRule> build_default_rules() {
    auto rule = [](const char* pattern, bool word, Category cat) {
        return DescriptionRule{pattern, word, cat};
    };
    // Ordered: news-outlet wording first so that mixed descriptions such as
    // "local news, sports, business, politics ..." resolve to the outlet
    // category before any politics keyword can fire.
    return {
        rule("news", false, Category::FakeNews),
        rule("breaking", false, Category::FakeNews),
        rule("original reporting", false, Category::FakeNews),
        rule("stories, powered", false, Category::FakeNews),
        rule("official twitter account", false, Category::Organizations),
        rule("official", false, Category::Organizations),
        rule("organization", false, Category::Organizations),
        rule("ngo", true, Category::Organizations),
        rule("magazine", false, Category::Organizations),
        rule("department of", false, Category::Organizations),
        rule("club", true, Category::Organizations),
        rule("movement", true, Category::Organizations),
        rule("conservative", false, Category::PoliticalAffiliates),
        rule("liberal", false, Category::PoliticalAffiliates),
        rule("political", false, Category::PoliticalAffiliates),
        rule("politics", false, Category::PoliticalAffiliates),
        rule("patriot", false, Category::PoliticalAffiliates),
        rule("amendment", false, Category::PoliticalAffiliates),
        rule("pro life", false, Category::PoliticalAffiliates),
        rule("pro-life", false, Category::PoliticalAffiliates),
        rule("christian", false, Category::PoliticalAffiliates),
        rule("socialist", false, Category::PoliticalAffiliates),
        rule("military", false, Category::PoliticalAffiliates),
        rule("maga", true, Category::PoliticalAffiliates),
        rule("artist", false, Category::DefaultIndividuals),
        rule("enthusiast", false, Category::DefaultIndividuals),
        rule("introvert", false, Category::DefaultIndividuals),
        rule("extrovert", false, Category::DefaultIndividuals),
        rule("wannabe", false, Category::DefaultIndividuals),
        rule("dreamer", false, Category::DefaultIndividuals),
        rule("lover", true, Category::DefaultIndividuals),
        rule("mom", true, Category::DefaultIndividuals),
        rule("dad", true, Category::DefaultIndividuals),
    };
}

HashtagFootprintTable build_default_footprint_table() {
    // Exemplar hashtag sets for each category; a tag seen under more than
    // one category keeps its politically anchored assignment (tcot).
    HashtagFootprintTable t;
    auto put = [&t](std::initializer_list<const char*> tags, Category cat) {
        for (const char* tag : tags) t.emplace(tag, cat);
    };
    put({"topnews", "news", "rostovnadon", "rostov", "breaking", "local"}, Category::FakeNews);
    put({"cityofchester", "chester", "pennsylvania", "usa", "america", "us", "secede", "texas",
         "secession", "austin", "texan", "blacklivesmatter", "acab", "community"},
        Category::Organizations);
    put({"moscow", "defundobamacare", "standwithcruz", "makedclisten", "repealobamacare", "tcot",
         "christian", "american", "patriot", "teaparty", "tgdn", "nra", "lnyhbt", "pjnet",
         "maga"},
        Category::PoliticalAffiliates);
    put({"music", "todolistbeforechristmas", "mutualfollowing", "wakeupamerica",
         "rednationrising", "love", "life"},
        Category::DefaultIndividuals);
    return t;
}

}  // namespace

const std::vector<DescriptionRule>& default_rules() {
    static const std::vector<DescriptionRule> kRules = build_default_rules();
    return kRules;
}

const HashtagFootprintTable& default_footprint_table() {
    static const HashtagFootprintTable kTable = build_default_footprint_table();
    return kTable;
}

HashtagFootprintTable load_footprint_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UnreadableFile("cannot open footprint table: " + path);
    HashtagFootprintTable out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> cols = split_csv_line(t);
        if (cols.size() < 2)
            throw SchemaMismatch("footprint table row " + std::to_string(lineno) +
                                 ": expected hashtag,category");
        std::string tag = lower_ascii(trim(cols[0]));
        if (!tag.empty() && tag[0] == '#') tag = tag.substr(1);
        auto cat = category_from_string(trim(cols[1]));
        if (!cat) {
            if (lineno == 1 && tag == "hashtag") continue;
            throw UnknownCategoryToken("footprint table row " + std::to_string(lineno) +
                                       ": unknown category \"" + trim(cols[1]) + "\"");
        }
        if (tag.empty())
            throw SchemaMismatch("footprint table row " + std::to_string(lineno) +
                                 ": empty hashtag");
        auto [it, inserted] = out.emplace(tag, *cat);
        if (!inserted && it->second != *cat)
            throw InvalidConfig("footprint table row " + std::to_string(lineno) + ": hashtag \"" +
                                tag + "\" mapped to two categories");
    }
    return out;
}

std::optional<Category> label_from_hit_counts(
    const std::array<std::int64_t, kCategoryCount>& hits, int min_hits) {
    if (min_hits < 1) throw InvalidConfig("min_hits must be >= 1");
    std::int64_t best = 0;
    int winner = -1;
    for (int c = 0; c < kCategoryCount; ++c) {
        if (hits[c] > best) {
            best = hits[c];
            winner = c;
        }
    }
    if (winner < 0 || best < min_hits) return std::nullopt;
    return kCategories[winner];
}

std::optional<Category> label_from_hashtag_footprint(const std::vector<TweetRecord>& tweets,
                                                     const HashtagFootprintTable& table,
                                                     int min_hits) {
    std::array<std::int64_t, kCategoryCount> hits{};
    for (const TweetRecord& t : tweets) {
        for (const std::string& tag : t.hashtags) {
            auto it = table.find(tag);
            if (it != table.end()) hits[category_index(it->second)] += 1;
        }
    }
    return label_from_hit_counts(hits, min_hits);
}

std::map<std::string, Category> footprint_labels(const Dataset& dataset,
                                                 const HashtagFootprintTable& table, int min_hits,
                                                 const SeedLabelSet& already_labeled) {
    std::map<std::string, std::array<std::int64_t, kCategoryCount>> hits;
    dataset.for_each_tweet([&](const TweetRecord& t) {
        for (const std::string& tag : t.hashtags) {
            auto it = table.find(tag);
            if (it != table.end()) hits[t.account_id][category_index(it->second)] += 1;
        }
    });
    std::map<std::string, Category> out;
    for (const auto& [id, counts] : hits) {
        if (already_labeled.has(id)) continue;
        auto cat = label_from_hit_counts(counts, min_hits);
        if (cat) out.emplace(id, *cat);
    }
    return out;
}

}  // namespace footprint
