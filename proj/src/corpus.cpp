#include "footprint/corpus.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

namespace footprint {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// UTF-8 + hashtag character classes

std::uint32_t decode_utf8(const std::string& s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra;
    std::uint32_t cp;
    if ((c >> 5) == 0x6) {
        cp = c & 0x1Fu;
        extra = 1;
    } else if ((c >> 4) == 0xE) {
        cp = c & 0x0Fu;
        extra = 2;
    } else if ((c >> 3) == 0x1E) {
        cp = c & 0x07u;
        extra = 3;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + extra >= s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc >> 6) != 0x2) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3Fu);
    }
    i += extra + 1;
    return cp;
}

void encode_utf8(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_tag_char(std::uint32_t cp) {
    if (cp < 0x80)
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
               (cp >= '0' && cp <= '9') || cp == '_';
    if (cp >= 0x300 && cp <= 0x36F) return true;  // combining marks
    if (cp >= 0xC0 && cp <= 0xFF) return cp != 0xD7 && cp != 0xF7;
    if (cp >= 0x100 && cp <= 0x24F) return true;  // Latin extended
    if (cp >= 0x370 && cp <= 0x3FF)
        return cp != 0x374 && cp != 0x375 && cp != 0x37E && cp != 0x387;
    if (cp >= 0x400 && cp <= 0x52F) return true;  // Cyrillic + supplement
    if (cp >= 0x5D0 && cp <= 0x5EA) return true;  // Hebrew
    if ((cp >= 0x620 && cp <= 0x64A) || (cp >= 0x660 && cp <= 0x669)) return true;
    if (cp >= 0x900 && cp <= 0x97F) return true;  // Devanagari
    if (cp >= 0x3040 && cp <= 0x30FF) return true;
    if (cp >= 0x4E00 && cp <= 0x9FFF) return true;
    if (cp >= 0xAC00 && cp <= 0xD7A3) return true;
    return false;
}

// Default case mapping for the blocks above; identity elsewhere.
std::uint32_t fold_char(std::uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;  // Greek
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;                 // Cyrillic
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;                 // Ё etc.
    return cp;
}

// ---------------------------------------------------------------------------
// Delimited-text reader (RFC 4180 quoting; fields may hold the delimiter and
// embedded newlines when quoted)

class DelimitedReader {
public:
    DelimitedReader(std::istream& in, char delim) : in_(in), delim_(delim) {}

    bool next(std::vector<std::string>& fields) {
        fields.clear();
        if (in_.peek() == EOF) return false;
        std::string field;
        bool in_quotes = false;
        bool saw_any = false;
        int ch;
        while ((ch = in_.get()) != EOF) {
            saw_any = true;
            char c = static_cast<char>(ch);
            if (in_quotes) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"' && field.empty()) {
                in_quotes = true;
            } else if (c == delim_) {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\n') {
                break;
            } else if (c == '\r') {
                if (in_.peek() == '\n') in_.get();
                break;
            } else {
                field.push_back(c);
            }
        }
        if (!saw_any) return false;
        fields.push_back(std::move(field));
        return true;
    }

private:
    std::istream& in_;
    char delim_;
};

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

std::string normalize_language(const std::string& raw) {
    std::string s = lower_ascii(trim(raw));
    if (s == "english") return "en";
    if (s == "russian") return "ru";
    if (s == "german") return "de";
    if (s == "french") return "fr";
    if (s == "spanish") return "es";
    return s;
}

bool parse_bool(const std::string& raw, bool& out) {
    std::string s = lower_ascii(trim(raw));
    if (s == "true" || s == "1" || s == "yes" || s == "t") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "f") {
        out = false;
        return true;
    }
    return false;
}

bool parse_count(const std::string& raw, std::int64_t& out) {
    std::string s = trim(raw);
    if (s.empty()) return false;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || v < 0) return false;
    out = static_cast<std::int64_t>(v);
    return true;
}

// "[a, b, c]" -> {"a","b","c"}
std::vector<std::string> parse_bracket_list(const std::string& raw) {
    std::vector<std::string> out;
    std::string s = trim(raw);
    if (s.size() >= 2 && s.front() == '[') s = s.substr(1, s.size() - 2);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty() && item.front() == '\'') item = trim(item.substr(1, item.size() - 2));
        if (!item.empty()) out.push_back(lower_ascii(item));
    }
    return out;
}

std::optional<std::string> non_empty(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    return t;
}

std::atomic<std::uint64_t> g_spool_counter{0};

std::string make_spool_path(const std::string& dir, const std::string& name) {
    namespace fs = std::filesystem;
    fs::path base = dir.empty() ? fs::temp_directory_path() : fs::path(dir);
    fs::create_directories(base);
    std::uint64_t n = g_spool_counter.fetch_add(1);
    std::string file = name + "_" + std::to_string(::getpid()) + "_" + std::to_string(n) +
                       ".spool.jsonl";
    return (base / file).string();
}

bool field_is_opaque(const std::optional<std::string>& field) {
    if (!field || trim(*field).empty()) return true;
    const std::string v = trim(*field);
    if (v.size() < 16) return false;
    for (char c : v) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> extract_hashtags(const std::string& text) {
    std::vector<std::string> tags;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '#') {
            decode_utf8(text, i);
            continue;
        }
        ++i;  // consume '#'
        std::string tag;
        std::size_t j = i;
        while (j < text.size()) {
            std::size_t k = j;
            std::uint32_t cp = decode_utf8(text, k);
            if (!is_tag_char(cp)) break;
            encode_utf8(fold_char(cp), tag);
            j = k;
        }
        if (!tag.empty()) {
            tags.push_back(std::move(tag));
            i = j;
        }
    }
    return tags;
}

std::vector<std::string> extract_mentions(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '@') {
            ++i;
            continue;
        }
        ++i;
        std::string handle;
        while (i < text.size()) {
            char c = text[i];
            if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                c == '_') {
                handle.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
                ++i;
            } else {
                break;
            }
        }
        if (!handle.empty()) out.push_back(std::move(handle));
    }
    return out;
}

bool detect_hashed(const std::optional<std::string>& description,
                   const std::optional<std::string>& display_name) {
    return field_is_opaque(description) && field_is_opaque(display_name);
}

// ---------------------------------------------------------------------------
// IngestSummary

std::size_t IngestSummary::rejected_total() const {
    std::size_t n = 0;
    for (const auto& [reason, count] : rejects) n += count;
    return n;
}

std::string IngestSummary::to_json() const {
    json j;
    j["source"] = source_path;
    j["schema"] = schema;
    j["rows"] = row_count;
    j["accepted"] = accepted;
    j["accounts"] = account_count;
    j["hashed_accounts"] = hashed_account_count;
    j["rejected_total"] = rejected_total();
    j["rejected"] = rejects;
    j["warnings"] = warnings;
    j["retweet_heuristic_rows"] = retweet_heuristic_rows;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Dataset / DatasetBuilder

const AccountProfile& Dataset::profile(const std::string& account_id) const {
    auto it = accounts.find(account_id);
    if (it == accounts.end()) throw UnknownAccount("unknown account: " + account_id);
    return it->second;
}

const AggregateRecord& Dataset::aggregates(const std::string& account_id) const {
    static const AggregateRecord kZero{};
    if (!accounts.count(account_id)) throw UnknownAccount("unknown account: " + account_id);
    auto it = aggregates_.find(account_id);
    return it == aggregates_.end() ? kZero : it->second;
}

std::string tweet_to_jsonl(const TweetRecord& t, const std::optional<std::string>& display_name,
                           const std::optional<std::string>& description) {
    json j;
    j["account_id"] = t.account_id;
    j["timestamp"] = format_time(t.timestamp);
    j["text"] = t.text;
    j["is_retweet"] = t.is_retweet;
    j["is_reply"] = t.is_reply;
    j["like_count"] = t.like_count;
    j["hashtags"] = t.hashtags;
    j["mentions"] = t.mentions;
    j["follower_count_at_tweet"] = t.follower_count_at_tweet;
    j["following_count_at_tweet"] = t.following_count_at_tweet;
    j["language_tag"] = t.language_tag;
    if (display_name) j["display_name"] = *display_name;
    if (description) j["description"] = *description;
    return j.dump();
}

namespace {

// Parses one canonical-JSONL line. Returns false (with a reason) instead of
// throwing so callers can count the reject and move on.
bool tweet_from_jsonl(const std::string& line, TweetRecord& t,
                      std::optional<std::string>& display_name,
                      std::optional<std::string>& description, std::string& reason) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        reason = "malformed-json";
        return false;
    }
    if (!j.contains("account_id") || !j["account_id"].is_string() ||
        j["account_id"].get<std::string>().empty()) {
        reason = "missing-account-id";
        return false;
    }
    t = TweetRecord{};
    t.account_id = j["account_id"].get<std::string>();
    if (j.contains("timestamp") && j["timestamp"].is_number_integer()) {
        t.timestamp = j["timestamp"].get<std::int64_t>();
    } else {
        auto ts = j.contains("timestamp") && j["timestamp"].is_string()
                      ? parse_time(j["timestamp"].get<std::string>())
                      : std::nullopt;
        if (!ts) {
            reason = "malformed-timestamp";
            return false;
        }
        t.timestamp = *ts;
    }
    t.text = j.value("text", std::string{});
    t.is_retweet = j.value("is_retweet", false);
    t.is_reply = j.value("is_reply", false);
    t.like_count = j.value("like_count", std::int64_t{0});
    t.follower_count_at_tweet = j.value("follower_count_at_tweet", std::int64_t{0});
    t.following_count_at_tweet = j.value("following_count_at_tweet", std::int64_t{0});
    t.language_tag = normalize_language(j.value("language_tag", std::string{}));
    if (j.contains("hashtags") && j["hashtags"].is_array()) {
        for (const auto& h : j["hashtags"])
            if (h.is_string()) t.hashtags.push_back(h.get<std::string>());
    } else {
        t.hashtags = extract_hashtags(t.text);
    }
    if (j.contains("mentions") && j["mentions"].is_array()) {
        for (const auto& m : j["mentions"])
            if (m.is_string()) t.mentions.push_back(m.get<std::string>());
    } else {
        t.mentions = extract_mentions(t.text);
    }
    display_name = std::nullopt;
    description = std::nullopt;
    if (j.contains("display_name") && j["display_name"].is_string())
        display_name = j["display_name"].get<std::string>();
    if (j.contains("description") && j["description"].is_string())
        description = j["description"].get<std::string>();
    return true;
}

}  // namespace

void Dataset::for_each_tweet(const std::function<void(const TweetRecord&)>& fn) const {
    if (spool_path_.empty()) {
        for (const auto& t : buffer_) fn(t);
        return;
    }
    std::ifstream in(spool_path_);
    if (!in) throw UnreadableFile("cannot reopen spool: " + spool_path_);
    std::string line;
    TweetRecord t;
    std::optional<std::string> dn, desc;
    std::string reason;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!tweet_from_jsonl(line, t, dn, desc, reason))
            throw DataError("corrupt spool row: " + reason);
        fn(t);
    }
}

DatasetBuilder::DatasetBuilder(std::string name, std::size_t buffer_cap, std::string spool_dir,
                               bool track_active_days)
    : buffer_cap_(buffer_cap), spool_dir_(std::move(spool_dir)),
      track_active_days_(track_active_days) {
    ds_.name = std::move(name);
}

void DatasetBuilder::spill() {
    ds_.spool_path_ = make_spool_path(spool_dir_, ds_.name.empty() ? "dataset" : ds_.name);
    std::ofstream out(ds_.spool_path_);
    if (!out) throw UnreadableFile("cannot open spool for writing: " + ds_.spool_path_);
    for (const auto& t : ds_.buffer_) out << tweet_to_jsonl(t) << '\n';
    ds_.buffer_.clear();
    ds_.buffer_.shrink_to_fit();
}

void DatasetBuilder::add(const TweetRecord& tweet, const std::optional<std::string>& display_name,
                         const std::optional<std::string>& description) {
    auto [it, inserted] = ds_.accounts.try_emplace(tweet.account_id);
    AccountProfile& p = it->second;
    if (inserted) {
        p.account_id = tweet.account_id;
        p.first_seen = p.last_seen = tweet.timestamp;
        p.primary_language = tweet.language_tag;
    } else {
        p.first_seen = std::min(p.first_seen, tweet.timestamp);
        p.last_seen = std::max(p.last_seen, tweet.timestamp);
        if (p.primary_language.empty()) p.primary_language = tweet.language_tag;
    }
    if (!p.display_name && display_name && !trim(*display_name).empty())
        p.display_name = trim(*display_name);
    if (!p.description && description && !trim(*description).empty())
        p.description = trim(*description);

    AggregateRecord& agg = ds_.aggregates_[tweet.account_id];
    agg.tweet_count += 1;
    agg.retweet_count += tweet.is_retweet ? 1 : 0;
    agg.reply_count += tweet.is_reply ? 1 : 0;
    agg.mention_count += static_cast<std::int64_t>(tweet.mentions.size());
    agg.hashtag_count += static_cast<std::int64_t>(tweet.hashtags.size());
    agg.like_count += tweet.like_count;
    agg.follower_sum += static_cast<double>(tweet.follower_count_at_tweet);
    agg.following_sum += static_cast<double>(tweet.following_count_at_tweet);

    if (track_active_days_) {
        std::int64_t day = tweet.timestamp / 86400 - (tweet.timestamp % 86400 < 0 ? 1 : 0);
        auto [bit, fresh] = day_bits_.try_emplace(tweet.account_id);
        auto [baseit, _] = day_base_.try_emplace(tweet.account_id, day);
        std::int64_t base = baseit->second;
        if (day < base) {
            // re-anchor: shift existing bits up
            std::int64_t shift = base - day;
            std::vector<std::uint64_t> nb((bit->second.size() * 64 + shift + 63) / 64, 0);
            for (std::size_t w = 0; w < bit->second.size(); ++w) {
                for (int b = 0; b < 64; ++b) {
                    if (bit->second[w] & (1ULL << b)) {
                        std::int64_t pos = static_cast<std::int64_t>(w) * 64 + b + shift;
                        nb[pos / 64] |= 1ULL << (pos % 64);
                    }
                }
            }
            bit->second = std::move(nb);
            baseit->second = day;
            base = day;
        }
        std::int64_t pos = day - base;
        if (static_cast<std::size_t>(pos / 64) >= bit->second.size())
            bit->second.resize(pos / 64 + 1, 0);
        bit->second[pos / 64] |= 1ULL << (pos % 64);
        (void)fresh;
    }

    if (ds_.tweet_count_ == 0) {
        ds_.start = tweet.timestamp;
        ds_.end = tweet.timestamp + 1;
    } else {
        ds_.start = std::min(ds_.start, tweet.timestamp);
        ds_.end = std::max(ds_.end, tweet.timestamp + 1);
    }
    ds_.tweet_count_ += 1;

    if (!ds_.spool_path_.empty()) {
        std::ofstream out(ds_.spool_path_, std::ios::app);
        out << tweet_to_jsonl(tweet) << '\n';
    } else {
        ds_.buffer_.push_back(tweet);
        if (ds_.buffer_.size() > buffer_cap_) spill();
    }
}

Dataset DatasetBuilder::finish() {
    for (auto& [id, profile] : ds_.accounts)
        profile.is_hashed = detect_hashed(profile.description, profile.display_name);
    if (track_active_days_) {
        for (auto& [id, agg] : ds_.aggregates_) {
            std::int64_t days = 0;
            auto it = day_bits_.find(id);
            if (it != day_bits_.end())
                for (std::uint64_t w : it->second) days += __builtin_popcountll(w);
            agg.active_days = days;
        }
    }
    return std::move(ds_);
}

AggregateRecord account_aggregates(const Dataset& dataset, const std::string& account_id) {
    return dataset.aggregates(account_id);
}

// ---------------------------------------------------------------------------
// Archive schema adapters

std::optional<ArchiveSchema> schema_from_string(const std::string& name) {
    std::string s = lower_ascii(trim(name));
    if (s == "alliance-tsv") return ArchiveSchema::AllianceTsv;
    if (s == "linvill-csv") return ArchiveSchema::LinvillCsv;
    if (s == "jsonl" || s == "canonical-jsonl") return ArchiveSchema::CanonicalJsonl;
    return std::nullopt;
}

const char* to_string(ArchiveSchema s) {
    switch (s) {
        case ArchiveSchema::AllianceTsv: return "alliance-tsv";
        case ArchiveSchema::LinvillCsv: return "linvill-csv";
        case ArchiveSchema::CanonicalJsonl: return "jsonl";
    }
    return "?";
}

namespace {

struct HeaderIndex {
    std::map<std::string, int> pos;
    int get(const std::string& name) const {
        auto it = pos.find(name);
        return it == pos.end() ? -1 : it->second;
    }
    bool has(const std::string& name) const { return pos.count(name) > 0; }
};

HeaderIndex index_header(const std::vector<std::string>& fields) {
    HeaderIndex h;
    for (std::size_t i = 0; i < fields.size(); ++i) h.pos[lower_ascii(trim(fields[i]))] = static_cast<int>(i);
    return h;
}

std::string field_at(const std::vector<std::string>& row, int idx) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= row.size()) return "";
    return row[idx];
}

ArchiveSchema sniff_schema(std::istream& in) {
    int first = in.peek();
    if (first == '{') return ArchiveSchema::CanonicalJsonl;
    std::string header;
    std::getline(in, header);
    in.seekg(0);
    if (header.find('\t') != std::string::npos) return ArchiveSchema::AllianceTsv;
    std::string low = lower_ascii(header);
    if (low.find("author") != std::string::npos && low.find("content") != std::string::npos)
        return ArchiveSchema::LinvillCsv;
    if (low.find("userid") != std::string::npos) return ArchiveSchema::AllianceTsv;
    throw SchemaMismatch("cannot recognize archive layout from the first line");
}

struct RowOutcome {
    bool accepted = false;
    std::string reject_reason;
};

class Ingestor {
public:
    Ingestor(const IngestOptions& opt, IngestSummary& summary, DatasetBuilder& builder)
        : opt_(opt), summary_(summary), builder_(builder),
          filter_(normalize_language(opt.language_filter)) {}

    void consume(TweetRecord&& t, const std::optional<std::string>& display_name,
                 const std::optional<std::string>& description) {
        if (!filter_.empty() && t.language_tag != filter_) {
            reject("language-filtered");
            return;
        }
        if (opt_.timeframe &&
            (t.timestamp < opt_.timeframe->first || t.timestamp >= opt_.timeframe->second)) {
            reject("outside-timeframe");
            return;
        }
        builder_.add(t, display_name, description);
        summary_.accepted += 1;
    }

    void reject(const std::string& reason) { summary_.rejects[reason] += 1; }
    void warn(const std::string& what) { summary_.warnings[what] += 1; }

    const IngestOptions& opt_;
    IngestSummary& summary_;
    DatasetBuilder& builder_;
    std::string filter_;
};

void ingest_alliance_tsv(std::istream& in, Ingestor& ing) {
    DelimitedReader reader(in, '\t');
    std::vector<std::string> row;
    if (!reader.next(row)) throw SchemaMismatch("empty file, expected a header row");
    HeaderIndex h = index_header(row);
    for (const char* req : {"userid", "tweet_text", "tweet_time"}) {
        if (!h.has(req)) throw SchemaMismatch(std::string("alliance-tsv header missing: ") + req);
    }
    const int c_user = h.get("userid"), c_text = h.get("tweet_text"), c_time = h.get("tweet_time");
    const int c_dname = h.get("user_display_name"), c_desc = h.get("user_profile_description");
    const int c_followers = h.get("follower_count"), c_following = h.get("following_count");
    const int c_acclang = h.get("account_language"), c_tweetlang = h.get("tweet_language");
    const int c_isrt = h.get("is_retweet"), c_reply = h.get("in_reply_to_tweetid");
    const int c_like = h.get("like_count"), c_mentions = h.get("user_mentions");

    while (reader.next(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        ing.summary_.row_count += 1;
        TweetRecord t;
        t.account_id = trim(field_at(row, c_user));
        if (t.account_id.empty()) {
            ing.reject("missing-account-id");
            continue;
        }
        auto ts = parse_time(trim(field_at(row, c_time)));
        if (!ts) {
            ing.reject("malformed-timestamp");
            continue;
        }
        t.timestamp = *ts;
        t.text = field_at(row, c_text);
        t.hashtags = extract_hashtags(t.text);
        std::string lang = field_at(row, c_tweetlang);
        if (trim(lang).empty()) lang = field_at(row, c_acclang);
        t.language_tag = normalize_language(lang);
        if (!parse_count(field_at(row, c_like), t.like_count)) {
            t.like_count = 0;
            if (c_like >= 0) ing.warn("missing-like-count");
        }
        if (!parse_count(field_at(row, c_followers), t.follower_count_at_tweet)) {
            t.follower_count_at_tweet = 0;
            ing.warn("missing-follower-count");
        }
        if (!parse_count(field_at(row, c_following), t.following_count_at_tweet)) {
            t.following_count_at_tweet = 0;
            ing.warn("missing-following-count");
        }
        bool rt = false;
        if (c_isrt >= 0 && parse_bool(field_at(row, c_isrt), rt)) {
            t.is_retweet = rt;
        } else if (t.text.rfind("RT @", 0) == 0) {
            t.is_retweet = true;
            ing.summary_.retweet_heuristic_rows += 1;
        }
        t.is_reply = !trim(field_at(row, c_reply)).empty();
        if (c_mentions >= 0) {
            t.mentions = parse_bracket_list(field_at(row, c_mentions));
        } else {
            t.mentions = extract_mentions(t.text);
        }
        ing.consume(std::move(t), non_empty(field_at(row, c_dname)),
                    non_empty(field_at(row, c_desc)));
    }
}

void ingest_linvill_csv(std::istream& in, Ingestor& ing) {
    DelimitedReader reader(in, ',');
    std::vector<std::string> row;
    if (!reader.next(row)) throw SchemaMismatch("empty file, expected a header row");
    HeaderIndex h = index_header(row);
    for (const char* req : {"author", "content", "publish_date"}) {
        if (!h.has(req)) throw SchemaMismatch(std::string("linvill-csv header missing: ") + req);
    }
    const int c_author = h.get("author"), c_content = h.get("content");
    const int c_date = h.get("publish_date"), c_lang = h.get("language");
    const int c_following = h.get("following"), c_followers = h.get("followers");
    const int c_ptype = h.get("post_type"), c_rt = h.get("retweet");

    while (reader.next(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        ing.summary_.row_count += 1;
        TweetRecord t;
        t.account_id = lower_ascii(trim(field_at(row, c_author)));
        if (t.account_id.empty()) {
            ing.reject("missing-account-id");
            continue;
        }
        auto ts = parse_time(trim(field_at(row, c_date)));
        if (!ts) {
            ing.reject("malformed-timestamp");
            continue;
        }
        t.timestamp = *ts;
        t.text = field_at(row, c_content);
        t.hashtags = extract_hashtags(t.text);
        t.mentions = extract_mentions(t.text);
        t.language_tag = normalize_language(field_at(row, c_lang));
        if (!parse_count(field_at(row, c_followers), t.follower_count_at_tweet))
            t.follower_count_at_tweet = 0;
        if (!parse_count(field_at(row, c_following), t.following_count_at_tweet))
            t.following_count_at_tweet = 0;
        ing.warn("missing-like-count");  // schema carries no likes column
        bool rt = false;
        if (c_rt >= 0 && parse_bool(field_at(row, c_rt), rt)) {
            t.is_retweet = rt;
        } else if (lower_ascii(trim(field_at(row, c_ptype))) == "retweet") {
            t.is_retweet = true;
        } else if (t.text.rfind("RT @", 0) == 0) {
            t.is_retweet = true;
            ing.summary_.retweet_heuristic_rows += 1;
        }
        // no reply signal in this layout
        ing.consume(std::move(t), non_empty(field_at(row, c_author)), std::nullopt);
    }
}

void ingest_jsonl(std::istream& in, Ingestor& ing) {
    std::string line;
    TweetRecord t;
    std::optional<std::string> dn, desc;
    std::string reason;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ing.summary_.row_count += 1;
        if (!tweet_from_jsonl(line, t, dn, desc, reason)) {
            ing.reject(reason);
            continue;
        }
        ing.consume(std::move(t), dn, desc);
        t = TweetRecord{};
    }
}

}  // namespace

ParseResult parse_archive(const std::string& path, const std::string& schema,
                          const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open archive: " + path);

    ArchiveSchema s;
    if (lower_ascii(trim(schema)) == "auto" || trim(schema).empty()) {
        s = sniff_schema(in);
    } else {
        auto parsed = schema_from_string(schema);
        if (!parsed) throw SchemaMismatch("unknown schema name: " + schema);
        s = *parsed;
    }

    ParseResult result;
    result.summary.source_path = path;
    result.summary.schema = to_string(s);

    std::string name = std::filesystem::path(path).stem().string();
    DatasetBuilder builder(name, options.buffer_cap, options.spool_dir,
                           options.track_active_days);
    Ingestor ing(options, result.summary, builder);

    switch (s) {
        case ArchiveSchema::AllianceTsv: ingest_alliance_tsv(in, ing); break;
        case ArchiveSchema::LinvillCsv: ingest_linvill_csv(in, ing); break;
        case ArchiveSchema::CanonicalJsonl: ingest_jsonl(in, ing); break;
    }

    result.dataset = builder.finish();
    result.summary.account_count = result.dataset.accounts.size();
    for (const auto& [id, p] : result.dataset.accounts)
        if (p.is_hashed) result.summary.hashed_account_count += 1;
    return result;
}

std::map<std::string, std::string> extract_account_categories(const std::string& path,
                                                              const std::string& schema) {
    auto parsed = schema_from_string(schema);
    if (!parsed || *parsed != ArchiveSchema::LinvillCsv)
        throw SchemaMismatch("account categories are only present in linvill-csv archives");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open archive: " + path);
    DelimitedReader reader(in, ',');
    std::vector<std::string> row;
    if (!reader.next(row)) throw SchemaMismatch("empty file, expected a header row");
    HeaderIndex h = index_header(row);
    if (!h.has("author") || !h.has("account_category"))
        throw SchemaMismatch("linvill-csv header missing author/account_category");
    const int c_author = h.get("author"), c_cat = h.get("account_category");
    std::map<std::string, std::string> out;
    while (reader.next(row)) {
        std::string id = lower_ascii(trim(field_at(row, c_author)));
        std::string cat = trim(field_at(row, c_cat));
        if (id.empty() || cat.empty()) continue;
        out.emplace(id, cat);
    }
    return out;
}

}  // namespace footprint
