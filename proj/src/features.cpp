#include "footprint/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <json.hpp>

#include "footprint/errors.hpp"

namespace footprint {

namespace {

double f_tweet_count(const AggregateRecord& a) { return static_cast<double>(a.tweet_count); }
double f_retweet_count(const AggregateRecord& a) { return static_cast<double>(a.retweet_count); }
double f_mention_count(const AggregateRecord& a) { return static_cast<double>(a.mention_count); }
double f_avg_followers(const AggregateRecord& a) { return a.mean_followers(); }
double f_avg_following(const AggregateRecord& a) { return a.mean_following(); }
double f_hashtag_count(const AggregateRecord& a) { return static_cast<double>(a.hashtag_count); }
double f_reply_count(const AggregateRecord& a) { return static_cast<double>(a.reply_count); }
double f_like_count(const AggregateRecord& a) { return static_cast<double>(a.like_count); }
double f_active_days(const AggregateRecord& a) {
    return a.active_days < 0 ? 0.0 : static_cast<double>(a.active_days);
}
double f_tweets_per_active_day(const AggregateRecord& a) {
    double days = f_active_days(a);
    return days > 0 ? static_cast<double>(a.tweet_count) / days : 0.0;
}

}  // namespace

FeatureCatalog FeatureCatalog::defaults() {
    FeatureCatalog c;
    c.add("tweet_count", f_tweet_count);
    c.add("retweet_count", f_retweet_count);
    c.add("mention_count", f_mention_count);
    c.add("avg_followers", f_avg_followers);
    c.add("avg_following", f_avg_following);
    c.add("hashtag_count", f_hashtag_count);
    c.add("reply_count", f_reply_count);
    c.add("like_count", f_like_count);
    return c;
}

FeatureCatalog FeatureCatalog::with_timing() {
    FeatureCatalog c = defaults();
    c.add("tweets_per_active_day", f_tweets_per_active_day);
    c.add("active_days", f_active_days);
    return c;
}

void FeatureCatalog::add(const std::string& name, FeatureExtractor extractor) {
    for (const CatalogEntry& e : entries_)
        if (e.name == name) throw InvalidConfig("duplicate feature name: " + name);
    entries_.push_back(CatalogEntry{name, extractor});
}

FeatureCatalog FeatureCatalog::subset(const std::vector<std::string>& names) const {
    std::set<std::string> want(names.begin(), names.end());
    FeatureCatalog out;
    for (const CatalogEntry& e : entries_) {
        if (want.count(e.name)) {
            out.entries_.push_back(e);
            want.erase(e.name);
        }
    }
    if (!want.empty()) throw InvalidConfig("unknown feature name: " + *want.begin());
    return out;
}

std::vector<std::string> FeatureCatalog::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const CatalogEntry& e : entries_) out.push_back(e.name);
    return out;
}

FeatureVector extract_features(const Dataset& dataset, const std::string& account_id,
                               const FeatureCatalog& catalog) {
    const AggregateRecord& agg = dataset.aggregates(account_id);
    FeatureVector fv;
    fv.account_id = account_id;
    fv.values.reserve(catalog.size());
    bool all_zero = true;
    for (const CatalogEntry& e : catalog.entries()) {
        double v = e.extractor(agg);
        if (v != 0.0) all_zero = false;
        fv.values.push_back(v);
    }
    fv.degenerate = all_zero;
    return fv;
}

std::vector<FeatureVector> extract_all_features(const Dataset& dataset,
                                                const FeatureCatalog& catalog) {
    std::vector<const std::string*> ids;
    ids.reserve(dataset.accounts.size());
    for (const auto& [id, profile] : dataset.accounts) ids.push_back(&id);
    std::vector<FeatureVector> out(ids.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(ids.size()); ++i)
        out[i] = extract_features(dataset, *ids[i], catalog);
    return out;
}

CorrelationReport pearson_matrix(const std::vector<FeatureVector>& rows,
                                 const std::vector<std::string>& feature_names) {
    const std::size_t n = rows.size();
    const std::size_t d = feature_names.size();
    if (n < 3) throw TooFewSamples("pearson correlation needs at least 3 samples");
    for (const FeatureVector& r : rows)
        if (r.values.size() != d)
            throw DimensionMismatch("feature vector width does not match name list");

    CorrelationReport rep;
    rep.feature_names = feature_names;
    rep.r.assign(d, std::vector<double>(d, 0.0));
    rep.constant.assign(d, false);
    rep.mean_abs_r.assign(d, 0.0);

    std::vector<double> mean(d, 0.0);
    for (const FeatureVector& row : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += row.values[j];
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);

    std::vector<double> var(d, 0.0);
    for (const FeatureVector& row : rows)
        for (std::size_t j = 0; j < d; ++j) {
            double dv = row.values[j] - mean[j];
            var[j] += dv * dv;
        }
    for (std::size_t j = 0; j < d; ++j) rep.constant[j] = var[j] == 0.0;

    for (std::size_t a = 0; a < d; ++a) {
        rep.r[a][a] = 1.0;
        for (std::size_t b = a + 1; b < d; ++b) {
            double r = 0.0;
            if (!rep.constant[a] && !rep.constant[b]) {
                double cov = 0.0;
                for (const FeatureVector& row : rows)
                    cov += (row.values[a] - mean[a]) * (row.values[b] - mean[b]);
                r = cov / std::sqrt(var[a] * var[b]);
                r = std::clamp(r, -1.0, 1.0);
            }
            rep.r[a][b] = r;
            rep.r[b][a] = r;
        }
    }

    for (std::size_t a = 0; a < d; ++a) {
        double sum = 0.0;
        for (std::size_t b = 0; b < d; ++b)
            if (b != a) sum += std::abs(rep.r[a][b]);
        rep.mean_abs_r[a] = d > 1 ? sum / static_cast<double>(d - 1) : 0.0;
    }
    return rep;
}

SelectionResult select_features(const CorrelationReport& report, std::size_t target_count) {
    const std::size_t d = report.feature_names.size();
    if (target_count > d)
        throw InvalidConfig("cannot select more features than candidates exist");
    std::vector<bool> alive(d, true);
    std::size_t alive_count = d;
    SelectionResult result;

    auto drop = [&](std::size_t idx, const std::string& reason) {
        alive[idx] = false;
        --alive_count;
        result.dropped.emplace_back(report.feature_names[idx], reason);
    };

    while (alive_count > target_count) {
        // constants go first; among several, the lexicographically largest
        int pick = -1;
        for (std::size_t j = 0; j < d; ++j) {
            if (!alive[j] || !report.constant[j]) continue;
            if (pick < 0 || report.feature_names[j] > report.feature_names[pick]) pick = static_cast<int>(j);
        }
        if (pick >= 0) {
            drop(static_cast<std::size_t>(pick), "constant");
            continue;
        }
        double worst = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (!alive[j]) continue;
            double sum = 0.0;
            std::size_t k = 0;
            for (std::size_t b = 0; b < d; ++b) {
                if (b == j || !alive[b]) continue;
                sum += std::abs(report.r[j][b]);
                ++k;
            }
            double mean = k ? sum / static_cast<double>(k) : 0.0;
            if (pick < 0 || mean > worst ||
                (mean == worst && report.feature_names[j] > report.feature_names[pick])) {
                worst = mean;
                pick = static_cast<int>(j);
            }
        }
        drop(static_cast<std::size_t>(pick), "mean |r| " + format_double(worst));
    }

    for (std::size_t j = 0; j < d; ++j)
        if (alive[j]) result.selected.push_back(report.feature_names[j]);
    return result;
}

FeatureVector l1_normalize(const FeatureVector& raw) {
    FeatureVector out = raw;
    double sum = 0.0;
    for (double v : out.values) sum += std::abs(v);
    if (sum == 0.0) {
        out.degenerate = true;
        return out;
    }
    for (double& v : out.values) v /= sum;
    return out;
}

void normalize_features(std::vector<FeatureVector>& rows, NormalizeAxis axis) {
    if (axis == NormalizeAxis::Row) {
        for (FeatureVector& row : rows) row = l1_normalize(row);
        return;
    }
    if (rows.empty()) return;
    const std::size_t d = rows[0].values.size();
    std::vector<double> col_sum(d, 0.0);
    for (const FeatureVector& row : rows)
        for (std::size_t j = 0; j < d; ++j) col_sum[j] += std::abs(row.values[j]);
    for (FeatureVector& row : rows)
        for (std::size_t j = 0; j < d; ++j)
            if (col_sum[j] != 0.0) row.values[j] /= col_sum[j];
}

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string feature_matrix_csv(const std::vector<FeatureVector>& rows,
                               const std::vector<std::string>& feature_names,
                               const std::map<std::string, Category>* labels) {
    std::string out = "account_id";
    for (const std::string& name : feature_names) {
        out += ',';
        out += name;
    }
    if (labels) out += ",category";
    out += '\n';
    for (const FeatureVector& row : rows) {
        out += row.account_id;
        for (double v : row.values) {
            out += ',';
            out += format_double(v);
        }
        if (labels) {
            out += ',';
            auto it = labels->find(row.account_id);
            out += it == labels->end() ? "uncategorized" : to_string(it->second);
        }
        out += '\n';
    }
    return out;
}

std::string CorrelationReport::to_json() const {
    nlohmann::json j;
    j["features"] = feature_names;
    j["r"] = r;
    j["mean_abs_r"] = mean_abs_r;
    j["constant"] = constant;
    return j.dump(2);
}

}  // namespace footprint
