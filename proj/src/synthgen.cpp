#include "footprint/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "footprint/errors.hpp"
#include "footprint/rng.hpp"

namespace footprint {
namespace {

std::vector<std::string> fn_pool() {
    return {"topnews", "news", "rostovnadon", "rostov", "breaking", "local",
            "fn_wire_0", "fn_wire_1", "fn_wire_2", "fn_wire_3", "fn_wire_4", "fn_wire_5"};
}

std::vector<std::string> org_pool() {
    return {"cityofchester", "chester", "pennsylvania", "usa", "america", "us", "secede",
            "texas", "secession", "austin", "texan", "blacklivesmatter", "acab", "community"};
}

std::vector<std::string> pa_pool() {
    return {"moscow", "defundobamacare", "standwithcruz", "makedclisten", "repealobamacare",
            "tcot", "christian", "american", "patriot", "teaparty", "tgdn", "nra", "lnyhbt",
            "pjnet", "maga"};
}

std::vector<std::string> di_pool() {
    return {"music", "todolistbeforechristmas", "mutualfollowing", "wakeupamerica",
            "rednationrising", "love", "life", "di_daily_0", "di_daily_1", "di_daily_2",
            "di_daily_3", "di_daily_4"};
}

const char* kSlug[kCategoryCount] = {"fn", "org", "pa", "di"};

const char* kDisplayName[kCategoryCount] = {"Regional News Desk", "Community Office",
                                            "Grassroots Voice", "Everyday Poster"};

// Phrasing chosen so the built-in description rules recover the planted
// category for every unhashed account.
const char* kDescription[kCategoryCount] = {
    "Breaking news and local stories around the clock.",
    "Official twitter account of a community organization.",
    "Conservative patriot raising a proud American voice.",
    "Dreamer. Music lover. Coffee enthusiast.",
};

std::string hex_id(Rng& rng) {
    char buf[65];
    for (int i = 0; i < 4; ++i) {
        std::snprintf(buf + 16 * i, 17, "%016llx",
                      static_cast<unsigned long long>(rng.next_u64()));
    }
    return std::string(buf, 64);
}

std::string pick_tag(Rng& rng, const CategoryProfile& p) {
    if (p.hashtag_pool.empty()) return "tag";
    std::size_t idx;
    if (p.pool_weights.empty()) {
        idx = static_cast<std::size_t>(rng.bounded(p.hashtag_pool.size()));
    } else {
        double total = 0.0;
        for (double w : p.pool_weights) total += w;
        idx = rng.pick_weighted(p.pool_weights, total);
        if (idx >= p.hashtag_pool.size()) idx = p.hashtag_pool.size() - 1;
    }
    return p.hashtag_pool[idx];
}

struct CategoryTotals {
    std::int64_t accounts = 0;
    std::int64_t tweets = 0;
    std::int64_t retweets = 0;
    std::int64_t replies = 0;
    std::int64_t mentions = 0;
    std::int64_t hashtags = 0;
    std::int64_t likes = 0;
    std::int64_t own_pool_tags = 0;
    std::vector<double> per_account_tweets;
    std::vector<double> per_account_followers;
    std::vector<double> per_account_following;
};

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return sd / std::sqrt(static_cast<double>(v.size()));
}

void check_mean(VerificationReport& report, Category c, const char* what,
                const std::vector<double>& values, double expected) {
    if (values.empty()) return;
    double m = mean_of(values);
    double tol = 3.0 * stderr_of(values) + 1e-9;
    if (std::fabs(m - expected) > tol) {
        char buf[192];
        std::snprintf(buf, sizeof(buf), "%s %s: mean %.4f outside %.4f +/- %.4f",
                      to_string(c), what, m, expected, tol);
        report.ok = false;
        report.flags.emplace_back(buf);
    }
}

void check_rate(VerificationReport& report, Category c, const char* what, double count,
                double trials, double expected, bool binomial) {
    if (trials <= 0.0) return;
    double rate = count / trials;
    // Binomial SE for per-tweet probabilities, Poisson SE for per-tweet counts.
    double var = binomial ? std::max(expected * (1.0 - expected), 1e-12)
                          : std::max(expected, 1e-12);
    double tol = 3.0 * std::sqrt(var / trials) + 1e-9;
    if (std::fabs(rate - expected) > tol) {
        char buf[192];
        std::snprintf(buf, sizeof(buf), "%s %s: rate %.4f outside %.4f +/- %.4f",
                      to_string(c), what, rate, expected, tol);
        report.ok = false;
        report.flags.emplace_back(buf);
    }
}

}  // namespace

GeneratorConfig GeneratorConfig::defaults() {
    GeneratorConfig cfg;
    cfg.seed = 1;
    cfg.start = make_utc(2015, 1, 1);
    cfg.end = make_utc(2017, 1, 1);
    cfg.noise = 0.1;

    // Per-account tweet means are the published per-category averages
    // scaled down by 8 to keep test corpora small; the per-tweet rates are
    // the published totals expressed as ratios.
    CategoryProfile fn;
    fn.mean_tweets = 84;
    fn.retweet_ratio = 0.8525;
    fn.reply_ratio = 0.0584;
    fn.mentions_per_tweet = 1.3010;
    fn.hashtags_per_tweet = 1.2773;
    fn.likes_per_tweet = 0.4268;
    fn.mean_followers = 9137.65;
    fn.mean_following = 3858.04;
    fn.hashtag_pool = fn_pool();

    CategoryProfile org;
    org.mean_tweets = 196;
    org.retweet_ratio = 0.2808;
    org.reply_ratio = 0.0473;
    org.mentions_per_tweet = 0.3983;
    org.hashtags_per_tweet = 0.8186;
    org.likes_per_tweet = 0.4974;
    org.mean_followers = 27593.52;
    org.mean_following = 6364.18;
    org.hashtag_pool = org_pool();

    CategoryProfile pa;
    pa.mean_tweets = 68;
    pa.retweet_ratio = 0.5018;
    pa.reply_ratio = 0.6074;
    pa.mentions_per_tweet = 1.8370;
    pa.hashtags_per_tweet = 0.8458;
    pa.likes_per_tweet = 20.04;
    pa.mean_followers = 5126.85;
    pa.mean_following = 3144.11;
    pa.hashtag_pool = pa_pool();

    CategoryProfile di;
    di.mean_tweets = 84;
    di.retweet_ratio = 0.5948;
    di.reply_ratio = 0.9;  // published totals exceed one reply per tweet; capped
    di.mentions_per_tweet = 1.0657;
    di.hashtags_per_tweet = 1.1026;
    di.likes_per_tweet = 17.558;
    di.mean_followers = 11339.62;
    di.mean_following = 5601.21;
    di.hashtag_pool = di_pool();

    cfg.profiles = {fn, org, pa, di};
    return cfg;
}

GenerationResult generate(const GeneratorConfig& config, const std::string& out_dir) {
    if (config.end <= config.start) throw InvalidConfig("generator timeframe is empty");
    if (config.noise < 0.0 || config.noise > 1.0)
        throw InvalidConfig("generator noise must be in [0, 1]");
    for (int c = 0; c < kCategoryCount; ++c) {
        if (config.accounts_per_category[static_cast<std::size_t>(c)] < 0)
            throw InvalidConfig("negative account count");
        double f = config.hashed_fraction[static_cast<std::size_t>(c)];
        if (f < 0.0 || f > 1.0) throw InvalidConfig("hashed fraction must be in [0, 1]");
    }

    std::filesystem::create_directories(out_dir);
    GenerationResult result;
    result.archive_path = (std::filesystem::path(out_dir) / "archive.jsonl").string();
    result.labels_path = (std::filesystem::path(out_dir) / "labels.csv").string();
    result.truth_path = (std::filesystem::path(out_dir) / "ground_truth.csv").string();

    std::ofstream archive(result.archive_path, std::ios::binary);
    std::ofstream labels(result.labels_path, std::ios::binary);
    std::ofstream truth_file(result.truth_path, std::ios::binary);
    if (!archive || !labels || !truth_file)
        throw UnreadableFile("cannot write into " + out_dir);
    labels << "account_id,category\n";
    truth_file << "account_id,category\n";

    const std::uint64_t range = static_cast<std::uint64_t>(config.end - config.start);
    std::uint64_t account_index = 0;
    for (int c = 0; c < kCategoryCount; ++c) {
        const Category cat = kCategories[static_cast<std::size_t>(c)];
        const CategoryProfile& prof = config.profiles[static_cast<std::size_t>(c)];
        const int n = config.accounts_per_category[static_cast<std::size_t>(c)];
        const int hashed_n = static_cast<int>(
            std::floor(config.hashed_fraction[static_cast<std::size_t>(c)] * n));
        for (int a = 0; a < n; ++a, ++account_index) {
            Rng rng(mix_seed(config.seed, account_index));
            const bool hashed = a < hashed_n;

            std::string id;
            std::optional<std::string> display_name;
            std::optional<std::string> description;
            if (hashed) {
                id = hex_id(rng);
            } else {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "user_%s_%04d", kSlug[c], a);
                id = buf;
                display_name = kDisplayName[c];
                description = kDescription[c];
            }
            result.truth[id] = cat;
            truth_file << id << ',' << to_string(cat) << '\n';
            if (!hashed) labels << id << ',' << to_string(cat) << '\n';
            ++result.account_count;
            if (hashed) ++result.hashed_count;

            const auto followers =
                std::llround(std::max(0.0, rng.log_normal_mean(prof.mean_followers, 0.5)));
            const auto following =
                std::llround(std::max(0.0, rng.log_normal_mean(prof.mean_following, 0.5)));
            const std::int64_t n_tweets = std::max<std::int64_t>(1, rng.poisson(prof.mean_tweets));

            for (std::int64_t t = 0; t < n_tweets; ++t) {
                TweetRecord tw;
                tw.account_id = id;
                tw.timestamp = config.start + static_cast<UtcTime>(rng.bounded(range));
                tw.is_retweet = rng.bernoulli(prof.retweet_ratio);
                tw.is_reply = rng.bernoulli(prof.reply_ratio);
                tw.like_count = rng.poisson(prof.likes_per_tweet);
                tw.follower_count_at_tweet = followers;
                tw.following_count_at_tweet = following;
                tw.language_tag = "en";

                const std::int64_t n_tags = rng.poisson(prof.hashtags_per_tweet);
                for (std::int64_t h = 0; h < n_tags; ++h) {
                    int src = c;
                    if (rng.bernoulli(config.noise))
                        src = (c + 1 + static_cast<int>(rng.bounded(3))) % kCategoryCount;
                    tw.hashtags.push_back(
                        pick_tag(rng, config.profiles[static_cast<std::size_t>(src)]));
                }
                const std::int64_t n_mentions = rng.poisson(prof.mentions_per_tweet);
                for (std::int64_t m = 0; m < n_mentions; ++m)
                    tw.mentions.push_back("u" + std::to_string(rng.bounded(100000)));

                std::string text = tw.is_retweet ? "RT @origin: update " : "update ";
                text += std::to_string(t);
                for (const auto& tag : tw.hashtags) text += " #" + tag;
                for (const auto& m : tw.mentions) text += " @" + m;
                tw.text = std::move(text);

                archive << tweet_to_jsonl(tw, display_name, description) << '\n';
                ++result.tweet_count;
            }
        }
    }
    return result;
}

VerificationReport verify_generation(const Dataset& dataset, const GeneratorConfig& config,
                                     const GroundTruth& truth) {
    VerificationReport report;
    if (dataset.empty()) return report;

    std::map<std::string, int> tag_owner;
    for (int c = 0; c < kCategoryCount; ++c)
        for (const auto& tag : config.profiles[static_cast<std::size_t>(c)].hashtag_pool)
            tag_owner.emplace(tag, c);

    std::array<CategoryTotals, kCategoryCount> totals;
    for (const auto& [id, cat] : truth) {
        if (!dataset.accounts.count(id)) continue;
        const AggregateRecord& agg = dataset.aggregates(id);
        CategoryTotals& tot = totals[static_cast<std::size_t>(category_index(cat))];
        ++tot.accounts;
        tot.tweets += agg.tweet_count;
        tot.retweets += agg.retweet_count;
        tot.replies += agg.reply_count;
        tot.mentions += agg.mention_count;
        tot.hashtags += agg.hashtag_count;
        tot.likes += agg.like_count;
        tot.per_account_tweets.push_back(static_cast<double>(agg.tweet_count));
        tot.per_account_followers.push_back(agg.mean_followers());
        tot.per_account_following.push_back(agg.mean_following());
    }

    dataset.for_each_tweet([&](const TweetRecord& tw) {
        auto it = truth.find(tw.account_id);
        if (it == truth.end()) return;
        int c = category_index(it->second);
        CategoryTotals& tot = totals[static_cast<std::size_t>(c)];
        for (const auto& tag : tw.hashtags) {
            auto own = tag_owner.find(tag);
            if (own != tag_owner.end() && own->second == c) ++tot.own_pool_tags;
        }
    });

    for (int c = 0; c < kCategoryCount; ++c) {
        const Category cat = kCategories[static_cast<std::size_t>(c)];
        const CategoryProfile& prof = config.profiles[static_cast<std::size_t>(c)];
        const CategoryTotals& tot = totals[static_cast<std::size_t>(c)];
        if (tot.accounts == 0) continue;
        const double tweets = static_cast<double>(tot.tweets);

        check_mean(report, cat, "tweets per account", tot.per_account_tweets, prof.mean_tweets);
        check_mean(report, cat, "mean followers", tot.per_account_followers, prof.mean_followers);
        check_mean(report, cat, "mean following", tot.per_account_following, prof.mean_following);
        check_rate(report, cat, "retweet ratio", static_cast<double>(tot.retweets), tweets,
                   prof.retweet_ratio, true);
        check_rate(report, cat, "reply ratio", static_cast<double>(tot.replies), tweets,
                   prof.reply_ratio, true);
        check_rate(report, cat, "mentions per tweet", static_cast<double>(tot.mentions), tweets,
                   prof.mentions_per_tweet, false);
        check_rate(report, cat, "hashtags per tweet", static_cast<double>(tot.hashtags), tweets,
                   prof.hashtags_per_tweet, false);
        check_rate(report, cat, "likes per tweet", static_cast<double>(tot.likes), tweets,
                   prof.likes_per_tweet, false);
        check_rate(report, cat, "own-pool hashtag share", static_cast<double>(tot.own_pool_tags),
                   static_cast<double>(tot.hashtags), 1.0 - config.noise, true);
    }
    return report;
}

std::string VerificationReport::to_json() const {
    nlohmann::json j;
    j["ok"] = ok;
    j["flags"] = flags;
    return j.dump();
}

std::vector<LabeledSample> generate_rule_dataset(std::uint64_t seed, int n_samples,
                                                 int n_noise_features) {
    if (n_samples < 1 || n_noise_features < 0)
        throw InvalidConfig("rule dataset needs n_samples >= 1 and n_noise_features >= 0");
    // Class map is a palindrome over the three threshold bits, so no single
    // bit (and no pair) determines the class on its own.
    static const Category kRule[8] = {
        Category::FakeNews,           Category::Organizations, Category::PoliticalAffiliates,
        Category::DefaultIndividuals, Category::DefaultIndividuals,
        Category::PoliticalAffiliates, Category::Organizations, Category::FakeNews,
    };
    Rng rng(mix_seed(seed, 0x5eed));
    std::vector<LabeledSample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        LabeledSample s;
        s.account_id = "synthetic_" + std::to_string(i);
        s.values.resize(static_cast<std::size_t>(3 + n_noise_features));
        for (double& v : s.values) v = rng.next_unit();
        int key = (s.values[0] > 0.5 ? 4 : 0) + (s.values[1] > 0.5 ? 2 : 0) +
                  (s.values[2] > 0.5 ? 1 : 0);
        s.label = kRule[key];
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace footprint
