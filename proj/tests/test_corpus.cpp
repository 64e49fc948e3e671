#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "footprint/corpus.hpp"
#include "footprint/errors.hpp"
#include "helpers.hpp"

using namespace footprint;
using testutil::temp_dir;
using testutil::tweet;
using testutil::write_file;

TEST_CASE("extract_hashtags normalizes and keeps order") {
    CHECK(extract_hashtags("Mondays #MustBeBanned") == std::vector<std::string>{"mustbebanned"});
    CHECK(extract_hashtags("#TopNews #News") == std::vector<std::string>{"topnews", "news"});
    CHECK(extract_hashtags("").empty());
    CHECK(extract_hashtags("no tags here").empty());
    CHECK(extract_hashtags("#a #b #a") == std::vector<std::string>{"a", "b", "a"});
    CHECK(extract_hashtags("x#inline works") == std::vector<std::string>{"inline"});
    CHECK(extract_hashtags("#under_score9 ok") == std::vector<std::string>{"under_score9"});
    CHECK(extract_hashtags("#tag,punct") == std::vector<std::string>{"tag"});
    CHECK(extract_hashtags("# lone hash").empty());
}

TEST_CASE("extract_hashtags folds Cyrillic") {
    CHECK(extract_hashtags("#Ростов") == std::vector<std::string>{"ростов"});
    CHECK(extract_hashtags("#РостовНаДону!") == std::vector<std::string>{"ростовнадону"});
}

TEST_CASE("extract_hashtags is idempotent on its own rendering") {
    for (const char* text : {"Mondays #MustBeBanned", "#TopNews #News", "#a #B #c_d",
                             "#Ростов and #MAGA2020"}) {
        std::vector<std::string> tags = extract_hashtags(text);
        std::string rendered;
        for (const std::string& t : tags) rendered += "#" + t + " ";
        CHECK(extract_hashtags(rendered) == tags);
    }
}

TEST_CASE("extract_mentions lowercases handles") {
    CHECK(extract_mentions("hi @Alice and @bob_2!") ==
          std::vector<std::string>{"alice", "bob_2"});
    CHECK(extract_mentions("RT @Origin: text") == std::vector<std::string>{"origin"});
    CHECK(extract_mentions("no one").empty());
}

TEST_CASE("detect_hashed recognizes opaque identity fields") {
    CHECK_FALSE(detect_hashed(std::string("Local news, sports, business...")));
    CHECK(detect_hashed(std::nullopt));
    CHECK(detect_hashed(std::string("")));
    std::string hex64(64, 'a');
    CHECK(detect_hashed(hex64));
    CHECK(detect_hashed(std::string("4f9ab30c2de15678"), std::nullopt));  // 16 hex chars
    CHECK_FALSE(detect_hashed(std::string("4f9ab30c2de1567")));           // 15 is too short
    CHECK_FALSE(detect_hashed(std::string("not hex but long enough!")));
    // a readable display name keeps the account unhashed even without a description
    CHECK_FALSE(detect_hashed(std::nullopt, std::string("John Doe")));
    CHECK(detect_hashed(hex64, hex64));
}

TEST_CASE("account aggregates recount a hand fixture") {
    DatasetBuilder builder("fixture");
    TweetRecord a = tweet("acct", make_utc(2015, 1, 1), "RT @x: look #one #two");
    a.is_retweet = true;
    a.like_count = 3;
    a.follower_count_at_tweet = 10;
    a.following_count_at_tweet = 4;
    builder.add(a);
    TweetRecord b = tweet("acct", make_utc(2015, 1, 2), "plain reply");
    b.is_reply = true;
    b.like_count = 1;
    b.follower_count_at_tweet = 20;
    b.following_count_at_tweet = 6;
    builder.add(b);
    Dataset ds = builder.finish();

    AggregateRecord agg = account_aggregates(ds, "acct");
    CHECK(agg.tweet_count == 2);
    CHECK(agg.retweet_count == 1);
    CHECK(agg.reply_count == 1);
    CHECK(agg.hashtag_count == 2);
    CHECK(agg.mention_count == 1);
    CHECK(agg.like_count == 4);
    CHECK(agg.mean_followers() == doctest::Approx(15.0));
    CHECK(agg.mean_following() == doctest::Approx(5.0));
    CHECK_THROWS_AS(account_aggregates(ds, "nobody"), UnknownAccount);
}

TEST_CASE("aggregates are insensitive to row order") {
    std::vector<TweetRecord> rows;
    for (int i = 0; i < 12; ++i) {
        TweetRecord t = tweet(i % 3 == 0 ? "a" : "b", make_utc(2015, 1, 1 + i),
                              i % 2 ? "#x hello" : "plain @y");
        t.is_retweet = i % 4 == 0;
        t.like_count = i;
        t.follower_count_at_tweet = 100 + i;
        rows.push_back(t);
    }
    DatasetBuilder fwd("fwd"), rev("rev");
    for (const TweetRecord& t : rows) fwd.add(t);
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) rev.add(*it);
    Dataset d1 = fwd.finish(), d2 = rev.finish();
    for (const char* id : {"a", "b"}) {
        AggregateRecord x = d1.aggregates(id), y = d2.aggregates(id);
        CHECK(x.tweet_count == y.tweet_count);
        CHECK(x.retweet_count == y.retweet_count);
        CHECK(x.mention_count == y.mention_count);
        CHECK(x.hashtag_count == y.hashtag_count);
        CHECK(x.like_count == y.like_count);
        CHECK(x.follower_sum == y.follower_sum);
    }
    CHECK(d1.start == d2.start);
    CHECK(d1.end == d2.end);
}

TEST_CASE("jsonl ingest: counts, accounts, language filter") {
    std::string dir = temp_dir("corpus_jsonl");
    std::string lines;
    lines += tweet_to_jsonl(tweet("alpha", make_utc(2015, 1, 1), "hello #one"),
                            std::string("Alpha"), std::string("a news desk")) + "\n";
    lines += tweet_to_jsonl(tweet("alpha", make_utc(2015, 1, 2), "again")) + "\n";
    lines += tweet_to_jsonl(tweet("beta", make_utc(2015, 2, 1), "hi @alpha")) + "\n";
    TweetRecord ru = tweet("gamma", make_utc(2015, 3, 1), "привет");
    ru.language_tag = "ru";
    lines += tweet_to_jsonl(ru) + "\n";
    std::string path = write_file(dir, "arch.jsonl", lines);

    IngestOptions opt;
    opt.language_filter = "en";
    ParseResult res = parse_archive(path, "jsonl", opt);
    CHECK(res.summary.row_count == 4);
    CHECK(res.summary.accepted == 3);
    CHECK(res.summary.rejects.at("language-filtered") == 1);
    CHECK(res.dataset.tweet_count() == 3);
    CHECK(res.dataset.accounts.size() == 2);
    CHECK(res.summary.account_count == 2);
    // described account is not hashed; bare one is
    CHECK_FALSE(res.dataset.profile("alpha").is_hashed);
    CHECK(res.dataset.profile("beta").is_hashed);
    CHECK(res.summary.hashed_account_count == 1);

    // accepted rows equal the sum of per-account tweet counts
    std::size_t total = 0;
    for (const auto& [id, p] : res.dataset.accounts)
        total += static_cast<std::size_t>(res.dataset.aggregates(id).tweet_count);
    CHECK(total == res.summary.accepted);
}

TEST_CASE("jsonl ingest rejects malformed rows without aborting") {
    std::string dir = temp_dir("corpus_rejects");
    std::string lines;
    lines += tweet_to_jsonl(tweet("ok", make_utc(2015, 1, 1), "fine")) + "\n";
    lines += "{broken json\n";
    lines += "{\"text\": \"no account id\"}\n";
    lines += "{\"account_id\": \"x\", \"timestamp\": \"not a time\"}\n";
    std::string path = write_file(dir, "arch.jsonl", lines);

    ParseResult res = parse_archive(path, "jsonl");
    CHECK(res.summary.accepted == 1);
    CHECK(res.summary.rejects.at("malformed-json") == 1);
    CHECK(res.summary.rejects.at("missing-account-id") == 1);
    CHECK(res.summary.rejects.at("malformed-timestamp") == 1);
    CHECK(res.summary.rejected_total() == 3);
    CHECK(res.summary.row_count == 4);
}

TEST_CASE("empty inputs produce empty datasets with zero rejects") {
    std::string dir = temp_dir("corpus_empty");
    std::string jsonl = write_file(dir, "empty.jsonl", "");
    ParseResult r1 = parse_archive(jsonl, "jsonl");
    CHECK(r1.dataset.empty());
    CHECK(r1.summary.rejected_total() == 0);

    std::string csv = write_file(dir, "empty.csv", "author,content,publish_date\n");
    ParseResult r2 = parse_archive(csv, "linvill-csv");
    CHECK(r2.dataset.empty());
    CHECK(r2.summary.rejected_total() == 0);
    CHECK(r2.summary.row_count == 0);
}

TEST_CASE("missing files and unknown schemas fail loudly") {
    CHECK_THROWS_AS(parse_archive("/nonexistent/archive.tsv", "jsonl"), UnreadableFile);
    std::string dir = temp_dir("corpus_schema");
    std::string path = write_file(dir, "x.csv", "a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(parse_archive(path, "parquet"), SchemaMismatch);
    CHECK_THROWS_AS(parse_archive(path, "auto"), SchemaMismatch);
    std::string bad = write_file(dir, "bad.tsv", "wrong\theader\tcols\nrow\trow\trow\n");
    CHECK_THROWS_AS(parse_archive(bad, "alliance-tsv"), SchemaMismatch);
}

TEST_CASE("alliance-tsv adapter maps columns and heuristics") {
    std::string dir = temp_dir("corpus_tsv");
    std::string content =
        "userid\tuser_display_name\tuser_profile_description\ttweet_text\ttweet_time\t"
        "follower_count\tfollowing_count\taccount_language\ttweet_language\tis_retweet\t"
        "in_reply_to_tweetid\tlike_count\tuser_mentions\n"
        "u1\tNews Desk\tLocal news daily\tBreaking #TopNews now\t2015-06-01 10:00\t"
        "500\t100\ten\ten\tfalse\t\t7\t[alice, Bob]\n"
        "u1\t\t\tRT @src: echoed\t2015-06-02 11:00\t501\t100\ten\ten\t\t\t\t[]\n"
        "u2\t\t\treply text\t2015-06-03 12:00\t10\t20\ten\ten\tfalse\t12345\t0\t[]\n";
    std::string path = write_file(dir, "arch.tsv", content);

    ParseResult res = parse_archive(path, "auto");  // tab header sniffs as alliance-tsv
    CHECK(res.summary.schema == std::string("alliance-tsv"));
    REQUIRE(res.summary.accepted == 3);
    CHECK(res.dataset.accounts.size() == 2);
    CHECK_FALSE(res.dataset.profile("u1").is_hashed);
    CHECK(res.dataset.profile("u2").is_hashed);

    AggregateRecord u1 = res.dataset.aggregates("u1");
    CHECK(u1.tweet_count == 2);
    CHECK(u1.retweet_count == 1);  // via the "RT @" fallback
    CHECK(res.summary.retweet_heuristic_rows == 1);
    CHECK(u1.hashtag_count == 1);
    CHECK(u1.mention_count == 2);  // bracket list on row 1; row 2's list is empty
    CHECK(u1.like_count == 7);
    CHECK(res.summary.warnings.count("missing-like-count") == 1);

    AggregateRecord u2 = res.dataset.aggregates("u2");
    CHECK(u2.reply_count == 1);
}

TEST_CASE("linvill-csv adapter lowercases authors and carries the category column") {
    std::string dir = temp_dir("corpus_linvill");
    std::string content =
        "author,content,publish_date,language,following,followers,post_type,retweet,"
        "account_category\n"
        "PATRIOT_ONE,\"RT @x: hello #MAGA\",10/1/2017 22:43,English,100,200,RETWEET,1,"
        "RightTroll\n"
        "NEWS_FEED_9,\"Top story #news\",10/2/2017 9:05,English,50,5000,,0,NewsFeed\n";
    std::string path = write_file(dir, "ira.csv", content);

    ParseResult res = parse_archive(path, "auto");
    CHECK(res.summary.schema == std::string("linvill-csv"));
    REQUIRE(res.summary.accepted == 2);
    CHECK(res.dataset.accounts.count("patriot_one") == 1);
    CHECK(res.dataset.aggregates("patriot_one").retweet_count == 1);
    CHECK(res.dataset.aggregates("news_feed_9").follower_sum == doctest::Approx(5000));
    // author doubles as display name, so these accounts are never hashed
    CHECK(res.summary.hashed_account_count == 0);

    auto cats = extract_account_categories(path, "linvill-csv");
    CHECK(cats.at("patriot_one") == "RightTroll");
    CHECK(cats.at("news_feed_9") == "NewsFeed");
    CHECK_THROWS_AS(extract_account_categories(path, "jsonl"), SchemaMismatch);
}

TEST_CASE("timeframe option rejects rows outside the window") {
    std::string dir = temp_dir("corpus_window");
    std::string lines;
    lines += tweet_to_jsonl(tweet("a", make_utc(2015, 1, 1), "in")) + "\n";
    lines += tweet_to_jsonl(tweet("a", make_utc(2016, 1, 1), "out")) + "\n";
    std::string path = write_file(dir, "arch.jsonl", lines);
    IngestOptions opt;
    opt.timeframe = {make_utc(2015, 1, 1), make_utc(2015, 7, 1)};
    ParseResult res = parse_archive(path, "jsonl", opt);
    CHECK(res.summary.accepted == 1);
    CHECK(res.summary.rejects.at("outside-timeframe") == 1);
}

TEST_CASE("ingest spills past the buffer cap without changing results") {
    std::string dir = temp_dir("corpus_spool");
    std::string lines;
    for (int i = 0; i < 20; ++i)
        lines += tweet_to_jsonl(tweet("a" + std::to_string(i % 4), make_utc(2015, 1, 1 + i),
                                      "#tag" + std::to_string(i))) +
                 "\n";
    std::string path = write_file(dir, "arch.jsonl", lines);

    IngestOptions small;
    small.buffer_cap = 4;
    small.spool_dir = dir;
    ParseResult spilled = parse_archive(path, "jsonl", small);
    ParseResult inmem = parse_archive(path, "jsonl");
    CHECK(spilled.dataset.spilled());
    CHECK_FALSE(inmem.dataset.spilled());
    CHECK(std::filesystem::exists(spilled.dataset.spool_path()));

    std::vector<std::string> seen;
    spilled.dataset.for_each_tweet([&](const TweetRecord& t) { seen.push_back(t.text); });
    std::vector<std::string> expect;
    inmem.dataset.for_each_tweet([&](const TweetRecord& t) { expect.push_back(t.text); });
    CHECK(seen.size() == 20);
    CHECK(seen == expect);
    for (const auto& [id, p] : inmem.dataset.accounts) {
        CHECK(spilled.dataset.aggregates(id).hashtag_count ==
              inmem.dataset.aggregates(id).hashtag_count);
    }
}

TEST_CASE("active-day tracking counts distinct dates") {
    DatasetBuilder builder("days", 1000, "", true);
    builder.add(tweet("a", make_utc(2015, 1, 1, 8, 0, 0), "x"));
    builder.add(tweet("a", make_utc(2015, 1, 1, 20, 0, 0), "y"));
    builder.add(tweet("a", make_utc(2015, 1, 3), "z"));
    builder.add(tweet("b", make_utc(2015, 1, 2), "w"));
    Dataset ds = builder.finish();
    CHECK(ds.aggregates("a").active_days == 2);
    CHECK(ds.aggregates("b").active_days == 1);

    DatasetBuilder untracked("nodays");
    untracked.add(tweet("a", make_utc(2015, 1, 1), "x"));
    CHECK(untracked.finish().aggregates("a").active_days == -1);
}

TEST_CASE("ingest summary serializes its counters") {
    std::string dir = temp_dir("corpus_summary");
    std::string path =
        write_file(dir, "a.jsonl", tweet_to_jsonl(tweet("a", make_utc(2015, 1, 1), "x")) + "\n");
    ParseResult res = parse_archive(path, "jsonl");
    std::string j = res.summary.to_json();
    CHECK(j.find("\"accepted\": 1") != std::string::npos);
    CHECK(j.find("\"accounts\": 1") != std::string::npos);
    CHECK(j.find("\"schema\": \"jsonl\"") != std::string::npos);
}
