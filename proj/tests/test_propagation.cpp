#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "footprint/errors.hpp"
#include "footprint/propagation.hpp"
#include "footprint/reference.hpp"
#include "footprint/rng.hpp"
#include "helpers.hpp"

using namespace footprint;
using testutil::tweet;

namespace {

SparseHashtagVector column(const std::string& id, std::vector<std::pair<int, double>> entries) {
    SparseHashtagVector v;
    v.account_id = id;
    v.entries = std::move(entries);
    double sq = 0;
    for (const auto& [d, w] : v.entries) sq += w * w;
    v.norm = std::sqrt(sq);
    return v;
}

SimilarityMatrices random_matrices(std::uint64_t seed, int n_unlabeled, int n_labeled,
                                   int dimensions, int entries_per_column) {
    Rng rng(seed);
    SimilarityMatrices m;
    for (int d = 0; d < dimensions; ++d) m.vocabulary.dims.emplace("tag" + std::to_string(d), d);
    auto make_column = [&](const std::string& id) {
        std::vector<int> dims = rng.sample_without_replacement(
            dimensions, 1 + static_cast<int>(rng.bounded(
                                std::min(entries_per_column, dimensions))));
        std::vector<std::pair<int, double>> entries;
        for (int d : dims) entries.emplace_back(d, static_cast<double>(1 + rng.bounded(9)));
        return column(id, std::move(entries));
    };
    for (int i = 0; i < n_unlabeled; ++i) m.u.push_back(make_column("u" + std::to_string(i)));
    for (int j = 0; j < n_labeled; ++j) {
        m.v.push_back(make_column("v" + std::to_string(j)));
        m.v_category.push_back(kCategories[rng.bounded(kCategoryCount)]);
    }
    return m;
}

}  // namespace

TEST_CASE("subspans tile the timeframe in calendar months") {
    auto two = partition_subspans(make_utc(2015, 1, 1), make_utc(2016, 1, 1), 6);
    REQUIRE(two.size() == 2);
    CHECK(two[0].start == make_utc(2015, 1, 1));
    CHECK(two[0].end == make_utc(2015, 7, 1));
    CHECK(two[1].start == make_utc(2015, 7, 1));
    CHECK(two[1].end == make_utc(2016, 1, 1));
    CHECK(two[0].index == 0);
    CHECK(two[1].index == 1);

    // a 15.5-month range needs a third, short window
    auto three = partition_subspans(make_utc(2015, 1, 1), make_utc(2016, 4, 15), 6);
    REQUIRE(three.size() == 3);
    CHECK(three[2].start == make_utc(2016, 1, 1));
    CHECK(three[2].end == make_utc(2016, 4, 15));

    // 102 months at width 6
    auto many = partition_subspans(make_utc(2009, 11, 1), make_utc(2018, 5, 1), 6);
    CHECK(many.size() == 17);

    CHECK_THROWS_AS(partition_subspans(make_utc(2015, 1, 1), make_utc(2015, 1, 1), 6),
                    EmptyDataset);
    CHECK_THROWS_AS(partition_subspans(make_utc(2015, 1, 1), make_utc(2016, 1, 1), 0),
                    InvalidConfig);
}

TEST_CASE("subspan boundaries stay contiguous and half-open") {
    auto spans = partition_subspans(make_utc(2014, 3, 14, 7, 0, 0), make_utc(2017, 2, 2), 4);
    for (std::size_t i = 0; i < spans.size(); ++i) {
        CHECK(spans[i].index == static_cast<int>(i));
        CHECK(spans[i].start < spans[i].end);
        if (i) CHECK(spans[i].start == spans[i - 1].end);
    }
    CHECK(spans.front().start == make_utc(2014, 3, 14, 7, 0, 0));
    CHECK(spans.back().end == make_utc(2017, 2, 2));
}

TEST_CASE("build_vectors separates labeled and unlabeled activity") {
    DatasetBuilder builder("vectors");
    builder.add(tweet("lab1", make_utc(2015, 1, 10), "#alpha #beta"));
    builder.add(tweet("lab1", make_utc(2015, 2, 10), "#alpha"));
    builder.add(tweet("lab2", make_utc(2015, 1, 20), "#gamma #delta"));
    builder.add(tweet("mys1", make_utc(2015, 3, 1), "#alpha #gamma #gamma"));
    builder.add(tweet("silent", make_utc(2015, 4, 1), "no tags at all"));
    Dataset ds = builder.finish();

    SeedLabelSet labels;
    labels.set("lab1", Category::FakeNews, Provenance::CodedFile);
    labels.set("lab2", Category::Organizations, Provenance::CodedFile);

    Subspan whole{0, ds.start, ds.end};
    SimilarityMatrices m = build_vectors(ds, whole, labels);
    CHECK(m.vocabulary.size() == 4);  // alpha beta delta gamma
    REQUIRE(m.u.size() == 1);
    REQUIRE(m.v.size() == 2);
    CHECK(m.u[0].account_id == "mys1");

    // hand-checked counts: mys1 = alpha:1, gamma:2
    int d_alpha = m.vocabulary.dims.at("alpha");
    int d_gamma = m.vocabulary.dims.at("gamma");
    REQUIRE(m.u[0].entries.size() == 2);
    CHECK(m.u[0].entries[0] == std::pair<int, double>{d_alpha, 1.0});
    CHECK(m.u[0].entries[1] == std::pair<int, double>{d_gamma, 2.0});
    CHECK(m.u[0].norm == doctest::Approx(std::sqrt(5.0)));

    // the silent account appears in neither matrix
    for (const auto& col : m.u) CHECK(col.account_id != "silent");
    for (const auto& col : m.v) CHECK(col.account_id != "silent");

    // binary mode flattens counts to presence
    SimilarityMatrices b = build_vectors(ds, whole, labels, VectorMode::Binary);
    for (const auto& [dim, w] : b.u[0].entries) CHECK(w == 1.0);

    // a subspan with no labeled activity cannot anchor assignments
    SeedLabelSet none;
    none.set("ghost", Category::FakeNews, Provenance::CodedFile);
    CHECK_THROWS_AS(build_vectors(ds, whole, none), NoCategorizedActivity);
}

TEST_CASE("cosine similarity matches the closed-form cases") {
    auto u = column("u", {{0, 1}, {2, 2}});
    auto v = column("v", {{0, 2}, {2, 4}});
    CHECK(cosine_similarity(u, v) == doctest::Approx(1.0));

    auto a = column("a", {{0, 1}});
    auto b = column("b", {{1, 1}});
    CHECK(cosine_similarity(a, b) == 0.0);

    auto c = column("c", {{0, 1}, {1, 1}});
    auto d = column("d", {{0, 1}, {2, 1}});
    CHECK(cosine_similarity(c, d) == doctest::Approx(0.5));

    CHECK(cosine_similarity(c, d) == cosine_similarity(d, c));
    CHECK_THROWS_AS(cosine_similarity(column("z", {}), a), ZeroVector);
}

TEST_CASE("cosine similarity is scale-invariant") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        SimilarityMatrices m = random_matrices(rng.next_u64(), 1, 1, 8, 5);
        double base = cosine_similarity(m.u[0], m.v[0]);
        double c = 0.5 + rng.next_unit() * 9.5;
        SparseHashtagVector scaled = m.u[0];
        for (auto& [dim, w] : scaled.entries) w *= c;
        scaled.norm = m.u[0].norm * c;
        CHECK(cosine_similarity(scaled, m.v[0]) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("impermanent assignment picks the argmax column") {
    SimilarityMatrices m;
    for (int d = 0; d < 3; ++d) m.vocabulary.dims.emplace("t" + std::to_string(d), d);
    m.v.push_back(column("vfn", {{0, 3}}));
    m.v_category.push_back(Category::FakeNews);
    m.v.push_back(column("vpa", {{1, 2}}));
    m.v_category.push_back(Category::PoliticalAffiliates);

    // identical direction to vfn: score exactly 1
    m.u.push_back(column("copy", {{0, 7}}));
    // orthogonal to both: score 0, low confidence, first category by tie-break
    m.u.push_back(column("ortho", {{2, 1}}));

    auto out = assign_impermanent(m, 0.05);
    REQUIRE(out.size() == 2);
    CHECK(out[0].first == "copy");
    CHECK(out[0].second.category == Category::FakeNews);
    CHECK(out[0].second.score == doctest::Approx(1.0));
    CHECK(out[0].second.matched_account == "vfn");
    CHECK_FALSE(out[0].second.low_confidence);

    CHECK(out[1].first == "ortho");
    CHECK(out[1].second.score == 0.0);
    CHECK(out[1].second.low_confidence);
    CHECK(out[1].second.category == Category::FakeNews);  // rank 0 wins the 0-0 tie

    SimilarityMatrices empty_v;
    empty_v.u.push_back(column("u", {{0, 1}}));
    CHECK_THROWS_AS(assign_impermanent(empty_v, 0.05), NoCategorizedActivity);
}

TEST_CASE("score ties break by category order then matched id") {
    SimilarityMatrices m;
    m.vocabulary.dims.emplace("t0", 0);
    m.u.push_back(column("u", {{0, 1}}));
    // all three line up perfectly with u; DefaultIndividuals listed first
    m.v.push_back(column("v_di", {{0, 5}}));
    m.v_category.push_back(Category::DefaultIndividuals);
    m.v.push_back(column("v_org_b", {{0, 2}}));
    m.v_category.push_back(Category::Organizations);
    m.v.push_back(column("v_org_a", {{0, 3}}));
    m.v_category.push_back(Category::Organizations);

    auto out = assign_impermanent(m, 0.05);
    REQUIRE(out.size() == 1);
    CHECK(out[0].second.category == Category::Organizations);
    CHECK(out[0].second.matched_account == "v_org_a");  // lower id among equals
}

TEST_CASE("assignments are invariant to V column permutation") {
    SimilarityMatrices m = random_matrices(99, 6, 5, 8, 4);
    auto base = assign_impermanent(m, 0.05);

    SimilarityMatrices shuffled = m;
    std::vector<std::size_t> perm{4, 2, 0, 3, 1};
    for (std::size_t i = 0; i < perm.size(); ++i) {
        shuffled.v[i] = m.v[perm[i]];
        shuffled.v_category[i] = m.v_category[perm[i]];
    }
    auto out = assign_impermanent(shuffled, 0.05);
    REQUIRE(out.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(out[i].first == base[i].first);
        CHECK(out[i].second.category == base[i].second.category);
        CHECK(out[i].second.score == base[i].second.score);
        CHECK(out[i].second.matched_account == base[i].second.matched_account);
    }
}

TEST_CASE("parallel assignment matches the serial all-pairs reference") {
    Rng seeds(2024);
    for (int trial = 0; trial < 30; ++trial) {
        SimilarityMatrices m = random_matrices(seeds.next_u64(),
                                               1 + static_cast<int>(seeds.bounded(10)),
                                               1 + static_cast<int>(seeds.bounded(6)),
                                               1 + static_cast<int>(seeds.bounded(8)), 4);
        auto fast = assign_impermanent(m, 0.05);
        auto slow = reference::assign_impermanent(m, 0.05);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i].first == slow[i].first);
            CHECK(fast[i].second.category == slow[i].second.category);
            CHECK(fast[i].second.score == slow[i].second.score);
            CHECK(fast[i].second.matched_account == slow[i].second.matched_account);
            CHECK(fast[i].second.low_confidence == slow[i].second.low_confidence);
        }
    }
}

TEST_CASE("resolve_final takes the mode of the trail") {
    ImpermanentAssignment a;
    a.account_id = "x";
    a.by_subspan[0] = {Category::PoliticalAffiliates, 0.9, false, "v1"};
    a.by_subspan[1] = {Category::PoliticalAffiliates, 0.8, false, "v2"};
    a.by_subspan[2] = {Category::DefaultIndividuals, 0.95, false, "v3"};
    FinalAssignment f = resolve_final(a);
    CHECK(f.category == Category::PoliticalAffiliates);
    CHECK(f.confidence == doctest::Approx(2.0 / 3.0));

    ImpermanentAssignment single;
    single.account_id = "y";
    single.by_subspan[4] = {Category::FakeNews, 0.4, false, "v"};
    f = resolve_final(single);
    CHECK(f.category == Category::FakeNews);
    CHECK(f.confidence == doctest::Approx(1.0));

    ImpermanentAssignment none;
    none.account_id = "z";
    CHECK_THROWS_AS(resolve_final(none), NoEntries);
}

TEST_CASE("mode ties break by summed score, then category order") {
    ImpermanentAssignment a;
    a.account_id = "x";
    a.by_subspan[0] = {Category::PoliticalAffiliates, 0.3, false, "v"};
    a.by_subspan[1] = {Category::DefaultIndividuals, 0.9, false, "v"};
    a.by_subspan[2] = {Category::PoliticalAffiliates, 0.4, false, "v"};
    a.by_subspan[3] = {Category::DefaultIndividuals, 0.1, false, "v"};
    // counts tie 2-2; PA sums 0.7, DI sums 1.0
    FinalAssignment f = resolve_final(a);
    CHECK(f.category == Category::DefaultIndividuals);
    CHECK(f.confidence == doctest::Approx(0.5));

    // equal sums: the earlier category wins
    ImpermanentAssignment b;
    b.account_id = "y";
    b.by_subspan[0] = {Category::DefaultIndividuals, 0.5, false, "v"};
    b.by_subspan[1] = {Category::Organizations, 0.5, false, "v"};
    CHECK(resolve_final(b).category == Category::Organizations);
}

TEST_CASE("resolve_final agrees with the explicit reference on random trails") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        ImpermanentAssignment a;
        a.account_id = "acct";
        int n = 1 + static_cast<int>(rng.bounded(6));
        for (int s = 0; s < n; ++s)
            a.by_subspan[s] = {kCategories[rng.bounded(kCategoryCount)],
                               std::round(rng.next_unit() * 4.0) / 4.0, false, "v"};
        FinalAssignment fast = resolve_final(a);
        FinalAssignment slow = reference::resolve_final(a);
        CHECK(fast.category == slow.category);
        CHECK(fast.confidence == slow.confidence);
    }
}

TEST_CASE("propagate assigns hashed accounts and reports the trail") {
    DatasetBuilder builder("prop");
    // labeled anchors active in both halves of 2015
    for (int m : {1, 8}) {
        builder.add(tweet("anchor_fn", make_utc(2015, m, 5), "#wire #wire #scoop"));
        builder.add(tweet("anchor_pa", make_utc(2015, m, 6), "#rally #rally"));
    }
    // mystery account leaning on the fn vocabulary in both subspans
    builder.add(tweet("mystery", make_utc(2015, 2, 1), "#wire #scoop"));
    builder.add(tweet("mystery", make_utc(2015, 9, 1), "#wire"));
    // never shares a tag with anyone labeled
    builder.add(tweet("loner", make_utc(2015, 3, 1), "#ownthing"));
    Dataset ds = builder.finish();

    SeedLabelSet labels;
    labels.set("anchor_fn", Category::FakeNews, Provenance::CodedFile);
    labels.set("anchor_pa", Category::PoliticalAffiliates, Provenance::CodedFile);

    PropagationConfig config;
    config.subspan_months = 6;
    PropagationReport rep = propagate(ds, labels, config);

    CHECK(rep.subspan_count == 2);
    REQUIRE(rep.assigned.count("mystery") == 1);
    const PropagationOutcome& out = rep.assigned.at("mystery");
    CHECK(out.category == Category::FakeNews);
    CHECK(out.confidence == doctest::Approx(1.0));
    CHECK(out.trail.by_subspan.size() == 2);

    // loner used hashtags, so it lands in U, but matches at score zero
    REQUIRE(rep.assigned.count("loner") == 1);
    CHECK(rep.assigned.at("loner").trail.by_subspan.at(0).low_confidence);

    std::string j = rep.to_json();
    CHECK(j.find("mystery") != std::string::npos);
    CHECK(propagate(ds, labels, config).to_json() == j);  // deterministic
}

TEST_CASE("fixpoint mode reaches accounts behind skipped subspans") {
    DatasetBuilder builder("fixpoint");
    // subspan 0: the labeled anchor overlaps account a
    builder.add(tweet("anchor", make_utc(2015, 1, 10), "#root"));
    builder.add(tweet("a", make_utc(2015, 1, 11), "#root #leaf"));
    // subspan 1: only a and b are active, so single-pass has no anchor there
    builder.add(tweet("a", make_utc(2015, 8, 1), "#leaf"));
    builder.add(tweet("b", make_utc(2015, 8, 2), "#leaf"));
    Dataset ds = builder.finish();

    SeedLabelSet labels;
    labels.set("anchor", Category::Organizations, Provenance::CodedFile);

    PropagationConfig single;
    single.subspan_months = 6;
    PropagationReport once = propagate(ds, labels, single);
    CHECK(once.assigned.count("a") == 1);
    CHECK(once.assigned.count("b") == 0);
    CHECK(std::count(once.still_uncategorized.begin(), once.still_uncategorized.end(), "b") == 1);
    CHECK(once.skipped_subspans == std::vector<int>{1});
    CHECK(once.rounds == 1);

    PropagationConfig fix = single;
    fix.fixpoint = true;
    PropagationReport fixed = propagate(ds, labels, fix);
    CHECK(fixed.assigned.count("a") == 1);
    REQUIRE(fixed.assigned.count("b") == 1);
    CHECK(fixed.assigned.at("b").category == Category::Organizations);
    CHECK(fixed.rounds >= 2);
    CHECK(fixed.still_uncategorized.empty());
}
