#include <doctest.h>

#include "footprint/category.hpp"

using namespace footprint;

TEST_CASE("category names round-trip") {
    for (Category c : {Category::FakeNews, Category::Organizations,
                       Category::PoliticalAffiliates, Category::DefaultIndividuals,
                       Category::Uncategorized}) {
        auto parsed = category_from_string(to_string(c));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == c);
    }
}

TEST_CASE("category parsing tolerates separators and case") {
    CHECK(category_from_string("fake_news") == Category::FakeNews);
    CHECK(category_from_string("Fake News") == Category::FakeNews);
    CHECK(category_from_string("FAKE-NEWS") == Category::FakeNews);
    CHECK(category_from_string("organization") == Category::Organizations);
    CHECK(category_from_string("political-affiliates") == Category::PoliticalAffiliates);
    CHECK(category_from_string("default individuals") == Category::DefaultIndividuals);
    CHECK(category_from_string("UNCATEGORIZED") == Category::Uncategorized);
    CHECK_FALSE(category_from_string("newsfeed").has_value());
    CHECK_FALSE(category_from_string("").has_value());
}

TEST_CASE("tie-break order is fixed by the enum") {
    REQUIRE(kCategoryCount == 4);
    CHECK(category_index(Category::FakeNews) == 0);
    CHECK(category_index(Category::Organizations) == 1);
    CHECK(category_index(Category::PoliticalAffiliates) == 2);
    CHECK(category_index(Category::DefaultIndividuals) == 3);
    for (int c = 0; c < kCategoryCount; ++c) CHECK(category_index(kCategories[c]) == c);
}
