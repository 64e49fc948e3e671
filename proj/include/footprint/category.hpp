#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace footprint {

// The four footprint classes an account can be assigned to, plus the
// residual bucket. Enum order is the fixed tie-break order used everywhere
// a deterministic choice between equally scored categories is needed.
enum class Category : std::uint8_t {
    FakeNews = 0,
    Organizations = 1,
    PoliticalAffiliates = 2,
    DefaultIndividuals = 3,
    Uncategorized = 4,
};

inline constexpr int kCategoryCount = 4;  // trainable categories

inline constexpr std::array<Category, kCategoryCount> kCategories = {
    Category::FakeNews, Category::Organizations, Category::PoliticalAffiliates,
    Category::DefaultIndividuals};

const char* to_string(Category c);

// Tolerant parser: "FakeNews", "fake_news", "Fake News" all map to the same
// value. Returns nullopt for anything unknown.
std::optional<Category> category_from_string(std::string_view s);

inline int category_index(Category c) { return static_cast<int>(c); }

}  // namespace footprint
