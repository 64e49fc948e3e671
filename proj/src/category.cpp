#include "footprint/category.hpp"

#include <cctype>

namespace footprint {

const char* to_string(Category c) {
    switch (c) {
        case Category::FakeNews: return "FakeNews";
        case Category::Organizations: return "Organizations";
        case Category::PoliticalAffiliates: return "PoliticalAffiliates";
        case Category::DefaultIndividuals: return "DefaultIndividuals";
        case Category::Uncategorized: return "Uncategorized";
    }
    return "Uncategorized";
}

std::optional<Category> category_from_string(std::string_view s) {
    std::string key;
    key.reserve(s.size());
    for (char ch : s) {
        if (std::isalnum(static_cast<unsigned char>(ch)))
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (key == "fakenews") return Category::FakeNews;
    if (key == "organizations" || key == "organization") return Category::Organizations;
    if (key == "politicalaffiliates" || key == "politicalaffiliate")
        return Category::PoliticalAffiliates;
    if (key == "defaultindividuals" || key == "defaultindividual")
        return Category::DefaultIndividuals;
    if (key == "uncategorized") return Category::Uncategorized;
    return std::nullopt;
}

}  // namespace footprint
