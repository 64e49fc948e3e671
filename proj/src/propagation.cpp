#include "footprint/propagation.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "footprint/errors.hpp"

namespace footprint {

namespace {

using nlohmann::json;

// account -> hashtag -> count, for one subspan
using TagCounts = std::map<std::string, std::map<std::string, std::int64_t>>;

SimilarityMatrices matrices_from_counts(const TagCounts& counts, int subspan_index,
                                        const SeedLabelSet& labels, VectorMode mode) {
    SimilarityMatrices m;
    m.vocabulary.subspan_index = subspan_index;
    for (const auto& [account, tags] : counts)
        for (const auto& [tag, n] : tags) m.vocabulary.dims.emplace(tag, 0);
    int next = 0;
    for (auto& [tag, dim] : m.vocabulary.dims) dim = next++;

    for (const auto& [account, tags] : counts) {
        SparseHashtagVector col;
        col.account_id = account;
        col.subspan_index = subspan_index;
        double sq = 0;
        for (const auto& [tag, n] : tags) {
            double w = mode == VectorMode::Binary ? 1.0 : static_cast<double>(n);
            col.entries.emplace_back(m.vocabulary.dims.at(tag), w);
            sq += w * w;
        }
        col.norm = std::sqrt(sq);
        auto label = labels.get(account);
        if (label) {
            m.v.push_back(std::move(col));
            m.v_category.push_back(label->category);
        } else {
            m.u.push_back(std::move(col));
        }
    }
    if (m.v.empty())
        throw NoCategorizedActivity("subspan " + std::to_string(subspan_index) +
                                    ": no categorized account used a hashtag");
    return m;
}

}  // namespace

std::vector<Subspan> partition_subspans(UtcTime start, UtcTime end, int width_months) {
    if (width_months < 1) throw InvalidConfig("subspan width must be >= 1 month");
    if (end <= start) throw EmptyDataset("cannot partition an empty timeframe");
    std::vector<Subspan> out;
    int i = 0;
    UtcTime lo = start;
    while (lo < end) {
        UtcTime hi = add_months(start, (i + 1) * width_months);
        Subspan s;
        s.index = i;
        s.start = lo;
        s.end = std::min(hi, end);
        out.push_back(s);
        lo = hi;
        ++i;
    }
    return out;
}

std::vector<Subspan> partition_subspans(const Dataset& dataset, int width_months) {
    if (dataset.empty()) throw EmptyDataset("dataset has no tweets");
    return partition_subspans(dataset.start, dataset.end, width_months);
}

SimilarityMatrices build_vectors(const Dataset& dataset, const Subspan& subspan,
                                 const SeedLabelSet& labels, VectorMode mode) {
    TagCounts counts;
    dataset.for_each_tweet([&](const TweetRecord& t) {
        if (t.timestamp < subspan.start || t.timestamp >= subspan.end) return;
        if (t.hashtags.empty()) return;
        auto& tags = counts[t.account_id];
        for (const std::string& tag : t.hashtags) tags[tag] += 1;
    });
    return matrices_from_counts(counts, subspan.index, labels, mode);
}

double cosine_similarity(const SparseHashtagVector& u, const SparseHashtagVector& v) {
    if (u.entries.empty() || u.norm == 0 || v.entries.empty() || v.norm == 0)
        throw ZeroVector("cosine similarity of a zero column");
    double dot = 0;
    std::size_t i = 0, j = 0;
    while (i < u.entries.size() && j < v.entries.size()) {
        int du = u.entries[i].first, dv = v.entries[j].first;
        if (du == dv) {
            dot += u.entries[i].second * v.entries[j].second;
            ++i;
            ++j;
        } else if (du < dv) {
            ++i;
        } else {
            ++j;
        }
    }
    double s = dot / (u.norm * v.norm);
    return std::clamp(s, 0.0, 1.0);
}

std::vector<std::pair<std::string, SubspanAssignment>> assign_impermanent(
    const SimilarityMatrices& matrices, double low_confidence_floor) {
    if (matrices.v.empty())
        throw NoCategorizedActivity("cannot assign without categorized columns");
    std::vector<std::pair<std::string, SubspanAssignment>> out(matrices.u.size());
    std::vector<std::exception_ptr> errors(matrices.u.size());

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(matrices.u.size()); ++i) {
        try {
            const SparseHashtagVector& u = matrices.u[i];
            SubspanAssignment best;
            bool first = true;
            for (std::size_t j = 0; j < matrices.v.size(); ++j) {
                double s = cosine_similarity(u, matrices.v[j]);
                Category cat = matrices.v_category[j];
                const std::string& vid = matrices.v[j].account_id;
                bool wins;
                if (first) {
                    wins = true;
                } else if (s != best.score) {
                    wins = s > best.score;
                } else if (cat != best.category) {
                    wins = category_index(cat) < category_index(best.category);
                } else {
                    wins = vid < best.matched_account;
                }
                if (wins) {
                    best.score = s;
                    best.category = cat;
                    best.matched_account = vid;
                    first = false;
                }
            }
            best.low_confidence = best.score < low_confidence_floor;
            out[i] = {u.account_id, best};
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

FinalAssignment resolve_final(const ImpermanentAssignment& assignment) {
    if (assignment.by_subspan.empty())
        throw NoEntries("account " + assignment.account_id + " has no subspan assignments");
    std::array<int, kCategoryCount> count{};
    std::array<double, kCategoryCount> score_sum{};
    for (const auto& [subspan, a] : assignment.by_subspan) {
        count[category_index(a.category)] += 1;
        score_sum[category_index(a.category)] += a.score;
    }
    int winner = 0;
    for (int c = 1; c < kCategoryCount; ++c) {
        if (count[c] > count[winner] ||
            (count[c] == count[winner] && score_sum[c] > score_sum[winner]))
            winner = c;
    }
    FinalAssignment fin;
    fin.category = kCategories[winner];
    fin.confidence = static_cast<double>(count[winner]) /
                     static_cast<double>(assignment.by_subspan.size());
    return fin;
}

PropagationReport propagate(const Dataset& dataset, const SeedLabelSet& labels,
                            const PropagationConfig& config) {
    std::vector<Subspan> subspans = partition_subspans(dataset, config.subspan_months);

    // One streaming pass: per-subspan, per-account hashtag counts.
    std::vector<TagCounts> counts(subspans.size());
    std::vector<UtcTime> bounds;
    bounds.reserve(subspans.size());
    for (const Subspan& s : subspans) bounds.push_back(s.start);
    dataset.for_each_tweet([&](const TweetRecord& t) {
        if (t.hashtags.empty()) return;
        auto it = std::upper_bound(bounds.begin(), bounds.end(), t.timestamp);
        if (it == bounds.begin()) return;  // before the timeframe (cannot happen in practice)
        std::size_t idx = static_cast<std::size_t>(it - bounds.begin()) - 1;
        auto& tags = counts[idx][t.account_id];
        for (const std::string& tag : t.hashtags) tags[tag] += 1;
    });

    PropagationReport report;
    report.subspan_count = subspans.size();

    SeedLabelSet working = labels;
    int max_rounds = config.fixpoint ? std::max(1, config.max_rounds) : 1;
    std::map<std::string, ImpermanentAssignment> trails;

    for (int round = 1; round <= max_rounds; ++round) {
        report.rounds = round;
        report.skipped_subspans.clear();
        trails.clear();
        for (const Subspan& s : subspans) {
            SimilarityMatrices m;
            try {
                m = matrices_from_counts(counts[s.index], s.index, working, config.vector_mode);
            } catch (const NoCategorizedActivity&) {
                report.skipped_subspans.push_back(s.index);
                continue;
            }
            auto assigned = assign_impermanent(m, config.low_confidence_floor);
            for (auto& [account, sub] : assigned) {
                ImpermanentAssignment& trail = trails[account];
                trail.account_id = account;
                trail.by_subspan.emplace(s.index, std::move(sub));
            }
        }
        std::size_t newly = 0;
        for (const auto& [account, trail] : trails) {
            if (report.assigned.count(account)) continue;
            PropagationOutcome outcome;
            FinalAssignment fin = resolve_final(trail);
            outcome.category = fin.category;
            outcome.confidence = fin.confidence;
            outcome.trail = trail;
            report.assigned.emplace(account, std::move(outcome));
            ++newly;
        }
        if (!config.fixpoint || newly == 0) break;
        for (const auto& [account, outcome] : report.assigned)
            working.set(account, outcome.category, Provenance::Propagated);
    }

    for (const auto& [id, profile] : dataset.accounts) {
        if (!labels.has(id) && !report.assigned.count(id))
            report.still_uncategorized.push_back(id);
    }
    return report;
}

std::string PropagationReport::to_json() const {
    json j;
    j["subspan_count"] = subspan_count;
    j["skipped_subspans"] = skipped_subspans;
    j["rounds"] = rounds;
    j["assigned_count"] = assigned.size();
    j["uncategorized_count"] = still_uncategorized.size();
    json acc = json::object();
    for (const auto& [id, outcome] : assigned) {
        json trail = json::object();
        for (const auto& [subspan, a] : outcome.trail.by_subspan) {
            trail[std::to_string(subspan)] = {{"category", to_string(a.category)},
                                              {"score", a.score},
                                              {"low_confidence", a.low_confidence},
                                              {"matched_account", a.matched_account}};
        }
        acc[id] = {{"category", to_string(outcome.category)},
                   {"confidence", outcome.confidence},
                   {"subspans", std::move(trail)}};
    }
    j["assigned"] = std::move(acc);
    j["still_uncategorized"] = still_uncategorized;
    return j.dump(2);
}

}  // namespace footprint
