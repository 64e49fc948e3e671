#include "footprint/reference.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "footprint/errors.hpp"

namespace footprint::reference {

namespace {

std::array<double, kCategoryCount> weights_for(const std::vector<LabeledSample>& samples,
                                               ClassWeighting weighting) {
    std::array<double, kCategoryCount> w;
    w.fill(1.0);
    if (weighting == ClassWeighting::None) return w;
    std::array<double, kCategoryCount> counts{};
    for (const LabeledSample& s : samples) counts[category_index(s.label)] += 1.0;
    double total = 0;
    int present = 0;
    for (double c : counts) {
        total += c;
        if (c > 0) ++present;
    }
    for (int c = 0; c < kCategoryCount; ++c)
        w[c] = counts[c] > 0 ? total / (static_cast<double>(present) * counts[c]) : 0.0;
    return w;
}

struct OracleContext {
    const std::vector<LabeledSample>& samples;
    const TrainConfig& config;
    int d;
    std::array<double, kCategoryCount> weights;
    std::vector<TreeNode> nodes;
};

std::array<double, kCategoryCount> weighted_counts(const OracleContext& ctx,
                                                   const std::vector<std::size_t>& subset) {
    std::array<double, kCategoryCount> counts{};
    for (std::size_t i : subset) {
        int c = category_index(ctx.samples[i].label);
        counts[c] += ctx.weights[c];
    }
    return counts;
}

double node_gini_total(const std::array<double, kCategoryCount>& counts, double total) {
    double s = 0;
    for (double c : counts) {
        double p = c / total;
        s += p * p;
    }
    return 1.0 - s;
}

double node_gini(const std::array<double, kCategoryCount>& counts) {
    return node_gini_total(counts, counts[0] + counts[1] + counts[2] + counts[3]);
}

// Every feature, every midpoint between consecutive distinct values, each
// side recounted from scratch.
std::optional<SplitCandidate> exhaustive_split(const OracleContext& ctx,
                                               const std::vector<std::size_t>& subset) {
    if (subset.size() < 2) return std::nullopt;
    const std::array<double, kCategoryCount> parent = weighted_counts(ctx, subset);
    const double parent_gini = node_gini(parent);
    if (parent_gini == 0.0) return std::nullopt;

    std::optional<SplitCandidate> best;
    for (int f = 0; f < ctx.d; ++f) {
        std::vector<double> values;
        values.reserve(subset.size());
        for (std::size_t i : subset) values.push_back(ctx.samples[i].values[f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());

        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double v = values[k];
            const double next = values[k + 1];
            double t = v + (next - v) / 2.0;
            if (!(t < next)) t = v;

            std::array<double, kCategoryCount> left{};
            for (std::size_t i : subset) {
                if (ctx.samples[i].values[f] <= t) {
                    int c = category_index(ctx.samples[i].label);
                    left[c] += ctx.weights[c];
                }
            }
            std::array<double, kCategoryCount> right;
            double lt = 0, rt = 0;
            for (int c = 0; c < kCategoryCount; ++c) {
                right[c] = parent[c] - left[c];
                lt += left[c];
                rt += right[c];
            }
            double child = (lt * node_gini_total(left, lt) + rt * node_gini_total(right, rt)) /
                           (lt + rt);
            if (!best || std::tie(child, f, t) < std::tie(best->child_impurity, best->feature,
                                                          best->threshold))
                best = SplitCandidate{f, t, child};
        }
    }
    // Zero-gain splits are kept, matching the production grower.
    return best;
}

int grow_exhaustive(OracleContext& ctx, const std::vector<std::size_t>& subset, int depth) {
    const int idx = static_cast<int>(ctx.nodes.size());
    ctx.nodes.emplace_back();

    const std::array<double, kCategoryCount> counts = weighted_counts(ctx, subset);
    int classes_present = 0;
    for (double c : counts)
        if (c > 0) ++classes_present;

    bool stop = classes_present <= 1 ||
                (ctx.config.max_depth && depth >= *ctx.config.max_depth) ||
                subset.size() < static_cast<std::size_t>(ctx.config.min_samples_split);

    std::optional<SplitCandidate> split;
    if (!stop) split = exhaustive_split(ctx, subset);

    TreeNode node;
    if (!split) {
        node.is_leaf = true;
        node.counts = counts;
        int majority = 0;
        for (int c = 1; c < kCategoryCount; ++c)
            if (counts[c] > counts[majority]) majority = c;
        node.majority = kCategories[majority];
    } else {
        node.is_leaf = false;
        node.feature = split->feature;
        node.threshold = split->threshold;
        std::vector<std::size_t> left, right;
        for (std::size_t i : subset) {
            if (ctx.samples[i].values[split->feature] <= split->threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        node.left = grow_exhaustive(ctx, left, depth + 1);
        node.right = grow_exhaustive(ctx, right, depth + 1);
    }
    ctx.nodes[idx] = std::move(node);
    return idx;
}

}  // namespace

std::vector<double> dense_vector(const SparseHashtagVector& column, std::size_t dimensions) {
    std::vector<double> out(dimensions, 0.0);
    for (const auto& [dim, weight] : column.entries)
        out.at(static_cast<std::size_t>(dim)) = weight;
    return out;
}

double cosine_dense(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dense cosine over unequal lengths");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) throw ZeroVector("cosine similarity of a zero column");
    double s = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(s, 0.0, 1.0);
}

std::vector<std::pair<std::string, SubspanAssignment>> assign_impermanent(
    const SimilarityMatrices& matrices, double low_confidence_floor) {
    if (matrices.v.empty())
        throw NoCategorizedActivity("cannot assign without categorized columns");
    const std::size_t dims = matrices.vocabulary.size();

    std::vector<std::vector<double>> dense_v;
    dense_v.reserve(matrices.v.size());
    for (const SparseHashtagVector& v : matrices.v) dense_v.push_back(dense_vector(v, dims));

    std::vector<std::pair<std::string, SubspanAssignment>> out;
    out.reserve(matrices.u.size());
    for (const SparseHashtagVector& u : matrices.u) {
        const std::vector<double> du = dense_vector(u, dims);
        SubspanAssignment best;
        bool first = true;
        for (std::size_t j = 0; j < matrices.v.size(); ++j) {
            double s = cosine_dense(du, dense_v[j]);
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
        out.emplace_back(u.account_id, best);
    }
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
    const int max_count = *std::max_element(count.begin(), count.end());
    std::vector<int> modal;
    for (int c = 0; c < kCategoryCount; ++c)
        if (count[c] == max_count) modal.push_back(c);
    int winner = modal.front();
    for (int c : modal)
        if (score_sum[c] > score_sum[winner]) winner = c;

    FinalAssignment fin;
    fin.category = kCategories[winner];
    fin.confidence = static_cast<double>(max_count) /
                     static_cast<double>(assignment.by_subspan.size());
    return fin;
}

Tree train_tree(const std::vector<LabeledSample>& samples, const TrainConfig& config) {
    if (samples.empty()) throw TooFewSamples("cannot grow a tree from zero samples");
    const std::size_t d = samples.front().values.size();
    for (const LabeledSample& s : samples)
        if (s.values.size() != d) throw DimensionMismatch("ragged sample matrix");
    if (d == 0) throw DimensionMismatch("samples have no features");
    if (config.features_per_split != static_cast<int>(d))
        throw InvalidConfig("exhaustive oracle requires the full feature set");

    OracleContext ctx{samples, config, static_cast<int>(d),
                      weights_for(samples, config.class_weighting), {}};
    std::vector<std::size_t> subset(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) subset[i] = i;
    grow_exhaustive(ctx, subset, 0);
    Tree t;
    t.nodes = std::move(ctx.nodes);
    return t;
}

bool trees_equal(const Tree& a, const Tree& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const TreeNode& x = a.nodes[i];
        const TreeNode& y = b.nodes[i];
        if (x.is_leaf != y.is_leaf) return false;
        if (x.is_leaf) {
            if (x.counts != y.counts || x.majority != y.majority) return false;
        } else {
            if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
                x.right != y.right)
                return false;
        }
    }
    return true;
}

}  // namespace footprint::reference
