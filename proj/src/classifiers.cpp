#include "footprint/classifiers.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "footprint/errors.hpp"
#include "footprint/rng.hpp"

namespace footprint {

namespace {

using nlohmann::json;

int checked_width(const std::vector<LabeledSample>& samples) {
    const std::size_t d = samples.at(0).values.size();
    for (const LabeledSample& s : samples)
        if (s.values.size() != d) throw DimensionMismatch("ragged sample matrix");
    if (d == 0) throw DimensionMismatch("samples have no features");
    return static_cast<int>(d);
}

int resolve_features_per_split(const TrainConfig& config, int d) {
    int f = config.features_per_split;
    if (f == 0) f = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    if (f < 1 || f > d)
        throw InvalidConfig("features_per_split must lie in [1, feature count]");
    return f;
}

std::array<double, kCategoryCount> class_weights_for(const std::vector<LabeledSample>& samples,
                                                     const std::vector<std::size_t>& subset,
                                                     ClassWeighting weighting) {
    std::array<double, kCategoryCount> w;
    w.fill(1.0);
    if (weighting == ClassWeighting::None) return w;
    std::array<double, kCategoryCount> counts{};
    for (std::size_t i : subset) counts[category_index(samples[i].label)] += 1.0;
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

double gini_of(const std::array<double, kCategoryCount>& counts, double total) {
    double s = 0;
    for (double c : counts) {
        double p = c / total;
        s += p * p;
    }
    return 1.0 - s;
}

Category majority_of(const std::array<double, kCategoryCount>& counts) {
    int best = 0;
    for (int c = 1; c < kCategoryCount; ++c)
        if (counts[c] > counts[best]) best = c;
    return kCategories[best];
}

struct GrowContext {
    const std::vector<LabeledSample>& samples;
    const TrainConfig& config;
    int features_per_split;
    int d;
    std::array<double, kCategoryCount> weights;
    Rng& rng;
    std::vector<TreeNode> nodes;
};

int grow(GrowContext& ctx, const std::vector<std::size_t>& subset, int depth) {
    const int idx = static_cast<int>(ctx.nodes.size());
    ctx.nodes.emplace_back();

    std::array<double, kCategoryCount> counts{};
    int classes_present = 0;
    for (std::size_t i : subset) counts[category_index(ctx.samples[i].label)] += ctx.weights[category_index(ctx.samples[i].label)];
    for (double c : counts)
        if (c > 0) ++classes_present;

    bool stop = classes_present <= 1 ||
                (ctx.config.max_depth && depth >= *ctx.config.max_depth) ||
                subset.size() < static_cast<std::size_t>(ctx.config.min_samples_split);

    std::optional<SplitCandidate> split;
    if (!stop) {
        std::vector<int> candidates =
            ctx.rng.sample_without_replacement(ctx.d, ctx.features_per_split);
        split = best_split(ctx.samples, subset, candidates, ctx.weights);
    }

    TreeNode node;
    if (!split) {
        node.is_leaf = true;
        node.counts = counts;
        node.majority = majority_of(counts);
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
        node.left = grow(ctx, left, depth + 1);
        node.right = grow(ctx, right, depth + 1);
    }
    ctx.nodes[idx] = std::move(node);
    return idx;
}

Category tree_predict(const Tree& tree, const std::vector<double>& values) {
    int i = 0;
    while (!tree.nodes[i].is_leaf) {
        const TreeNode& n = tree.nodes[i];
        i = values[n.feature] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[i].majority;
}

Tree train_tree_with_rng(const std::vector<LabeledSample>& samples,
                         const std::vector<std::size_t>& subset, const TrainConfig& config,
                         int d, int features_per_split, Rng& rng) {
    GrowContext ctx{samples, config, features_per_split, d,
                    class_weights_for(samples, subset, config.class_weighting), rng, {}};
    grow(ctx, subset, 0);
    Tree t;
    t.nodes = std::move(ctx.nodes);
    return t;
}

}  // namespace

double gini_impurity(const std::vector<double>& counts) {
    double total = 0;
    for (double c : counts) total += c;
    if (total <= 0) throw EmptyNode("gini impurity of an empty node");
    double s = 0;
    for (double c : counts) {
        double p = c / total;
        s += p * p;
    }
    return 1.0 - s;
}

double gini_impurity(const std::array<double, kCategoryCount>& counts) {
    double total = counts[0] + counts[1] + counts[2] + counts[3];
    if (total <= 0) throw EmptyNode("gini impurity of an empty node");
    return gini_of(counts, total);
}

std::optional<SplitCandidate> best_split(const std::vector<LabeledSample>& samples,
                                         const std::vector<std::size_t>& subset,
                                         const std::vector<int>& candidate_features,
                                         const std::array<double, kCategoryCount>& class_weights) {
    if (subset.size() < 2) return std::nullopt;

    std::array<double, kCategoryCount> parent{};
    for (std::size_t i : subset) {
        int c = category_index(samples[i].label);
        parent[c] += class_weights[c];
    }
    double parent_total = parent[0] + parent[1] + parent[2] + parent[3];
    if (parent_total <= 0) throw EmptyNode("split over an empty node");
    double parent_gini = gini_of(parent, parent_total);
    if (parent_gini == 0.0) return std::nullopt;

    std::optional<SplitCandidate> best;
    std::vector<std::pair<double, int>> vals;
    for (int f : candidate_features) {
        vals.clear();
        vals.reserve(subset.size());
        for (std::size_t i : subset)
            vals.emplace_back(samples[i].values[f], category_index(samples[i].label));
        std::sort(vals.begin(), vals.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::array<double, kCategoryCount> left{};
        std::size_t i = 0;
        while (i < vals.size()) {
            const double v = vals[i].first;
            while (i < vals.size() && vals[i].first == v) {
                left[vals[i].second] += class_weights[vals[i].second];
                ++i;
            }
            if (i == vals.size()) break;
            double t = v + (vals[i].first - v) / 2.0;
            if (!(t < vals[i].first)) t = v;  // midpoint collapsed by rounding

            std::array<double, kCategoryCount> right;
            double lt = 0, rt = 0;
            for (int c = 0; c < kCategoryCount; ++c) {
                right[c] = parent[c] - left[c];
                lt += left[c];
                rt += right[c];
            }
            double child = (lt * gini_of(left, lt) + rt * gini_of(right, rt)) / (lt + rt);
            bool wins = !best || child < best->child_impurity ||
                        (child == best->child_impurity &&
                         (f < best->feature || (f == best->feature && t < best->threshold)));
            if (wins) best = SplitCandidate{f, t, child};
        }
    }
    // Zero-gain splits are kept: parity patterns (class mix identical in both
    // children) still partition toward purity further down.
    return best;
}

std::optional<SplitCandidate> best_split(const std::vector<LabeledSample>& samples,
                                         const std::vector<int>& candidate_features) {
    std::vector<std::size_t> subset(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) subset[i] = i;
    std::array<double, kCategoryCount> unit;
    unit.fill(1.0);
    return best_split(samples, subset, candidate_features, unit);
}

Tree train_tree(const std::vector<LabeledSample>& samples, const TrainConfig& config,
                std::uint64_t tree_seed) {
    if (samples.empty()) throw TooFewSamples("cannot grow a tree from zero samples");
    const int d = checked_width(samples);
    const int fps = resolve_features_per_split(config, d);
    std::vector<std::size_t> subset(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) subset[i] = i;
    Rng rng(tree_seed);
    return train_tree_with_rng(samples, subset, config, d, fps, rng);
}

ForestModel train_forest(const std::vector<LabeledSample>& samples, const TrainConfig& config) {
    if (config.n_trees < 1) throw InvalidConfig("n_trees must be >= 1");
    if (config.min_samples_split < 2) throw InvalidConfig("min_samples_split must be >= 2");
    if (samples.empty()) throw TooFewSamples("cannot train a forest on zero samples");
    const int d = checked_width(samples);
    const int fps = resolve_features_per_split(config, d);

    std::array<int, kCategoryCount> present{};
    for (const LabeledSample& s : samples) {
        if (s.label == Category::Uncategorized)
            throw InvalidConfig("uncategorized is not a training label");
        present[category_index(s.label)] = 1;
    }
    if (present[0] + present[1] + present[2] + present[3] < 2)
        throw SingleClassTrainingSet("training set holds a single class");

    const std::size_t n = samples.size();
    ForestModel model;
    model.config = config;
    model.feature_names.reserve(d);
    for (int j = 0; j < d; ++j) model.feature_names.push_back("f" + std::to_string(j));
    model.trees.resize(config.n_trees);

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.n_trees));

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(config.n_trees); ++i) {
        try {
            Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(i)));
            std::vector<std::size_t> subset(n);
            std::vector<bool> in_bag(n, !config.bootstrap);
            if (config.bootstrap) {
                for (std::size_t j = 0; j < n; ++j) {
                    std::size_t k = static_cast<std::size_t>(rng.bounded(n));
                    subset[j] = k;
                    in_bag[k] = true;
                }
            } else {
                for (std::size_t j = 0; j < n; ++j) subset[j] = j;
            }
            Tree t = train_tree_with_rng(samples, subset, config, d, fps, rng);

            std::size_t oob = 0, correct = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (in_bag[j]) continue;
                ++oob;
                if (tree_predict(t, samples[j].values) == samples[j].label) ++correct;
            }
            t.oob_accuracy = oob ? static_cast<double>(correct) / static_cast<double>(oob) : -1.0;
            model.trees[i] = std::move(t);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return model;
}

Prediction predict(const ForestModel& model, const FeatureVector& row) {
    if (row.values.size() != model.feature_names.size())
        throw DimensionMismatch("feature vector width " + std::to_string(row.values.size()) +
                                " does not match model width " +
                                std::to_string(model.feature_names.size()));
    Prediction p;
    p.account_id = row.account_id;
    for (const Tree& t : model.trees)
        p.votes[category_index(tree_predict(t, row.values))] += 1.0;
    double total = static_cast<double>(model.trees.size());
    int best = 0;
    for (int c = 0; c < kCategoryCount; ++c) {
        p.votes[c] /= total;
        if (p.votes[c] > p.votes[best]) best = c;
    }
    p.category = kCategories[best];
    return p;
}

std::vector<Prediction> predict_all(const ForestModel& model,
                                    const std::vector<FeatureVector>& rows) {
    std::vector<Prediction> out(rows.size());
    std::vector<std::exception_ptr> errors(rows.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(rows.size()); ++i) {
        try {
            out[i] = predict(model, rows[i]);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

const char* weighting_to_string(ClassWeighting w) {
    return w == ClassWeighting::InverseFrequency ? "inverse-frequency" : "none";
}

ClassWeighting class_weighting_from(const std::string& s) {
    if (s == "none") return ClassWeighting::None;
    if (s == "inverse-frequency") return ClassWeighting::InverseFrequency;
    throw SchemaMismatch("unknown class weighting: " + s);
}

}  // namespace

std::string ForestModel::to_json() const {
    json j;
    j["format"] = "footprint-forest";
    j["version"] = 1;
    json cfg;
    cfg["n_trees"] = config.n_trees;
    cfg["max_depth"] = config.max_depth ? json(*config.max_depth) : json(nullptr);
    cfg["min_samples_split"] = config.min_samples_split;
    cfg["features_per_split"] = config.features_per_split;
    cfg["bootstrap"] = config.bootstrap;
    cfg["class_weighting"] = weighting_to_string(config.class_weighting);
    cfg["seed"] = config.seed;
    j["config"] = std::move(cfg);
    j["feature_names"] = feature_names;
    json jt = json::array();
    for (const Tree& t : trees) {
        json nodes = json::array();
        for (const TreeNode& n : t.nodes) {
            if (n.is_leaf) {
                nodes.push_back(json{{"leaf", {n.counts[0], n.counts[1], n.counts[2], n.counts[3]}}});
            } else {
                nodes.push_back(json{{"split", {n.feature, n.threshold, n.left, n.right}}});
            }
        }
        jt.push_back(json{{"oob_accuracy", t.oob_accuracy}, {"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(jt);
    return j.dump();
}

ForestModel ForestModel::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaMismatch("model file is not valid JSON");
    if (j.value("format", std::string{}) != "footprint-forest")
        throw SchemaMismatch("not a forest model file");
    if (j.value("version", 0) != 1)
        throw SchemaMismatch("unsupported model version");

    ForestModel m;
    const json& cfg = j.at("config");
    m.config.n_trees = cfg.at("n_trees").get<int>();
    m.config.max_depth = cfg.at("max_depth").is_null()
                             ? std::nullopt
                             : std::optional<int>(cfg.at("max_depth").get<int>());
    m.config.min_samples_split = cfg.at("min_samples_split").get<int>();
    m.config.features_per_split = cfg.at("features_per_split").get<int>();
    m.config.bootstrap = cfg.at("bootstrap").get<bool>();
    m.config.class_weighting = class_weighting_from(cfg.at("class_weighting").get<std::string>());
    m.config.seed = cfg.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();

    for (const json& jt : j.at("trees")) {
        Tree t;
        t.oob_accuracy = jt.at("oob_accuracy").get<double>();
        for (const json& jn : jt.at("nodes")) {
            TreeNode n;
            if (jn.contains("leaf")) {
                const json& counts = jn.at("leaf");
                if (counts.size() != kCategoryCount)
                    throw SchemaMismatch("leaf count vector has wrong arity");
                for (int c = 0; c < kCategoryCount; ++c) n.counts[c] = counts[c].get<double>();
                n.majority = majority_of(n.counts);
            } else if (jn.contains("split")) {
                const json& s = jn.at("split");
                n.is_leaf = false;
                n.feature = s.at(0).get<int>();
                n.threshold = s.at(1).get<double>();
                n.left = s.at(2).get<int>();
                n.right = s.at(3).get<int>();
            } else {
                throw SchemaMismatch("node is neither leaf nor split");
            }
            t.nodes.push_back(std::move(n));
        }
        for (const TreeNode& n : t.nodes) {
            if (n.is_leaf) continue;
            if (n.feature < 0 || n.feature >= static_cast<int>(m.feature_names.size()) ||
                n.left < 0 || n.left >= static_cast<int>(t.nodes.size()) || n.right < 0 ||
                n.right >= static_cast<int>(t.nodes.size()))
                throw SchemaMismatch("split node references out of range");
        }
        m.trees.push_back(std::move(t));
    }
    if (static_cast<int>(m.trees.size()) != m.config.n_trees)
        throw SchemaMismatch("tree count does not match config");
    return m;
}

namespace {

class ForestClassifier final : public Classifier {
public:
    explicit ForestClassifier(ForestModel model) : model_(std::move(model)) {}
    Prediction predict_one(const FeatureVector& row) const override {
        return predict(model_, row);
    }
    std::string kind() const override { return "random-forest"; }
    const ForestModel& model() const { return model_; }

private:
    ForestModel model_;
};

}  // namespace

std::unique_ptr<Classifier> make_forest_classifier(ForestModel model) {
    return std::make_unique<ForestClassifier>(std::move(model));
}

std::unique_ptr<Classifier> train_kind(const std::string& kind,
                                       const std::vector<LabeledSample>& samples,
                                       const TrainConfig& forest_config,
                                       const BaselineParams& params) {
    if (kind == "random-forest" || kind == "rfc")
        return make_forest_classifier(train_forest(samples, forest_config));
    return train_baseline(kind, samples, params);
}

}  // namespace footprint
