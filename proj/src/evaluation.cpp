#include "footprint/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <json.hpp>

#include "footprint/errors.hpp"
#include "footprint/features.hpp"
#include "footprint/rng.hpp"

namespace footprint {

namespace {

using nlohmann::json;

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Per-category id lists in ascending id order, then seeded shuffle.
std::array<std::vector<const std::string*>, kCategoryCount> ids_by_category(
    const std::map<std::string, Category>& labels) {
    std::array<std::vector<const std::string*>, kCategoryCount> out;
    for (const auto& [id, cat] : labels) {
        if (cat == Category::Uncategorized)
            throw InvalidConfig("uncategorized accounts cannot be folded");
        out[category_index(cat)].push_back(&id);
    }
    return out;
}

}  // namespace

FoldAssignment stratified_folds(const std::map<std::string, Category>& labels, int k,
                                std::uint64_t seed) {
    if (k < 2) throw InvalidConfig("k-fold needs k >= 2: k = 1 leaves no held-out data");
    FoldAssignment folds;
    folds.k = k;
    auto groups = ids_by_category(labels);
    for (int c = 0; c < kCategoryCount; ++c) {
        auto& ids = groups[c];
        if (ids.empty()) continue;
        if (ids.size() < static_cast<std::size_t>(k))
            throw CategoryTooSmall(std::string(to_string(kCategories[c])) + " has only " +
                                   std::to_string(ids.size()) + " members, fewer than k = " +
                                   std::to_string(k));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(ids);
        for (std::size_t i = 0; i < ids.size(); ++i)
            folds.fold_of[*ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return folds;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (const auto& row : m)
        for (std::int64_t v : row) n += v;
    return n;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t n = 0;
    for (int c = 0; c < kCategoryCount; ++c) n += m[c][c];
    return n;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& confusion) {
    MetricsReport rep;
    rep.confusion = confusion;
    const std::int64_t total = confusion.total();
    if (total == 0) throw NoEntries("empty confusion matrix");

    double macro_sum = 0;
    std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
    for (int c = 0; c < kCategoryCount; ++c) {
        std::int64_t tp = confusion.m[c][c];
        std::int64_t fp = 0, fn = 0;
        for (int o = 0; o < kCategoryCount; ++o) {
            if (o == c) continue;
            fp += confusion.m[o][c];
            fn += confusion.m[c][o];
        }
        CategoryMetrics& cm = rep.per_category[c];
        cm.support = tp + fn;
        if (tp + fp > 0)
            cm.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        else
            cm.zero_denominator = true;
        if (tp + fn > 0)
            cm.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        else
            cm.zero_denominator = true;
        cm.f1 = (cm.precision + cm.recall) > 0
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        macro_sum += cm.f1;
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn;
    }
    rep.accuracy = static_cast<double>(confusion.trace()) / static_cast<double>(total);
    rep.macro_f1 = macro_sum / static_cast<double>(kCategoryCount);

    // micro-averaged precision = recall = accuracy; holds structurally for
    // single-label multi-class data, asserted here on every report
    double micro_p = static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fp_sum);
    double micro_r = static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fn_sum);
    if (std::abs(micro_p - rep.accuracy) > 1e-12 || std::abs(micro_r - rep.accuracy) > 1e-12)
        throw StageError("metric identity violated: micro averages diverge from accuracy");
    return rep;
}

MetricsReport evaluate(const std::map<std::string, Category>& truth,
                       const std::map<std::string, Category>& predicted) {
    if (truth.size() != predicted.size())
        throw AccountSetMismatch("truth and prediction cover different account sets");
    ConfusionMatrix confusion;
    auto it = predicted.begin();
    for (const auto& [id, t] : truth) {
        if (it->first != id)
            throw AccountSetMismatch("truth and prediction cover different account sets");
        confusion.add(t, it->second);
        ++it;
    }
    return metrics_from_confusion(confusion);
}

std::string MetricsReport::to_json() const {
    json j;
    j["accuracy"] = accuracy;
    j["macro_f1"] = macro_f1;
    json per = json::object();
    for (int c = 0; c < kCategoryCount; ++c) {
        per[to_string(kCategories[c])] = {{"precision", per_category[c].precision},
                                          {"recall", per_category[c].recall},
                                          {"f1", per_category[c].f1},
                                          {"support", per_category[c].support},
                                          {"zero_denominator", per_category[c].zero_denominator}};
    }
    j["per_category"] = std::move(per);
    json rows = json::array();
    for (int t = 0; t < kCategoryCount; ++t) {
        json row = json::array();
        for (int p = 0; p < kCategoryCount; ++p) row.push_back(confusion.m[t][p]);
        rows.push_back(std::move(row));
    }
    j["confusion"] = std::move(rows);
    if (!fold_accuracies.empty()) j["fold_accuracies"] = fold_accuracies;
    return j.dump(2);
}

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string MetricsReport::to_markdown() const {
    std::string out;
    out += "| Category | Precision | Recall | F1-Score |\n";
    out += "|---|---|---|---|\n";
    for (int c = 0; c < kCategoryCount; ++c) {
        out += "| ";
        out += to_string(kCategories[c]);
        out += " | " + fixed3(per_category[c].precision);
        out += " | " + fixed3(per_category[c].recall);
        out += " | " + fixed3(per_category[c].f1);
        out += " |\n";
    }
    out += "\nOverall accuracy: " + fixed3(accuracy) + ", macro-F1: " + fixed3(macro_f1) + "\n";
    return out;
}

CrossValidationReport cross_validate_with(const std::vector<LabeledSample>& samples, int k,
                                          std::uint64_t seed, const TrainerFn& trainer) {
    std::map<std::string, Category> labels;
    std::map<std::string, const LabeledSample*> by_id;
    for (const LabeledSample& s : samples) {
        if (!labels.emplace(s.account_id, s.label).second)
            throw InvalidConfig("duplicate account in CV samples: " + s.account_id);
        by_id.emplace(s.account_id, &s);
    }
    FoldAssignment folds = stratified_folds(labels, k, seed);

    CrossValidationReport rep;
    rep.k = k;
    rep.fold_accuracies.assign(k, 0.0);
    std::vector<std::map<std::string, Prediction>> fold_preds(k);
    std::vector<std::exception_ptr> fold_errors(k);

    // Exceptions must not unwind out of the parallel region; park them per
    // fold and rethrow the lowest-index one afterwards.
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < k; ++f) {
        try {
            std::vector<LabeledSample> train;
            std::vector<const LabeledSample*> test;
            for (const LabeledSample& s : samples) {
                if (folds.fold_of.at(s.account_id) == f)
                    test.push_back(&s);
                else
                    train.push_back(s);
            }
            std::unique_ptr<Classifier> model =
                trainer(train, mix_seed(seed, 1000 + static_cast<std::uint64_t>(f)));
            std::size_t correct = 0;
            for (const LabeledSample* s : test) {
                FeatureVector row;
                row.account_id = s->account_id;
                row.values = s->values;
                Prediction p = model->predict_one(row);
                if (p.category == s->label) ++correct;
                fold_preds[f].emplace(s->account_id, std::move(p));
            }
            rep.fold_accuracies[f] = test.empty() ? 0.0
                                                  : static_cast<double>(correct) /
                                                        static_cast<double>(test.size());
        } catch (...) {
            fold_errors[f] = std::current_exception();
        }
    }
    for (int f = 0; f < k; ++f)
        if (fold_errors[f]) std::rethrow_exception(fold_errors[f]);

    ConfusionMatrix pooled;
    for (int f = 0; f < k; ++f) {
        for (auto& [id, p] : fold_preds[f]) {
            pooled.add(by_id.at(id)->label, p.category);
            rep.out_of_fold.emplace(id, std::move(p));
        }
    }
    rep.pooled = metrics_from_confusion(pooled);
    rep.pooled.fold_accuracies = rep.fold_accuracies;
    double sum = 0;
    for (double a : rep.fold_accuracies) sum += a;
    rep.mean_accuracy = sum / static_cast<double>(k);
    return rep;
}

CrossValidationReport cross_validate(const std::vector<LabeledSample>& samples,
                                     const TrainConfig& config, int k, std::uint64_t seed) {
    return cross_validate_with(samples, k, seed,
                               [&config](const std::vector<LabeledSample>& train,
                                         std::uint64_t fold_seed) {
                                   TrainConfig c = config;
                                   c.seed = fold_seed;
                                   return make_forest_classifier(train_forest(train, c));
                               });
}

std::string CrossValidationReport::to_json() const {
    json j;
    j["k"] = k;
    j["fold_accuracies"] = fold_accuracies;
    j["mean_accuracy"] = mean_accuracy;
    j["pooled"] = json::parse(pooled.to_json());
    return j.dump(2);
}

std::vector<DepthAccuracy> depth_sweep(const std::vector<LabeledSample>& samples,
                                       const TrainConfig& config, int min_depth, int max_depth,
                                       std::uint64_t seed) {
    if (min_depth > max_depth || min_depth < 0)
        throw InvalidConfig("empty or negative depth range");

    // fixed stratified 70/30 split
    std::map<std::string, Category> labels;
    for (const LabeledSample& s : samples)
        if (!labels.emplace(s.account_id, s.label).second)
            throw InvalidConfig("duplicate account in sweep samples: " + s.account_id);
    std::array<std::vector<const std::string*>, kCategoryCount> groups;
    for (const auto& [id, cat] : labels) groups[category_index(cat)].push_back(&id);
    std::map<std::string, bool> in_train;
    for (int c = 0; c < kCategoryCount; ++c) {
        auto& ids = groups[c];
        if (ids.empty()) continue;
        Rng rng(mix_seed(seed, 100 + static_cast<std::uint64_t>(c)));
        rng.shuffle(ids);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(0.7 * static_cast<double>(ids.size())));
        if (ids.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
        for (std::size_t i = 0; i < ids.size(); ++i) in_train[*ids[i]] = i < n_train;
    }
    std::vector<LabeledSample> train;
    std::vector<const LabeledSample*> test;
    for (const LabeledSample& s : samples) {
        if (in_train.at(s.account_id))
            train.push_back(s);
        else
            test.push_back(&s);
    }
    if (train.empty() || test.empty()) throw TooFewSamples("70/30 split left an empty side");

    std::vector<DepthAccuracy> out;
    for (int depth = min_depth; depth <= max_depth; ++depth) {
        TrainConfig c = config;
        c.n_trees = 1;
        c.bootstrap = false;  // depth 0 must equal the training majority class
        c.max_depth = depth;
        c.seed = mix_seed(seed, 7777);  // one "randomly selected" tree, capped per depth
        ForestModel model = train_forest(train, c);
        std::size_t correct = 0;
        for (const LabeledSample* s : test) {
            FeatureVector row;
            row.account_id = s->account_id;
            row.values = s->values;
            if (predict(model, row).category == s->label) ++correct;
        }
        out.push_back(
            {depth, static_cast<double>(correct) / static_cast<double>(test.size())});
    }
    return out;
}

std::string depth_sweep_csv(const std::vector<DepthAccuracy>& sweep) {
    std::string out = "depth,accuracy\n";
    for (const DepthAccuracy& d : sweep)
        out += std::to_string(d.depth) + "," + format_double(d.accuracy) + "\n";
    return out;
}

AgreementReport cross_dataset_agreement(
    const std::map<std::string, Category>& predictions,
    const std::map<std::string, std::string>& reference,
    const std::vector<std::pair<Category, std::string>>& mapping,
    AgreementDenominator denominator, const std::string& reference_name) {
    if (mapping.empty()) throw InvalidConfig("category mapping is empty");
    std::map<std::string, Category> token_to_model;
    for (const auto& [cat, token] : mapping) token_to_model.emplace(lower_ascii(token), cat);

    AgreementReport rep;
    rep.reference_name = reference_name;
    rep.denominator = denominator;
    for (const auto& [id, raw] : reference) {
        auto tok = token_to_model.find(lower_ascii(raw));
        if (tok == token_to_model.end()) continue;  // reference label outside the mapping
        rep.reference_size += 1;
        auto pred = predictions.find(id);
        if (pred == predictions.end()) continue;
        rep.intersection += 1;
        if (pred->second == tok->second) rep.matched += 1;
    }
    if (rep.intersection == 0)
        throw EmptyIntersection("no reference account with a mapped label appears in the "
                                "predictions");
    std::size_t denom = denominator == AgreementDenominator::ReferenceCategorySize
                            ? rep.reference_size
                            : rep.intersection;
    rep.agreement = static_cast<double>(rep.matched) / static_cast<double>(denom);
    return rep;
}

std::string AgreementReport::to_json() const {
    json j;
    j["reference"] = reference_name;
    j["reference_size"] = reference_size;
    j["intersection"] = intersection;
    j["matched"] = matched;
    j["agreement"] = agreement;
    j["denominator"] = denominator == AgreementDenominator::ReferenceCategorySize
                           ? "reference-category-size"
                           : "intersection-size";
    return j.dump(2);
}

RecheckReport manual_recheck_accuracy(const std::map<std::string, Category>& predictions,
                                      const std::map<std::string, Category>& coded) {
    RecheckReport rep;
    ConfusionMatrix confusion;
    for (const auto& [id, truth] : coded) {
        auto pred = predictions.find(id);
        if (pred == predictions.end()) continue;
        rep.covered += 1;
        if (pred->second == truth) rep.correct += 1;
        confusion.add(truth, pred->second);
    }
    if (rep.covered == 0)
        throw NoOverlap("coded labels cover none of the predicted accounts");
    rep.accuracy = static_cast<double>(rep.correct) / static_cast<double>(rep.covered);
    rep.per_category = metrics_from_confusion(confusion).per_category;
    return rep;
}

std::string RecheckReport::to_json() const {
    json j;
    j["covered"] = covered;
    j["correct"] = correct;
    j["accuracy"] = accuracy;
    json per = json::object();
    for (int c = 0; c < kCategoryCount; ++c) {
        per[to_string(kCategories[c])] = {{"precision", per_category[c].precision},
                                          {"recall", per_category[c].recall},
                                          {"f1", per_category[c].f1},
                                          {"support", per_category[c].support}};
    }
    j["per_category"] = std::move(per);
    return j.dump(2);
}

}  // namespace footprint
