#include <algorithm>
#include <cmath>

#include "footprint/classifiers.hpp"
#include "footprint/errors.hpp"
#include "footprint/rng.hpp"

namespace footprint {

namespace {

void check_trainable(const std::vector<LabeledSample>& samples) {
    if (samples.empty()) throw TooFewSamples("cannot train on zero samples");
    std::array<int, kCategoryCount> present{};
    for (const LabeledSample& s : samples) {
        if (s.label == Category::Uncategorized)
            throw InvalidConfig("uncategorized is not a training label");
        present[category_index(s.label)] = 1;
    }
    if (present[0] + present[1] + present[2] + present[3] < 2)
        throw SingleClassTrainingSet("training set holds a single class");
}

int checked_width(const std::vector<LabeledSample>& samples) {
    const std::size_t d = samples.at(0).values.size();
    for (const LabeledSample& s : samples)
        if (s.values.size() != d) throw DimensionMismatch("ragged sample matrix");
    return static_cast<int>(d);
}

Prediction from_votes(const std::string& account_id,
                      const std::array<double, kCategoryCount>& votes) {
    Prediction p;
    p.account_id = account_id;
    p.votes = votes;
    int best = 0;
    for (int c = 1; c < kCategoryCount; ++c)
        if (p.votes[c] > p.votes[best]) best = c;
    p.category = kCategories[best];
    return p;
}

// Multinomial softmax regression, zero-initialized, plain batch gradient
// descent with a fixed iteration budget -- deliberately the simplest honest
// reading of a "logistic regression" baseline.
class LogisticRegressionClassifier final : public Classifier {
public:
    LogisticRegressionClassifier(const std::vector<LabeledSample>& samples, int iterations,
                                 double learning_rate) {
        d_ = checked_width(samples);
        w_.assign(kCategoryCount, std::vector<double>(d_ + 1, 0.0));
        const std::size_t n = samples.size();
        std::vector<std::array<double, kCategoryCount>> probs(n);
        std::vector<std::vector<double>> grad(kCategoryCount, std::vector<double>(d_ + 1, 0.0));
        for (int it = 0; it < iterations; ++it) {
            for (std::size_t i = 0; i < n; ++i) probs[i] = softmax(samples[i].values);
            for (auto& g : grad) std::fill(g.begin(), g.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (int c = 0; c < kCategoryCount; ++c) {
                    double delta = probs[i][c] - (category_index(samples[i].label) == c ? 1.0 : 0.0);
                    for (int j = 0; j < d_; ++j) grad[c][j] += delta * samples[i].values[j];
                    grad[c][d_] += delta;
                }
            }
            double scale = learning_rate / static_cast<double>(n);
            for (int c = 0; c < kCategoryCount; ++c)
                for (int j = 0; j <= d_; ++j) w_[c][j] -= scale * grad[c][j];
        }
    }

    Prediction predict_one(const FeatureVector& row) const override {
        if (static_cast<int>(row.values.size()) != d_)
            throw DimensionMismatch("row width does not match trained model");
        return from_votes(row.account_id, softmax(row.values));
    }

    std::string kind() const override { return "logistic-regression"; }

private:
    std::array<double, kCategoryCount> softmax(const std::vector<double>& x) const {
        std::array<double, kCategoryCount> z{};
        for (int c = 0; c < kCategoryCount; ++c) {
            double s = w_[c][d_];
            for (int j = 0; j < d_; ++j) s += w_[c][j] * x[j];
            z[c] = s;
        }
        double mx = std::max({z[0], z[1], z[2], z[3]});
        double sum = 0;
        for (int c = 0; c < kCategoryCount; ++c) {
            z[c] = std::exp(z[c] - mx);
            sum += z[c];
        }
        for (int c = 0; c < kCategoryCount; ++c) z[c] /= sum;
        return z;
    }

    int d_ = 0;
    std::vector<std::vector<double>> w_;  // kCategoryCount x (d+1), bias last
};

class KnnClassifier final : public Classifier {
public:
    KnnClassifier(std::vector<LabeledSample> samples, int k)
        : samples_(std::move(samples)), k_(std::min<std::size_t>(k, samples_.size())) {
        d_ = checked_width(samples_);
        if (k < 1) throw InvalidConfig("knn k must be >= 1");
    }

    Prediction predict_one(const FeatureVector& row) const override {
        if (static_cast<int>(row.values.size()) != d_)
            throw DimensionMismatch("row width does not match trained model");
        std::vector<std::pair<double, std::size_t>> dist(samples_.size());
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            double s = 0;
            for (int j = 0; j < d_; ++j) {
                double dv = row.values[j] - samples_[i].values[j];
                s += dv * dv;
            }
            dist[i] = {s, i};
        }
        std::sort(dist.begin(), dist.end());
        std::array<double, kCategoryCount> votes{};
        for (std::size_t r = 0; r < k_; ++r)
            votes[category_index(samples_[dist[r].second].label)] += 1.0 / static_cast<double>(k_);
        return from_votes(row.account_id, votes);
    }

    std::string kind() const override { return "knn"; }

private:
    std::vector<LabeledSample> samples_;
    std::size_t k_;
    int d_ = 0;
};

class DecisionTreeClassifier final : public Classifier {
public:
    DecisionTreeClassifier(const std::vector<LabeledSample>& samples, std::uint64_t seed) {
        d_ = checked_width(samples);
        TrainConfig config;
        config.features_per_split = d_;  // plain CART: every feature considered
        tree_ = train_tree(samples, config, mix_seed(seed, 0));
    }

    Prediction predict_one(const FeatureVector& row) const override {
        if (static_cast<int>(row.values.size()) != d_)
            throw DimensionMismatch("row width does not match trained model");
        int i = 0;
        while (!tree_.nodes[i].is_leaf) {
            const TreeNode& n = tree_.nodes[i];
            i = row.values[n.feature] <= n.threshold ? n.left : n.right;
        }
        std::array<double, kCategoryCount> votes{};
        votes[category_index(tree_.nodes[i].majority)] = 1.0;
        return from_votes(row.account_id, votes);
    }

    std::string kind() const override { return "decision-tree"; }

    const Tree& tree() const { return tree_; }

private:
    Tree tree_;
    int d_ = 0;
};

class NaiveBayesClassifier final : public Classifier {
public:
    NaiveBayesClassifier(const std::vector<LabeledSample>& samples, double variance_floor) {
        d_ = checked_width(samples);
        const double n = static_cast<double>(samples.size());
        std::array<double, kCategoryCount> count{};
        mean_.assign(kCategoryCount, std::vector<double>(d_, 0.0));
        var_.assign(kCategoryCount, std::vector<double>(d_, 0.0));
        for (const LabeledSample& s : samples) {
            int c = category_index(s.label);
            count[c] += 1.0;
            for (int j = 0; j < d_; ++j) mean_[c][j] += s.values[j];
        }
        for (int c = 0; c < kCategoryCount; ++c) {
            if (count[c] == 0) continue;
            for (int j = 0; j < d_; ++j) mean_[c][j] /= count[c];
        }
        for (const LabeledSample& s : samples) {
            int c = category_index(s.label);
            for (int j = 0; j < d_; ++j) {
                double dv = s.values[j] - mean_[c][j];
                var_[c][j] += dv * dv;
            }
        }
        for (int c = 0; c < kCategoryCount; ++c) {
            present_[c] = count[c] > 0;
            log_prior_[c] = present_[c] ? std::log(count[c] / n) : 0.0;
            if (!present_[c]) continue;
            for (int j = 0; j < d_; ++j)
                var_[c][j] = std::max(var_[c][j] / count[c], variance_floor);
        }
    }

    Prediction predict_one(const FeatureVector& row) const override {
        if (static_cast<int>(row.values.size()) != d_)
            throw DimensionMismatch("row width does not match trained model");
        std::array<double, kCategoryCount> logp{};
        double mx = -1e308;
        for (int c = 0; c < kCategoryCount; ++c) {
            if (!present_[c]) continue;
            double s = log_prior_[c];
            for (int j = 0; j < d_; ++j) {
                double dv = row.values[j] - mean_[c][j];
                s += -0.5 * (std::log(2.0 * M_PI * var_[c][j]) + dv * dv / var_[c][j]);
            }
            logp[c] = s;
            mx = std::max(mx, s);
        }
        std::array<double, kCategoryCount> votes{};
        double sum = 0;
        for (int c = 0; c < kCategoryCount; ++c) {
            if (!present_[c]) continue;
            votes[c] = std::exp(logp[c] - mx);
            sum += votes[c];
        }
        for (int c = 0; c < kCategoryCount; ++c) votes[c] /= sum;
        return from_votes(row.account_id, votes);
    }

    std::string kind() const override { return "naive-bayes"; }

private:
    std::vector<std::vector<double>> mean_, var_;
    std::array<double, kCategoryCount> log_prior_{};
    std::array<bool, kCategoryCount> present_{};
    int d_ = 0;
};

}  // namespace

std::unique_ptr<Classifier> train_baseline(const std::string& kind,
                                           const std::vector<LabeledSample>& samples,
                                           const BaselineParams& params) {
    check_trainable(samples);
    if (kind == "logistic-regression")
        return std::make_unique<LogisticRegressionClassifier>(samples, params.lr_iterations,
                                                              params.lr_learning_rate);
    if (kind == "knn") return std::make_unique<KnnClassifier>(samples, params.knn_k);
    if (kind == "decision-tree")
        return std::make_unique<DecisionTreeClassifier>(samples, params.seed);
    if (kind == "naive-bayes")
        return std::make_unique<NaiveBayesClassifier>(samples, params.nb_variance_floor);
    if (kind == "svm")
        throw UnsupportedKind("svm baseline is not implemented");
    throw UnsupportedKind("unknown classifier kind: " + kind);
}

}  // namespace footprint
