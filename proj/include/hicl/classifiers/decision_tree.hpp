#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "../core.hpp"
#include "../rng.hpp"

namespace hicl {

/// CART trees shared by the ensemble learners. Splits test x[feature] <=
/// threshold with thresholds at midpoints of consecutive distinct values;
/// equally good splits resolve to the lower feature index, then the lower
/// threshold, so fits are fully deterministic.
class DecisionTree {
public:
    struct Node {
        int feature = -1;        // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        std::vector<double> dist;  // leaf class distribution (classification)
        double value = 0.0;        // leaf value (regression)
    };

    /// Classification fit on Gini impurity. Impure nodes split whenever any
    /// valid threshold exists (zero-gain splits allowed), so separable data
    /// is fit exactly when depth is unrestricted. Leaf distributions are the
    /// raw class frequencies of the rows reaching the leaf. `mtry` > 0 draws
    /// candidate features per node from `rng`; only features that are
    /// non-constant within the node consume the budget, so a splittable node
    /// never turns into a leaf just because the draw hit constant columns.
    void fit_classification(const Matrix& X, const std::vector<int>& y, std::size_t k_cls,
                            int max_depth = 0, int mtry = 0, Xoshiro256ss* rng = nullptr) {
        k_ = k_cls;
        regression_ = false;
        nodes_.clear();
        std::vector<int> rows(X.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
        grow_cls(X, y, rows, 1, max_depth, mtry, rng);
    }

    /// Bootstrap variant: `rows` may repeat indices.
    void fit_classification_rows(const Matrix& X, const std::vector<int>& y, std::size_t k_cls,
                                 std::vector<int> rows, int max_depth, int mtry,
                                 Xoshiro256ss* rng) {
        k_ = k_cls;
        regression_ = false;
        nodes_.clear();
        grow_cls(X, y, rows, 1, max_depth, mtry, rng);
    }

    /// Regression fit minimizing squared error on targets g. Leaf values are
    /// scale * sum(g) / max(sum(h), 1e-12) — the Newton step used by the
    /// boosting learner. Splits require a strict SSE improvement.
    void fit_regression(const Matrix& X, const std::vector<double>& g,
                        const std::vector<double>& h, double scale, int max_depth) {
        regression_ = true;
        k_ = 0;
        nodes_.clear();
        std::vector<int> rows(X.rows());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
        grow_reg(X, g, h, scale, rows, 1, max_depth);
    }

    /// Leaf class distribution for one row (classification trees).
    const std::vector<double>& leaf_dist(std::span<const double> x) const {
        return nodes_[static_cast<std::size_t>(descend(x))].dist;
    }

    /// Leaf value for one row (regression trees).
    double predict_value(std::span<const double> x) const {
        return nodes_[static_cast<std::size_t>(descend(x))].value;
    }

    std::size_t node_count() const { return nodes_.size(); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["k"] = k_;
        j["regression"] = regression_;
        auto arr = nlohmann::json::array();
        for (const auto& nd : nodes_) {
            nlohmann::json rec;
            rec["feature"] = nd.feature;
            rec["threshold"] = nd.threshold;
            rec["left"] = nd.left;
            rec["right"] = nd.right;
            if (nd.feature < 0) {
                if (regression_) rec["value"] = nd.value;
                else rec["dist"] = nd.dist;
            }
            arr.push_back(std::move(rec));
        }
        j["nodes"] = std::move(arr);
        return j;
    }

    static DecisionTree from_json(const nlohmann::json& j) {
        DecisionTree t;
        t.k_ = j.at("k").get<std::size_t>();
        t.regression_ = j.at("regression").get<bool>();
        for (const auto& rec : j.at("nodes")) {
            Node nd;
            nd.feature = rec.at("feature").get<int>();
            nd.threshold = rec.at("threshold").get<double>();
            nd.left = rec.at("left").get<int>();
            nd.right = rec.at("right").get<int>();
            if (nd.feature < 0) {
                if (t.regression_) nd.value = rec.at("value").get<double>();
                else nd.dist = rec.at("dist").get<std::vector<double>>();
            }
            t.nodes_.push_back(std::move(nd));
        }
        return t;
    }

private:
    int descend(std::span<const double> x) const {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const Node& nd = nodes_[static_cast<std::size_t>(node)];
            node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return node;
    }

    /// Per-node candidate order: a Fisher-Yates shuffle of all feature
    /// indices when sampling is in effect, identity order otherwise. The
    /// caller walks this order until `mtry` non-constant features have been
    /// examined (or the pool is exhausted).
    std::vector<int> candidate_order(std::size_t m, int mtry, Xoshiro256ss* rng) const {
        std::vector<int> pool(m);
        for (std::size_t f = 0; f < m; ++f) pool[f] = static_cast<int>(f);
        if (mtry <= 0 || rng == nullptr || static_cast<std::size_t>(mtry) >= m) return pool;
        for (std::size_t t = 0; t + 1 < m; ++t) {
            std::size_t j = t + static_cast<std::size_t>(rng->bounded(m - t));
            std::swap(pool[t], pool[j]);
        }
        return pool;
    }

    static double gini(const std::vector<double>& counts, double total) {
        double g = 1.0;
        for (double cnt : counts) {
            double f = cnt / total;
            g -= f * f;
        }
        return g;
    }

    int grow_cls(const Matrix& X, const std::vector<int>& y, const std::vector<int>& rows,
                 int depth, int max_depth, int mtry, Xoshiro256ss* rng) {
        const int me = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        std::vector<double> counts(k_, 0.0);
        for (int i : rows) counts[static_cast<std::size_t>(y[static_cast<std::size_t>(i)])] += 1.0;
        const double n = static_cast<double>(rows.size());
        bool pure = false;
        for (double cnt : counts)
            if (cnt == n) pure = true;

        int best_f = -1;
        double best_thr = 0.0, best_imp = std::numeric_limits<double>::infinity();
        if (!pure && rows.size() >= 2 && (max_depth <= 0 || depth <= max_depth)) {
            const auto order = candidate_order(X.cols(), mtry, rng);
            const int budget =
                (mtry > 0 && rng != nullptr) ? std::min<int>(mtry, static_cast<int>(X.cols()))
                                             : static_cast<int>(X.cols());
            int informative = 0;
            std::vector<std::pair<double, int>> vals(rows.size());
            for (int f : order) {
                if (informative >= budget) break;
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    int r = rows[i];
                    vals[i] = {X(static_cast<std::size_t>(r), static_cast<std::size_t>(f)),
                               y[static_cast<std::size_t>(r)]};
                }
                std::sort(vals.begin(), vals.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                if (vals.front().first == vals.back().first) continue;  // constant in node
                ++informative;
                std::vector<double> lc(k_, 0.0);
                std::vector<double> rc = counts;
                double nl = 0.0;
                for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                    lc[static_cast<std::size_t>(vals[i].second)] += 1.0;
                    rc[static_cast<std::size_t>(vals[i].second)] -= 1.0;
                    nl += 1.0;
                    if (vals[i].first == vals[i + 1].first) continue;
                    double thr = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
                    double imp = (nl * gini(lc, nl) + (n - nl) * gini(rc, n - nl)) / n;
                    // Lexicographic tie-break (impurity, feature, threshold) so
                    // the result is independent of shuffled evaluation order.
                    if (imp < best_imp ||
                        (imp == best_imp && (f < best_f || (f == best_f && thr < best_thr)))) {
                        best_imp = imp;
                        best_f = f;
                        best_thr = thr;
                    }
                }
            }
        }

        if (best_f < 0) {
            Node& nd = nodes_[static_cast<std::size_t>(me)];
            nd.dist.resize(k_);
            for (std::size_t j = 0; j < k_; ++j) nd.dist[j] = counts[j] / n;
            return me;
        }

        std::vector<int> lrows, rrows;
        for (int i : rows) {
            if (X(static_cast<std::size_t>(i), static_cast<std::size_t>(best_f)) <= best_thr)
                lrows.push_back(i);
            else
                rrows.push_back(i);
        }
        nodes_[static_cast<std::size_t>(me)].feature = best_f;
        nodes_[static_cast<std::size_t>(me)].threshold = best_thr;
        int l = grow_cls(X, y, lrows, depth + 1, max_depth, mtry, rng);
        nodes_[static_cast<std::size_t>(me)].left = l;
        int r = grow_cls(X, y, rrows, depth + 1, max_depth, mtry, rng);
        nodes_[static_cast<std::size_t>(me)].right = r;
        return me;
    }

    int grow_reg(const Matrix& X, const std::vector<double>& g, const std::vector<double>& h,
                 double scale, const std::vector<int>& rows, int depth, int max_depth) {
        const int me = static_cast<int>(nodes_.size());
        nodes_.emplace_back();

        double sum_g = 0.0;
        for (int i : rows) sum_g += g[static_cast<std::size_t>(i)];
        const double n = static_cast<double>(rows.size());

        int best_f = -1;
        double best_thr = 0.0;
        // Maximizing sum_l^2/n_l + sum_r^2/n_r is equivalent to minimizing
        // the post-split squared error.
        double best_score = sum_g * sum_g / n + 1e-12;
        if (rows.size() >= 2 && (max_depth <= 0 || depth <= max_depth)) {
            std::vector<std::pair<double, double>> vals(rows.size());
            for (std::size_t f = 0; f < X.cols(); ++f) {
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    int r = rows[i];
                    vals[i] = {X(static_cast<std::size_t>(r), f), g[static_cast<std::size_t>(r)]};
                }
                std::sort(vals.begin(), vals.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                double sl = 0.0, nl = 0.0;
                for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                    sl += vals[i].second;
                    nl += 1.0;
                    if (vals[i].first == vals[i + 1].first) continue;
                    double score = sl * sl / nl + (sum_g - sl) * (sum_g - sl) / (n - nl);
                    if (score > best_score) {
                        best_score = score;
                        best_f = static_cast<int>(f);
                        best_thr = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
                    }
                }
            }
        }

        if (best_f < 0) {
            double sum_h = 0.0;
            for (int i : rows) sum_h += h[static_cast<std::size_t>(i)];
            nodes_[static_cast<std::size_t>(me)].value = scale * sum_g / std::max(sum_h, 1e-12);
            return me;
        }

        std::vector<int> lrows, rrows;
        for (int i : rows) {
            if (X(static_cast<std::size_t>(i), static_cast<std::size_t>(best_f)) <= best_thr)
                lrows.push_back(i);
            else
                rrows.push_back(i);
        }
        nodes_[static_cast<std::size_t>(me)].feature = best_f;
        nodes_[static_cast<std::size_t>(me)].threshold = best_thr;
        int l = grow_reg(X, g, h, scale, lrows, depth + 1, max_depth);
        nodes_[static_cast<std::size_t>(me)].left = l;
        int r = grow_reg(X, g, h, scale, rrows, depth + 1, max_depth);
        nodes_[static_cast<std::size_t>(me)].right = r;
        return me;
    }

    std::vector<Node> nodes_;
    std::size_t k_ = 0;
    bool regression_ = false;
};

}  // namespace hicl
