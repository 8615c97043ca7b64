#pragma once

#include <cmath>
#include <vector>

#include "decision_tree.hpp"
#include "common.hpp"

namespace hicl {

/// Random forest: bagged CART trees with per-node feature subsampling
/// (mtry = max(1, floor(sqrt(m)))). Every tree draws its bootstrap sample
/// and node features from its own RNG stream, seeded up front from the spec
/// seed, so results do not depend on evaluation order or thread count.
/// Probabilities are the mean of per-tree leaf class frequencies.
class RandomForest final : public ModelBase {
public:
    static std::shared_ptr<const RandomForest> fit(const ClassifierSpec& spec, const Matrix& X,
                                                   const std::vector<int>& y, std::size_t k_cls) {
        const int n_estimators = spec.get_int("n_estimators", 100);
        const int max_depth = spec.get_int("max_depth", 0);
        if (n_estimators < 1) throw config_error("random_forest: n_estimators must be >= 1");
        detail::class_counts(y, k_cls);

        auto model = std::make_shared<RandomForest>();
        model->k_ = k_cls;
        const std::size_t n = X.rows();
        const int mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(
                                      static_cast<double>(X.cols())))));
        const auto seeds = substream_seeds(spec.effective_seed(),
                                           static_cast<std::size_t>(n_estimators));
        model->trees_.resize(static_cast<std::size_t>(n_estimators));
        for (int t = 0; t < n_estimators; ++t) {
            Xoshiro256ss rng(seeds[static_cast<std::size_t>(t)]);
            std::vector<int> rows(n);
            for (std::size_t i = 0; i < n; ++i)
                rows[i] = static_cast<int>(rng.bounded(n));
            model->trees_[static_cast<std::size_t>(t)].fit_classification_rows(
                X, y, k_cls, std::move(rows), max_depth, mtry, &rng);
        }
        return model;
    }

    Matrix predict_proba_impl(const Matrix& X) const override {
        Matrix out(X.rows(), k_);
        for (std::size_t i = 0; i < X.rows(); ++i) {
            auto x = X.row(i);
            for (const auto& tree : trees_) {
                const auto& dist = tree.leaf_dist(x);
                for (std::size_t j = 0; j < k_; ++j) out(i, j) += dist[j];
            }
            for (std::size_t j = 0; j < k_; ++j) out(i, j) /= static_cast<double>(trees_.size());
        }
        return out;
    }

    nlohmann::json params_json() const override {
        nlohmann::json j;
        j["k"] = k_;
        auto arr = nlohmann::json::array();
        for (const auto& tree : trees_) arr.push_back(tree.to_json());
        j["trees"] = std::move(arr);
        return j;
    }

    static std::shared_ptr<const RandomForest> from_json(const nlohmann::json& j) {
        auto model = std::make_shared<RandomForest>();
        model->k_ = j.at("k").get<std::size_t>();
        for (const auto& t : j.at("trees")) model->trees_.push_back(DecisionTree::from_json(t));
        return model;
    }

    const std::vector<DecisionTree>& trees() const { return trees_; }

private:
    std::vector<DecisionTree> trees_;
    std::size_t k_ = 0;
};

}  // namespace hicl
