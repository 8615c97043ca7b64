#pragma once

#include <cmath>
#include <vector>

#include "decision_tree.hpp"
#include "common.hpp"

namespace hicl {

/// Multinomial gradient-boosted trees. Scores start at the class log priors;
/// each round fits one regression tree per class to the probability
/// residuals and applies the standard (K-1)/K Newton leaf step scaled by the
/// learning rate. With learning_rate = 0 the model reproduces the class
/// priors exactly. Fitting is deterministic: no row or feature subsampling.
class GradientBoost final : public ModelBase {
public:
    static std::shared_ptr<const GradientBoost> fit(const ClassifierSpec& spec, const Matrix& X,
                                                    const std::vector<int>& y, std::size_t k_cls) {
        const int n_estimators = spec.get_int("n_estimators", 100);
        const int max_depth = spec.get_int("max_depth", 3);
        const double lr = spec.get_double("learning_rate", 0.1);
        if (n_estimators < 1) throw config_error("gradient_boost: n_estimators must be >= 1");
        if (lr < 0.0) throw config_error("gradient_boost: learning_rate must be >= 0");
        const auto counts = detail::class_counts(y, k_cls);

        auto model = std::make_shared<GradientBoost>();
        model->k_ = k_cls;
        model->lr_ = lr;
        const std::size_t n = X.rows(), k = k_cls;
        model->base_score_.resize(k);
        for (std::size_t j = 0; j < k; ++j)
            model->base_score_[j] =
                std::log(static_cast<double>(counts[j]) / static_cast<double>(n));

        Matrix F(n, k);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) F(i, j) = model->base_score_[j];

        const double scale = (static_cast<double>(k) - 1.0) / static_cast<double>(k);
        std::vector<double> g(n), h(n);
        model->rounds_.resize(static_cast<std::size_t>(n_estimators));
        for (int t = 0; t < n_estimators; ++t) {
            Matrix P = detail::softmax_rows(F);
            auto& round = model->rounds_[static_cast<std::size_t>(t)];
            round.resize(k);
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    double p = P(i, j);
                    g[i] = (y[i] == static_cast<int>(j) ? 1.0 : 0.0) - p;
                    h[i] = p * (1.0 - p);
                }
                round[j].fit_regression(X, g, h, scale, max_depth);
                if (lr != 0.0)
                    for (std::size_t i = 0; i < n; ++i)
                        F(i, j) += lr * round[j].predict_value(X.row(i));
            }
        }
        return model;
    }

    Matrix predict_proba_impl(const Matrix& X) const override {
        Matrix F(X.rows(), k_);
        for (std::size_t i = 0; i < X.rows(); ++i) {
            auto x = X.row(i);
            for (std::size_t j = 0; j < k_; ++j) {
                double s = base_score_[j];
                if (lr_ != 0.0)
                    for (const auto& round : rounds_) s += lr_ * round[j].predict_value(x);
                F(i, j) = s;
            }
        }
        return detail::softmax_rows(F);
    }

    nlohmann::json params_json() const override {
        nlohmann::json j;
        j["k"] = k_;
        j["lr"] = lr_;
        j["base_score"] = base_score_;
        auto rounds = nlohmann::json::array();
        for (const auto& round : rounds_) {
            auto per_class = nlohmann::json::array();
            for (const auto& tree : round) per_class.push_back(tree.to_json());
            rounds.push_back(std::move(per_class));
        }
        j["rounds"] = std::move(rounds);
        return j;
    }

    static std::shared_ptr<const GradientBoost> from_json(const nlohmann::json& j) {
        auto model = std::make_shared<GradientBoost>();
        model->k_ = j.at("k").get<std::size_t>();
        model->lr_ = j.at("lr").get<double>();
        model->base_score_ = j.at("base_score").get<std::vector<double>>();
        for (const auto& round : j.at("rounds")) {
            std::vector<DecisionTree> trees;
            for (const auto& t : round) trees.push_back(DecisionTree::from_json(t));
            model->rounds_.push_back(std::move(trees));
        }
        return model;
    }

private:
    std::vector<std::vector<DecisionTree>> rounds_;  // [round][class]
    std::vector<double> base_score_;
    double lr_ = 0.1;
    std::size_t k_ = 0;
};

}  // namespace hicl
