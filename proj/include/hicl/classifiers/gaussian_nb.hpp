#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "common.hpp"

namespace hicl {

/// Gaussian naive Bayes. Per-class feature means and population variances;
/// variances are smoothed by 1e-9 times the largest overall feature variance
/// so constant features stay finite.
class GaussianNB final : public ModelBase {
public:
    static std::shared_ptr<const GaussianNB> fit(const ClassifierSpec& spec, const Matrix& X,
                                                 const std::vector<int>& y, std::size_t k_cls) {
        (void)spec;
        auto model = std::make_shared<GaussianNB>();
        const std::size_t n = X.rows(), m = X.cols(), k = k_cls;
        const auto counts = detail::class_counts(y, k);

        model->mean_ = Matrix(k, m);
        model->var_ = Matrix(k, m);
        model->log_prior_.resize(k);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = static_cast<std::size_t>(y[i]);
            for (std::size_t f = 0; f < m; ++f) model->mean_(j, f) += X(i, f);
        }
        for (std::size_t j = 0; j < k; ++j) {
            model->log_prior_[j] =
                std::log(static_cast<double>(counts[j]) / static_cast<double>(n));
            for (std::size_t f = 0; f < m; ++f)
                model->mean_(j, f) /= static_cast<double>(counts[j]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = static_cast<std::size_t>(y[i]);
            for (std::size_t f = 0; f < m; ++f) {
                double d = X(i, f) - model->mean_(j, f);
                model->var_(j, f) += d * d;
            }
        }
        // Smoothing scale: largest population variance over the pooled data.
        std::vector<double> gmean(m, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f = 0; f < m; ++f) gmean[f] += X(i, f);
        for (std::size_t f = 0; f < m; ++f) gmean[f] /= static_cast<double>(n);
        double max_var = 0.0;
        for (std::size_t f = 0; f < m; ++f) {
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = X(i, f) - gmean[f];
                v += d * d;
            }
            max_var = std::max(max_var, v / static_cast<double>(n));
        }
        const double eps = 1e-9 * (max_var > 0.0 ? max_var : 1.0);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t f = 0; f < m; ++f)
                model->var_(j, f) = model->var_(j, f) / static_cast<double>(counts[j]) + eps;
        return model;
    }

    Matrix predict_proba_impl(const Matrix& X) const override {
        const std::size_t k = mean_.rows(), m = mean_.cols();
        Matrix scores(X.rows(), k);
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < k; ++j) {
                double s = log_prior_[j];
                for (std::size_t f = 0; f < m; ++f) {
                    double d = X(i, f) - mean_(j, f);
                    s += -0.5 * std::log(2.0 * std::numbers::pi * var_(j, f)) -
                         d * d / (2.0 * var_(j, f));
                }
                scores(i, j) = s;
            }
        return detail::softmax_rows(scores);
    }

    nlohmann::json params_json() const override {
        nlohmann::json j;
        j["log_prior"] = log_prior_;
        auto pack = [](const Matrix& m) {
            auto arr = nlohmann::json::array();
            for (std::size_t i = 0; i < m.rows(); ++i) {
                auto row = nlohmann::json::array();
                for (std::size_t f = 0; f < m.cols(); ++f) row.push_back(m(i, f));
                arr.push_back(std::move(row));
            }
            return arr;
        };
        j["mean"] = pack(mean_);
        j["var"] = pack(var_);
        return j;
    }

    static std::shared_ptr<const GaussianNB> from_json(const nlohmann::json& j) {
        auto model = std::make_shared<GaussianNB>();
        model->log_prior_ = j.at("log_prior").get<std::vector<double>>();
        auto unpack = [](const nlohmann::json& arr) {
            Matrix m(arr.size(), arr.empty() ? 0 : arr.at(0).size());
            for (std::size_t i = 0; i < arr.size(); ++i)
                for (std::size_t f = 0; f < arr.at(i).size(); ++f)
                    m(i, f) = arr.at(i).at(f).get<double>();
            return m;
        };
        model->mean_ = unpack(j.at("mean"));
        model->var_ = unpack(j.at("var"));
        return model;
    }

    const Matrix& class_means() const { return mean_; }
    const Matrix& class_vars() const { return var_; }

private:
    Matrix mean_, var_;                 // k x m
    std::vector<double> log_prior_;     // length k
};

}  // namespace hicl
