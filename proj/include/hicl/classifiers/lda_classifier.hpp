#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "../lda.hpp"
#include "common.hpp"

namespace hicl {

/// Linear discriminant classifier: shared within-class covariance, Gaussian
/// class posteriors. Uses the same shrinkage-whitening route as the reducer,
/// which is the stable equivalent of an SVD solve (the one configuration the
/// `solver` parameter accepts).
class LdaClassifier final : public ModelBase {
public:
    static std::shared_ptr<const LdaClassifier> fit(const ClassifierSpec& spec, const Matrix& X,
                                                    const std::vector<int>& y, std::size_t k_cls) {
        (void)spec;
        const std::size_t n = X.rows(), m = X.cols(), k = k_cls;
        const auto counts = detail::class_counts(y, k);
        if (n <= k) throw data_error("lda_classifier: need more rows than classes");

        Eigen::MatrixXd Xe = detail::to_eigen(X);
        Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                   static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < n; ++i)
            mu.row(y[i]) += Xe.row(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < k; ++j)
            mu.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(counts[j]);
        Eigen::RowVectorXd gm = Xe.colwise().mean();

        Eigen::MatrixXd Sw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                   static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::RowVectorXd d = Xe.row(static_cast<Eigen::Index>(i)) - mu.row(y[i]);
            Sw.noalias() += d.transpose() * d;
        }
        Sw /= static_cast<double>(n - k);
        if (Sw.trace() <= 0.0)
            throw numeric_error("lda_classifier: zero variance everywhere");
        Sw.diagonal().array() += 1e-6;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sw);
        if (es.info() != Eigen::Success)
            throw numeric_error("lda_classifier: covariance eigendecomposition failed");
        Eigen::MatrixXd Sinv = es.eigenvectors() *
                               es.eigenvalues().cwiseMax(1e-12).cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();

        auto model = std::make_shared<LdaClassifier>();
        model->mean_.assign(gm.data(), gm.data() + m);
        model->coef_ = Matrix(k, m);
        model->intercept_.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            Eigen::RowVectorXd cj = mu.row(static_cast<Eigen::Index>(j)) - gm;
            Eigen::VectorXd w = Sinv * cj.transpose();
            for (std::size_t f = 0; f < m; ++f)
                model->coef_(j, f) = w(static_cast<Eigen::Index>(f));
            model->intercept_[j] = -0.5 * cj.dot(w) +
                                   std::log(static_cast<double>(counts[j]) / static_cast<double>(n));
        }
        return model;
    }

    Matrix predict_proba_impl(const Matrix& X) const override {
        const std::size_t k = coef_.rows(), m = coef_.cols();
        Matrix scores(X.rows(), k);
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < k; ++j) {
                double s = intercept_[j];
                for (std::size_t f = 0; f < m; ++f)
                    s += (X(i, f) - mean_[f]) * coef_(j, f);
                scores(i, j) = s;
            }
        return detail::softmax_rows(scores);
    }

    nlohmann::json params_json() const override {
        nlohmann::json j;
        j["mean"] = mean_;
        j["intercept"] = intercept_;
        auto arr = nlohmann::json::array();
        for (std::size_t i = 0; i < coef_.rows(); ++i) {
            auto row = nlohmann::json::array();
            for (std::size_t f = 0; f < coef_.cols(); ++f) row.push_back(coef_(i, f));
            arr.push_back(std::move(row));
        }
        j["coef"] = std::move(arr);
        return j;
    }

    static std::shared_ptr<const LdaClassifier> from_json(const nlohmann::json& j) {
        auto model = std::make_shared<LdaClassifier>();
        model->mean_ = j.at("mean").get<std::vector<double>>();
        model->intercept_ = j.at("intercept").get<std::vector<double>>();
        const auto& arr = j.at("coef");
        model->coef_ = Matrix(arr.size(), arr.empty() ? 0 : arr.at(0).size());
        for (std::size_t i = 0; i < arr.size(); ++i)
            for (std::size_t f = 0; f < arr.at(i).size(); ++f)
                model->coef_(i, f) = arr.at(i).at(f).get<double>();
        return model;
    }

private:
    std::vector<double> mean_;       // grand mean, length m
    Matrix coef_;                    // k x m
    std::vector<double> intercept_;  // length k
};

}  // namespace hicl
