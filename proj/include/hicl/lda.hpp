#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "core.hpp"

namespace hicl {

/// Fitted supervised projection. `basis` holds the first `output_dim`
/// directions in explained-variance order; `explained_variance_ratio` always
/// covers the full component set d = min(m, c-1).
struct Projection {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::vector<double> mean;                     // length input_dim
    Matrix basis;                                 // input_dim x output_dim
    std::vector<double> explained_variance_ratio; // length d, non-increasing

    /// Same fit restricted to the first k directions.
    Projection truncated(std::size_t k) const {
        if (k < 1 || k > basis.cols()) throw config_error("truncated: k out of range");
        Projection out = *this;
        out.output_dim = k;
        out.basis = Matrix(input_dim, k);
        for (std::size_t i = 0; i < input_dim; ++i)
            for (std::size_t j = 0; j < k; ++j) out.basis(i, j) = basis(i, j);
        return out;
    }
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return out;
}

inline Matrix from_eigen(const Eigen::MatrixXd& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    return out;
}

}  // namespace detail

/// Fit the discriminant projection by the two-step whitening route: whiten
/// with the (shrinkage-stabilised) within-class scatter, then eigendecompose
/// the whitened between-class scatter. Avoids explicit inversion, so nearly
/// singular scatters stay well behaved.
inline Projection fit_lda(const Matrix& X, const std::vector<int>& y) {
    const std::size_t n = X.rows(), m = X.cols();
    if (n == 0 || m == 0) throw data_error("fit_lda: empty input");
    int cmax = 0;
    for (int id : y) cmax = std::max(cmax, id);
    const std::size_t c = static_cast<std::size_t>(cmax) + 1;
    std::vector<std::size_t> counts(c, 0);
    for (int id : y) {
        if (id < 0) throw data_error("fit_lda: negative label");
        ++counts[static_cast<std::size_t>(id)];
    }
    for (std::size_t j = 0; j < c; ++j)
        if (counts[j] == 0) throw data_error("fit_lda: class id never occurs");
    if (c < 2) throw data_error("fit_lda: need at least 2 classes");
    if (n <= c) throw data_error("fit_lda: need more rows than classes");

    Eigen::MatrixXd Xe = detail::to_eigen(X);
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i)
        mu.row(y[i]) += Xe.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < c; ++j)
        mu.row(static_cast<Eigen::Index>(j)) /= static_cast<double>(counts[j]);
    Eigen::RowVectorXd gm = Xe.colwise().mean();

    // Pooled within-class scatter, normalised by n - c.
    Eigen::MatrixXd Sw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::RowVectorXd d = Xe.row(static_cast<Eigen::Index>(i)) - mu.row(y[i]);
        Sw.noalias() += d.transpose() * d;
    }
    Sw /= static_cast<double>(n - c);
    if (Sw.trace() <= 0.0) throw numeric_error("fit_lda: degenerate scatter (no within-class variance)");
    Sw.diagonal().array() += 1e-6;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esw(Sw);
    if (esw.info() != Eigen::Success) throw numeric_error("fit_lda: within-scatter eigendecomposition failed");
    Eigen::VectorXd w = esw.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd W = esw.eigenvectors() * w.cwiseSqrt().cwiseInverse().asDiagonal() *
                        esw.eigenvectors().transpose();

    // Between-class scatter, weighted by class frequency.
    Eigen::MatrixXd Sb = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < c; ++j) {
        Eigen::RowVectorXd d = mu.row(static_cast<Eigen::Index>(j)) - gm;
        Sb.noalias() += (static_cast<double>(counts[j]) / static_cast<double>(n)) * d.transpose() * d;
    }

    Eigen::MatrixXd M = W * Sb * W;
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(M);
    if (esb.info() != Eigen::Success) throw numeric_error("fit_lda: between-scatter eigendecomposition failed");

    const std::size_t d = std::min(m, c - 1);
    // Eigen reports ascending order; take the top d, largest first.
    std::vector<double> lambda(d);
    Eigen::MatrixXd V(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
        Eigen::Index src = static_cast<Eigen::Index>(m - 1 - j);
        lambda[j] = std::max(0.0, esb.eigenvalues()(src));
        V.col(static_cast<Eigen::Index>(j)) = esb.eigenvectors().col(src);
    }
    double total = 0.0;
    for (double l : lambda) total += l;
    if (total <= 0.0) throw numeric_error("fit_lda: no between-class variance");

    Eigen::MatrixXd basis = W * V;
    // Reproducible column orientation: largest-magnitude entry positive.
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Eigen::Index imax = 0;
        basis.col(j).cwiseAbs().maxCoeff(&imax);
        if (basis(imax, j) < 0.0) basis.col(j) = -basis.col(j);
    }

    Projection p;
    p.input_dim = m;
    p.output_dim = d;
    p.mean.assign(gm.data(), gm.data() + m);
    p.basis = detail::from_eigen(basis);
    p.explained_variance_ratio.resize(d);
    for (std::size_t j = 0; j < d; ++j) p.explained_variance_ratio[j] = lambda[j] / total;
    return p;
}

/// Smallest k whose cumulative variance ratio reaches the threshold.
inline std::size_t select_components(const std::vector<double>& ratios, double threshold = 0.95) {
    if (ratios.empty()) throw data_error("select_components: empty ratio vector");
    double cum = 0.0;
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        cum += ratios[k];
        if (cum >= threshold) return k + 1;
    }
    return ratios.size();
}

/// Center by the fitted mean and project onto the first output_dim directions.
inline Matrix transform(const Projection& p, const Matrix& X) {
    if (X.cols() != p.input_dim) throw data_error("transform: dimension mismatch");
    Matrix out(X.rows(), p.output_dim);
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < p.output_dim; ++j) {
            double acc = 0.0;
            for (std::size_t f = 0; f < p.input_dim; ++f)
                acc += (X(i, f) - p.mean[f]) * p.basis(f, j);
            out(i, j) = acc;
        }
    return out;
}

inline nlohmann::json projection_to_json(const Projection& p) {
    nlohmann::json j;
    j["input_dim"] = p.input_dim;
    j["output_dim"] = p.output_dim;
    j["mean"] = p.mean;
    auto basis = nlohmann::json::array();
    for (std::size_t i = 0; i < p.basis.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (std::size_t k = 0; k < p.basis.cols(); ++k) row.push_back(p.basis(i, k));
        basis.push_back(std::move(row));
    }
    j["basis"] = std::move(basis);
    j["explained_variance_ratio"] = p.explained_variance_ratio;
    return j;
}

inline Projection projection_from_json(const nlohmann::json& j) {
    Projection p;
    p.input_dim = j.at("input_dim").get<std::size_t>();
    p.output_dim = j.at("output_dim").get<std::size_t>();
    p.mean = j.at("mean").get<std::vector<double>>();
    p.basis = Matrix(p.input_dim, p.output_dim);
    for (std::size_t i = 0; i < p.input_dim; ++i)
        for (std::size_t k = 0; k < p.output_dim; ++k)
            p.basis(i, k) = j.at("basis").at(i).at(k).get<double>();
    p.explained_variance_ratio = j.at("explained_variance_ratio").get<std::vector<double>>();
    return p;
}

}  // namespace hicl
