#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "decision_tree.hpp"
#include "common.hpp"

namespace hicl {

/// Random interval on a series: [start, start + length).
struct Interval {
    int start = 0;
    int length = 0;
};

/// Draw `count` random intervals over a series of length L. Starts are
/// uniform on [0, L-2] and lengths uniform on [2, L-start], so every draw is
/// valid by construction — intervals shorter than 2 samples cannot occur.
inline std::vector<Interval> sample_intervals(std::size_t series_len, int count, Xoshiro256ss& rng) {
    if (series_len < 3) throw data_error("sample_intervals: series length must be >= 3");
    std::vector<Interval> out(static_cast<std::size_t>(count));
    for (auto& iv : out) {
        iv.start = static_cast<int>(rng.bounded(series_len - 1));
        iv.length = 2 + static_cast<int>(rng.bounded(series_len - static_cast<std::size_t>(iv.start) - 1));
    }
    return out;
}

/// Summary features of one interval of one series: mean, population standard
/// deviation, least-squares slope against sample position.
inline void interval_summary(std::span<const double> series, const Interval& iv, double* out3) {
    const int len = iv.length;
    double mean = 0.0;
    for (int t = 0; t < len; ++t) mean += series[static_cast<std::size_t>(iv.start + t)];
    mean /= len;
    double var = 0.0, cov = 0.0, tvar = 0.0;
    const double tbar = 0.5 * (len - 1);
    for (int t = 0; t < len; ++t) {
        const double d = series[static_cast<std::size_t>(iv.start + t)] - mean;
        var += d * d;
        cov += (t - tbar) * d;
        tvar += (t - tbar) * (t - tbar);
    }
    out3[0] = mean;
    out3[1] = std::sqrt(var / len);
    out3[2] = cov / tvar;
}

/// Interval features for a whole series matrix: 3 columns (mean, std, slope)
/// per sampled interval, deterministic per seed.
inline Matrix ts_interval_features(const Matrix& X, int n_intervals, std::uint64_t seed) {
    if (n_intervals < 1) throw config_error("ts_interval_features: n_intervals must be >= 1");
    Xoshiro256ss rng(seed);
    const auto ivs = sample_intervals(X.cols(), n_intervals, rng);
    Matrix out(X.rows(), 3 * ivs.size());
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t v = 0; v < ivs.size(); ++v)
            interval_summary(X.row(i), ivs[v], &out(i, 3 * v));
    return out;
}

/// Time-series forest: each tree gets its own random intervals (default
/// floor(sqrt(L)) of them), summarises every series into 3 features per
/// interval, and fits a CART on all of those features. Probabilities average
/// the per-tree leaf distributions.
class TsForest final : public ModelBase {
public:
    static std::shared_ptr<const TsForest> fit(const ClassifierSpec& spec, const Matrix& X,
                                               const std::vector<int>& y, std::size_t k_cls) {
        const int n_estimators = spec.get_int("n_estimators", 100);
        const int max_depth = spec.get_int("max_depth", 0);
        if (n_estimators < 1) throw config_error("ts_forest: n_estimators must be >= 1");
        const std::size_t L = X.cols();
        if (L < 3) throw data_error("ts_forest: series length must be >= 3");
        int n_intervals = spec.get_int("n_intervals", 0);
        if (n_intervals <= 0)
            n_intervals = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(L)))));
        detail::class_counts(y, k_cls);

        auto model = std::make_shared<TsForest>();
        model->k_ = k_cls;
        const auto seeds = substream_seeds(spec.effective_seed(),
                                           static_cast<std::size_t>(n_estimators));
        model->members_.resize(static_cast<std::size_t>(n_estimators));
        for (int t = 0; t < n_estimators; ++t) {
            auto& member = model->members_[static_cast<std::size_t>(t)];
            Xoshiro256ss rng(seeds[static_cast<std::size_t>(t)]);
            member.intervals = sample_intervals(L, n_intervals, rng);
            Matrix feats = features_for(X, member.intervals);
            member.tree.fit_classification(feats, y, k_cls, max_depth);
        }
        return model;
    }

    Matrix predict_proba_impl(const Matrix& X) const override {
        Matrix out(X.rows(), k_);
        std::vector<double> feat;
        for (const auto& member : members_) {
            feat.resize(3 * member.intervals.size());
            for (std::size_t i = 0; i < X.rows(); ++i) {
                for (std::size_t v = 0; v < member.intervals.size(); ++v)
                    interval_summary(X.row(i), member.intervals[v], &feat[3 * v]);
                const auto& dist = member.tree.leaf_dist(feat);
                for (std::size_t j = 0; j < k_; ++j) out(i, j) += dist[j];
            }
        }
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < k_; ++j) out(i, j) /= static_cast<double>(members_.size());
        return out;
    }

    nlohmann::json params_json() const override {
        nlohmann::json j;
        j["k"] = k_;
        auto arr = nlohmann::json::array();
        for (const auto& member : members_) {
            nlohmann::json rec;
            auto ivs = nlohmann::json::array();
            for (const auto& iv : member.intervals) ivs.push_back({iv.start, iv.length});
            rec["intervals"] = std::move(ivs);
            rec["tree"] = member.tree.to_json();
            arr.push_back(std::move(rec));
        }
        j["members"] = std::move(arr);
        return j;
    }

    static std::shared_ptr<const TsForest> from_json(const nlohmann::json& j) {
        auto model = std::make_shared<TsForest>();
        model->k_ = j.at("k").get<std::size_t>();
        for (const auto& rec : j.at("members")) {
            Member member;
            for (const auto& iv : rec.at("intervals"))
                member.intervals.push_back({iv.at(0).get<int>(), iv.at(1).get<int>()});
            member.tree = DecisionTree::from_json(rec.at("tree"));
            model->members_.push_back(std::move(member));
        }
        return model;
    }

private:
    struct Member {
        std::vector<Interval> intervals;
        DecisionTree tree;
    };

    static Matrix features_for(const Matrix& X, const std::vector<Interval>& ivs) {
        Matrix out(X.rows(), 3 * ivs.size());
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t v = 0; v < ivs.size(); ++v)
                interval_summary(X.row(i), ivs[v], &out(i, 3 * v));
        return out;
    }

    std::vector<Member> members_;
    std::size_t k_ = 0;
};

}  // namespace hicl
