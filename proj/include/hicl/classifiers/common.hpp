#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "../core.hpp"

namespace hicl {

enum class ClassifierKind { gaussian_nb, lda_classifier, random_forest, gradient_boost, ts_forest };

inline ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "gaussian_nb") return ClassifierKind::gaussian_nb;
    if (s == "lda_classifier") return ClassifierKind::lda_classifier;
    if (s == "random_forest") return ClassifierKind::random_forest;
    if (s == "gradient_boost") return ClassifierKind::gradient_boost;
    if (s == "ts_forest") return ClassifierKind::ts_forest;
    throw config_error("unknown classifier kind: " + s);
}

inline std::string to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::gaussian_nb: return "gaussian_nb";
        case ClassifierKind::lda_classifier: return "lda_classifier";
        case ClassifierKind::random_forest: return "random_forest";
        case ClassifierKind::gradient_boost: return "gradient_boost";
        case ClassifierKind::ts_forest: return "ts_forest";
    }
    return "?";
}

/// Classifier kind plus hyperparameters. Keys are validated against the
/// documented set for the kind; `seed` drives every randomized learner and
/// is overridden by an explicit random_state parameter.
struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::gaussian_nb;
    std::map<std::string, std::string> params;
    std::uint64_t seed = 0;

    static const std::map<std::string, std::vector<std::string>>& allowed_params() {
        static const std::map<std::string, std::vector<std::string>> table = {
            {"gaussian_nb", {}},
            {"lda_classifier", {"solver"}},
            {"random_forest", {"n_estimators", "max_depth", "random_state"}},
            {"gradient_boost", {"n_estimators", "max_depth", "learning_rate", "random_state"}},
            {"ts_forest", {"n_estimators", "n_intervals", "max_depth", "random_state"}},
        };
        return table;
    }

    void validate() const {
        const auto& allowed = allowed_params().at(to_string(kind));
        for (const auto& [key, value] : params) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw config_error("classifier " + to_string(kind) +
                                   " does not accept parameter '" + key + "'");
            (void)value;
        }
        if (kind == ClassifierKind::lda_classifier) {
            auto it = params.find("solver");
            if (it != params.end() && it->second != "svd")
                throw config_error("lda_classifier: only solver = svd is supported");
        }
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        try {
            return std::stoi(it->second);
        } catch (const std::exception&) {
            throw config_error("parameter '" + key + "' must be an integer, got '" + it->second + "'");
        }
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = params.find(key);
        if (it == params.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw config_error("parameter '" + key + "' must be a number, got '" + it->second + "'");
        }
    }

    std::uint64_t effective_seed() const {
        auto it = params.find("random_state");
        if (it == params.end()) return seed;
        try {
            const std::string& v = it->second;
            if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
                throw std::invalid_argument(v);
            return static_cast<std::uint64_t>(std::stoull(v));
        } catch (const std::exception&) {
            throw config_error("random_state must be a non-negative integer, got '" + it->second + "'");
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["kind"] = to_string(kind);
        j["params"] = params;
        j["seed"] = seed;
        return j;
    }

    static ClassifierSpec from_json(const nlohmann::json& j) {
        ClassifierSpec s;
        s.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
        s.params = j.at("params").get<std::map<std::string, std::string>>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.validate();
        return s;
    }
};

/// Invocation counters, shared between a scheme and the classifiers it owns.
/// A "call" is one batched predict_proba invocation of any size.
struct CallCounters {
    std::uint64_t fit_calls = 0;
    std::uint64_t predict_calls = 0;
    std::uint64_t instances_scored = 0;
};

struct ModelBase {
    virtual ~ModelBase() = default;
    virtual Matrix predict_proba_impl(const Matrix& X) const = 0;
    virtual nlohmann::json params_json() const = 0;
};

/// Fitted classifier handle: the spec it was built from, the class arity it
/// predicts over, and an optional shared call counter.
class TrainedClassifier {
public:
    TrainedClassifier() = default;
    TrainedClassifier(ClassifierSpec spec, std::size_t k_cls, std::size_t m_features,
                      std::shared_ptr<const ModelBase> model)
        : spec_(std::move(spec)), k_cls_(k_cls), m_features_(m_features), model_(std::move(model)) {}

    const ClassifierSpec& spec() const { return spec_; }
    std::size_t k_cls() const { return k_cls_; }
    std::size_t m_features() const { return m_features_; }
    bool valid() const { return model_ != nullptr; }

    void attach_counters(std::shared_ptr<CallCounters> counters) { counters_ = std::move(counters); }

    Matrix predict_proba(const Matrix& X) const {
        if (X.cols() != m_features_)
            throw data_error("predict_proba: feature arity mismatch");
        if (counters_) {
            ++counters_->predict_calls;
            counters_->instances_scored += X.rows();
        }
        return model_->predict_proba_impl(X);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["spec"] = spec_.to_json();
        j["k_cls"] = k_cls_;
        j["m_features"] = m_features_;
        j["model"] = model_->params_json();
        return j;
    }

private:
    ClassifierSpec spec_;
    std::size_t k_cls_ = 0;
    std::size_t m_features_ = 0;
    std::shared_ptr<const ModelBase> model_;
    std::shared_ptr<CallCounters> counters_;
};

namespace detail {

/// Row-wise softmax over log scores, stabilised by the row maximum.
inline Matrix softmax_rows(const Matrix& scores) {
    Matrix out(scores.rows(), scores.cols());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        double mx = scores(i, 0);
        for (std::size_t j = 1; j < scores.cols(); ++j) mx = std::max(mx, scores(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < scores.cols(); ++j) {
            out(i, j) = std::exp(scores(i, j) - mx);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < scores.cols(); ++j) out(i, j) /= sum;
    }
    return out;
}

inline std::size_t infer_k(const std::vector<int>& y, std::size_t k_cls) {
    if (k_cls > 0) return k_cls;
    int mx = 0;
    for (int id : y) mx = std::max(mx, id);
    return static_cast<std::size_t>(mx) + 1;
}

inline std::vector<std::size_t> class_counts(const std::vector<int>& y, std::size_t k) {
    std::vector<std::size_t> counts(k, 0);
    for (int id : y) {
        if (id < 0 || static_cast<std::size_t>(id) >= k)
            throw data_error("label id out of range for class arity");
        ++counts[static_cast<std::size_t>(id)];
    }
    for (std::size_t j = 0; j < k; ++j)
        if (counts[j] == 0)
            throw numeric_error("class " + std::to_string(j) + " has no training instances");
    return counts;
}

}  // namespace detail

}  // namespace hicl
