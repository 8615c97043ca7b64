#pragma once

#include "classifiers/common.hpp"
#include "classifiers/decision_tree.hpp"
#include "classifiers/gaussian_nb.hpp"
#include "classifiers/gradient_boost.hpp"
#include "classifiers/lda_classifier.hpp"
#include "classifiers/random_forest.hpp"
#include "classifiers/ts_forest.hpp"

namespace hicl {

/// Train a classifier of the requested kind. `k_cls` fixes the class arity
/// (0 infers max label + 1); every class in 0..k_cls-1 must be present.
inline TrainedClassifier fit(const ClassifierSpec& spec, const Matrix& X,
                             const std::vector<int>& y, std::size_t k_cls = 0) {
    spec.validate();
    if (X.rows() == 0 || X.rows() != y.size()) throw data_error("fit: bad training shape");
    const std::size_t k = detail::infer_k(y, k_cls);
    if (k < 2) throw data_error("fit: need at least 2 classes");

    std::shared_ptr<const ModelBase> model;
    switch (spec.kind) {
        case ClassifierKind::gaussian_nb: model = GaussianNB::fit(spec, X, y, k); break;
        case ClassifierKind::lda_classifier: model = LdaClassifier::fit(spec, X, y, k); break;
        case ClassifierKind::random_forest: model = RandomForest::fit(spec, X, y, k); break;
        case ClassifierKind::gradient_boost: model = GradientBoost::fit(spec, X, y, k); break;
        case ClassifierKind::ts_forest: model = TsForest::fit(spec, X, y, k); break;
    }
    return TrainedClassifier(spec, k, X.cols(), std::move(model));
}

inline TrainedClassifier classifier_from_json(const nlohmann::json& j) {
    ClassifierSpec spec = ClassifierSpec::from_json(j.at("spec"));
    const auto k_cls = j.at("k_cls").get<std::size_t>();
    const auto m_features = j.at("m_features").get<std::size_t>();
    const auto& body = j.at("model");
    std::shared_ptr<const ModelBase> model;
    switch (spec.kind) {
        case ClassifierKind::gaussian_nb: model = GaussianNB::from_json(body); break;
        case ClassifierKind::lda_classifier: model = LdaClassifier::from_json(body); break;
        case ClassifierKind::random_forest: model = RandomForest::from_json(body); break;
        case ClassifierKind::gradient_boost: model = GradientBoost::from_json(body); break;
        case ClassifierKind::ts_forest: model = TsForest::from_json(body); break;
    }
    return TrainedClassifier(std::move(spec), k_cls, m_features, std::move(model));
}

}  // namespace hicl
