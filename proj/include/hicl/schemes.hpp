#pragma once

#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "classifiers.hpp"
#include "hierarchy.hpp"

namespace hicl {

enum class Scheme { fc, global, lcpn, lcpn_plus, lcpn_plus_f };

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "fc") return Scheme::fc;
    if (s == "global") return Scheme::global;
    if (s == "lcpn") return Scheme::lcpn;
    if (s == "lcpn_plus") return Scheme::lcpn_plus;
    if (s == "lcpn_plus_f") return Scheme::lcpn_plus_f;
    throw config_error("unknown scheme: " + s);
}

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::fc: return "fc";
        case Scheme::global: return "global";
        case Scheme::lcpn: return "lcpn";
        case Scheme::lcpn_plus: return "lcpn_plus";
        case Scheme::lcpn_plus_f: return "lcpn_plus_f";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Scoring cores. These work on plain probability tables so they can be
// exercised with arbitrary stochastic inputs, independent of any classifier.
// `parent_probs[i]` holds an n x 2 table: the probability that an instance
// descends to child 0 / child 1 of internal node i.
// ---------------------------------------------------------------------------

/// Path products over the full path (leaf element included): the score of
/// leaf C_j is the product, over every node on its path below the root, of
/// the probability that the node's parent hands the instance to it. Rows sum
/// to 1 for binary trees because sibling probabilities sum to 1 at each node.
inline Matrix lcpn_plus_scores(const HierarchyTree& tree,
                               const std::map<int, Matrix>& parent_probs) {
    const std::size_t c = tree.n_classes();
    std::vector<NodePath> paths;
    paths.reserve(c);
    for (std::size_t j = 0; j < c; ++j) paths.push_back(path_of(tree, static_cast<int>(j)));
    const std::size_t n = parent_probs.begin()->second.rows();

    Matrix scores(n, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            double prod = 1.0;
            const NodePath& path = paths[j];
            for (std::size_t e = 0; e < path.length(); ++e)
                prod *= parent_probs.at(path.q[e])(i, static_cast<std::size_t>(path.r[e]));
            scores(i, j) = prod;
        }
    return scores;
}

/// Chain-rule scores with the flat classifier supplying the terminal factor:
/// the leaf element's probability is flat_probs(i, class), and hierarchical
/// classifiers contribute only the non-leaf path elements. Parents whose
/// children are both leaves are therefore never consulted.
inline Matrix lcpn_plus_f_scores(const HierarchyTree& tree,
                                 const std::map<int, Matrix>& parent_probs,
                                 const Matrix& flat_probs) {
    const std::size_t c = tree.n_classes();
    std::vector<NodePath> paths;
    paths.reserve(c);
    for (std::size_t j = 0; j < c; ++j) paths.push_back(path_of(tree, static_cast<int>(j)));
    const std::size_t n = flat_probs.rows();

    Matrix scores(n, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            double prod = flat_probs(i, j);
            const NodePath& path = paths[j];
            for (std::size_t e = 1; e < path.length(); ++e)
                prod *= parent_probs.at(path.q[e])(i, static_cast<std::size_t>(path.r[e]));
            scores(i, j) = prod;
        }
    return scores;
}

/// Flat probabilities aggregated up the tree: each node's probability is the
/// sum over its descendant leaves, and a leaf's score is the product of node
/// probabilities along its root-to-leaf path (root excluded, leaf included).
inline Matrix global_scores(const HierarchyTree& tree, const Matrix& flat_probs) {
    const std::size_t c = tree.n_classes();
    const std::size_t total = tree.node_count();
    std::vector<NodePath> paths;
    paths.reserve(c);
    for (std::size_t j = 0; j < c; ++j) paths.push_back(path_of(tree, static_cast<int>(j)));

    Matrix scores(flat_probs.rows(), c);
    std::vector<double> node_prob(total);
    for (std::size_t i = 0; i < flat_probs.rows(); ++i) {
        // Children always carry higher indices than their parent, so one
        // descending sweep fills every internal sum.
        for (std::size_t v = total; v-- > 0;) {
            const auto& nd = tree.nodes[v];
            node_prob[v] = nd.is_leaf()
                               ? flat_probs(i, static_cast<std::size_t>(nd.leaf_class))
                               : node_prob[static_cast<std::size_t>(nd.children[0])] +
                                     node_prob[static_cast<std::size_t>(nd.children[1])];
        }
        for (std::size_t j = 0; j < c; ++j) {
            double prod = 1.0;
            for (int p : paths[j].p) prod *= node_prob[static_cast<std::size_t>(p)];
            scores(i, j) = prod;
        }
    }
    return scores;
}

/// Top-down routing. `prob_fn(node, row)` returns the two child probabilities
/// of internal node `node` for instance `row`; the walk descends to the
/// likelier child (ties go left) until it reaches a leaf. Returns the leaf
/// classes and the visited node indices per instance.
inline std::pair<std::vector<int>, std::vector<std::vector<int>>> lcpn_route(
    const HierarchyTree& tree,
    const std::function<std::pair<double, double>(int, std::size_t)>& prob_fn, std::size_t n) {
    std::vector<int> labels(n);
    std::vector<std::vector<int>> trace(n);
    for (std::size_t i = 0; i < n; ++i) {
        int node = 0;
        while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
            trace[i].push_back(node);
            auto [p_left, p_right] = prob_fn(node, i);
            node = tree.nodes[static_cast<std::size_t>(node)].children[p_right > p_left ? 1 : 0];
        }
        trace[i].push_back(node);
        labels[i] = tree.nodes[static_cast<std::size_t>(node)].leaf_class;
    }
    return {std::move(labels), std::move(trace)};
}

// ---------------------------------------------------------------------------
// Model-backed schemes.
// ---------------------------------------------------------------------------

/// A trained exploitation scheme: flat classifier and/or one binary
/// classifier per (active) internal tree node, plus shared call counters.
struct SchemeModel {
    Scheme kind = Scheme::fc;
    bool has_tree = false;
    HierarchyTree tree;
    TrainedClassifier flat;
    std::map<int, TrainedClassifier> parents;  // internal node index -> binary classifier
    std::map<int, bool> active;                // internal node index -> participates
    std::size_t c = 0;
    std::shared_ptr<CallCounters> counters;
};

namespace detail {

/// Class ids reachable in the subtree rooted at each node.
inline std::vector<std::vector<int>> subtree_classes(const HierarchyTree& tree) {
    std::vector<std::vector<int>> out(tree.node_count());
    for (std::size_t v = tree.node_count(); v-- > 0;) {
        const auto& nd = tree.nodes[v];
        if (nd.is_leaf()) {
            out[v] = {nd.leaf_class};
        } else {
            const auto& l = out[static_cast<std::size_t>(nd.children[0])];
            const auto& r = out[static_cast<std::size_t>(nd.children[1])];
            out[v].insert(out[v].end(), l.begin(), l.end());
            out[v].insert(out[v].end(), r.begin(), r.end());
        }
    }
    return out;
}

}  // namespace detail

/// Train one scheme. Parent classifiers fit on the instances of their own
/// subtree with the target telling which child subtree the true class lies
/// in. For lcpn_plus_f, parents with two leaf children are deactivated and
/// never trained; the flat classifier covers the leaf decision.
inline SchemeModel train_scheme(Scheme kind, const HierarchyTree* tree,
                                const ClassifierSpec& spec, const Matrix& X,
                                const std::vector<int>& y, std::size_t c = 0) {
    SchemeModel model;
    model.kind = kind;
    model.c = detail::infer_k(y, c);
    model.counters = std::make_shared<CallCounters>();

    const bool needs_tree = kind != Scheme::fc;
    if (needs_tree) {
        if (tree == nullptr) throw config_error("train_scheme: scheme requires a hierarchy");
        if (tree->n_classes() != model.c)
            throw data_error("train_scheme: tree leaf count does not match class count");
        model.tree = *tree;
        model.has_tree = true;
    }

    const bool needs_flat =
        kind == Scheme::fc || kind == Scheme::global || kind == Scheme::lcpn_plus_f;
    if (needs_flat) {
        model.flat = fit(spec, X, y, model.c);
        model.flat.attach_counters(model.counters);
        ++model.counters->fit_calls;
    }

    const bool needs_parents = kind == Scheme::lcpn || kind == Scheme::lcpn_plus ||
                               kind == Scheme::lcpn_plus_f;
    if (needs_parents) {
        const auto classes_under = detail::subtree_classes(model.tree);
        std::vector<int> side_of(model.c);  // class -> child side at current node
        for (const auto& nd : model.tree.nodes) {
            if (nd.is_leaf()) continue;
            const bool both_leaves =
                model.tree.nodes[static_cast<std::size_t>(nd.children[0])].is_leaf() &&
                model.tree.nodes[static_cast<std::size_t>(nd.children[1])].is_leaf();
            const bool is_active = kind != Scheme::lcpn_plus_f || !both_leaves;
            model.active[nd.index] = is_active;
            if (!is_active) continue;

            for (int side = 0; side < 2; ++side)
                for (int cls : classes_under[static_cast<std::size_t>(nd.children[side])])
                    side_of[static_cast<std::size_t>(cls)] = side;

            Matrix sub_X(0, X.cols());
            std::vector<int> sub_y;
            std::vector<char> in_subtree(model.c, 0);
            for (int cls : classes_under[static_cast<std::size_t>(nd.index)])
                in_subtree[static_cast<std::size_t>(cls)] = 1;
            for (std::size_t i = 0; i < X.rows(); ++i) {
                if (!in_subtree[static_cast<std::size_t>(y[i])]) continue;
                sub_X.push_row(X.row(i));
                sub_y.push_back(side_of[static_cast<std::size_t>(y[i])]);
            }
            std::size_t per_side[2] = {0, 0};
            for (int s : sub_y) ++per_side[s];
            if (per_side[0] == 0 || per_side[1] == 0)
                throw data_error("unsatisfiable training: node " + std::to_string(nd.index) +
                                 " has an empty child side");

            TrainedClassifier clf = fit(spec, sub_X, sub_y, 2);
            clf.attach_counters(model.counters);
            ++model.counters->fit_calls;
            model.parents.emplace(nd.index, std::move(clf));
        }
    }
    return model;
}

/// Labels, per-leaf scores, and (for lcpn) the routing trace.
struct SchemePrediction {
    std::vector<int> labels;
    Matrix scores;                        // n x c; empty for lcpn
    std::vector<std::vector<int>> trace;  // lcpn only
};

namespace detail {

inline std::vector<int> row_argmax(const Matrix& scores) {
    std::vector<int> labels(scores.rows());
    for (std::size_t i = 0; i < scores.rows(); ++i) labels[i] = argmax_lowest(scores.row(i));
    return labels;
}

}  // namespace detail

inline SchemePrediction predict_flat(const SchemeModel& model, const Matrix& X) {
    if (model.kind != Scheme::fc) throw config_error("predict_flat: wrong scheme kind");
    SchemePrediction pred;
    pred.scores = model.flat.predict_proba(X);
    pred.labels = detail::row_argmax(pred.scores);
    return pred;
}

inline SchemePrediction predict_global(const SchemeModel& model, const Matrix& X) {
    if (model.kind != Scheme::global) throw config_error("predict_global: wrong scheme kind");
    SchemePrediction pred;
    pred.scores = global_scores(model.tree, model.flat.predict_proba(X));
    pred.labels = detail::row_argmax(pred.scores);
    return pred;
}

/// One batched call per parent classifier (c-1 of them), then path products.
inline SchemePrediction predict_lcpn_plus(const SchemeModel& model, const Matrix& X) {
    if (model.kind != Scheme::lcpn_plus) throw config_error("predict_lcpn_plus: wrong scheme kind");
    std::map<int, Matrix> parent_probs;
    for (const auto& [node, clf] : model.parents) parent_probs.emplace(node, clf.predict_proba(X));
    SchemePrediction pred;
    pred.scores = lcpn_plus_scores(model.tree, parent_probs);
    pred.labels = detail::row_argmax(pred.scores);
    return pred;
}

/// One batched call per active parent plus one flat call.
inline SchemePrediction predict_lcpn_plus_f(const SchemeModel& model, const Matrix& X) {
    if (model.kind != Scheme::lcpn_plus_f)
        throw config_error("predict_lcpn_plus_f: wrong scheme kind");
    std::map<int, Matrix> parent_probs;
    for (const auto& [node, clf] : model.parents) parent_probs.emplace(node, clf.predict_proba(X));
    SchemePrediction pred;
    pred.scores = lcpn_plus_f_scores(model.tree, parent_probs, model.flat.predict_proba(X));
    pred.labels = detail::row_argmax(pred.scores);
    return pred;
}

/// Per-instance sequential routing: every internal node on an instance's
/// path costs one single-row classifier call, which is what makes this the
/// slowest scheme at scale.
inline SchemePrediction predict_lcpn(const SchemeModel& model, const Matrix& X) {
    if (model.kind != Scheme::lcpn) throw config_error("predict_lcpn: wrong scheme kind");
    auto prob_fn = [&](int node, std::size_t row) {
        Matrix one(1, X.cols());
        auto src = X.row(row);
        std::copy(src.begin(), src.end(), one.row(0).begin());
        Matrix p = model.parents.at(node).predict_proba(one);
        return std::make_pair(p(0, 0), p(0, 1));
    };
    auto [labels, trace] = lcpn_route(model.tree, prob_fn, X.rows());
    SchemePrediction pred;
    pred.labels = std::move(labels);
    pred.trace = std::move(trace);
    return pred;
}

inline SchemePrediction predict_scheme(const SchemeModel& model, const Matrix& X) {
    switch (model.kind) {
        case Scheme::fc: return predict_flat(model, X);
        case Scheme::global: return predict_global(model, X);
        case Scheme::lcpn: return predict_lcpn(model, X);
        case Scheme::lcpn_plus: return predict_lcpn_plus(model, X);
        case Scheme::lcpn_plus_f: return predict_lcpn_plus_f(model, X);
    }
    throw config_error("predict_scheme: unknown scheme");
}

/// Audit export: one line per instance with its per-leaf scores (when the
/// scheme produces them) and the predicted label.
inline std::string prediction_to_csv(const SchemePrediction& pred,
                                     const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << "instance";
    if (pred.scores.rows() > 0)
        for (const auto& name : class_names) out << ",score_" << name;
    out << ",predicted\n";
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        out << i;
        if (pred.scores.rows() > 0) {
            char buf[32];
            for (std::size_t j = 0; j < pred.scores.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.12g", pred.scores(i, j));
                out << ',' << buf;
            }
        }
        out << ',' << class_names[static_cast<std::size_t>(pred.labels[i])] << '\n';
    }
    return out.str();
}

}  // namespace hicl
