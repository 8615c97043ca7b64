#include <catch2/catch_amalgamated.hpp>

#include <hicl/hierarchy.hpp>
#include <hicl/rng.hpp>
#include <hicl/schemes.hpp>

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

using namespace hicl;

namespace {

HierarchyTree::Node make_node(int index, int parent, int child_pos, int c0, int c1,
                              int leaf_class) {
    HierarchyTree::Node nd;
    nd.index = index;
    nd.parent = parent;
    nd.child_pos = child_pos;
    nd.children[0] = c0;
    nd.children[1] = c1;
    nd.leaf_class = leaf_class;
    return nd;
}

/// Three classes: ((class0, class1), class2). Internal nodes 0 and 1.
HierarchyTree three_class_tree() {
    HierarchyTree tree;
    tree.nodes = {
        make_node(0, -1, -1, 1, 2, -1),
        make_node(1, 0, 0, 3, 4, -1),
        make_node(2, 0, 1, -1, -1, 2),
        make_node(3, 1, 0, -1, -1, 0),
        make_node(4, 1, 1, -1, -1, 1),
    };
    tree.validate();
    return tree;
}

/// Six classes, eleven nodes, depths 1..4. Internal nodes: 0, 1, 3, 4, 5;
/// nodes 4 and 5 have two leaf children each.
HierarchyTree six_class_tree() {
    HierarchyTree tree;
    tree.nodes = {
        make_node(0, -1, -1, 2, 1, -1),
        make_node(1, 0, 1, 3, 4, -1),
        make_node(2, 0, 0, -1, -1, 0),
        make_node(3, 1, 0, 5, 6, -1),
        make_node(4, 1, 1, 9, 10, -1),
        make_node(5, 3, 0, 7, 8, -1),
        make_node(6, 3, 1, -1, -1, 5),
        make_node(7, 5, 0, -1, -1, 1),
        make_node(8, 5, 1, -1, -1, 2),
        make_node(9, 4, 0, -1, -1, 3),
        make_node(10, 4, 1, -1, -1, 4),
    };
    tree.validate();
    return tree;
}

Matrix one_row(std::vector<double> vals) { return Matrix::from_rows({std::move(vals)}); }

/// Well-separated 2-D blobs, one cluster per class, 1-D class layout.
struct Blobs {
    Matrix X;
    std::vector<int> y;
};

Blobs make_blobs(std::size_t c, std::size_t per_class, std::uint64_t seed) {
    Xoshiro256ss rng(seed);
    Blobs b;
    b.X = Matrix(c * per_class, 2);
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t row = j * per_class + i;
            b.y.push_back(static_cast<int>(j));
            b.X(row, 0) = 10.0 * static_cast<double>(j) + rng.uniform() * 2.0 - 1.0;
            b.X(row, 1) = rng.uniform() * 2.0 - 1.0;
        }
    return b;
}

ClassifierSpec nb_spec() {
    ClassifierSpec s;
    s.kind = ClassifierKind::gaussian_nb;
    return s;
}

std::map<int, Matrix> random_parent_probs(const HierarchyTree& tree, std::size_t n,
                                          Xoshiro256ss& rng) {
    std::map<int, Matrix> probs;
    for (const auto& nd : tree.nodes) {
        if (nd.is_leaf()) continue;
        Matrix t(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.uniform();
            t(i, 0) = u;
            t(i, 1) = 1.0 - u;
        }
        probs.emplace(nd.index, std::move(t));
    }
    return probs;
}

}  // namespace

TEST_CASE("path products multiply parent decisions down the tree", "[schemes]") {
    const HierarchyTree tree = three_class_tree();
    std::map<int, Matrix> probs;
    probs.emplace(0, Matrix::from_rows({{0.7, 0.3}, {0.5, 0.5}}));
    probs.emplace(1, Matrix::from_rows({{0.6, 0.4}, {1.0, 0.0}}));

    Matrix scores = lcpn_plus_scores(tree, probs);
    REQUIRE(scores.rows() == 2);
    REQUIRE(scores.cols() == 3);
    CHECK(scores(0, 0) == Catch::Approx(0.42).margin(1e-12));
    CHECK(scores(0, 1) == Catch::Approx(0.28).margin(1e-12));
    CHECK(scores(0, 2) == Catch::Approx(0.30).margin(1e-12));
    CHECK(scores(1, 0) == Catch::Approx(0.5).margin(1e-12));
    CHECK(scores(1, 1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(scores(1, 2) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("greedy routing and path products can disagree", "[schemes]") {
    const HierarchyTree tree = three_class_tree();
    // Left branch wins at the root (0.55) but splits evenly below, so the
    // full products are (0.275, 0.275, 0.45) and the product argmax is
    // class 2 while the router commits left and ends at class 0.
    std::map<int, Matrix> probs;
    probs.emplace(0, Matrix::from_rows({{0.55, 0.45}}));
    probs.emplace(1, Matrix::from_rows({{0.5, 0.5}}));

    Matrix scores = lcpn_plus_scores(tree, probs);
    CHECK(argmax_lowest(scores.row(0)) == 2);

    auto prob_fn = [&](int node, std::size_t row) {
        const Matrix& t = probs.at(node);
        return std::make_pair(t(row, 0), t(row, 1));
    };
    auto [labels, trace] = lcpn_route(tree, prob_fn, 1);
    CHECK(labels[0] == 0);  // ties descend left
    CHECK(trace[0] == std::vector<int>{0, 1, 3});
}

TEST_CASE("flat-terminal products skip parents with two leaf children", "[schemes]") {
    const HierarchyTree tree = three_class_tree();
    // Only the root is consulted: node 1 has two leaf children, and omitting
    // it from the table altogether proves it is never read.
    std::map<int, Matrix> probs;
    probs.emplace(0, Matrix::from_rows({{0.8, 0.2}}));
    const Matrix flat = one_row({0.5, 0.3, 0.2});

    Matrix scores = lcpn_plus_f_scores(tree, probs, flat);
    CHECK(scores(0, 0) == Catch::Approx(0.40).margin(1e-12));
    CHECK(scores(0, 1) == Catch::Approx(0.24).margin(1e-12));
    CHECK(scores(0, 2) == Catch::Approx(0.20).margin(1e-12));
}

TEST_CASE("aggregated flat probabilities score paths top-down", "[schemes]") {
    const HierarchyTree tree = three_class_tree();
    const Matrix flat = one_row({0.5, 0.3, 0.2});
    Matrix scores = global_scores(tree, flat);
    // Node above {0,1} carries 0.8; the lone leaf keeps its flat mass.
    CHECK(scores(0, 0) == Catch::Approx(0.40).margin(1e-12));
    CHECK(scores(0, 1) == Catch::Approx(0.24).margin(1e-12));
    CHECK(scores(0, 2) == Catch::Approx(0.20).margin(1e-12));

    // One-hot input stays one-hot; uniform input favours the shallow leaf.
    Matrix hot = global_scores(tree, one_row({0.0, 1.0, 0.0}));
    CHECK(hot(0, 0) == 0.0);
    CHECK(hot(0, 1) == 1.0);
    CHECK(hot(0, 2) == 0.0);

    Matrix uni = global_scores(tree, one_row({1.0 / 3, 1.0 / 3, 1.0 / 3}));
    CHECK(argmax_lowest(uni.row(0)) == 2);
    CHECK(uni(0, 2) == Catch::Approx(1.0 / 3).margin(1e-12));

    // Depth-1 leaves always keep exactly their flat probability.
    Xoshiro256ss rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
        const double s = a + b + c;
        Matrix f = one_row({a / s, b / s, c / s});
        Matrix g = global_scores(tree, f);
        CHECK(g(0, 2) == Catch::Approx(f(0, 2)).margin(1e-15));
        CHECK(g(0, 0) <= f(0, 0) + 1e-15);
        CHECK(g(0, 1) <= f(0, 1) + 1e-15);
    }
}

TEST_CASE("path-product rows always sum to one", "[schemes]") {
    Xoshiro256ss rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t c = 2 + rng.bounded(11);
        ClassMeans cm;
        cm.means = Matrix(c, 2);
        for (std::size_t j = 0; j < c; ++j)
            for (std::size_t f = 0; f < 2; ++f) cm.means(j, f) = rng.uniform() * 10.0;
        cm.counts.assign(c, 1);
        const HierarchyTree tree = build_divisive(cm);

        const std::size_t n = 1 + rng.bounded(6);
        const auto probs = random_parent_probs(tree, n, rng);
        Matrix scores = lcpn_plus_scores(tree, probs);
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                CHECK(scores(i, j) >= 0.0);
                sum += scores(i, j);
            }
            CHECK(sum == Catch::Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("trained schemes separate clean blobs", "[schemes]") {
    Blobs b = make_blobs(4, 10, 15);
    const ClassMeans cm = class_conditional_means(b.X, b.y);
    const HierarchyTree tree = build_divisive(cm);

    for (Scheme kind : {Scheme::fc, Scheme::global, Scheme::lcpn, Scheme::lcpn_plus,
                        Scheme::lcpn_plus_f}) {
        SchemeModel model = train_scheme(kind, kind == Scheme::fc ? nullptr : &tree, nb_spec(),
                                         b.X, b.y);
        SchemePrediction pred = predict_scheme(model, b.X);
        REQUIRE(pred.labels.size() == b.X.rows());
        for (std::size_t i = 0; i < pred.labels.size(); ++i) CHECK(pred.labels[i] == b.y[i]);
        if (kind != Scheme::lcpn) {
            REQUIRE(pred.scores.rows() == b.X.rows());
            REQUIRE(pred.scores.cols() == 4);
        }
    }
}

TEST_CASE("training fits one binary classifier per active parent", "[schemes]") {
    Blobs b = make_blobs(6, 6, 8);
    const HierarchyTree tree = six_class_tree();

    SchemeModel plus = train_scheme(Scheme::lcpn_plus, &tree, nb_spec(), b.X, b.y);
    CHECK(plus.parents.size() == 5);  // c - 1 internal nodes
    CHECK(plus.counters->fit_calls == 5);
    for (const auto& [node, active] : plus.active) CHECK(active);

    SchemeModel lcpn = train_scheme(Scheme::lcpn, &tree, nb_spec(), b.X, b.y);
    CHECK(lcpn.parents.size() == 5);
    CHECK(lcpn.counters->fit_calls == 5);

    // Nodes 4 and 5 have two leaf children: deactivated under the flat-
    // terminal scheme, so 3 parents + 1 flat model.
    SchemeModel plus_f = train_scheme(Scheme::lcpn_plus_f, &tree, nb_spec(), b.X, b.y);
    CHECK(plus_f.parents.size() == 3);
    CHECK(plus_f.counters->fit_calls == 4);
    CHECK(plus_f.active.at(0));
    CHECK(plus_f.active.at(1));
    CHECK(plus_f.active.at(3));
    CHECK_FALSE(plus_f.active.at(4));
    CHECK_FALSE(plus_f.active.at(5));
}

TEST_CASE("prediction call counts follow the scheme contracts", "[schemes]") {
    Blobs b = make_blobs(6, 6, 44);
    const HierarchyTree tree = six_class_tree();
    const std::size_t n = b.X.rows();

    SchemeModel plus = train_scheme(Scheme::lcpn_plus, &tree, nb_spec(), b.X, b.y);
    const auto base_plus = *plus.counters;
    predict_scheme(plus, b.X);
    CHECK(plus.counters->predict_calls - base_plus.predict_calls == 5);
    CHECK(plus.counters->instances_scored - base_plus.instances_scored == 5 * n);

    SchemeModel plus_f = train_scheme(Scheme::lcpn_plus_f, &tree, nb_spec(), b.X, b.y);
    const auto base_pf = *plus_f.counters;
    predict_scheme(plus_f, b.X);
    CHECK(plus_f.counters->predict_calls - base_pf.predict_calls == 4);  // 3 parents + flat
    CHECK(plus_f.counters->instances_scored - base_pf.instances_scored == 4 * n);

    // Sequential routing pays one single-row call per internal node visited.
    SchemeModel seq = train_scheme(Scheme::lcpn, &tree, nb_spec(), b.X, b.y);
    const auto base_seq = *seq.counters;
    SchemePrediction routed = predict_scheme(seq, b.X);
    std::uint64_t visits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(routed.trace[i].size() >= 2);
        CHECK(routed.trace[i].front() == 0);
        const auto& leaf = tree.nodes[static_cast<std::size_t>(routed.trace[i].back())];
        CHECK(leaf.is_leaf());
        CHECK(leaf.leaf_class == routed.labels[i]);
        visits += routed.trace[i].size() - 1;
    }
    CHECK(seq.counters->predict_calls - base_seq.predict_calls == visits);
    CHECK(seq.counters->instances_scored - base_seq.instances_scored == visits);
    CHECK(visits >= n);
}

TEST_CASE("with two classes the flat-terminal scheme equals flat", "[schemes]") {
    Blobs b = make_blobs(2, 12, 5);
    ClassMeans cm = class_conditional_means(b.X, b.y);
    const HierarchyTree tree = build_divisive(cm);

    SchemeModel flat = train_scheme(Scheme::fc, nullptr, nb_spec(), b.X, b.y);
    SchemeModel plus_f = train_scheme(Scheme::lcpn_plus_f, &tree, nb_spec(), b.X, b.y);
    CHECK(plus_f.parents.empty());  // the only parent has two leaf children

    Matrix test = make_blobs(2, 5, 91).X;
    SchemePrediction a = predict_scheme(flat, test);
    SchemePrediction bp = predict_scheme(plus_f, test);
    CHECK(a.scores == bp.scores);  // bit-identical
    CHECK(a.labels == bp.labels);

    // The pure two-class product table is the parent table itself.
    std::map<int, Matrix> probs;
    probs.emplace(0, Matrix::from_rows({{0.3, 0.7}, {0.9, 0.1}}));
    Matrix scores = lcpn_plus_scores(tree, probs);
    CHECK(scores == probs.at(0));
}

TEST_CASE("unsatisfiable node training raises a data error", "[schemes]") {
    // Classes 0 and 1 present, class 2 has no instances: the root's right
    // side is empty for any scheme that trains parent classifiers.
    Blobs b = make_blobs(2, 8, 3);
    const HierarchyTree tree = three_class_tree();
    CHECK_THROWS_WITH(train_scheme(Scheme::lcpn_plus, &tree, nb_spec(), b.X, b.y, 3),
                      Catch::Matchers::ContainsSubstring("empty child side"));
    CHECK_THROWS_AS(train_scheme(Scheme::lcpn_plus, &tree, nb_spec(), b.X, b.y, 3), data_error);
}

TEST_CASE("scheme training validates its inputs", "[schemes]") {
    Blobs b = make_blobs(3, 6, 6);
    const HierarchyTree tree = three_class_tree();

    CHECK_THROWS_AS(train_scheme(Scheme::lcpn, nullptr, nb_spec(), b.X, b.y), config_error);

    Blobs four = make_blobs(4, 6, 6);
    CHECK_THROWS_AS(train_scheme(Scheme::lcpn, &tree, nb_spec(), four.X, four.y), data_error);

    SchemeModel model = train_scheme(Scheme::global, &tree, nb_spec(), b.X, b.y);
    CHECK_THROWS_AS(predict_flat(model, b.X), config_error);
    CHECK_THROWS_AS(predict_lcpn(model, b.X), config_error);

    CHECK(scheme_from_string("lcpn_plus_f") == Scheme::lcpn_plus_f);
    CHECK(to_string(Scheme::global) == "global");
    CHECK_THROWS_AS(scheme_from_string("hc"), config_error);
}

TEST_CASE("prediction export lists scores and labels per instance", "[schemes]") {
    SchemePrediction pred;
    pred.scores = Matrix::from_rows({{0.75, 0.25}, {0.4, 0.6}});
    pred.labels = {0, 1};
    const std::string csv = prediction_to_csv(pred, {"cat", "dog"});
    CHECK(csv ==
          "instance,score_cat,score_dog,predicted\n"
          "0,0.75,0.25,cat\n"
          "1,0.4,0.6,dog\n");

    SchemePrediction routed;
    routed.labels = {1, 0, 1};
    const std::string plain = prediction_to_csv(routed, {"cat", "dog"});
    CHECK(plain == "instance,predicted\n0,dog\n1,cat\n2,dog\n");
}
