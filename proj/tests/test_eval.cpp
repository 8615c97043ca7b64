#include <catch2/catch_amalgamated.hpp>

#include <hicl/eval.hpp>
#include <hicl/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

using namespace hicl;

namespace {

Dataset blob_dataset(std::size_t c, std::size_t per_class, std::uint64_t seed) {
    Xoshiro256ss rng(seed);
    Dataset ds;
    ds.X = Matrix(c * per_class, 2);
    for (std::size_t j = 0; j < c; ++j) {
        ds.class_names.push_back("c" + std::to_string(j));
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t row = j * per_class + i;
            ds.y.push_back(static_cast<int>(j));
            ds.X(row, 0) = 10.0 * static_cast<double>(j) + rng.uniform() * 2.0 - 1.0;
            ds.X(row, 1) = rng.uniform() * 2.0 - 1.0;
        }
    }
    ds.validate();
    return ds;
}

RunConfig blob_config(std::vector<Scheme> schemes, int folds, std::uint64_t seed) {
    RunConfig cfg;
    cfg.dataset_path = "(in-memory)";
    cfg.seed = seed;
    cfg.cv_folds = folds;
    cfg.schemes = std::move(schemes);
    cfg.classifier.kind = ClassifierKind::gaussian_nb;
    cfg.classifier.seed = seed;
    return cfg;
}

/// Independent macro-F1 oracle via an explicit confusion matrix and the
/// precision/recall form of F1.
double f1_from_confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                         std::size_t c) {
    std::vector<std::vector<double>> M(c, std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i < y_true.size(); ++i)
        M[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])] += 1.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        double row = 0.0, col = 0.0;
        for (std::size_t t = 0; t < c; ++t) {
            row += M[j][t];
            col += M[t][j];
        }
        const double tp = M[j][j];
        if (tp <= 0.0) continue;
        const double precision = tp / col;
        const double recall = tp / row;
        sum += 2.0 * precision * recall / (precision + recall);
    }
    return sum / static_cast<double>(c);
}

const std::vector<Scheme> kAllSchemes = {Scheme::fc, Scheme::global, Scheme::lcpn,
                                         Scheme::lcpn_plus, Scheme::lcpn_plus_f};

const SchemeResult& result_of(const EvalReport& rep, Scheme s) {
    for (const auto& r : rep.schemes)
        if (r.scheme == s) return r;
    throw std::runtime_error("scheme missing from report");
}

}  // namespace

TEST_CASE("macro f1 averages the per-class scores", "[eval]") {
    // Class 0: tp=1 fp=1 fn=1 (F1 0.5); class 1: tp=2 fn=1 (F1 0.8);
    // class 2: tp=2 fp=1 (F1 0.8). Mean 0.7.
    const std::vector<int> y_true = {0, 0, 1, 1, 1, 2, 2};
    const std::vector<int> y_pred = {0, 2, 0, 1, 1, 2, 2};
    CHECK(macro_f1(y_true, y_pred) == Catch::Approx(0.7).margin(1e-15));

    CHECK(macro_f1({0, 1, 2}, {0, 1, 2}) == 1.0);
    CHECK(macro_f1({0, 0, 1, 1}, {1, 1, 0, 0}) == 0.0);

    // Pinning a larger class set dilutes the mean by the absent classes.
    CHECK(macro_f1(y_true, y_pred, 4) == Catch::Approx(0.7 * 3.0 / 4.0).margin(1e-15));

    CHECK_THROWS_AS(macro_f1({}, {}), data_error);
    CHECK_THROWS_AS(macro_f1({0, 1}, {0}), data_error);
    CHECK_THROWS_AS(macro_f1({0, 5}, {0, 1}, 2), data_error);
}

TEST_CASE("macro f1 agrees with a confusion-matrix oracle", "[eval]") {
    Xoshiro256ss rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t c = 2 + rng.bounded(9);  // 2..10 classes
        const std::size_t n = 1 + rng.bounded(50);
        std::vector<int> y_true(n), y_pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            y_true[i] = static_cast<int>(rng.bounded(c));
            y_pred[i] = static_cast<int>(rng.bounded(c));
        }
        const double got = macro_f1(y_true, y_pred, c);
        const double want = f1_from_confusion(y_true, y_pred, c);
        REQUIRE(got == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("learning efficiency is the plain ratio", "[eval]") {
    CHECK(learning_efficiency(0.9, 0.8) == Catch::Approx(1.125).margin(1e-15));
    CHECK(learning_efficiency(0.0, 0.5) == 0.0);
    CHECK_THROWS_AS(learning_efficiency(0.5, 0.0), numeric_error);
}

TEST_CASE("formatted doubles round-trip through the serializer", "[eval]") {
    Xoshiro256ss rng(8);
    std::vector<double> values = {0.0, 1.0, 0.5, 1.0 / 3.0, 0.7549019607843137, 1e-9};
    for (int i = 0; i < 50; ++i) values.push_back(rng.uniform());
    for (double v : values) {
        const std::string token = fmt_double(v);
        CHECK(nlohmann::json::parse(token).get<double>() == v);
    }
    CHECK(fmt_double(0.5) == "0.5");
    CHECK(fmt_double(1.0) == "1.0");
}

TEST_CASE("cross validation separates clean blobs under every scheme", "[eval]") {
    const Dataset ds = blob_dataset(4, 12, 51);
    const RunConfig cfg = blob_config(kAllSchemes, 4, 0);
    const EvalReport rep = run_cv(cfg, ds);

    REQUIRE(rep.folds == 4);
    REQUIRE(rep.schemes.size() == 5);
    REQUIRE(rep.trees.size() == 4);  // one per fold
    CHECK(rep.class_names == ds.class_names);

    const double fc_mean = result_of(rep, Scheme::fc).mean_f1;
    for (const auto& r : rep.schemes) {
        REQUIRE(r.fold_f1.size() == 4);
        REQUIRE(r.fold_seconds.size() == 4);
        CHECK(r.mean_f1 == Catch::Approx(1.0).margin(1e-12));  // blobs are separable
        CHECK(r.counters.wall_seconds >= 0.0);
        if (r.scheme == Scheme::fc) {
            CHECK_FALSE(r.has_le);
        } else {
            REQUIRE(r.has_le);
            CHECK(r.le == Catch::Approx(r.mean_f1 / fc_mean).margin(1e-12));
        }
    }
}

TEST_CASE("cross validation cost counters reflect each scheme's contract", "[eval]") {
    const Dataset ds = blob_dataset(4, 12, 51);
    const RunConfig cfg = blob_config(kAllSchemes, 4, 0);
    const EvalReport rep = run_cv(cfg, ds);
    const std::size_t n = ds.n();  // every row is scored exactly once overall

    const auto& fc = result_of(rep, Scheme::fc).counters;
    CHECK(fc.n_fits == 4);
    CHECK(fc.n_predict_calls == 4);
    CHECK(fc.n_rows_scored == n);

    // 4 classes -> 3 parent classifiers per fold, one batched call each.
    const auto& plus = result_of(rep, Scheme::lcpn_plus).counters;
    CHECK(plus.n_fits == 3 * 4);
    CHECK(plus.n_predict_calls == 3 * 4);
    CHECK(plus.n_rows_scored == 3 * n);

    // Active parents + one flat call; never more than lcpn_plus + flat.
    const auto& plus_f = result_of(rep, Scheme::lcpn_plus_f).counters;
    CHECK(plus_f.n_predict_calls >= 2 * 4);
    CHECK(plus_f.n_predict_calls <= 4 * 4);
    CHECK(plus_f.n_fits == plus_f.n_predict_calls);  // one batched call per model

    // Sequential routing: at least one single-row call per test instance.
    const auto& seq = result_of(rep, Scheme::lcpn).counters;
    CHECK(seq.n_predict_calls >= n);
    CHECK(seq.n_rows_scored == seq.n_predict_calls);

    const auto& global = result_of(rep, Scheme::global).counters;
    CHECK(global.n_fits == 4);
    CHECK(global.n_predict_calls == 4);
}

TEST_CASE("flat-only runs build no trees", "[eval]") {
    const Dataset ds = blob_dataset(3, 8, 2);
    const RunConfig cfg = blob_config({Scheme::fc}, 3, 1);
    const EvalReport rep = run_cv(cfg, ds);
    CHECK(rep.trees.empty());
    CHECK(rep.schemes.size() == 1);
    CHECK_FALSE(rep.schemes[0].has_le);
}

TEST_CASE("fold trees are a pure function of the training split", "[eval]") {
    Dataset ds = blob_dataset(4, 9, 33);
    RunConfig cfg = blob_config({Scheme::fc, Scheme::lcpn_plus}, 3, 7);
    cfg.reduce_enabled = false;
    const EvalReport before = run_cv(cfg, ds);

    // Recover which original row lands in fold 0's test split, then perturb
    // exactly that row. Fold 0's tree must not move; its row only trains the
    // other folds.
    Xoshiro256ss rng(cfg.seed);
    const std::vector<int> perm = random_permutation(ds.n(), rng);
    const Dataset shuffled = shuffle(ds, cfg.seed);
    const FoldPlan plan = stratified_folds(shuffled, cfg.cv_folds, cfg.seed);
    const int shuffled_row = plan.test_indices(0).front();
    const int original_row = perm[static_cast<std::size_t>(shuffled_row)];

    Dataset mutated = ds;
    mutated.X(static_cast<std::size_t>(original_row), 0) += 1000.0;
    const EvalReport after = run_cv(cfg, mutated);

    REQUIRE(before.trees.size() == 3);
    REQUIRE(after.trees.size() == 3);
    CHECK(after.trees[0].fold == 0);
    CHECK(after.trees[0].newick == before.trees[0].newick);
    CHECK(after.trees[0].hash == before.trees[0].hash);
}

TEST_CASE("per-fold trees match an independent replay of the pipeline", "[eval]") {
    const Dataset ds = blob_dataset(5, 10, 4);
    RunConfig cfg = blob_config({Scheme::fc, Scheme::global}, 4, 11);
    cfg.hierarchy_method = HierarchyMethod::agglomerative;
    cfg.linkage = Linkage::ward;
    const EvalReport rep = run_cv(cfg, ds);

    const Dataset shuffled = shuffle(ds, cfg.seed);
    const FoldPlan plan = stratified_folds(shuffled, cfg.cv_folds, cfg.seed);
    for (int fold = 0; fold < cfg.cv_folds; ++fold) {
        const Dataset train = subset(shuffled, plan.train_indices(fold));
        Projection proj = fit_lda(train.X, train.y);
        const std::size_t k =
            select_components(proj.explained_variance_ratio, cfg.variance_threshold);
        const Matrix reduced = transform(proj.truncated(k), train.X);
        const HierarchyTree tree =
            build_agglomerative(class_conditional_means(reduced, train.y), cfg.linkage);
        CHECK(rep.trees[static_cast<std::size_t>(fold)].newick ==
              export_newick(tree, ds.class_names));
    }
}

TEST_CASE("reports serialize deterministically and stay in sync", "[eval]") {
    const Dataset ds = blob_dataset(4, 10, 19);
    const RunConfig cfg = blob_config(kAllSchemes, 3, 5);

    const EvalReport a = run_cv(cfg, ds);
    const EvalReport b = run_cv(cfg, ds);
    // Byte-identical JSON across reruns: wall time never enters this file.
    CHECK(report_to_json(a).dump(2) == report_to_json(b).dump(2));

    const nlohmann::json j = report_to_json(a);
    const std::string csv = report_to_csv(a);
    const std::string summary = report_summary(a);
    for (const auto& r : a.schemes) {
        const std::string token = fmt_double(r.mean_f1);
        CHECK(csv.find(to_string(r.scheme) + ",mean," + token) != std::string::npos);
        CHECK(summary.find(token) != std::string::npos);
        if (r.has_le) {
            CHECK(csv.find(fmt_double(r.le)) != std::string::npos);
            CHECK(summary.find(fmt_double(r.le)) != std::string::npos);
        }
    }
    // CSV shape: header + folds*schemes detail rows + one mean row per scheme.
    const std::size_t lines = static_cast<std::size_t>(
        std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == 1 + a.schemes.size() * 3 + a.schemes.size());

    // The JSON mirrors the exact doubles the formatter prints.
    for (std::size_t i = 0; i < a.schemes.size(); ++i)
        CHECK(j.at("schemes").at(i).at("mean_f1").dump() == fmt_double(a.schemes[i].mean_f1));
}

TEST_CASE("fold context is attached to errors raised inside folds", "[eval]") {
    Dataset ds;
    ds.X = Matrix(8, 2, 1.0);  // all rows identical: zero variance everywhere
    ds.class_names = {"a", "b"};
    for (std::size_t i = 0; i < 8; ++i) ds.y.push_back(static_cast<int>(i % 2));

    RunConfig cfg = blob_config({Scheme::fc}, 2, 0);
    cfg.classifier.kind = ClassifierKind::lda_classifier;
    CHECK_THROWS_WITH(run_cv(cfg, ds), Catch::Matchers::ContainsSubstring("fold 0:"));
    CHECK_THROWS_AS(run_cv(cfg, ds), numeric_error);
}

TEST_CASE("glass dataset cross-validates end to end", "[eval]") {
    const Dataset ds = load_table(std::string(HICL_TEST_DATA_DIR) + "/glass.csv",
                                  TableFormat::csv, LabelColumn::from_string("type"), true);
    RunConfig cfg = blob_config({Scheme::fc, Scheme::lcpn_plus, Scheme::lcpn_plus_f}, 5, 0);
    const EvalReport rep = run_cv(cfg, ds);

    REQUIRE(rep.trees.size() == 5);
    const double fc_mean = result_of(rep, Scheme::fc).mean_f1;
    CHECK(fc_mean > 0.2);
    CHECK(fc_mean < 0.95);
    for (const auto& r : rep.schemes) {
        for (double f1 : r.fold_f1) {
            CHECK(f1 >= 0.0);
            CHECK(f1 <= 1.0);
        }
        if (r.has_le)
            CHECK(r.le == Catch::Approx(r.mean_f1 / fc_mean).margin(1e-12));
    }

    const EvalReport again = run_cv(cfg, ds);
    CHECK(report_to_json(rep).dump() == report_to_json(again).dump());
}
