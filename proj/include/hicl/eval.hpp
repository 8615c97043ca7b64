#pragma once

#include <json.hpp>

#include <chrono>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "hierarchy.hpp"
#include "lda.hpp"
#include "schemes.hpp"

namespace hicl {

/// Unweighted mean of per-class F1 scores. A class with no true positives
/// contributes F1 = 0 (fixed zero-division convention). `c` pins the class
/// set; 0 infers max label + 1 over both vectors.
inline double macro_f1(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                       std::size_t c = 0) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw data_error("macro_f1: empty or mismatched label vectors");
    if (c == 0) {
        int mx = 0;
        for (int v : y_true) mx = std::max(mx, v);
        for (int v : y_pred) mx = std::max(mx, v);
        c = static_cast<std::size_t>(mx) + 1;
    }
    std::vector<std::size_t> tp(c, 0), fp(c, 0), fn(c, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto t = static_cast<std::size_t>(y_true[i]);
        const auto p = static_cast<std::size_t>(y_pred[i]);
        if (t >= c || p >= c) throw data_error("macro_f1: label out of range");
        if (t == p) ++tp[t];
        else {
            ++fp[p];
            ++fn[t];
        }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        const double denom = static_cast<double>(2 * tp[j] + fp[j] + fn[j]);
        if (tp[j] > 0) sum += 2.0 * static_cast<double>(tp[j]) / denom;
    }
    return sum / static_cast<double>(c);
}

/// Ratio of hierarchical to flat macro-F1; > 1 means the hierarchy helped.
inline double learning_efficiency(double f1_hc, double f1_fc) {
    if (f1_fc <= 0.0)
        throw numeric_error("learning_efficiency: undefined, flat baseline F1 is zero");
    return f1_hc / f1_fc;
}

struct CostCounters {
    std::uint64_t n_fits = 0;
    std::uint64_t n_predict_calls = 0;
    std::uint64_t n_rows_scored = 0;
    double wall_seconds = 0.0;
};

struct SchemeResult {
    Scheme scheme = Scheme::fc;
    std::vector<double> fold_f1;
    std::vector<double> fold_seconds;
    double mean_f1 = 0.0;
    bool has_le = false;
    double le = 0.0;
    CostCounters counters;
};

struct TreeRecord {
    int fold = 0;
    std::string newick;
    std::string hash;
};

struct EvalReport {
    std::map<std::string, std::string> config_echo;
    int folds = 0;
    std::vector<std::string> class_names;
    std::vector<SchemeResult> schemes;
    std::vector<TreeRecord> trees;
};

/// Canonical text form of a report value: exactly the token the JSON
/// serializer emits for that double, so files and the printed summary agree
/// byte for byte.
inline std::string fmt_double(double v) { return nlohmann::json(v).dump(); }

/// Cross-validation harness. The data is shuffled once with the run seed,
/// folds are stratified, and each fold trains every requested scheme on the
/// training split and scores the held-out split. When hierarchical schemes
/// are requested the fold's tree is generated from the training split alone:
/// optional LDA reduction, class conditional means, then divisive or
/// agglomerative clustering. Classifiers always consume the raw features —
/// the reduced space exists only to position class means for clustering.
/// Per-scheme wall time includes the hierarchy generation span, mirroring
/// what a standalone run of that scheme would have to spend.
inline EvalReport run_cv(const RunConfig& cfg, const Dataset& ds) {
    using clock = std::chrono::steady_clock;
    const auto seconds_since = [](clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    Dataset data = shuffle(ds, cfg.seed);
    FoldPlan plan = stratified_folds(data, cfg.cv_folds, cfg.seed);
    const std::size_t c = ds.c();

    EvalReport rep;
    rep.config_echo = cfg.echo;
    // Where the report is written is not part of what it records: excluding
    // the output directory keeps reruns into fresh directories byte-identical.
    rep.config_echo.erase("output.dir");
    rep.folds = cfg.cv_folds;
    rep.class_names = ds.class_names;
    for (Scheme s : cfg.schemes) {
        SchemeResult r;
        r.scheme = s;
        rep.schemes.push_back(r);
    }

    for (int fold = 0; fold < cfg.cv_folds; ++fold) {
        try {
            const auto tr = plan.train_indices(fold);
            const auto te = plan.test_indices(fold);
            Dataset train = subset(data, tr);
            Dataset test = subset(data, te);

            HierarchyTree tree;
            double tree_seconds = 0.0;
            if (cfg.any_hierarchical()) {
                const auto t0 = clock::now();
                Matrix mean_space = train.X;
                if (cfg.reduce_enabled) {
                    Projection proj = fit_lda(train.X, train.y);
                    const std::size_t k =
                        select_components(proj.explained_variance_ratio, cfg.variance_threshold);
                    mean_space = transform(proj.truncated(k), train.X);
                }
                const ClassMeans cm = class_conditional_means(mean_space, train.y);
                tree = cfg.hierarchy_method == HierarchyMethod::divisive
                           ? build_divisive(cm, cfg.seed)
                           : build_agglomerative(cm, cfg.linkage);
                tree_seconds = seconds_since(t0);
                rep.trees.push_back(
                    {fold, export_newick(tree, ds.class_names), tree_fingerprint(tree, ds.class_names)});
            }

            for (auto& result : rep.schemes) {
                const Scheme s = result.scheme;
                const auto t0 = clock::now();
                SchemeModel model = train_scheme(s, s == Scheme::fc ? nullptr : &tree,
                                                 cfg.classifier, train.X, train.y, c);
                SchemePrediction pred = predict_scheme(model, test.X);
                const double secs =
                    seconds_since(t0) + (s == Scheme::fc ? 0.0 : tree_seconds);

                result.fold_f1.push_back(macro_f1(test.y, pred.labels, c));
                result.fold_seconds.push_back(secs);
                result.counters.n_fits += model.counters->fit_calls;
                result.counters.n_predict_calls += model.counters->predict_calls;
                result.counters.n_rows_scored += model.counters->instances_scored;
                result.counters.wall_seconds += secs;
            }
        } catch (const config_error& e) {
            throw config_error("fold " + std::to_string(fold) + ": " + e.what());
        } catch (const numeric_error& e) {
            throw numeric_error("fold " + std::to_string(fold) + ": " + e.what());
        } catch (const data_error& e) {
            throw data_error("fold " + std::to_string(fold) + ": " + e.what());
        }
    }

    double f1_fc = 0.0;
    for (auto& result : rep.schemes) {
        result.mean_f1 = std::accumulate(result.fold_f1.begin(), result.fold_f1.end(), 0.0) /
                         static_cast<double>(result.fold_f1.size());
        if (result.scheme == Scheme::fc) f1_fc = result.mean_f1;
    }
    for (auto& result : rep.schemes) {
        if (result.scheme == Scheme::fc) continue;
        result.le = learning_efficiency(result.mean_f1, f1_fc);
        result.has_le = true;
    }
    return rep;
}

/// Report as JSON. Wall-clock spans are deliberately omitted here so the
/// file is byte-identical across reruns of the same config; timing lives in
/// the CSV and the printed summary.
inline nlohmann::json report_to_json(const EvalReport& rep) {
    nlohmann::json j;
    j["config"] = rep.config_echo;
    j["folds"] = rep.folds;
    j["classes"] = rep.class_names;
    auto schemes = nlohmann::json::array();
    for (const auto& r : rep.schemes) {
        nlohmann::json s;
        s["scheme"] = to_string(r.scheme);
        s["fold_f1"] = r.fold_f1;
        s["mean_f1"] = r.mean_f1;
        if (r.has_le) s["learning_efficiency"] = r.le;
        s["counters"] = {{"fits", r.counters.n_fits},
                         {"predict_calls", r.counters.n_predict_calls},
                         {"instances_scored", r.counters.n_rows_scored}};
        schemes.push_back(std::move(s));
    }
    j["schemes"] = std::move(schemes);
    auto trees = nlohmann::json::array();
    for (const auto& t : rep.trees)
        trees.push_back({{"fold", t.fold}, {"newick", t.newick}, {"hash", t.hash}});
    j["trees"] = std::move(trees);
    return j;
}

/// Flat CSV: one row per scheme and fold, then one mean row per scheme with
/// Learning Efficiency, total wall seconds, and the invocation counters.
inline std::string report_to_csv(const EvalReport& rep) {
    std::ostringstream out;
    out << "scheme,fold,macro_f1,learning_efficiency,wall_seconds,fits,predict_calls,"
           "instances_scored\n";
    for (const auto& r : rep.schemes)
        for (std::size_t f = 0; f < r.fold_f1.size(); ++f)
            out << to_string(r.scheme) << ',' << f << ',' << fmt_double(r.fold_f1[f]) << ",,"
                << fmt_double(r.fold_seconds[f]) << ",,,\n";
    for (const auto& r : rep.schemes) {
        out << to_string(r.scheme) << ",mean," << fmt_double(r.mean_f1) << ','
            << (r.has_le ? fmt_double(r.le) : std::string()) << ','
            << fmt_double(r.counters.wall_seconds) << ',' << r.counters.n_fits << ','
            << r.counters.n_predict_calls << ',' << r.counters.n_rows_scored << '\n';
    }
    return out.str();
}

/// Human summary for standard output. Values are printed through the same
/// formatter as the serialized reports, so the table and files agree exactly.
inline std::string report_summary(const EvalReport& rep) {
    std::ostringstream out;
    out << "scheme        mean_f1               LE                    seconds\n";
    for (const auto& r : rep.schemes) {
        std::string name = to_string(r.scheme);
        name.resize(14, ' ');
        std::string f1 = fmt_double(r.mean_f1);
        f1.resize(22, ' ');
        std::string le = r.has_le ? fmt_double(r.le) : "-";
        le.resize(22, ' ');
        out << name << f1 << le << fmt_double(r.counters.wall_seconds) << '\n';
    }
    return out.str();
}

}  // namespace hicl
