#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "classifiers.hpp"
#include "dataset.hpp"
#include "hierarchy.hpp"
#include "schemes.hpp"

namespace hicl {

enum class HierarchyMethod { divisive, agglomerative };

inline HierarchyMethod hierarchy_method_from_string(const std::string& s) {
    if (s == "divisive") return HierarchyMethod::divisive;
    if (s == "agglomerative") return HierarchyMethod::agglomerative;
    throw config_error("hierarchy.method must be divisive or agglomerative, got '" + s + "'");
}

inline std::string to_string(HierarchyMethod m) {
    return m == HierarchyMethod::divisive ? "divisive" : "agglomerative";
}

/// Fully validated run configuration. `echo` preserves the canonical
/// key = value view (defaults applied, overrides resolved) for the report.
struct RunConfig {
    std::string dataset_path;
    TableFormat dataset_format = TableFormat::csv;
    std::string label_column_raw;
    bool has_header = true;
    std::uint64_t seed = 0;
    int cv_folds = 5;
    bool reduce_enabled = true;
    double variance_threshold = 0.95;
    HierarchyMethod hierarchy_method = HierarchyMethod::divisive;
    Linkage linkage = Linkage::single;
    std::vector<Scheme> schemes;  // canonical order, fc always first
    ClassifierSpec classifier;
    std::string output_dir = "out";
    std::map<std::string, std::string> echo;

    LabelColumn label_column() const { return LabelColumn::from_string(label_column_raw); }
    bool any_hierarchical() const {
        return std::any_of(schemes.begin(), schemes.end(),
                           [](Scheme s) { return s != Scheme::fc; });
    }
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error(key + " must be true or false, got '" + v + "'");
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        // stoull would silently wrap negative input, so reject signs up front.
        if (v.empty() || !std::isdigit(static_cast<unsigned char>(v[0])))
            throw std::invalid_argument(v);
        std::size_t pos = 0;
        auto out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw config_error(key + " must be a non-negative integer, got '" + v + "'");
    }
}

inline int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw config_error(key + " must be an integer, got '" + v + "'");
    }
}

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw config_error(key + " must be a number, got '" + v + "'");
    }
}

}  // namespace detail

/// Parse a flat `key = value` config file. Lines starting with `#` and blank
/// lines are skipped; later assignments override earlier ones.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw config_error("config line " + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

/// Build and validate a RunConfig from raw key/value pairs (file keys with
/// flag overrides already applied). Unknown keys are errors, not warnings.
inline RunConfig make_config(const std::map<std::string, std::string>& kv) {
    static const std::set<std::string> known = {
        "dataset.path", "dataset.format", "dataset.label_column", "dataset.has_header",
        "seed", "cv.folds",
        "reduce.enabled", "reduce.variance_threshold", "reduce.kind",
        "hierarchy.method", "hierarchy.linkage", "hierarchy.clusterer",
        "schemes", "classifier.kind", "output.dir",
    };
    for (const auto& [key, value] : kv) {
        if (known.count(key) || key.rfind("classifier.params.", 0) == 0) continue;
        throw config_error("unknown config key: " + key);
    }

    auto get = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };

    RunConfig cfg;
    cfg.dataset_path = get("dataset.path", "");
    if (cfg.dataset_path.empty()) throw config_error("dataset.path is required");

    const std::string fmt = get("dataset.format", "csv");
    if (fmt == "csv") cfg.dataset_format = TableFormat::csv;
    else if (fmt == "ucr_tsv") cfg.dataset_format = TableFormat::ucr_tsv;
    else throw config_error("dataset.format must be csv or ucr_tsv, got '" + fmt + "'");

    cfg.has_header = detail::parse_bool("dataset.has_header", get("dataset.has_header", "true"));
    cfg.label_column_raw = get("dataset.label_column", "");
    if (cfg.dataset_format == TableFormat::csv && cfg.label_column_raw.empty())
        throw config_error("dataset.label_column is required for csv datasets");

    cfg.seed = detail::parse_u64("seed", get("seed", "0"));
    cfg.cv_folds = detail::parse_int("cv.folds", get("cv.folds", "5"));
    if (cfg.cv_folds < 2) throw config_error("cv.folds must be >= 2");

    cfg.reduce_enabled = detail::parse_bool("reduce.enabled", get("reduce.enabled", "true"));
    cfg.variance_threshold =
        detail::parse_real("reduce.variance_threshold", get("reduce.variance_threshold", "0.95"));
    if (cfg.variance_threshold <= 0.0 || cfg.variance_threshold > 1.0)
        throw config_error("reduce.variance_threshold must be in (0, 1]");
    const std::string reduce_kind = get("reduce.kind", "lda");
    if (reduce_kind != "lda")
        throw config_error("reduce.kind: only lda is implemented, got '" + reduce_kind + "'");

    cfg.hierarchy_method = hierarchy_method_from_string(get("hierarchy.method", "divisive"));
    cfg.linkage = linkage_from_string(get("hierarchy.linkage", "single"));
    const std::string clusterer = get("hierarchy.clusterer", "kmedoids");
    if (clusterer != "kmedoids")
        throw config_error("hierarchy.clusterer: only kmedoids is implemented, got '" + clusterer + "'");

    // Scheme list. fc is always included: it is the Learning Efficiency
    // denominator for every hierarchical scheme in the same run.
    const std::string schemes_raw = get("schemes", "all");
    std::set<Scheme> wanted;
    if (schemes_raw == "all") {
        wanted = {Scheme::fc, Scheme::global, Scheme::lcpn, Scheme::lcpn_plus, Scheme::lcpn_plus_f};
    } else {
        std::stringstream ss(schemes_raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (!item.empty()) wanted.insert(scheme_from_string(item));
        }
        if (wanted.empty()) throw config_error("schemes: empty list");
        wanted.insert(Scheme::fc);
    }
    for (Scheme s : {Scheme::fc, Scheme::global, Scheme::lcpn, Scheme::lcpn_plus, Scheme::lcpn_plus_f})
        if (wanted.count(s)) cfg.schemes.push_back(s);

    const std::string clf_kind = get("classifier.kind", "");
    if (clf_kind.empty()) throw config_error("classifier.kind is required");
    cfg.classifier.kind = classifier_kind_from_string(clf_kind);
    for (const auto& [key, value] : kv) {
        if (key.rfind("classifier.params.", 0) != 0) continue;
        cfg.classifier.params[key.substr(sizeof("classifier.params.") - 1)] = value;
    }
    cfg.classifier.seed = cfg.seed;
    cfg.classifier.validate();

    cfg.output_dir = get("output.dir", "out");

    // Canonical echo: every effective key with defaults applied.
    cfg.echo["dataset.path"] = cfg.dataset_path;
    cfg.echo["dataset.format"] = fmt;
    if (!cfg.label_column_raw.empty()) cfg.echo["dataset.label_column"] = cfg.label_column_raw;
    cfg.echo["dataset.has_header"] = cfg.has_header ? "true" : "false";
    cfg.echo["seed"] = std::to_string(cfg.seed);
    cfg.echo["cv.folds"] = std::to_string(cfg.cv_folds);
    cfg.echo["reduce.enabled"] = cfg.reduce_enabled ? "true" : "false";
    cfg.echo["reduce.variance_threshold"] = get("reduce.variance_threshold", "0.95");
    cfg.echo["reduce.kind"] = reduce_kind;
    cfg.echo["hierarchy.method"] = to_string(cfg.hierarchy_method);
    cfg.echo["hierarchy.linkage"] = to_string(cfg.linkage);
    cfg.echo["hierarchy.clusterer"] = clusterer;
    std::string scheme_list;
    for (Scheme s : cfg.schemes) {
        if (!scheme_list.empty()) scheme_list += ',';
        scheme_list += to_string(s);
    }
    cfg.echo["schemes"] = scheme_list;
    cfg.echo["classifier.kind"] = clf_kind;
    for (const auto& [key, value] : cfg.classifier.params)
        cfg.echo["classifier.params." + key] = value;
    cfg.echo["output.dir"] = cfg.output_dir;
    return cfg;
}

/// Load the dataset named by a config.
inline Dataset load_dataset(const RunConfig& cfg) {
    return load_table(cfg.dataset_path, cfg.dataset_format, cfg.label_column(),
                      cfg.dataset_format == TableFormat::csv && cfg.has_header);
}

}  // namespace hicl
