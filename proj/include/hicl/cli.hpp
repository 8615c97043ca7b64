#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "config.hpp"
#include "eval.hpp"

namespace hicl {

namespace detail {

/// Write via a temp file and an atomic rename so a failure can never leave a
/// partial report behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw data_error("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw data_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Run the benchmark: cross-validate, then write report.json, report.csv and
/// per-fold Newick trees to output.dir and print the summary table. All file
/// contents are assembled before the first byte is written.
inline int cmd_bench(const RunConfig& cfg, std::ostream& out = std::cout) {
    Dataset ds = load_dataset(cfg);
    EvalReport rep = run_cv(cfg, ds);

    const std::string json_text = report_to_json(rep).dump(2) + "\n";
    const std::string csv_text = report_to_csv(rep);
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("report.json", json_text);
    files.emplace_back("report.csv", csv_text);
    for (const auto& t : rep.trees)
        files.emplace_back("fold" + std::to_string(t.fold) + ".nwk", t.newick + "\n");

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files) detail::write_file_atomic(dir / name, content);

    out << report_summary(rep);
    return 0;
}

/// Build one hierarchy from the full dataset (no cross-validation), print
/// the Newick string and a node table, and write tree.nwk / tree.json.
inline int cmd_tree(const RunConfig& cfg, std::ostream& out = std::cout) {
    Dataset ds = load_dataset(cfg);
    Matrix mean_space = ds.X;
    if (cfg.reduce_enabled) {
        Projection proj = fit_lda(ds.X, ds.y);
        const std::size_t k =
            select_components(proj.explained_variance_ratio, cfg.variance_threshold);
        mean_space = transform(proj.truncated(k), ds.X);
    }
    const ClassMeans cm = class_conditional_means(mean_space, ds.y);
    const HierarchyTree tree = cfg.hierarchy_method == HierarchyMethod::divisive
                                   ? build_divisive(cm, cfg.seed)
                                   : build_agglomerative(cm, cfg.linkage);
    const std::string newick = export_newick(tree, ds.class_names);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    detail::write_file_atomic(dir / "tree.nwk", newick + "\n");
    detail::write_file_atomic(dir / "tree.json", tree_to_json(tree).dump(2) + "\n");

    out << newick << "\n";
    out << "index parent pos children        class\n";
    for (const auto& nd : tree.nodes) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-5d %-6d %-3d (%4d,%4d)     %s\n", nd.index,
                      nd.parent, nd.child_pos, nd.children[0], nd.children[1],
                      nd.is_leaf() ? ds.class_names[static_cast<std::size_t>(nd.leaf_class)].c_str()
                                   : "-");
        out << line;
    }
    return 0;
}

/// Parse `hicl <bench|tree> [--config FILE] [--key value ...]`, apply flag
/// overrides to the file keys, validate, and dispatch. Exit codes: 0 ok,
/// 2 configuration error, 3 data error, 4 numeric failure.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    try {
        if (argc < 2)
            throw config_error("usage: hicl <bench|tree> [--config FILE] [--key value ...]");
        const std::string cmd = argv[1];
        if (cmd != "bench" && cmd != "tree")
            throw config_error("unknown command: " + cmd + " (expected bench or tree)");

        std::string config_path;
        std::vector<std::pair<std::string, std::string>> flags;
        for (int i = 2; i < argc;) {
            std::string arg = argv[i];
            if (arg.rfind("--", 0) != 0)
                throw config_error("expected --key, got '" + arg + "'");
            arg = arg.substr(2);
            std::string value;
            const auto eq = arg.find('=');
            if (eq != std::string::npos) {
                value = arg.substr(eq + 1);
                arg = arg.substr(0, eq);
                ++i;
            } else {
                if (i + 1 >= argc) throw config_error("flag --" + arg + " needs a value");
                value = argv[i + 1];
                i += 2;
            }
            if (arg == "config") config_path = value;
            else flags.emplace_back(arg, value);
        }

        std::map<std::string, std::string> kv;
        if (!config_path.empty()) kv = read_config_file(config_path);
        for (const auto& [key, value] : flags) kv[key] = value;
        const RunConfig cfg = make_config(kv);

        return cmd == "bench" ? cmd_bench(cfg, out) : cmd_tree(cfg, out);
    } catch (const config_error& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        err << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const data_error& e) {
        err << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace hicl
