#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace hicl {

/// Flat-labeled dataset. Class ids are assigned in first-appearance order of
/// the raw labels, so they are a pure function of the file contents.
struct Dataset {
    Matrix X;                             // n x m feature matrix
    std::vector<int> y;                   // class ids in 0..c-1
    std::vector<std::string> class_names; // c display strings
    bool is_timeseries = false;           // rows are equal-length series

    std::size_t n() const { return X.rows(); }
    std::size_t m() const { return X.cols(); }
    std::size_t c() const { return class_names.size(); }

    void validate() const {
        if (class_names.size() < 2) throw data_error("dataset: fewer than 2 classes");
        if (y.size() != X.rows()) throw data_error("dataset: label/row count mismatch");
        std::vector<char> seen(class_names.size(), 0);
        for (int id : y) {
            if (id < 0 || static_cast<std::size_t>(id) >= class_names.size())
                throw data_error("dataset: label id out of range");
            seen[static_cast<std::size_t>(id)] = 1;
        }
        for (char s : seen)
            if (!s) throw data_error("dataset: class id never occurs");
        for (std::size_t i = 0; i < X.rows(); ++i)
            if (!all_finite(X.row(i))) throw data_error("dataset: non-finite feature value");
    }
};

enum class TableFormat { csv, ucr_tsv };

/// Column selector: either a 0-based index or a header name.
struct LabelColumn {
    int index = -1;          // used when name is empty
    std::string name;        // requires a header row

    static LabelColumn from_string(const std::string& s) {
        LabelColumn lc;
        if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); })) {
            lc.index = std::stoi(s);
        } else {
            lc.name = s;
        }
        return lc;
    }
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& raw, std::size_t line_no) {
    std::string t = trim(raw);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw data_error("non-numeric feature cell '" + t + "' at line " + std::to_string(line_no));
    return v;
}

}  // namespace detail

/// Load a delimited table. For csv the label column is chosen by the caller;
/// for ucr_tsv the label is column 0 and the rest of the row is the series.
inline Dataset load_table(const std::string& path, TableFormat format,
                          const LabelColumn& label = {}, bool has_header = false) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);

    const char sep = format == TableFormat::csv ? ',' : '\t';
    Dataset ds;
    ds.is_timeseries = format == TableFormat::ucr_tsv;

    std::map<std::string, int> id_of;   // raw label -> class id
    std::vector<std::string> header;
    int label_idx = format == TableFormat::ucr_tsv ? 0 : label.index;

    std::string line;
    std::size_t line_no = 0;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_line(line, sep);

        if (format == TableFormat::csv && has_header && header.empty()) {
            for (auto& cell : cells) header.push_back(detail::trim(cell));
            if (!label.name.empty()) {
                auto it = std::find(header.begin(), header.end(), label.name);
                if (it == header.end())
                    throw data_error("label column '" + label.name + "' not in header");
                label_idx = static_cast<int>(it - header.begin());
            }
            continue;
        }
        if (format == TableFormat::csv && !label.name.empty() && !has_header)
            throw data_error("label column by name requires a header row");
        if (label_idx < 0 || static_cast<std::size_t>(label_idx) >= cells.size())
            throw data_error("label column out of range at line " + std::to_string(line_no));
        if (!ds.y.empty() && cells.size() != ds.m() + 1)
            throw data_error("ragged row at line " + std::to_string(line_no));

        row.clear();
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (static_cast<int>(j) == label_idx) continue;
            row.push_back(detail::parse_number(cells[j], line_no));
        }
        std::string raw = detail::trim(cells[static_cast<std::size_t>(label_idx)]);
        auto [it, inserted] = id_of.try_emplace(raw, static_cast<int>(ds.class_names.size()));
        if (inserted) ds.class_names.push_back(raw);
        ds.y.push_back(it->second);
        ds.X.push_row(row);
    }

    if (ds.class_names.size() < 2) throw data_error("fewer than 2 distinct labels in " + path);
    ds.validate();
    return ds;
}

/// Rows permuted by the library RNG; identical across runs and platforms.
inline Dataset shuffle(const Dataset& ds, std::uint64_t seed) {
    Xoshiro256ss rng(seed);
    std::vector<int> perm = random_permutation(ds.n(), rng);
    Dataset out;
    out.class_names = ds.class_names;
    out.is_timeseries = ds.is_timeseries;
    out.X = ds.X.select_rows(perm);
    out.y.reserve(ds.n());
    for (int i : perm) out.y.push_back(ds.y[static_cast<std::size_t>(i)]);
    return out;
}

/// Stratified fold assignment.
struct FoldPlan {
    int k = 0;
    std::vector<int> assignments;   // length n, fold ids in 0..k-1
    std::uint64_t seed = 0;

    std::vector<int> test_indices(int fold) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] == fold) out.push_back(static_cast<int>(i));
        return out;
    }
    std::vector<int> train_indices(int fold) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] != fold) out.push_back(static_cast<int>(i));
        return out;
    }
};

/// Per class, members are taken in row order and dealt round-robin onto folds
/// starting at a seed-dependent offset. Counts per class then differ by at
/// most one across folds, and any class with >= 2 members reaches >= 2 folds,
/// so every training split contains every class.
inline FoldPlan stratified_folds(const Dataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw config_error("stratified_folds: k must be >= 2");
    std::vector<int> counts(ds.c(), 0);
    for (int id : ds.y) ++counts[static_cast<std::size_t>(id)];
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] < 2)
            throw data_error("unsatisfiable stratification: class '" + ds.class_names[j] +
                             "' has fewer than 2 members");

    Xoshiro256ss rng(seed);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(ds.n(), -1);
    for (std::size_t j = 0; j < ds.c(); ++j) {
        int start = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(k)));
        int t = 0;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (ds.y[i] != static_cast<int>(j)) continue;
            plan.assignments[i] = (start + t) % k;
            ++t;
        }
    }
    return plan;
}

inline Dataset subset(const Dataset& ds, std::span<const int> idx) {
    Dataset out;
    out.class_names = ds.class_names;
    out.is_timeseries = ds.is_timeseries;
    out.X = ds.X.select_rows(idx);
    out.y.reserve(idx.size());
    for (int i : idx) out.y.push_back(ds.y[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace hicl
