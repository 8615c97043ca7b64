#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "core.hpp"
#include "kmedoids.hpp"

namespace hicl {

/// Per-class arithmetic means of the (possibly reduced) training features.
struct ClassMeans {
    Matrix means;                    // c x d, row j is the class-j mean
    std::vector<std::size_t> counts; // per-class instance counts

    std::size_t c() const { return means.rows(); }
    std::size_t dim() const { return means.cols(); }
};

inline ClassMeans class_conditional_means(const Matrix& X, const std::vector<int>& y) {
    if (X.rows() == 0) throw data_error("class_conditional_means: empty input");
    int cmax = 0;
    for (int id : y) cmax = std::max(cmax, id);
    const std::size_t c = static_cast<std::size_t>(cmax) + 1;
    ClassMeans cm;
    cm.means = Matrix(c, X.cols());
    cm.counts.assign(c, 0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const std::size_t j = static_cast<std::size_t>(y[i]);
        ++cm.counts[j];
        for (std::size_t f = 0; f < X.cols(); ++f) cm.means(j, f) += X(i, f);
    }
    for (std::size_t j = 0; j < c; ++j) {
        if (cm.counts[j] == 0)
            throw data_error("class_conditional_means: class " + std::to_string(j) + " absent");
        for (std::size_t f = 0; f < X.cols(); ++f)
            cm.means(j, f) /= static_cast<double>(cm.counts[j]);
    }
    return cm;
}

/// Binary class hierarchy over 2c-1 nodes. Node 0 is the root; leaves carry
/// distinct class ids. Builders number nodes breadth-first; hand-built trees
/// only need parent indices smaller than child indices.
struct HierarchyTree {
    struct Node {
        int index = -1;
        int parent = -1;      // -1 for the root
        int child_pos = -1;   // 0 = left, 1 = right; -1 for the root
        int children[2] = {-1, -1};
        int leaf_class = -1;  // -1 for internal nodes
        bool is_leaf() const { return children[0] < 0; }
    };
    std::vector<Node> nodes;

    std::size_t node_count() const { return nodes.size(); }
    std::size_t n_classes() const { return (nodes.size() + 1) / 2; }

    int leaf_of(int class_id) const {
        for (const auto& nd : nodes)
            if (nd.leaf_class == class_id) return nd.index;
        throw data_error("hierarchy: unknown class id " + std::to_string(class_id));
    }

    void validate() const {
        if (nodes.empty() || nodes.size() % 2 == 0)
            throw data_error("hierarchy: node count must be odd (2c-1)");
        const std::size_t c = n_classes();
        std::vector<char> leaf_seen(c, 0);
        std::size_t leaves = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const Node& nd = nodes[i];
            if (nd.index != static_cast<int>(i)) throw data_error("hierarchy: index mismatch");
            if (i == 0) {
                if (nd.parent != -1 || nd.child_pos != -1)
                    throw data_error("hierarchy: root must have no parent");
            } else {
                if (nd.parent < 0 || nd.parent >= nd.index)
                    throw data_error("hierarchy: parent index must precede child");
                if (nd.child_pos != 0 && nd.child_pos != 1)
                    throw data_error("hierarchy: bad child position");
                if (nodes[static_cast<std::size_t>(nd.parent)].children[nd.child_pos] != nd.index)
                    throw data_error("hierarchy: parent/child links inconsistent");
            }
            if (nd.is_leaf()) {
                if (nd.children[1] >= 0 || nd.leaf_class < 0 ||
                    static_cast<std::size_t>(nd.leaf_class) >= c)
                    throw data_error("hierarchy: bad leaf");
                if (leaf_seen[static_cast<std::size_t>(nd.leaf_class)])
                    throw data_error("hierarchy: duplicate leaf class");
                leaf_seen[static_cast<std::size_t>(nd.leaf_class)] = 1;
                ++leaves;
            } else {
                if (nd.children[1] < 0 || nd.leaf_class >= 0)
                    throw data_error("hierarchy: internal node needs two children");
            }
        }
        if (leaves != c) throw data_error("hierarchy: leaf count mismatch");
    }
};

/// Path decomposition for one class: node index (p), parent (q), own child
/// position (r) and the parent's own child position (s), read from the leaf
/// upward. The root is not a labeled element, so s stops one step early.
struct NodePath {
    int leaf_class = -1;
    std::vector<int> p, q, r, s;

    std::size_t length() const { return p.size(); }
};

inline NodePath path_of(const HierarchyTree& tree, int class_id) {
    NodePath path;
    path.leaf_class = class_id;
    int node = tree.leaf_of(class_id);
    while (node != 0) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
        path.p.push_back(nd.index);
        path.q.push_back(nd.parent);
        path.r.push_back(nd.child_pos);
        if (nd.parent != 0)
            path.s.push_back(tree.nodes[static_cast<std::size_t>(nd.parent)].child_pos);
        node = nd.parent;
    }
    return path;
}

/// Top-down splitting: each non-singleton class set is split in two with
/// 2-medoid PAM on its class means. Children are created left-first from a
/// FIFO queue, so node indices come out in level order; the cluster holding
/// the lowest class id becomes the left child.
inline HierarchyTree build_divisive(const ClassMeans& cm, std::uint64_t seed = 0) {
    const std::size_t c = cm.c();
    if (c < 2) throw data_error("build_divisive: need at least 2 classes");

    HierarchyTree tree;
    auto new_node = [&](int parent, int child_pos) {
        HierarchyTree::Node nd;
        nd.index = static_cast<int>(tree.nodes.size());
        nd.parent = parent;
        nd.child_pos = child_pos;
        if (parent >= 0) tree.nodes[static_cast<std::size_t>(parent)].children[child_pos] = nd.index;
        tree.nodes.push_back(nd);
        return nd.index;
    };

    std::vector<int> all(c);
    for (std::size_t j = 0; j < c; ++j) all[j] = static_cast<int>(j);
    int root = new_node(-1, -1);
    std::deque<std::pair<int, std::vector<int>>> queue;
    queue.emplace_back(root, std::move(all));

    while (!queue.empty()) {
        auto [node, members] = std::move(queue.front());
        queue.pop_front();
        if (members.size() == 1) {
            tree.nodes[static_cast<std::size_t>(node)].leaf_class = members[0];
            continue;
        }
        Matrix pts(0, cm.dim());
        for (int id : members) pts.push_row(cm.means.row(static_cast<std::size_t>(id)));
        PamResult pam = pam_kmedoids(pts, 2, seed);
        std::vector<int> groups[2];
        for (std::size_t i = 0; i < members.size(); ++i)
            groups[pam.assignment[i]].push_back(members[i]);
        // Lowest class id in the set sits in exactly one group; that group
        // goes left. Members are already ascending, so compare fronts.
        int left = groups[0].front() < groups[1].front() ? 0 : 1;
        int ln = new_node(node, 0);
        int rn = new_node(node, 1);
        queue.emplace_back(ln, std::move(groups[left]));
        queue.emplace_back(rn, std::move(groups[1 - left]));
    }
    tree.validate();
    return tree;
}

enum class Linkage { single, complete, average, ward };

inline Linkage linkage_from_string(const std::string& s) {
    if (s == "single") return Linkage::single;
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    if (s == "ward") return Linkage::ward;
    throw config_error("unknown linkage: " + s);
}

inline std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
        case Linkage::ward: return "ward";
    }
    return "?";
}

/// One agglomeration step. `left`/`right` are cluster creation ids: 0..c-1
/// are the singletons, merge t creates cluster c+t. The cluster containing
/// the lower class id is recorded on the left.
struct Merge {
    int left = -1;
    int right = -1;
    double height = 0.0;
};

/// Sequential agglomeration trace using Lance-Williams distance updates.
/// Pair selection scans active clusters in ascending creation id and keeps
/// the first pair at the minimum distance, so merges are deterministic.
inline std::vector<Merge> agglomerative_merges(const ClassMeans& cm, Linkage linkage) {
    const std::size_t c = cm.c();
    if (c < 2) throw data_error("agglomerative_merges: need at least 2 classes");

    struct Cluster {
        int id;
        std::size_t size;
        int min_class;
        bool active;
    };
    std::vector<Cluster> clusters;
    for (std::size_t j = 0; j < c; ++j)
        clusters.push_back({static_cast<int>(j), 1, static_cast<int>(j), true});

    const std::size_t total = 2 * c - 1;
    std::vector<double> dist(total * total, 0.0);
    auto dref = [&](int a, int b) -> double& { return dist[static_cast<std::size_t>(a) * total + b]; };
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i + 1; j < c; ++j) {
            double acc = 0.0;
            for (std::size_t f = 0; f < cm.dim(); ++f) {
                double diff = cm.means(i, f) - cm.means(j, f);
                acc += diff * diff;
            }
            double e = std::sqrt(acc);
            dref(static_cast<int>(i), static_cast<int>(j)) = e;
            dref(static_cast<int>(j), static_cast<int>(i)) = e;
        }

    std::vector<Merge> merges;
    for (std::size_t step = 0; step + 1 < c; ++step) {
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            if (!clusters[i].active) continue;
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                if (!clusters[j].active) continue;
                double v = dref(clusters[i].id, clusters[j].id);
                if (v < best) {
                    best = v;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        }
        Cluster& ci = clusters[static_cast<std::size_t>(bi)];
        Cluster& cj = clusters[static_cast<std::size_t>(bj)];
        const double dij = best;
        const double ni = static_cast<double>(ci.size), nj = static_cast<double>(cj.size);
        Cluster merged{static_cast<int>(clusters.size()), ci.size + cj.size,
                       std::min(ci.min_class, cj.min_class), true};

        for (const Cluster& ck : clusters) {
            if (!ck.active || ck.id == ci.id || ck.id == cj.id) continue;
            const double dik = dref(ci.id, ck.id), djk = dref(cj.id, ck.id);
            double v = 0.0;
            switch (linkage) {
                case Linkage::single: v = std::min(dik, djk); break;
                case Linkage::complete: v = std::max(dik, djk); break;
                case Linkage::average: v = (ni * dik + nj * djk) / (ni + nj); break;
                case Linkage::ward: {
                    const double nk = static_cast<double>(ck.size);
                    const double t = ni + nj + nk;
                    v = std::sqrt(std::max(0.0, ((ni + nk) * dik * dik + (nj + nk) * djk * djk -
                                                 nk * dij * dij) / t));
                    break;
                }
            }
            dref(merged.id, ck.id) = v;
            dref(ck.id, merged.id) = v;
        }

        Merge mg;
        mg.height = dij;
        if (ci.min_class < cj.min_class) {
            mg.left = ci.id;
            mg.right = cj.id;
        } else {
            mg.left = cj.id;
            mg.right = ci.id;
        }
        merges.push_back(mg);
        ci.active = false;
        cj.active = false;
        clusters.push_back(merged);
    }
    return merges;
}

/// Bottom-up agglomeration with the chosen linkage; the final merge becomes
/// the root and the finished tree is reindexed breadth-first.
inline HierarchyTree build_agglomerative(const ClassMeans& cm, Linkage linkage) {
    const std::size_t c = cm.c();
    const auto merges = agglomerative_merges(cm, linkage);

    HierarchyTree tree;
    auto new_node = [&](int parent, int child_pos) {
        HierarchyTree::Node nd;
        nd.index = static_cast<int>(tree.nodes.size());
        nd.parent = parent;
        nd.child_pos = child_pos;
        if (parent >= 0) tree.nodes[static_cast<std::size_t>(parent)].children[child_pos] = nd.index;
        tree.nodes.push_back(nd);
        return nd.index;
    };

    // Expand merges from the root down with a FIFO queue; node indices come
    // out in level order directly.
    struct Item {
        int node;
        int cluster;  // creation id into the merge list / singleton range
    };
    int root = new_node(-1, -1);
    std::deque<Item> queue{{root, static_cast<int>(c + merges.size() - 1)}};
    while (!queue.empty()) {
        Item it = queue.front();
        queue.pop_front();
        if (it.cluster < static_cast<int>(c)) {
            tree.nodes[static_cast<std::size_t>(it.node)].leaf_class = it.cluster;
            continue;
        }
        const Merge& mg = merges[static_cast<std::size_t>(it.cluster) - c];
        int ln = new_node(it.node, 0);
        int rn = new_node(it.node, 1);
        queue.push_back({ln, mg.left});
        queue.push_back({rn, mg.right});
    }
    tree.validate();
    return tree;
}

namespace detail {

inline void newick_rec(const HierarchyTree& tree, int node,
                       const std::vector<std::string>& names, std::string& out) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) {
        out += names[static_cast<std::size_t>(nd.leaf_class)];
        return;
    }
    out += '(';
    newick_rec(tree, nd.children[0], names, out);
    out += ',';
    newick_rec(tree, nd.children[1], names, out);
    out += ')';
}

}  // namespace detail

inline std::string export_newick(const HierarchyTree& tree, const std::vector<std::string>& names) {
    if (names.size() != tree.n_classes()) throw data_error("export_newick: name count mismatch");
    std::string out;
    detail::newick_rec(tree, 0, names, out);
    out += ';';
    return out;
}

/// Stable content fingerprint of a tree's topology.
inline std::string tree_fingerprint(const HierarchyTree& tree, const std::vector<std::string>& names) {
    return fnv1a_hex(export_newick(tree, names));
}

inline nlohmann::json tree_to_json(const HierarchyTree& tree) {
    auto arr = nlohmann::json::array();
    for (const auto& nd : tree.nodes) {
        nlohmann::json rec;
        rec["index"] = nd.index;
        rec["parent"] = nd.parent;
        rec["child_pos"] = nd.child_pos;
        rec["children"] = {nd.children[0], nd.children[1]};
        rec["leaf_class"] = nd.leaf_class;
        arr.push_back(std::move(rec));
    }
    return arr;
}

inline HierarchyTree tree_from_json(const nlohmann::json& arr) {
    HierarchyTree tree;
    for (const auto& rec : arr) {
        HierarchyTree::Node nd;
        nd.index = rec.at("index").get<int>();
        nd.parent = rec.at("parent").get<int>();
        nd.child_pos = rec.at("child_pos").get<int>();
        nd.children[0] = rec.at("children").at(0).get<int>();
        nd.children[1] = rec.at("children").at(1).get<int>();
        nd.leaf_class = rec.at("leaf_class").get<int>();
        tree.nodes.push_back(nd);
    }
    tree.validate();
    return tree;
}

}  // namespace hicl
