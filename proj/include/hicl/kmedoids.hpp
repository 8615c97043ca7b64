#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "core.hpp"

namespace hicl {

/// Result of a PAM run. `medoids` are input row indices, sorted ascending;
/// `assignment[i]` is a position into `medoids`.
struct PamResult {
    std::vector<int> medoids;
    std::vector<int> assignment;
    double cost = 0.0;
};

namespace detail {

inline std::vector<double> pairwise_euclidean(const Matrix& pts) {
    const std::size_t p = pts.rows();
    std::vector<double> d(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t f = 0; f < pts.cols(); ++f) {
                double diff = pts(i, f) - pts(j, f);
                acc += diff * diff;
            }
            double dist = std::sqrt(acc);
            d[i * p + j] = dist;
            d[j * p + i] = dist;
        }
    return d;
}

}  // namespace detail

/// Partitioning around medoids. Points assign to the nearest medoid; distance
/// ties go to the lower medoid index, except that a medoid always assigns to
/// itself (this keeps both clusters non-empty even when points coincide).
/// The seed parameter is reserved for sampling-based variants and is unused:
/// the procedure is fully deterministic.
///
/// k=2 — the only arity binary hierarchy generation ever requests — is solved
/// exactly by enumerating all medoid pairs (O(p^3) with the distance matrix
/// precomputed, negligible at class-means scale). Greedy BUILD+SWAP descent,
/// used for other k, can stall in a swap-stable local optimum even on a
/// handful of points, which would make binary splits depend on descent luck.
/// Cost ties resolve to the lexicographically smallest index pair.
inline PamResult pam_kmedoids(const Matrix& points, int k, std::uint64_t /*seed*/ = 0) {
    const int p = static_cast<int>(points.rows());
    if (k < 1) throw config_error("pam_kmedoids: k must be >= 1");
    if (k > p) throw config_error("pam_kmedoids: k exceeds point count");

    const auto dist = detail::pairwise_euclidean(points);
    auto d = [&](int a, int b) { return dist[static_cast<std::size_t>(a) * p + b]; };

    if (k == 2) {
        int best_a = 0, best_b = 1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int a = 0; a < p; ++a)
            for (int b = a + 1; b < p; ++b) {
                double cost = 0.0;
                for (int i = 0; i < p; ++i) cost += std::min(d(i, a), d(i, b));
                if (cost < best_cost - 1e-12) {
                    best_cost = cost;
                    best_a = a;
                    best_b = b;
                }
            }
        PamResult res;
        res.medoids = {best_a, best_b};
        res.assignment.resize(static_cast<std::size_t>(p));
        res.cost = 0.0;
        for (int i = 0; i < p; ++i) {
            int pick;
            if (i == best_a) pick = 0;
            else if (i == best_b) pick = 1;
            else pick = d(i, best_a) <= d(i, best_b) ? 0 : 1;
            res.assignment[static_cast<std::size_t>(i)] = pick;
            res.cost += d(i, res.medoids[static_cast<std::size_t>(pick)]);
        }
        return res;
    }

    // BUILD: first medoid minimizes total distance; each further medoid
    // maximizes the cost reduction. Ties resolve to the lowest index.
    std::vector<int> med;
    std::vector<char> is_med(static_cast<std::size_t>(p), 0);
    {
        int best = 0;
        double best_total = std::numeric_limits<double>::infinity();
        for (int i = 0; i < p; ++i) {
            double total = 0.0;
            for (int j = 0; j < p; ++j) total += d(i, j);
            if (total < best_total) {
                best_total = total;
                best = i;
            }
        }
        med.push_back(best);
        is_med[static_cast<std::size_t>(best)] = 1;
    }
    std::vector<double> nearest(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) nearest[static_cast<std::size_t>(i)] = d(i, med[0]);
    while (static_cast<int>(med.size()) < k) {
        int best = -1;
        double best_profit = -std::numeric_limits<double>::infinity();
        for (int cand = 0; cand < p; ++cand) {
            if (is_med[static_cast<std::size_t>(cand)]) continue;
            double profit = 0.0;
            for (int i = 0; i < p; ++i)
                profit += std::max(0.0, nearest[static_cast<std::size_t>(i)] - d(i, cand));
            if (profit > best_profit) {
                best_profit = profit;
                best = cand;
            }
        }
        med.push_back(best);
        is_med[static_cast<std::size_t>(best)] = 1;
        for (int i = 0; i < p; ++i)
            nearest[static_cast<std::size_t>(i)] =
                std::min(nearest[static_cast<std::size_t>(i)], d(i, best));
    }

    auto total_cost = [&](const std::vector<int>& ms) {
        double cost = 0.0;
        for (int i = 0; i < p; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int m : ms) best = std::min(best, d(i, m));
            cost += best;
        }
        return cost;
    };

    // SWAP: apply the single best improving (medoid, candidate) exchange per
    // iteration until none improves. Ties resolve to the lowest medoid
    // position, then the lowest candidate index.
    double cur = total_cost(med);
    for (;;) {
        int best_a = -1, best_h = -1;
        double best_cost = cur;
        for (std::size_t a = 0; a < med.size(); ++a) {
            for (int h = 0; h < p; ++h) {
                if (is_med[static_cast<std::size_t>(h)]) continue;
                std::vector<int> trial = med;
                trial[a] = h;
                double c = total_cost(trial);
                if (c < best_cost - 1e-12) {
                    best_cost = c;
                    best_a = static_cast<int>(a);
                    best_h = h;
                }
            }
        }
        if (best_a < 0) break;
        is_med[static_cast<std::size_t>(med[static_cast<std::size_t>(best_a)])] = 0;
        med[static_cast<std::size_t>(best_a)] = best_h;
        is_med[static_cast<std::size_t>(best_h)] = 1;
        cur = best_cost;
    }

    std::sort(med.begin(), med.end());
    PamResult res;
    res.medoids = med;
    res.assignment.resize(static_cast<std::size_t>(p));
    res.cost = 0.0;
    for (int i = 0; i < p; ++i) {
        int pick = -1;
        if (is_med[static_cast<std::size_t>(i)]) {
            for (std::size_t m = 0; m < med.size(); ++m)
                if (med[m] == i) pick = static_cast<int>(m);
        } else {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < med.size(); ++m)
                if (d(i, med[m]) < best) {
                    best = d(i, med[m]);
                    pick = static_cast<int>(m);
                }
        }
        res.assignment[static_cast<std::size_t>(i)] = pick;
        res.cost += d(i, med[static_cast<std::size_t>(pick)]);
    }
    return res;
}

}  // namespace hicl
