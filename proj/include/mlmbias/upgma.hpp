#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mlmbias/common.hpp"

namespace mlmbias {

// One agglomeration step. Cluster ids: 0..n-1 are leaves, n+k is the cluster
// produced by merge k (scipy linkage convention).
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;       // a < b
    double height = 0.0;     // distance between the merged clusters
    std::size_t size = 0;    // leaves in the new cluster
};

struct Dendrogram {
    std::size_t n_leaves = 0;
    std::vector<Merge> merges;  // n_leaves - 1 rows, non-decreasing heights

    // Leaves left-to-right as a drawing would place them: children ordered by
    // smallest contained leaf index.
    std::vector<std::size_t> leaf_order() const {
        std::vector<std::size_t> order;
        order.reserve(n_leaves);
        if (n_leaves == 0) return order;
        walk(root_id(), order);
        return order;
    }

    std::size_t root_id() const { return n_leaves + merges.size() - 1; }

    // Labels in [0,k) after cutting to k clusters; label order follows the
    // smallest leaf index in each cluster.
    std::vector<std::size_t> cut(std::size_t k) const {
        require(k >= 1 && k <= n_leaves, "invalid cluster count");
        // Union-find over the first n_leaves - k merges.
        std::vector<std::size_t> owner(n_leaves + merges.size());
        for (std::size_t i = 0; i < owner.size(); ++i) owner[i] = i;
        std::vector<std::size_t> rep(owner.size());  // representative leaf per cluster id
        for (std::size_t i = 0; i < n_leaves; ++i) rep[i] = i;
        for (std::size_t m = 0; m + k < n_leaves; ++m) {
            std::size_t id = n_leaves + m;
            rep[id] = std::min(resolve_rep(rep, merges[m].a), resolve_rep(rep, merges[m].b));
        }
        // Assign each leaf the representative of its topmost applied cluster.
        std::vector<std::size_t> leaf_rep(n_leaves);
        for (std::size_t i = 0; i < n_leaves; ++i) leaf_rep[i] = i;
        for (std::size_t m = 0; m + k < n_leaves; ++m) {
            std::size_t id = n_leaves + m;
            for (std::size_t leaf : leaves_under(id))
                leaf_rep[leaf] = rep[id];
        }
        // Compact to labels 0..k-1 ordered by representative leaf index.
        std::vector<std::size_t> reps;
        for (std::size_t i = 0; i < n_leaves; ++i)
            if (leaf_rep[i] == i) reps.push_back(i);
        std::vector<std::size_t> labels(n_leaves);
        for (std::size_t i = 0; i < n_leaves; ++i) {
            for (std::size_t r = 0; r < reps.size(); ++r)
                if (leaf_rep[i] == reps[r]) { labels[i] = r; break; }
        }
        return labels;
    }

    std::vector<std::size_t> leaves_under(std::size_t id) const {
        std::vector<std::size_t> out;
        walk(id, out);
        return out;
    }

    double max_height() const {
        double h = 0.0;
        for (const auto& m : merges) h = std::max(h, m.height);
        return h;
    }

private:
    static std::size_t resolve_rep(const std::vector<std::size_t>& rep, std::size_t id) {
        return rep[id];
    }
    void walk(std::size_t id, std::vector<std::size_t>& order) const {
        if (id < n_leaves) {
            order.push_back(id);
            return;
        }
        const Merge& m = merges[id - n_leaves];
        walk(m.a, order);
        walk(m.b, order);
    }
};

// UPGMA over a symmetric distance matrix: merge the closest pair, the new
// cluster's distance to others being the leaf-count-weighted average. Ties on
// the minimum distance break toward the lexicographically smallest (a, b)
// cluster-id pair, so output is deterministic.
inline Dendrogram upgma_cluster(const std::vector<std::vector<double>>& dist) {
    std::size_t n = dist.size();
    require(n >= 2, "clustering needs at least 2 leaves");
    for (std::size_t i = 0; i < n; ++i) {
        require(dist[i].size() == n, "distance matrix not square");
        for (std::size_t j = 0; j < n; ++j)
            require(std::abs(dist[i][j] - dist[j][i]) < 1e-12, "distance matrix not symmetric");
    }

    struct Active {
        std::size_t id;     // dendrogram cluster id
        std::size_t size;   // leaf count
    };
    std::vector<Active> active;
    active.reserve(n);
    for (std::size_t i = 0; i < n; ++i) active.push_back({i, 1});
    std::vector<std::vector<double>> d = dist;

    Dendrogram out;
    out.n_leaves = n;
    out.merges.reserve(n - 1);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_ids{0, 0};
        for (std::size_t i = 0; i < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                double dij = d[i][j];
                auto ids = std::minmax(active[i].id, active[j].id);
                std::pair<std::size_t, std::size_t> key{ids.first, ids.second};
                if (dij < best || (dij == best && key < best_ids)) {
                    best = dij;
                    best_ids = key;
                    bi = i;
                    bj = j;
                }
            }
        }

        std::size_t new_id = n + step;
        std::size_t new_size = active[bi].size + active[bj].size;
        out.merges.push_back({best_ids.first, best_ids.second, best, new_size});

        // Lance-Williams update for group-average linkage.
        double wi = static_cast<double>(active[bi].size) / static_cast<double>(new_size);
        double wj = static_cast<double>(active[bj].size) / static_cast<double>(new_size);
        std::vector<double> nd;
        nd.reserve(active.size() - 1);
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (k == bi || k == bj) continue;
            nd.push_back(wi * d[bi][k] + wj * d[bj][k]);
        }

        // Rebuild the active list with the merged cluster appended.
        std::vector<Active> next;
        std::vector<std::vector<double>> dn;
        next.reserve(active.size() - 1);
        for (std::size_t k = 0; k < active.size(); ++k)
            if (k != bi && k != bj) next.push_back(active[k]);
        next.push_back({new_id, new_size});

        std::size_t m = next.size();
        dn.assign(m, std::vector<double>(m, 0.0));
        std::size_t ri = 0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (i == bi || i == bj) continue;
            std::size_t rj = 0;
            for (std::size_t j = 0; j < active.size(); ++j) {
                if (j == bi || j == bj) continue;
                dn[ri][rj] = d[i][j];
                ++rj;
            }
            ++ri;
        }
        for (std::size_t k = 0; k + 1 < m; ++k) {
            dn[k][m - 1] = dn[m - 1][k] = nd[k];
        }
        active = std::move(next);
        d = std::move(dn);
    }
    return out;
}

} // namespace mlmbias
