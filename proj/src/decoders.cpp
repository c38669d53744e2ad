#include "dqec/decoders.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dqec/blossom.hpp"

namespace dqec {

MatchingGraph make_graph(const ToricLayout& layout, const SyndromeHistory& history,
                         StabType type) {
    MatchingGraph g;
    g.d = layout.distance();
    g.n_layers = history.n_layers;
    g.type = type;
    g.defects = compute_defects(history, type);
    return g;
}

int defect_distance(const MatchingGraph& graph, const Defect& a, const Defect& b) {
    const int d = graph.d;
    auto wrap = [d](int x) {
        const int m = std::abs(x) % d;
        return std::min(m, d - m);
    };
    const int ai = a.stab / d, aj = a.stab % d;
    const int bi = b.stab / d, bj = b.stab % d;
    return wrap(ai - bi) + wrap(aj - bj) + std::abs(a.layer - b.layer);
}

namespace {

// data qubit crossed when moving one step between adjacent stabilizers
int crossing_edge(const ToricLayout& layout, StabType type, int i, int j, bool vertical_step,
                  bool positive) {
    if (type == StabType::Z) {
        // plaquette (i,j) <-> (i+1,j): h(i+1,j); (i,j) <-> (i,j+1): v(i,j+1)
        if (vertical_step) return layout.h_edge(positive ? i + 1 : i, j);
        return layout.v_edge(i, positive ? j + 1 : j);
    }
    // vertex (i,j) <-> (i+1,j): v(i,j); (i,j) <-> (i,j+1): h(i,j)
    if (vertical_step) return layout.v_edge(positive ? i : i - 1, j);
    return layout.h_edge(i, positive ? j : j - 1);
}

void apply_edge_to_frame(PauliFrame& frame, const MatchingGraph& graph,
                         const ToricLayout& layout, int node_a, int node_b) {
    const int ns = graph.d * graph.d;
    const int sa = node_a % ns, sb = node_b % ns;
    const int la = node_a / ns, lb = node_b / ns;
    if (sa == sb) return; // temporal edge: no data correction
    if (la != lb) throw std::logic_error("correction edge must be purely spatial or temporal");
    const int ai = sa / graph.d, aj = sa % graph.d;
    const int bi = sb / graph.d, bj = sb % graph.d;
    int q;
    if (aj == bj) {
        const bool positive = (ai + 1) % graph.d == bi;
        q = crossing_edge(layout, graph.type, ai, aj, true, positive);
    } else {
        const bool positive = (aj + 1) % graph.d == bj;
        q = crossing_edge(layout, graph.type, ai, aj, false, positive);
    }
    auto& bits = graph.type == StabType::Z ? frame.x_bits : frame.z_bits;
    bits[q] ^= 1;
}

// append the unit edges of a shortest space-time path between two defects
void add_path(Correction& corr, const MatchingGraph& graph, const ToricLayout& layout,
              const Defect& a, const Defect& b) {
    const int d = graph.d;
    const int ns = d * d;
    int i = a.stab / d, j = a.stab % d, t = a.layer;
    const int bi = b.stab / d, bj = b.stab % d;

    auto step_dir = [d](int from, int to) {
        // returns +1/-1 for the shorter wrap, ties toward +1
        const int fwd = ((to - from) % d + d) % d;
        if (fwd == 0) return 0;
        return fwd <= d - fwd ? 1 : -1;
    };
    auto push = [&](int ni, int nj, int nt) {
        const int na = t * ns + i * d + j;
        const int nb = nt * ns + ni * d + nj;
        corr.edges.push_back({na, nb});
        apply_edge_to_frame(corr.frame, graph, layout, na, nb);
        i = ni;
        j = nj;
        t = nt;
        ++corr.total_weight;
    };
    while (i != bi) push(((i + step_dir(i, bi)) % d + d) % d, j, t);
    while (j != bj) push(i, ((j + step_dir(j, bj)) % d + d) % d, t);
    while (t != b.layer) push(i, j, t + (b.layer > t ? 1 : -1));
}

} // namespace

bool correction_annihilates_defects(const MatchingGraph& graph, const ToricLayout& layout,
                                    const Correction& corr) {
    (void)layout;
    const int ns = graph.d * graph.d;
    std::vector<uint8_t> toggles(ns * (graph.n_layers + 1), 0);
    for (auto [a, b] : corr.edges) {
        toggles[a] ^= 1;
        toggles[b] ^= 1;
    }
    for (const auto& def : graph.defects) toggles[def.layer * ns + def.stab] ^= 1;
    return std::all_of(toggles.begin(), toggles.end(), [](uint8_t t) { return t == 0; });
}

// --- minimum-weight perfect matching -----------------------------------------

namespace {

Correction matching_to_correction(const MatchingGraph& graph, const ToricLayout& layout,
                                  const std::vector<std::pair<int, int>>& pairs) {
    Correction corr;
    corr.frame = PauliFrame(layout.n_data());
    for (auto [a, b] : pairs) {
        add_path(corr, graph, layout, graph.defects[a], graph.defects[b]);
        corr.matched.push_back({a, b});
    }
    return corr;
}

} // namespace

Correction mwpm_decode(const MatchingGraph& graph, const ToricLayout& layout) {
    const int n = int(graph.defects.size());
    if (n % 2 != 0) throw std::invalid_argument("odd defect count");
    if (n == 0) {
        Correction c;
        c.frame = PauliFrame(layout.n_data());
        return c;
    }
    auto pairs = minimum_weight_perfect_matching(n, [&](int a, int b) {
        return (long long)defect_distance(graph, graph.defects[a], graph.defects[b]);
    });
    return matching_to_correction(graph, layout, pairs);
}

Correction brute_force_decode(const MatchingGraph& graph, const ToricLayout& layout,
                              int max_defects) {
    const int n = int(graph.defects.size());
    if (n % 2 != 0) throw std::invalid_argument("odd defect count");
    if (n > max_defects) throw std::invalid_argument("too many defects for brute force");
    if (n == 0) {
        Correction c;
        c.frame = PauliFrame(layout.n_data());
        return c;
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::pair<int, int>> best, current;
    long best_weight = std::numeric_limits<long>::max();

    std::vector<bool> used(n, false);
    auto recurse = [&](auto&& self, long weight) -> void {
        int a = -1;
        for (int i = 0; i < n; ++i)
            if (!used[i]) {
                a = i;
                break;
            }
        if (a < 0) {
            if (weight < best_weight) {
                best_weight = weight;
                best = current;
            }
            return;
        }
        used[a] = true;
        for (int b = a + 1; b < n; ++b) {
            if (used[b]) continue;
            used[b] = true;
            current.push_back({a, b});
            self(self, weight + defect_distance(graph, graph.defects[a], graph.defects[b]));
            current.pop_back();
            used[b] = false;
        }
        used[a] = false;
    };
    recurse(recurse, 0);
    return matching_to_correction(graph, layout, best);
}

// --- union-find decoder --------------------------------------------------------

namespace {

struct UnionFind {
    std::vector<int> parent, rank_;
    explicit UnionFind(int n) : parent(n), rank_(n, 0) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    int unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return a;
    }
};

} // namespace

Correction uf_decode(const MatchingGraph& graph, const ToricLayout& layout) {
    const int d = graph.d;
    const int ns = d * d;
    const int layers = graph.n_layers + 1;
    const int n_nodes = ns * layers;
    if (graph.defects.size() % 2 != 0) throw std::invalid_argument("odd defect count");

    // edges: per node three canonical directions (+i, +j, +t)
    auto node_id = [&](int i, int j, int t) { return t * ns + ((i % d + d) % d) * d + (j % d + d) % d; };
    struct Edge {
        int a, b;
    };
    std::vector<Edge> edges;
    edges.reserve(n_nodes * 3);
    for (int t = 0; t < layers; ++t)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                edges.push_back({node_id(i, j, t), node_id(i + 1, j, t)});
                edges.push_back({node_id(i, j, t), node_id(i, j + 1, t)});
                if (t + 1 < layers) edges.push_back({node_id(i, j, t), node_id(i, j, t + 1)});
            }

    std::vector<uint8_t> is_defect(n_nodes, 0);
    for (const auto& def : graph.defects) is_defect[def.layer * ns + def.stab] ^= 1;

    UnionFind uf(n_nodes);
    std::vector<int> parity(n_nodes, 0);
    for (int v = 0; v < n_nodes; ++v) parity[v] = is_defect[v];
    std::vector<uint8_t> support(edges.size(), 0);
    std::vector<uint8_t> in_cluster(n_nodes, 0);
    for (const auto& def : graph.defects) in_cluster[def.layer * ns + def.stab] = 1;

    // grow odd clusters by half edges until every cluster is even
    bool any_odd = true;
    int guard = 0;
    while (any_odd && guard++ < 4 * (d + layers)) {
        any_odd = false;
        for (int v = 0; v < n_nodes; ++v)
            if (in_cluster[v] && parity[uf.find(v)] % 2 == 1) {
                any_odd = true;
                break;
            }
        if (!any_odd) break;

        std::vector<size_t> grown;
        for (size_t e = 0; e < edges.size(); ++e) {
            if (support[e] == 2) continue;
            const int ra = uf.find(edges[e].a), rb = uf.find(edges[e].b);
            int growth = 0;
            if (in_cluster[edges[e].a] && parity[ra] % 2 == 1) ++growth;
            if (in_cluster[edges[e].b] && parity[rb] % 2 == 1 && rb != ra) ++growth;
            if (growth == 0) continue;
            support[e] = uint8_t(std::min(2, support[e] + growth));
            if (support[e] == 2) grown.push_back(e);
        }
        for (size_t e : grown) {
            const int a = edges[e].a, b = edges[e].b;
            const int ra = uf.find(a), rb = uf.find(b);
            in_cluster[a] = in_cluster[b] = 1;
            if (ra != rb) {
                const int pa = parity[ra], pb = parity[rb];
                const int r = uf.unite(ra, rb);
                parity[r] = pa + pb;
            }
        }
    }

    // peel: spanning forest over fully grown edges, leaves first
    std::vector<std::vector<std::pair<int, size_t>>> adj(n_nodes);
    for (size_t e = 0; e < edges.size(); ++e)
        if (support[e] == 2) {
            adj[edges[e].a].push_back({edges[e].b, e});
            adj[edges[e].b].push_back({edges[e].a, e});
        }

    Correction corr;
    corr.frame = PauliFrame(layout.n_data());
    std::vector<int> order;
    std::vector<int> parent(n_nodes, -1), parent_edge(n_nodes, -1);
    std::vector<uint8_t> visited(n_nodes, 0);
    std::vector<uint8_t> defect_left = is_defect;
    for (int start = 0; start < n_nodes; ++start) {
        if (visited[start] || adj[start].empty()) continue;
        // iterative DFS
        std::vector<int> stack = {start};
        visited[start] = 1;
        order.clear();
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            order.push_back(v);
            for (auto [w, e] : adj[v])
                if (!visited[w]) {
                    visited[w] = 1;
                    parent[w] = v;
                    parent_edge[w] = int(e);
                    stack.push_back(w);
                }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int v = *it;
            if (parent[v] >= 0 && defect_left[v]) {
                defect_left[v] = 0;
                defect_left[parent[v]] ^= 1;
                corr.edges.push_back({edges[parent_edge[v]].a, edges[parent_edge[v]].b});
                apply_edge_to_frame(corr.frame, graph, layout, edges[parent_edge[v]].a,
                                    edges[parent_edge[v]].b);
                ++corr.total_weight;
            }
        }
    }
    for (int v = 0; v < n_nodes; ++v)
        if (defect_left[v]) throw std::runtime_error("union-find peeling left a defect");
    return corr;
}

} // namespace dqec
