#pragma once

#include "dqec/toric.hpp"

namespace dqec {

// Space-time decoding graph for one stabilizer type: defects live at
// (stabilizer, layer) with layers 0..d; space wraps on the torus, time does
// not. Uniform unit edge weights.
struct MatchingGraph {
    int d = 0;        // lattice distance
    int n_layers = 0; // time extent (nodes at layers 0..n_layers)
    StabType type = StabType::Z;
    std::vector<Defect> defects;
};

MatchingGraph make_graph(const ToricLayout& layout, const SyndromeHistory& history,
                         StabType type);

// toroidal L1 distance in space plus |dt|
int defect_distance(const MatchingGraph& graph, const Defect& a, const Defect& b);

struct Correction {
    PauliFrame frame; // accumulated data corrections (X for Z-graphs, Z for X-graphs)
    long total_weight = 0;
    // unit space-time edges of the correction, nodes encoded layer * d^2 + stab
    std::vector<std::pair<int, int>> edges;
    std::vector<std::pair<int, int>> matched; // defect index pairs (matching decoders)
};

// union-find decoder with unweighted cluster growth and spanning-tree peeling
Correction uf_decode(const MatchingGraph& graph, const ToricLayout& layout);

// exact minimum-weight perfect matching (blossom algorithm)
Correction mwpm_decode(const MatchingGraph& graph, const ToricLayout& layout);

// exhaustive minimum over all perfect matchings; the oracle for mwpm_decode
Correction brute_force_decode(const MatchingGraph& graph, const ToricLayout& layout,
                              int max_defects = 8);

// re-derives every defect toggled by the correction edges and checks that the
// result equals the defect set (used by tests and assertions)
bool correction_annihilates_defects(const MatchingGraph& graph, const ToricLayout& layout,
                                    const Correction& corr);

} // namespace dqec
