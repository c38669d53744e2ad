#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dqec/rng.hpp"
#include "dqec/superoperator.hpp"

namespace dqec {

// Non-rotated toric code of even distance d. Data qubits live on edges:
// horizontal edge h(i,j) between vertices (i,j)-(i,j+1) has id i*d+j,
// vertical edge v(i,j) between (i,j)-(i+1,j) has id d*d + i*d + j.
// Plaquettes measure ZZZZ, vertices XXXX; indices wrap mod d.
class ToricLayout {
public:
    ToricLayout(Architecture arch, int d);

    Architecture architecture() const { return arch_; }
    int distance() const { return d_; }
    int n_data() const { return 2 * d_ * d_; }
    int n_stabilizers() const { return d_ * d_; } // per type
    int n_modules() const { return arch_ == Architecture::WT4 ? 2 * d_ * d_ : d_ * d_; }

    // data qubits of one stabilizer in the fixed table order
    const std::array<int, 4>& stabilizer_support(StabType type, int stab) const {
        return type == StabType::Z ? plaquette_support_[stab] : vertex_support_[stab];
    }
    // WT3 idle qubits of the unit cell, ordered (5,6,7,8)
    const std::array<int, 4>& idle_support(StabType type, int stab) const {
        return type == StabType::Z ? plaquette_idle_[stab] : vertex_idle_[stab];
    }

    // stabilizer ids measured in one sub-round; WT4 has 2 sub-rounds per type
    // and WT3 has 4
    int subrounds_per_type() const { return arch_ == Architecture::WT4 ? 2 : 4; }
    const std::vector<int>& subround_stabilizers(StabType type, int subround) const;

    // Z sub-rounds precede X sub-rounds within a layer
    struct SubroundRef {
        StabType type;
        int index;
    };
    std::vector<SubroundRef> schedule() const;

    // logical operator supports: L1 uses horizontal edges, L2 vertical
    const std::vector<int>& logical_z(int which) const { return logical_z_[which]; }
    const std::vector<int>& logical_x(int which) const { return logical_x_[which]; }

    int plaquette_id(int i, int j) const { return mod(i) * d_ + mod(j); }
    int vertex_id(int i, int j) const { return mod(i) * d_ + mod(j); }
    int h_edge(int i, int j) const { return mod(i) * d_ + mod(j); }
    int v_edge(int i, int j) const { return d_ * d_ + mod(i) * d_ + mod(j); }

private:
    int mod(int x) const { return ((x % d_) + d_) % d_; }

    Architecture arch_;
    int d_;
    std::vector<std::array<int, 4>> plaquette_support_, vertex_support_;
    std::vector<std::array<int, 4>> plaquette_idle_, vertex_idle_;
    std::vector<std::vector<int>> plaquette_subrounds_, vertex_subrounds_;
    std::vector<int> logical_z_[2], logical_x_[2];
};

ToricLayout build_layout(Architecture arch, int d);

struct PauliFrame {
    std::vector<uint8_t> x_bits, z_bits;

    explicit PauliFrame(int n_data = 0) : x_bits(n_data, 0), z_bits(n_data, 0) {}
    void apply(const PauliString& p, const std::array<int, 4>& qubits);
    bool operator==(const PauliFrame&) const = default;
};

struct SyndromeHistory {
    // outcomes[type][layer * n_stab + stab] in {+1, -1}; layer d is the final
    // perfect round
    std::vector<int8_t> outcomes[2];
    std::vector<uint8_t> ghz_failures[2];
    int n_layers = 0;
    int n_stab = 0;

    int8_t outcome(StabType t, int layer, int stab) const {
        return outcomes[t == StabType::Z ? 0 : 1][layer * n_stab + stab];
    }
};

// Test hook: called between sub-rounds with (layer, position-in-schedule);
// may mutate the frame to inject errors.
using SubroundHook =
    std::function<void(int layer, int subround, PauliFrame& frame)>;

struct TrialResult {
    SyndromeHistory history;
    PauliFrame true_frame;
};

TrialResult run_trial(const ToricLayout& layout, const SuperoperatorTable& table, Rng& rng,
                      const SubroundHook& hook = nullptr);

struct Defect {
    int stab;
    int layer;
};

// defect at (stab, layer) iff the recorded outcome differs from the previous
// layer's (layer -1 counts as +1); includes the perfect final layer
std::vector<Defect> compute_defects(const SyndromeHistory& history, StabType type);

// failure flags [L1^X-vs-Zresidual? ...]: {X-logical 1, X-logical 2,
// Z-logical 1, Z-logical 2}, failure = residual anticommutes with the
// conjugate logical operator
std::array<bool, 4> check_logical(const PauliFrame& true_frame, const PauliFrame& correction,
                                  const ToricLayout& layout);

} // namespace dqec
