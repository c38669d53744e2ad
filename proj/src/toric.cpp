#include "dqec/toric.hpp"

#include <stdexcept>

namespace dqec {

ToricLayout::ToricLayout(Architecture arch, int d) : arch_(arch), d_(d) {
    if (d < 4 || d % 2 != 0)
        throw std::invalid_argument("toric layout needs an even distance of at least 4");

    const int ns = d * d;
    plaquette_support_.resize(ns);
    vertex_support_.resize(ns);
    if (arch == Architecture::WT3) {
        plaquette_idle_.resize(ns);
        vertex_idle_.resize(ns);
    }

    // In the WT3 layout module m(i,j) owns edges h(i,j) and v(i,j); the data
    // qubit order below keeps that module's pair in the first two slots so
    // hook errors land on co-located qubits.
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int p = plaquette_id(i, j);
            plaquette_support_[p] = {h_edge(i, j), v_edge(i, j), h_edge(i + 1, j),
                                     v_edge(i, j + 1)};
            const int v = vertex_id(i, j);
            vertex_support_[v] = {h_edge(i, j), v_edge(i, j), h_edge(i, j - 1),
                                  v_edge(i - 1, j)};
            if (arch == Architecture::WT3) {
                plaquette_idle_[p] = {v_edge(i + 1, j), h_edge(i, j + 1), h_edge(i + 1, j + 1),
                                      v_edge(i + 1, j + 1)};
                vertex_idle_[v] = {v_edge(i, j - 1), h_edge(i - 1, j), h_edge(i - 1, j - 1),
                                   v_edge(i - 1, j - 1)};
            }
        }

    const int nsub = subrounds_per_type();
    plaquette_subrounds_.resize(nsub);
    vertex_subrounds_.resize(nsub);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const int sub_wt4 = (i + j) % 2;
            const int sub_wt3 = (i % 2) * 2 + (j % 2);
            const int sub = arch == Architecture::WT4 ? sub_wt4 : sub_wt3;
            plaquette_subrounds_[sub].push_back(plaquette_id(i, j));
            vertex_subrounds_[sub].push_back(vertex_id(i, j));
        }

    // logical operators: L1 on a horizontal cycle / vertical cut of
    // horizontal edges, L2 on the vertical counterparts
    for (int j = 0; j < d; ++j) logical_z_[0].push_back(h_edge(0, j));
    for (int i = 0; i < d; ++i) logical_x_[0].push_back(h_edge(i, 0));
    for (int i = 0; i < d; ++i) logical_z_[1].push_back(v_edge(i, 0));
    for (int j = 0; j < d; ++j) logical_x_[1].push_back(v_edge(0, j));
}

const std::vector<int>& ToricLayout::subround_stabilizers(StabType type, int subround) const {
    return type == StabType::Z ? plaquette_subrounds_[subround] : vertex_subrounds_[subround];
}

std::vector<ToricLayout::SubroundRef> ToricLayout::schedule() const {
    std::vector<SubroundRef> s;
    for (int r = 0; r < subrounds_per_type(); ++r) s.push_back({StabType::Z, r});
    for (int r = 0; r < subrounds_per_type(); ++r) s.push_back({StabType::X, r});
    return s;
}

ToricLayout build_layout(Architecture arch, int d) { return ToricLayout(arch, d); }

void PauliFrame::apply(const PauliString& p, const std::array<int, 4>& qubits) {
    for (int k = 0; k < 4; ++k) {
        switch (p.op(k)) {
            case Pauli::I: break;
            case Pauli::X: x_bits[qubits[k]] ^= 1; break;
            case Pauli::Z: z_bits[qubits[k]] ^= 1; break;
            case Pauli::Y:
                x_bits[qubits[k]] ^= 1;
                z_bits[qubits[k]] ^= 1;
                break;
        }
    }
}

namespace {

// parity of the stabilizer given the accumulated error frame: plaquettes
// (ZZZZ) anticommute with X-type errors, vertices with Z-type
int8_t frame_parity(const PauliFrame& frame, StabType type, const std::array<int, 4>& support) {
    int flips = 0;
    const auto& bits = type == StabType::Z ? frame.x_bits : frame.z_bits;
    for (int q : support) flips ^= bits[q];
    return flips ? -1 : 1;
}

} // namespace

TrialResult run_trial(const ToricLayout& layout, const SuperoperatorTable& table, Rng& rng,
                      const SubroundHook& hook) {
    if (table.architecture() != layout.architecture())
        throw std::invalid_argument("table architecture does not match the layout");
    if (!table.finalized()) throw std::invalid_argument("table not finalized for sampling");

    const int d = layout.distance();
    const int ns = layout.n_stabilizers();

    TrialResult out;
    out.true_frame = PauliFrame(layout.n_data());
    for (int t = 0; t < 2; ++t) {
        out.history.outcomes[t].assign((d + 1) * ns, 0);
        out.history.ghz_failures[t].assign(d * ns, 0);
    }
    out.history.n_layers = d;
    out.history.n_stab = ns;

    std::vector<int8_t> last_known[2];
    last_known[0].assign(ns, 1);
    last_known[1].assign(ns, 1);

    const auto schedule = layout.schedule();
    for (int layer = 0; layer < d; ++layer) {
        int pos = 0;
        for (const auto& sub : schedule) {
            if (hook) hook(layer, pos, out.true_frame);
            ++pos;
            const int ti = sub.type == StabType::Z ? 0 : 1;
            for (int stab : layout.subround_stabilizers(sub.type, sub.index)) {
                const int row_idx = table.sample(sub.type, rng.uniform());
                const auto& row = table.row(row_idx);
                out.true_frame.apply(row.error, layout.stabilizer_support(sub.type, stab));

                if (row.ghz_success) {
                    const int8_t parity =
                        frame_parity(out.true_frame, sub.type,
                                     layout.stabilizer_support(sub.type, stab));
                    const int8_t rec = row.meas_error ? int8_t(-parity) : parity;
                    out.history.outcomes[ti][layer * ns + stab] = rec;
                    last_known[ti][stab] = rec;
                } else {
                    // substitute the latest successful outcome
                    out.history.outcomes[ti][layer * ns + stab] = last_known[ti][stab];
                    out.history.ghz_failures[ti][layer * ns + stab] = 1;
                }

                if (table.has_idle()) {
                    const uint32_t idle =
                        table.sample_idle(row.ghz_success, rng.uniform());
                    out.true_frame.apply(PauliString::from_index(idle, 4),
                                         layout.idle_support(sub.type, stab));
                }
            }
        }
    }

    // final layer: perfect measurements
    for (int t = 0; t < 2; ++t) {
        const StabType type = t == 0 ? StabType::Z : StabType::X;
        for (int stab = 0; stab < ns; ++stab)
            out.history.outcomes[t][d * ns + stab] =
                frame_parity(out.true_frame, type, layout.stabilizer_support(type, stab));
    }
    return out;
}

std::vector<Defect> compute_defects(const SyndromeHistory& history, StabType type) {
    const int ti = type == StabType::Z ? 0 : 1;
    std::vector<Defect> defects;
    const int ns = history.n_stab;
    for (int layer = 0; layer <= history.n_layers; ++layer)
        for (int s = 0; s < ns; ++s) {
            const int8_t prev = layer == 0 ? int8_t(1) : history.outcomes[ti][(layer - 1) * ns + s];
            if (history.outcomes[ti][layer * ns + s] != prev) defects.push_back({s, layer});
        }
    return defects;
}

std::array<bool, 4> check_logical(const PauliFrame& true_frame, const PauliFrame& correction,
                                  const ToricLayout& layout) {
    if (true_frame.x_bits.size() != correction.x_bits.size())
        throw std::invalid_argument("frame size mismatch");
    auto parity_on = [&](const std::vector<uint8_t>& bits, const std::vector<int>& support) {
        int p = 0;
        for (int q : support) p ^= bits[q];
        return p;
    };
    std::array<bool, 4> fail{};
    for (int which = 0; which < 2; ++which) {
        int px = 0, pz = 0;
        px = parity_on(true_frame.x_bits, layout.logical_z(which)) ^
             parity_on(correction.x_bits, layout.logical_z(which));
        pz = parity_on(true_frame.z_bits, layout.logical_x(which)) ^
             parity_on(correction.z_bits, layout.logical_x(which));
        fail[which] = px != 0;     // residual X string anticommutes with L^Z
        fail[2 + which] = pz != 0; // residual Z string anticommutes with L^X
    }
    return fail;
}

} // namespace dqec
