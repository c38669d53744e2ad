#include "dqec/protocols.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dqec {

namespace {

void collect_modules(const ProtocolNode& node, std::set<std::string>& out) {
    if (node.kind == ProtocolNode::Kind::CreateLink) {
        out.insert(node.module_a);
        out.insert(node.module_b);
        return;
    }
    collect_modules(*node.child_a, out);
    if (node.kind == ProtocolNode::Kind::Fuse) collect_modules(*node.child_b, out);
    // a distilled state spans only its target's modules
    if (node.kind == ProtocolNode::Kind::Distill) return;
}

} // namespace

std::vector<std::string> ProtocolNode::modules() const {
    std::set<std::string> s;
    collect_modules(*this, s);
    return {s.begin(), s.end()};
}

// --- parsing -----------------------------------------------------------------

namespace {

struct Tokenizer {
    std::string text;
    size_t pos = 0;

    void skip_ws() {
        while (pos < text.size()) {
            if (std::isspace(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            } else if (text[pos] == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    char get() {
        skip_ws();
        return text[pos++];
    }
    std::string word() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            ++pos;
        if (start == pos) throw std::runtime_error("protocol parse error: expected a token");
        return text.substr(start, pos - start);
    }
};

std::unique_ptr<ProtocolNode> parse_node(Tokenizer& tok) {
    if (tok.get() != '(') throw std::runtime_error("protocol parse error: expected '('");
    std::string head = tok.word();
    auto node = std::make_unique<ProtocolNode>();
    if (head == "link") {
        node->kind = ProtocolNode::Kind::CreateLink;
        node->module_a = tok.word();
        node->module_b = tok.word();
        if (node->module_a == node->module_b)
            throw std::runtime_error("link endpoints must differ");
    } else if (head == "fuse") {
        node->kind = ProtocolNode::Kind::Fuse;
        node->at_module = tok.word();
        node->child_a = parse_node(tok);
        node->child_b = parse_node(tok);
    } else if (head == "distill") {
        node->kind = ProtocolNode::Kind::Distill;
        node->child_a = parse_node(tok);
        node->child_b = parse_node(tok);
        node->op = PauliString(tok.word());
    } else {
        throw std::runtime_error("unknown protocol node kind: " + head);
    }
    if (tok.get() != ')') throw std::runtime_error("protocol parse error: expected ')'");
    return node;
}

int count_links(const ProtocolNode& n) {
    if (n.kind == ProtocolNode::Kind::CreateLink) return 1;
    int c = count_links(*n.child_a);
    if (n.child_b) c += count_links(*n.child_b);
    return c;
}

// peak simultaneous memory-qubit occupancy per module; a bare link consumed
// directly as a distillation sacrifice stays on the communication qubits
struct Occupancy {
    std::map<std::string, int> alive;
    std::map<std::string, int> peak;
};

void bump_peak(Occupancy& occ) {
    for (auto& [m, c] : occ.alive) {
        auto& p = occ.peak[m];
        p = std::max(p, c);
    }
}

void occupancy_walk(const ProtocolNode& n, Occupancy& occ, bool on_comm) {
    switch (n.kind) {
        case ProtocolNode::Kind::CreateLink:
            if (!on_comm) {
                occ.alive[n.module_a] += 1;
                occ.alive[n.module_b] += 1;
                bump_peak(occ);
            }
            return;
        case ProtocolNode::Kind::Fuse: {
            occupancy_walk(*n.child_a, occ, false);
            occupancy_walk(*n.child_b, occ, false);
            occ.alive[n.at_module] -= 1; // one of the two qubits at the junction is measured
            return;
        }
        case ProtocolNode::Kind::Distill: {
            occupancy_walk(*n.child_a, occ, false);
            const bool comm_sacrifice = n.child_b->kind == ProtocolNode::Kind::CreateLink;
            occupancy_walk(*n.child_b, occ, comm_sacrifice);
            if (!comm_sacrifice)
                for (const auto& m : n.child_b->modules()) occ.alive[m] -= 1;
            return;
        }
    }
}

} // namespace

Protocol parse_protocol(const std::string& text) {
    Tokenizer tok{text, 0};
    std::optional<int> anno_k, anno_aux;
    while (!tok.done() && tok.peek() != '(') {
        std::string key = tok.word();
        std::string val = tok.word();
        if (key == "k")
            anno_k = std::stoi(val);
        else if (key == "max_aux")
            anno_aux = std::stoi(val);
        else
            throw std::runtime_error("unknown protocol annotation: " + key);
    }
    Protocol p;
    p.root = parse_node(tok);
    if (!tok.done()) throw std::runtime_error("trailing content after protocol expression");

    p.k = count_links(*p.root);
    Occupancy occ;
    occupancy_walk(*p.root, occ, false);
    p.max_aux_per_module = 0;
    for (auto& [m, c] : occ.peak) p.max_aux_per_module = std::max(p.max_aux_per_module, c);

    if (anno_k && *anno_k != p.k)
        throw std::runtime_error("protocol k annotation mismatch: file says " +
                                 std::to_string(*anno_k) + ", tree has " + std::to_string(p.k));
    if (anno_aux && *anno_aux != p.max_aux_per_module)
        throw std::runtime_error("protocol max_aux annotation mismatch");
    return p;
}

Protocol load_protocol(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open protocol file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_protocol(ss.str());
}

// --- validation ---------------------------------------------------------------

namespace {

ProtocolViolation check_node(const ProtocolNode& n) {
    switch (n.kind) {
        case ProtocolNode::Kind::CreateLink:
            return {};
        case ProtocolNode::Kind::Fuse: {
            auto a = check_node(*n.child_a);
            if (!a.ok) return a;
            auto b = check_node(*n.child_b);
            if (!b.ok) return b;
            auto ma = n.child_a->modules();
            auto mb = n.child_b->modules();
            const bool in_a = std::count(ma.begin(), ma.end(), n.at_module) > 0;
            const bool in_b = std::count(mb.begin(), mb.end(), n.at_module) > 0;
            if (!in_a || !in_b)
                return {false, "fuse module " + n.at_module + " must appear in both children"};
            return {};
        }
        case ProtocolNode::Kind::Distill: {
            auto a = check_node(*n.child_a);
            if (!a.ok) return a;
            auto b = check_node(*n.child_b);
            if (!b.ok) return b;
            auto target = n.child_a->modules();
            auto sacr = n.child_b->modules();
            if (n.op.size() != sacr.size())
                return {false, "distill operator length must match the sacrificial module count"};
            for (size_t i = 0; i < sacr.size(); ++i) {
                if (!std::count(target.begin(), target.end(), sacr[i]))
                    return {false,
                            "distill sacrificial module " + sacr[i] + " not in target support"};
                if (n.op.op(i) == Pauli::I)
                    return {false, "distill operator must act on every sacrificial module"};
            }
            return {};
        }
    }
    return {false, "corrupt node"};
}

} // namespace

ProtocolViolation validate(const Protocol& protocol) {
    if (!protocol.root) return {false, "empty protocol"};
    auto r = check_node(*protocol.root);
    if (!r.ok) return r;
    if (protocol.max_aux_per_module > 2) {
        Occupancy occ;
        occupancy_walk(*protocol.root, occ, false);
        for (auto& [m, c] : occ.peak)
            if (c > 2)
                return {false, "module " + m + " needs " + std::to_string(c) +
                                   " simultaneous memory qubits (limit 2)"};
    }
    return {};
}

// --- waiting-time distributions -----------------------------------------------

namespace {

// Discrete completion-time distribution on an integer grid of t_link bins.
// Supports the two composition rules needed here: sequential start (sum) and
// simultaneous start (max), both between independent subtrees.
struct DurationDist {
    double bin = 1.0;          // t_link units per bin
    double offset = 0.0;       // deterministic additive part, t_link units
    std::vector<double> probs; // probs[i]: attempt part equals (i+1) bins

    static constexpr size_t kMaxBins = 8192;

    static DurationDist geometric(double p, double attempt_duration) {
        if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("p_link must be in (0,1]");
        DurationDist d;
        d.bin = attempt_duration;
        double tail = 1.0;
        while (tail > 1e-12 && d.probs.size() < 2'000'000) {
            d.probs.push_back(tail * p);
            tail *= (1.0 - p);
        }
        if (!d.probs.empty()) d.probs.back() += tail; // fold the residual tail
        d.compact();
        return d;
    }

    void compact() {
        while (probs.size() > kMaxBins) {
            std::vector<double> half((probs.size() + 1) / 2, 0.0);
            for (size_t i = 0; i < probs.size(); ++i) half[i / 2] += probs[i];
            probs = std::move(half);
            bin *= 2.0;
        }
    }

    double mean() const {
        double m = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) m += probs[i] * double(i + 1);
        return m * bin + offset;
    }

    // fold the deterministic offset into the grid (rounded)
    void fold_offset() {
        const long shift = std::lround(offset / bin);
        if (shift > 0) probs.insert(probs.begin(), size_t(shift), 0.0);
        offset = 0.0;
        compact();
    }

    void align_with(DurationDist& other) {
        fold_offset();
        other.fold_offset();
        while (bin < other.bin - 1e-12) coarsen();
        while (other.bin < bin - 1e-12) other.coarsen();
    }

    void coarsen() {
        std::vector<double> half((probs.size() + 1) / 2, 0.0);
        for (size_t i = 0; i < probs.size(); ++i) half[i / 2] += probs[i];
        probs = std::move(half);
        bin *= 2.0;
    }
};

DurationDist seq(DurationDist a, DurationDist b) {
    a.align_with(b);
    std::vector<double> out(a.probs.size() + b.probs.size(), 0.0);
    for (size_t i = 0; i < a.probs.size(); ++i) {
        if (a.probs[i] == 0.0) continue;
        for (size_t j = 0; j < b.probs.size(); ++j) out[i + j + 1] += a.probs[i] * b.probs[j];
    }
    DurationDist d;
    d.bin = a.bin;
    d.offset = a.offset + b.offset;
    d.probs = std::move(out);
    d.compact();
    return d;
}

DurationDist par(DurationDist a, DurationDist b) {
    a.align_with(b);
    const size_t n = std::max(a.probs.size(), b.probs.size());
    std::vector<double> fa(n, 0.0), fb(n, 0.0);
    double ca = 0, cb = 0;
    for (size_t i = 0; i < n; ++i) {
        if (i < a.probs.size()) ca += a.probs[i];
        if (i < b.probs.size()) cb += b.probs[i];
        fa[i] = ca;
        fb[i] = cb;
    }
    DurationDist d;
    d.bin = a.bin;
    d.probs.resize(n);
    double prev = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double f = fa[i] * fb[i];
        d.probs[i] = f - prev;
        prev = f;
    }
    d.compact();
    return d;
}

bool modules_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    for (const auto& m : a)
        if (std::count(b.begin(), b.end(), m)) return true;
    return false;
}

struct TimingModel {
    OperationTimes times;
    bool dd = false;
    double dd_time = 0.0; // t_link units

    double two_qubit(double base) const { return dd ? dd_time : base; }
    double t_cx() const { return two_qubit(times.t_cx); }
    double t_cz() const { return two_qubit(times.t_cz); }
    double t_swap() const { return two_qubit(times.t_swap); }
};

TimingModel make_timing(const OperationTimes& times, const CoherenceSet* coh) {
    TimingModel tm;
    tm.times = times;
    if (coh && coh->dd_enabled) {
        tm.dd = true;
        tm.dd_time = coh->dd_gate_time() / coh->t_link_s;
    }
    return tm;
}

DurationDist duration_walk(const ProtocolNode& n, double p_link, double attempt,
                           const TimingModel& tm, bool store_in_memory = true) {
    switch (n.kind) {
        case ProtocolNode::Kind::CreateLink: {
            DurationDist d = DurationDist::geometric(p_link, attempt);
            if (store_in_memory) d.offset += tm.t_swap();
            return d;
        }
        case ProtocolNode::Kind::Fuse: {
            DurationDist a = duration_walk(*n.child_a, p_link, attempt, tm);
            DurationDist b = duration_walk(*n.child_b, p_link, attempt, tm);
            DurationDist both = modules_overlap(n.child_a->modules(), n.child_b->modules())
                                    ? seq(std::move(a), std::move(b))
                                    : par(std::move(a), std::move(b));
            both.offset += tm.t_cx() + tm.t_swap() + tm.times.t_meas;
            return both;
        }
        case ProtocolNode::Kind::Distill: {
            DurationDist a = duration_walk(*n.child_a, p_link, attempt, tm);
            const bool comm = n.child_b->kind == ProtocolNode::Kind::CreateLink;
            DurationDist b = duration_walk(*n.child_b, p_link, attempt, tm, !comm);
            DurationDist both = seq(std::move(a), std::move(b));
            both.offset += std::max(tm.t_cx(), tm.t_cz()) + tm.times.t_single_comm +
                           tm.times.t_meas;
            return both;
        }
    }
    throw std::logic_error("corrupt node");
}

} // namespace

double expected_duration(const Protocol& protocol, double p_link, const OperationTimes& times) {
    return expected_duration(protocol, p_link, times, resolve_coherence_set("Set-3"));
}

double expected_duration(const Protocol& protocol, double p_link, const OperationTimes& times,
                         const CoherenceSet& coherence) {
    if (!protocol.root) throw std::invalid_argument("empty protocol");
    TimingModel tm = make_timing(times, &coherence);
    return duration_walk(*protocol.root, p_link, 1.0, tm).mean();
}

// --- execution ----------------------------------------------------------------

KrausChannel swap_store_channel(double p_g) {
    // tracing the fresh ancilla out of SWAP + two-qubit depolarizing leaves a
    // single-qubit depolarizing channel with q = (4/5) p_g
    return depolarizing_1q(0.8 * p_g);
}

namespace {

struct EvalState {
    DensityMatrix rho;
    std::vector<std::string> mods; // module label per qubit
    DurationDist dist;
    double p_success = 1.0;

    int find_qubit(const std::string& m) const {
        for (size_t i = 0; i < mods.size(); ++i)
            if (mods[i] == m) return int(i);
        throw std::runtime_error("no qubit at module " + m);
    }
};

struct Executor {
    const SchemeResult* bell;
    CircuitNoise noise;
    TimingModel tm;
    const CoherenceSet* coh;

    void wait(EvalState& st, double t, const std::vector<std::string>& attempting) const {
        if (t <= 0) return;
        for (size_t q = 0; q < st.mods.size(); ++q) {
            const bool link_active =
                std::count(attempting.begin(), attempting.end(), st.mods[q]) > 0;
            decohere_tlink(st.rho, int(q), t, link_active);
        }
    }

    void decohere_tlink(DensityMatrix& rho, int q, double t_tlink, bool link_active) const {
        const double t = coh->absolute ? t_tlink * coh->t_link_s : t_tlink;
        const double T1 = link_active ? coh->t1_link : coh->t1_idle;
        const double T2 = link_active ? coh->t2_link : coh->t2_idle;
        decohere(rho, q, t, T1, T2);
    }

    void gate_window(EvalState& st, double t) const { wait(st, t, {}); }

    // measure qubit q in Z; returns (outcome0 branch, outcome1 branch) with the
    // qubit traced out
    std::pair<DensityMatrix, DensityMatrix> measure_z(EvalState& st, int q) const {
        std::vector<int> keep;
        for (int i = 0; i < st.rho.n_qubits(); ++i)
            if (i != q) keep.push_back(i);
        DensityMatrix b0 = st.rho, b1 = st.rho;
        b0.apply_operator(gates::projector0(), std::array{q});
        b1.apply_operator(gates::projector1(), std::array{q});
        auto out = std::pair{b0.partial_trace_keep(keep), b1.partial_trace_keep(keep)};
        st.mods.erase(st.mods.begin() + q);
        return out;
    }

    EvalState eval(const ProtocolNode& n, bool store_in_memory) const {
        switch (n.kind) {
            case ProtocolNode::Kind::CreateLink: {
                EvalState st;
                st.rho = bell->state;
                st.mods = {n.module_a, n.module_b};
                if (n.module_b < n.module_a) {
                    st.rho.apply_operator(gates::SWAP, std::array{0, 1});
                    std::swap(st.mods[0], st.mods[1]);
                }
                st.dist = DurationDist::geometric(bell->p_succ, bell->duration);
                if (store_in_memory) {
                    // park the pair in memory; sacrificial links stay on the
                    // communication qubits instead
                    st.dist.offset += tm.t_swap();
                    const KrausChannel store = swap_store_channel(noise.p_g);
                    apply_channel_in_place(st.rho, store, std::array{0});
                    apply_channel_in_place(st.rho, store, std::array{1});
                    gate_window(st, tm.t_swap());
                }
                return st;
            }
            case ProtocolNode::Kind::Fuse:
                return eval_fuse(n);
            case ProtocolNode::Kind::Distill:
                return eval_distill(n);
        }
        throw std::logic_error("corrupt node");
    }

    EvalState eval_fuse(const ProtocolNode& n) const {
        EvalState a = eval(*n.child_a, true);
        EvalState b = eval(*n.child_b, true);
        const auto mods_a = n.child_a->modules();
        const auto mods_b = n.child_b->modules();
        const bool sequential = modules_overlap(mods_a, mods_b);

        const double ea = a.dist.mean(), eb = b.dist.mean();
        if (sequential) {
            wait(a, eb, mods_b);
        } else {
            if (ea < eb)
                wait(a, eb - ea, {});
            else
                wait(b, ea - eb, {});
        }

        EvalState st;
        st.rho = a.rho.tensor(b.rho);
        st.mods = a.mods;
        st.mods.insert(st.mods.end(), b.mods.begin(), b.mods.end());
        st.dist = sequential ? seq(a.dist, b.dist) : par(a.dist, b.dist);
        st.p_success = a.p_success * b.p_success;

        const int qa = st.find_qubit(n.at_module);
        int qb = -1;
        for (size_t i = a.mods.size(); i < st.mods.size(); ++i)
            if (st.mods[i] == n.at_module) qb = int(i);
        if (qb < 0) throw std::runtime_error("fuse module missing in second child");

        // CNOT between the two co-located qubits, then measure the second
        st.rho.apply_operator(gates::CNOT, std::array{qa, qb});
        apply_channel_in_place(st.rho, depolarizing_2q(noise.p_g), std::array{qa, qb});
        gate_window(st, tm.t_cx());

        apply_channel_in_place(st.rho, swap_store_channel(noise.p_g), std::array{qb});
        gate_window(st, tm.t_swap());
        gate_window(st, tm.times.t_meas);

        // correction targets: the remaining qubits of child b
        std::vector<int> b_rest;
        for (size_t i = a.mods.size(); i < st.mods.size(); ++i)
            if (int(i) != qb) b_rest.push_back(int(i));

        auto [br0, br1] = measure_z(st, qb);
        for (int& q : b_rest)
            if (q > qb) --q;

        const double pm = noise.p_m;
        Matrix m0 = (1 - pm) * br0.matrix() + pm * br1.matrix();
        Matrix m1 = (1 - pm) * br1.matrix() + pm * br0.matrix();
        DensityMatrix corr(st.rho.n_qubits() - 1, std::move(m1));
        for (int q : b_rest) {
            corr.apply_operator(gates::X, std::array{q});
            apply_channel_in_place(corr, depolarizing_1q(noise.p_g), std::array{q});
        }
        st.rho = DensityMatrix(corr.n_qubits(), m0 + corr.matrix());

        st.dist.offset += tm.t_cx() + tm.t_swap() + tm.times.t_meas;
        return st;
    }

    EvalState eval_distill(const ProtocolNode& n) const {
        EvalState target = eval(*n.child_a, true);
        const bool comm_sacrifice = n.child_b->kind == ProtocolNode::Kind::CreateLink;
        EvalState sacr = eval(*n.child_b, !comm_sacrifice);
        const auto sacr_mods = n.child_b->modules();

        // the target is parked while the sacrificial state is generated
        wait(target, sacr.dist.mean(), sacr_mods);

        EvalState st;
        st.rho = target.rho.tensor(sacr.rho);
        st.mods = target.mods;
        st.mods.insert(st.mods.end(), sacr.mods.begin(), sacr.mods.end());
        st.dist = seq(target.dist, sacr.dist);
        st.p_success = target.p_success * sacr.p_success;

        const size_t n_target = target.mods.size();

        // controlled-P from each sacrificial qubit onto its co-located target
        double gate_t = 0.0;
        for (size_t i = 0; i < sacr_mods.size(); ++i) {
            const std::string& m = sacr_mods[i];
            int tq = -1, sq = -1;
            for (size_t q = 0; q < n_target; ++q)
                if (st.mods[q] == m) tq = int(q);
            for (size_t q = n_target; q < st.mods.size(); ++q)
                if (st.mods[q] == m) sq = int(q);
            if (tq < 0 || sq < 0) throw std::runtime_error("distill qubit lookup failed");
            switch (n.op.op(i)) {
                case Pauli::X:
                    st.rho.apply_operator(gates::CNOT, std::array{sq, tq});
                    gate_t = std::max(gate_t, tm.t_cx());
                    break;
                case Pauli::Z:
                    st.rho.apply_operator(gates::CZ, std::array{sq, tq});
                    gate_t = std::max(gate_t, tm.t_cz());
                    break;
                case Pauli::Y: {
                    Matrix cy = Matrix::Identity(4, 4);
                    cy(2, 2) = 0;
                    cy(3, 3) = 0;
                    cy(2, 3) = Complex(0, -1);
                    cy(3, 2) = Complex(0, 1);
                    st.rho.apply_operator(cy, std::array{sq, tq});
                    gate_t = std::max(gate_t, tm.two_qubit(tm.times.t_ciy));
                    break;
                }
                case Pauli::I:
                    throw std::runtime_error("distill operator has identity support");
            }
            apply_channel_in_place(st.rho, depolarizing_2q(noise.p_g), std::array{sq, tq});
        }
        gate_window(st, gate_t);

        // X-basis measurement of every sacrificial qubit
        for (size_t q = n_target; q < st.mods.size(); ++q) {
            st.rho.apply_operator(gates::H, std::array{int(q)});
            apply_channel_in_place(st.rho, depolarizing_1q(noise.p_g), std::array{int(q)});
        }
        gate_window(st, tm.times.t_single_comm);
        gate_window(st, tm.times.t_meas);

        // accumulate parity branches while tracing the measured qubits
        DensityMatrix even = st.rho;
        DensityMatrix odd(st.rho.n_qubits(), Matrix::Zero(st.rho.dim(), st.rho.dim()));
        int remaining = int(st.mods.size());
        while (remaining > int(n_target)) {
            const int q = remaining - 1;
            std::vector<int> keep;
            for (int i = 0; i < q; ++i) keep.push_back(i);
            DensityMatrix e0 = even, e1 = even, o0 = odd, o1 = odd;
            e0.apply_operator(gates::projector0(), std::array{q});
            e1.apply_operator(gates::projector1(), std::array{q});
            o0.apply_operator(gates::projector0(), std::array{q});
            o1.apply_operator(gates::projector1(), std::array{q});
            even = DensityMatrix(q, e0.partial_trace_keep(keep).matrix() +
                                        o1.partial_trace_keep(keep).matrix());
            odd = DensityMatrix(q, e1.partial_trace_keep(keep).matrix() +
                                       o0.partial_trace_keep(keep).matrix());
            --remaining;
        }
        st.mods.resize(n_target);

        // recorded parity flips if an odd number of measurement errors occur
        const double f = 2.0 * noise.p_m * (1.0 - noise.p_m);
        Matrix kept = (1.0 - f) * even.matrix() + f * odd.matrix();
        DensityMatrix out(int(n_target), std::move(kept));
        const double p_keep = out.trace_real();
        if (p_keep <= 0) throw std::runtime_error("distillation annihilated the state");
        out.normalize();
        st.rho = std::move(out);
        st.p_success *= p_keep;

        st.dist.offset += gate_t + tm.times.t_single_comm + tm.times.t_meas;
        return st;
    }
};

} // namespace

SchemeResult execute(const Protocol& protocol, const SchemeResult& bell,
                     const CircuitNoise& noise, const OperationTimes& times,
                     const CoherenceSet& coherence) {
    auto v = validate(protocol);
    if (!v.ok) throw std::invalid_argument("invalid protocol: " + v.message);
    if (!(bell.p_succ > 0)) throw std::invalid_argument("bell p_succ must be positive");

    Executor ex{&bell, noise, make_timing(times, &coherence), &coherence};
    EvalState st = ex.eval(*protocol.root, true);

    // order output qubits by module label
    for (size_t i = 0; i + 1 < st.mods.size(); ++i)
        for (size_t j = 0; j + 1 < st.mods.size() - i; ++j)
            if (st.mods[j + 1] < st.mods[j]) {
                st.rho.apply_operator(gates::SWAP, std::array{int(j), int(j + 1)});
                std::swap(st.mods[j], st.mods[j + 1]);
            }

    SchemeResult res;
    const double tr = st.rho.trace_real();
    if (tr > 0) st.rho.normalize();
    res.state = std::move(st.rho);
    res.p_succ = st.p_success;
    res.duration = st.dist.mean();
    return res;
}

} // namespace dqec
