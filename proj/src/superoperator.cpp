#include "dqec/superoperator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dqec {

std::string architecture_name(Architecture a) {
    return a == Architecture::WT4 ? "WT4" : "WT3";
}

Architecture architecture_from_name(const std::string& s) {
    if (s == "WT4") return Architecture::WT4;
    if (s == "WT3") return Architecture::WT3;
    throw std::invalid_argument("unknown architecture: " + s);
}

SuperoperatorTable::SuperoperatorTable(Architecture arch) : arch_(arch) {
    rows_.resize(kRowCount);
    for (uint32_t e = 0; e < kErrorCount; ++e)
        for (int g = 0; g < 2; ++g)
            for (int m = 0; m < 2; ++m) {
                auto& r = rows_[row_index(e, g == 0, m == 1)];
                r.error = PauliString::from_index(e, 4);
                r.ghz_success = (g == 0);
                r.meas_error = (m == 1);
            }
}

double SuperoperatorTable::column_sum(StabType type) const {
    double s = 0;
    for (const auto& r : rows_) s += type == StabType::Z ? r.p_plaquette : r.p_vertex;
    return s;
}

double SuperoperatorTable::idle_sum(bool ghz_success) const {
    double s = 0;
    for (const auto& r : rows_)
        if (r.ghz_success == ghz_success) s += r.p_idle;
    return s;
}

void SuperoperatorTable::check_normalization(double tol) const {
    for (StabType t : {StabType::Z, StabType::X}) {
        const double s = column_sum(t);
        if (std::abs(s - 1.0) > tol)
            throw std::runtime_error("superoperator column sum violates normalization: " +
                                     std::to_string(s));
    }
    for (const auto& r : rows_)
        if (r.p_plaquette < -1e-12 || r.p_vertex < -1e-12 || r.p_idle < -1e-12)
            throw std::runtime_error("negative probability in superoperator table");
    if (has_idle()) {
        double st = 0, sf = 0;
        for (const auto& r : rows_) (r.ghz_success ? st : sf) += r.p_idle;
        if (std::abs(st - 1.0) > tol || std::abs(sf - 1.0) > tol)
            throw std::runtime_error("idle column sums violate normalization");
    }
}

void SuperoperatorTable::finalize() {
    auto build = [&](auto get) {
        std::vector<double> cum(rows_.size());
        double acc = 0;
        for (size_t i = 0; i < rows_.size(); ++i) {
            acc += std::max(0.0, get(rows_[i]));
            cum[i] = acc;
        }
        return cum;
    };
    cum_plaquette_ = build([](const SuperoperatorRow& r) { return r.p_plaquette; });
    cum_vertex_ = build([](const SuperoperatorRow& r) { return r.p_vertex; });
    if (has_idle()) {
        cum_idle_true_.assign(kErrorCount, 0.0);
        cum_idle_false_.assign(kErrorCount, 0.0);
        double at = 0, af = 0;
        for (uint32_t e = 0; e < kErrorCount; ++e) {
            for (int m = 0; m < 2; ++m) {
                at += std::max(0.0, rows_[row_index(e, true, m == 1)].p_idle);
                af += std::max(0.0, rows_[row_index(e, false, m == 1)].p_idle);
            }
            cum_idle_true_[e] = at;
            cum_idle_false_[e] = af;
        }
    }
}

namespace {

int sample_cum(const std::vector<double>& cum, double u) {
    const double target = u * cum.back();
    auto it = std::lower_bound(cum.begin(), cum.end(), target);
    if (it == cum.end()) --it;
    return int(it - cum.begin());
}

} // namespace

int SuperoperatorTable::sample(StabType type, double u) const {
    return sample_cum(type == StabType::Z ? cum_plaquette_ : cum_vertex_, u);
}

uint32_t SuperoperatorTable::sample_idle(bool ghz_success, double u) const {
    return uint32_t(sample_cum(ghz_success ? cum_idle_true_ : cum_idle_false_, u));
}

// --- Choi-state machinery ------------------------------------------------------

DensityMatrix build_choi_input(int n_data) {
    if (n_data < 1 || n_data > 4) throw std::invalid_argument("choi input supports 1..4 pairs");
    const Eigen::Index dn = Eigen::Index(1) << n_data;
    Vector psi = Vector::Zero(dn * dn);
    for (Eigen::Index i = 0; i < dn; ++i) psi(i * dn + i) = 1.0 / std::sqrt(double(dn));
    return DensityMatrix::from_pure(2 * n_data, psi);
}

int attempts_within_cutoff(double t_cut, double attempt_duration) {
    if (!(attempt_duration > 0)) throw std::invalid_argument("attempt duration must be positive");
    return int(std::floor(t_cut / attempt_duration + 1e-12));
}

double ghz_success_within_cutoff(double p_succ, double t_cut, double attempt_duration) {
    const int k = attempts_within_cutoff(t_cut, attempt_duration);
    if (k < 1) throw std::invalid_argument("cut-off time below one attempt duration");
    if (p_succ >= 1.0) return 1.0;
    return 1.0 - std::pow(1.0 - p_succ, k);
}

namespace {

struct ModuleGate {
    int comm;                  // comm qubit index within the GHZ register
    std::vector<int> data;     // data qubits gated from this comm, in order
};

// module layout of the stabilizer unit cell, data qubits fixed as 0..3
std::vector<ModuleGate> cell_layout(Architecture arch) {
    if (arch == Architecture::WT4)
        return {{0, {0}}, {1, {1}}, {2, {2}}, {3, {3}}};
    // WT3: module A holds data 0 and 1 and gates them over two windows
    return {{0, {0, 1}}, {1, {2}}, {2, {3}}};
}

int ghz_size(Architecture arch) { return arch == Architecture::WT4 ? 4 : 3; }

void decohere_set(DensityMatrix& rho, const std::vector<int>& qubits, double t_tlink,
                  const CoherenceSet& coh, bool link_active) {
    if (t_tlink <= 0) return;
    const double t = coh.absolute ? t_tlink * coh.t_link_s : t_tlink;
    const double T1 = link_active ? coh.t1_link : coh.t1_idle;
    const double T2 = link_active ? coh.t2_link : coh.t2_idle;
    for (int q : qubits) decohere(rho, q, t, T1, T2);
}

// truncated-geometric weights of success at attempt k = 1..K
std::pair<std::vector<double>, std::vector<double>> success_waiting(double p, int k_max,
                                                                    double attempt) {
    std::vector<double> weights, times;
    double tail = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        weights.push_back(tail * p);
        times.push_back(k * attempt);
        tail *= (1.0 - p);
        if (tail < 1e-300 || (weights.back() < 1e-16 && k > 4)) break;
    }
    return {weights, times};
}

} // namespace

StabilizerBranches simulate_stabilizer(const StabilizerConfig& cfg, const SchemeResult& ghz) {
    const int n_ghz = ghz_size(cfg.arch);
    if (ghz.state.n_qubits() != n_ghz)
        throw std::invalid_argument("GHZ qubit count does not match the architecture");
    const int k_max = attempts_within_cutoff(cfg.t_cut, ghz.duration);
    if (k_max < 1) throw std::invalid_argument("cut-off time below one attempt duration");

    StabilizerBranches out;
    out.p_ghz = ghz_success_within_cutoff(ghz.p_succ, cfg.t_cut, ghz.duration);

    const std::vector<int> data = {0, 1, 2, 3};
    const auto layout = cell_layout(cfg.arch);
    const double t_gate = cfg.type == StabType::Z ? cfg.times.t_cz : cfg.times.t_cx;
    const int windows = cfg.arch == Architecture::WT4 ? 1 : 2;

    // --- success branch ---
    {
        DensityMatrix rho = build_choi_input(4);
        if (cfg.inject)
            apply_channel_in_place(rho, *cfg.inject, std::array{cfg.inject_qubit});

        // data qubits decohere while the cell waits for its GHZ state,
        // averaged over the truncated-geometric success time
        {
            auto [w, t] = success_waiting(ghz.p_succ, k_max, ghz.duration * cfg.times.t_link);
            const double scale = cfg.coherence.absolute ? cfg.coherence.t_link_s : 1.0;
            for (auto& ti : t) ti *= scale;
            const auto avg =
                average_decoherence(w, t, cfg.coherence.t1_link, cfg.coherence.t2_link);
            for (int q : data) apply_gad_pd_fast(rho, q, avg.gamma1, avg.gamma2);
        }

        rho = rho.tensor(ghz.state); // comm qubits appended at 8..8+n-1

        std::vector<int> circuit_qubits = {0, 1, 2, 3};
        for (int c = 0; c < n_ghz; ++c) circuit_qubits.push_back(8 + c);

        // controlled-Z/X gates; WT3's double-data module uses one window per
        // data qubit, everyone else idles along
        for (int w = 0; w < windows; ++w) {
            for (const auto& mod : layout) {
                if (w >= int(mod.data.size())) continue;
                const int comm = 8 + mod.comm;
                const int dat = mod.data[w];
                if (cfg.type == StabType::Z)
                    rho.apply_cz(comm, dat);
                else
                    rho.apply_cnot(comm, dat);
                apply_depolarizing_fast(rho, cfg.noise.p_g, std::array{comm, dat});
            }
            decohere_set(rho, circuit_qubits, t_gate, cfg.coherence, false);
        }
        decohere_set(rho, data, cfg.times.t_meas, cfg.coherence, false);

        // X-basis measurement of every comm qubit with flip probability p_m,
        // tracked as recorded-parity branches
        DensityMatrix even = std::move(rho);
        DensityMatrix odd(even.n_qubits(), Matrix::Zero(even.dim(), even.dim()));
        const double pm = cfg.noise.p_m;
        for (int c = n_ghz - 1; c >= 0; --c) {
            const int q = 8 + c;
            auto [ep, em] = even.measure_x_and_remove(q);
            auto [op, om] = odd.measure_x_and_remove(q);
            even = DensityMatrix(ep.n_qubits(),
                                 (1 - pm) * ep.matrix() + pm * em.matrix() +
                                     (1 - pm) * om.matrix() + pm * op.matrix());
            odd = DensityMatrix(ep.n_qubits(),
                                (1 - pm) * em.matrix() + pm * ep.matrix() +
                                    (1 - pm) * op.matrix() + pm * om.matrix());
        }
        out.success_even = std::move(even);
        out.success_odd = std::move(odd);
    }

    // --- failure branch: decoherence only, for the full cut-off window ---
    {
        DensityMatrix rho = build_choi_input(4);
        if (cfg.inject)
            apply_channel_in_place(rho, *cfg.inject, std::array{cfg.inject_qubit});
        decohere_set(rho, data, cfg.t_cut * cfg.times.t_link, cfg.coherence, true);
        out.fail = std::move(rho);
    }
    return out;
}

// --- decomposition --------------------------------------------------------------

namespace {

Matrix pauli_string_matrix(uint32_t idx) {
    Matrix m = Matrix::Identity(1, 1);
    PauliString p = PauliString::from_index(idx, 4);
    for (size_t q = 0; q < 4; ++q) {
        const Matrix g = gates::pauli_matrix(p.op(q));
        Matrix next(m.rows() * 2, m.cols() * 2);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                next.block(i * 2, j * 2, 2, 2) = m(i, j) * g;
        m = std::move(next);
    }
    return m;
}

Matrix stabilizer_operator(StabType type) {
    return pauli_string_matrix(type == StabType::Z ? PauliString("ZZZZ").index()
                                                   : PauliString("XXXX").index());
}

bool commutes_with_stabilizer(uint32_t idx, StabType type) {
    PauliString e = PauliString::from_index(idx, 4);
    PauliString s(type == StabType::Z ? "ZZZZ" : "XXXX");
    return e.commutes_with(s);
}

// basis vectors sqrt(2) (E Pi_sigma x I)|Phi>, cached per stabilizer type
struct DecompositionBasis {
    // [error_idx][sigma(0:+,1:-)] -> 256-dim vector
    std::vector<std::array<Vector, 2>> vectors;
    std::vector<bool> canonical;
    std::vector<bool> commutes;
};

const DecompositionBasis& decomposition_basis(StabType type) {
    static DecompositionBasis cache[2];
    DecompositionBasis& b = cache[type == StabType::Z ? 0 : 1];
    if (!b.vectors.empty()) return b;

    const Matrix stab = stabilizer_operator(type);
    const Matrix id = Matrix::Identity(16, 16);
    b.vectors.resize(256);
    b.canonical.resize(256);
    b.commutes.resize(256);
    for (uint32_t e = 0; e < 256; ++e) {
        b.canonical[e] = canonical_error_index(e, type) == e;
        b.commutes[e] = commutes_with_stabilizer(e, type);
        const Matrix em = pauli_string_matrix(e);
        for (int s = 0; s < 2; ++s) {
            const double sigma = s == 0 ? 1.0 : -1.0;
            const Matrix k = em * ((id + sigma * stab) / 2.0);
            Vector psi(256);
            for (Eigen::Index x = 0; x < 16; ++x)
                for (Eigen::Index i = 0; i < 16; ++i)
                    psi(x * 16 + i) = k(x, i) / 4.0;
            b.vectors[e][s] = std::sqrt(2.0) * psi;
        }
    }
    return b;
}

} // namespace

uint32_t canonical_error_index(uint32_t error_idx, StabType type) {
    PauliString e = PauliString::from_index(error_idx, 4);
    PauliString s(type == StabType::Z ? "ZZZZ" : "XXXX");
    PauliString alt = e.times(s);
    if (alt.weight() < e.weight()) return alt.index();
    if (alt.weight() == e.weight() && alt.index() < error_idx) return alt.index();
    return error_idx;
}

std::vector<double> decompose_success(const StabilizerBranches& branches, StabType type) {
    const auto& basis = decomposition_basis(type);
    std::vector<double> probs(SuperoperatorTable::kRowCount, 0.0);

    const DensityMatrix* states[2] = {&branches.success_even, &branches.success_odd};
    for (int o = 0; o < 2; ++o) { // recorded outcome +1 / -1
        const double rec = o == 0 ? 1.0 : -1.0;
        for (uint32_t e = 0; e < 256; ++e) {
            if (!basis.canonical[e]) continue;
            const double lambda = basis.commutes[e] ? 1.0 : -1.0;
            for (int s = 0; s < 2; ++s) {
                const double sigma = s == 0 ? 1.0 : -1.0;
                const double q = std::max(0.0, states[o]->overlap(basis.vectors[e][s]));
                const bool meas_error = rec != sigma * lambda;
                probs[SuperoperatorTable::row_index(e, true, meas_error)] += q;
            }
        }
    }
    return probs;
}

std::vector<double> decompose_failure(const DensityMatrix& fail) {
    std::vector<double> probs(256, 0.0);
    const Matrix id = Matrix::Identity(16, 16);
    for (uint32_t e = 0; e < 256; ++e) {
        const Matrix em = pauli_string_matrix(e);
        Vector psi(256);
        for (Eigen::Index x = 0; x < 16; ++x)
            for (Eigen::Index i = 0; i < 16; ++i) psi(x * 16 + i) = em(x, i) / 4.0;
        probs[e] = std::max(0.0, fail.overlap(psi));
    }
    return probs;
}

// --- WT3 idle column -------------------------------------------------------------

std::vector<double> wt3_idle_column(const CoherenceSet& coherence,
                                    const Wt3IdleDurations& dur) {
    const double scale = coherence.absolute ? coherence.t_link_s : 1.0;
    auto twirl = [&](double t_link_active, double t_idle) {
        auto active = decoherence_pauli_probs(t_link_active * scale, coherence.t1_link,
                                              coherence.t2_link);
        auto idle =
            decoherence_pauli_probs(t_idle * scale, coherence.t1_idle, coherence.t2_idle);
        // compose the two Pauli channels
        std::array<double, 4> out{};
        static constexpr uint8_t to_xz[4] = {0b00, 0b10, 0b11, 0b01};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                int c = 0;
                const uint8_t xz = to_xz[a] ^ to_xz[b];
                for (int k = 0; k < 4; ++k)
                    if (to_xz[k] == xz) c = k;
                out[c] += active[a] * idle[b];
            }
        return out;
    };
    // active-idle qubits (5,6) wait at link times, fully idle (7,8) at idle
    // times; both idle through the gate/measurement windows
    const auto p_active = twirl(dur.t_active_idle, dur.t_windows);
    const auto p_idle = twirl(0.0, dur.t_full_idle + dur.t_windows);

    std::vector<double> dist(256, 0.0);
    for (uint32_t e = 0; e < 256; ++e) {
        PauliString p = PauliString::from_index(e, 4);
        double w = 1.0;
        for (int q = 0; q < 4; ++q) {
            const auto& probs = q < 2 ? p_active : p_idle;
            w *= probs[int(p.op(q))];
        }
        dist[e] = w;
    }
    return dist;
}

// --- table assembly ---------------------------------------------------------------

SuperoperatorTable build_table(const StabilizerConfig& cfg, const SchemeResult& ghz) {
    SuperoperatorTable table(cfg.arch);

    double p_ghz = 0.0;
    for (StabType type : {StabType::Z, StabType::X}) {
        StabilizerConfig c = cfg;
        c.type = type;
        StabilizerBranches br = simulate_stabilizer(c, ghz);
        p_ghz = br.p_ghz;
        const auto succ = decompose_success(br, type);
        const auto fail = decompose_failure(br.fail);
        for (uint32_t e = 0; e < 256; ++e)
            for (int m = 0; m < 2; ++m) {
                const int ri_t = SuperoperatorTable::row_index(e, true, m == 1);
                const int ri_f = SuperoperatorTable::row_index(e, false, m == 1);
                double& pt = type == StabType::Z ? table.row(ri_t).p_plaquette
                                                 : table.row(ri_t).p_vertex;
                double& pf = type == StabType::Z ? table.row(ri_f).p_plaquette
                                                 : table.row(ri_f).p_vertex;
                pt = br.p_ghz * succ[ri_t];
                // failed cells still accumulate their waiting noise; both
                // measurement-error flags carry the same weight
                pf = (1.0 - br.p_ghz) * fail[e] / 2.0;
            }
    }

    if (cfg.arch == Architecture::WT3) {
        const int k_max = attempts_within_cutoff(cfg.t_cut, ghz.duration);
        auto [w, t] = success_waiting(ghz.p_succ, k_max, ghz.duration * cfg.times.t_link);
        double wsum = 0, tmean = 0;
        for (size_t i = 0; i < w.size(); ++i) {
            wsum += w[i];
            tmean += w[i] * t[i];
        }
        tmean = wsum > 0 ? tmean / wsum : cfg.t_cut;
        const int windows = 2;
        const double t_gate = std::max(cfg.times.t_cz, cfg.times.t_cx);
        Wt3IdleDurations succ_dur{tmean, tmean, windows * t_gate + cfg.times.t_meas};
        Wt3IdleDurations fail_dur{cfg.t_cut * cfg.times.t_link, cfg.t_cut * cfg.times.t_link,
                                  0.0};
        const auto idle_succ = wt3_idle_column(cfg.coherence, succ_dur);
        const auto idle_fail = wt3_idle_column(cfg.coherence, fail_dur);
        for (uint32_t e = 0; e < 256; ++e)
            for (int m = 0; m < 2; ++m) {
                table.row(SuperoperatorTable::row_index(e, true, m == 1)).p_idle =
                    idle_succ[e] / 2.0;
                table.row(SuperoperatorTable::row_index(e, false, m == 1)).p_idle =
                    idle_fail[e] / 2.0;
            }
    }

    table.metadata()["architecture"] = architecture_name(cfg.arch);
    table.metadata()["p_g"] = std::to_string(cfg.noise.p_g);
    table.metadata()["p_m"] = std::to_string(cfg.noise.p_m);
    table.metadata()["t_cut"] = std::to_string(cfg.t_cut);
    table.metadata()["coherence_set"] = cfg.coherence.name;
    table.metadata()["p_ghz_within_cutoff"] = std::to_string(p_ghz);
    table.metadata()["ghz_p_succ"] = std::to_string(ghz.p_succ);
    table.metadata()["schema"] = "1";
    table.finalize();
    return table;
}

// --- serialization ------------------------------------------------------------------

void save_table(const SuperoperatorTable& table, const std::string& path) {
    table.check_normalization();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write table file: " + path);
    for (const auto& [k, v] : table.metadata()) out << "# " << k << "=" << v << "\n";
    out << "error,ghz_success,meas_error,p_plaquette,p_vertex";
    if (table.has_idle()) out << ",p_idle";
    out << "\n";
    char buf[80];
    for (const auto& r : table.rows()) {
        out << r.error.str() << ',' << (r.ghz_success ? 1 : 0) << ',' << (r.meas_error ? 1 : 0);
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.p_plaquette, r.p_vertex);
        out << buf;
        if (table.has_idle()) {
            std::snprintf(buf, sizeof buf, ",%.17g", r.p_idle);
            out << buf;
        }
        out << "\n";
    }
}

SuperoperatorTable load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open table file: " + path);

    std::map<std::string, std::string> metadata;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                while (!key.empty() && key.front() == ' ') key.erase(key.begin());
                metadata[key] = line.substr(eq + 1);
            }
            continue;
        }
        break;
    }
    const bool idle = line == "error,ghz_success,meas_error,p_plaquette,p_vertex,p_idle";
    if (!idle && line != "error,ghz_success,meas_error,p_plaquette,p_vertex")
        throw std::runtime_error("unrecognized table header: " + line);

    auto it = metadata.find("architecture");
    Architecture arch = idle ? Architecture::WT3 : Architecture::WT4;
    if (it != metadata.end()) arch = architecture_from_name(it->second);
    if ((arch == Architecture::WT3) != idle)
        throw std::runtime_error("table idle column does not match its architecture");

    SuperoperatorTable table(arch);
    table.metadata() = metadata;
    int count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string err, g, m, pp, pv, pi;
        if (!std::getline(ss, err, ',') || !std::getline(ss, g, ',') ||
            !std::getline(ss, m, ',') || !std::getline(ss, pp, ',') ||
            !std::getline(ss, pv, ','))
            throw std::runtime_error("malformed table row: " + line);
        if (idle && !std::getline(ss, pi, ','))
            throw std::runtime_error("missing idle column: " + line);
        PauliString e(err);
        if (e.size() != 4) throw std::runtime_error("error string must have length 4");
        const int ri = SuperoperatorTable::row_index(e.index(), g == "1", m == "1");
        auto& row = table.row(ri);
        row.p_plaquette = std::stod(pp);
        row.p_vertex = std::stod(pv);
        if (idle) row.p_idle = std::stod(pi);
        ++count;
    }
    if (count != SuperoperatorTable::kRowCount)
        throw std::runtime_error("table must contain exactly 1024 rows, found " +
                                 std::to_string(count));
    table.check_normalization();
    table.finalize();
    return table;
}

} // namespace dqec
