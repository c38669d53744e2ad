#include "dqec/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dqec {

namespace {

void check_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " out of [0,1]");
}

} // namespace

KrausChannel depolarizing_1q(double p) {
    check_prob(p, "depolarizing p");
    KrausChannel ch;
    ch.operators.push_back(std::sqrt(1.0 - p) * Matrix::Identity(2, 2));
    for (Pauli q : {Pauli::X, Pauli::Y, Pauli::Z})
        ch.operators.push_back(std::sqrt(p / 3.0) * gates::pauli_matrix(q));
    return ch;
}

KrausChannel depolarizing_2q(double p) {
    check_prob(p, "depolarizing p");
    KrausChannel ch;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const double w = (a == 0 && b == 0) ? 1.0 - p : p / 15.0;
            Matrix k(4, 4);
            const Matrix pa = gates::pauli_matrix(static_cast<Pauli>(a));
            const Matrix pb = gates::pauli_matrix(static_cast<Pauli>(b));
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) k.block(i * 2, j * 2, 2, 2) = pa(i, j) * pb;
            ch.operators.push_back(std::sqrt(w) * k);
        }
    return ch;
}

KrausChannel amplitude_damping(double eta) {
    check_prob(eta, "amplitude damping eta");
    KrausChannel ch;
    Matrix k1(2, 2), k2(2, 2);
    k1 << 1, 0, 0, std::sqrt(eta);
    k2 << 0, std::sqrt(1.0 - eta), 0, 0;
    ch.operators = {k1, k2};
    return ch;
}

KrausChannel generalized_amplitude_damping(double gamma1) {
    check_prob(gamma1, "GAD gamma1");
    const double s = 1.0 / std::sqrt(2.0);
    KrausChannel ch;
    Matrix k1(2, 2), k2(2, 2), k3(2, 2), k4(2, 2);
    k1 << 1, 0, 0, std::sqrt(1.0 - gamma1);
    k2 << 0, std::sqrt(gamma1), 0, 0;
    k3 << std::sqrt(1.0 - gamma1), 0, 0, 1;
    k4 << 0, 0, std::sqrt(gamma1), 0;
    ch.operators = {s * k1, s * k2, s * k3, s * k4};
    return ch;
}

KrausChannel phase_damping(double gamma2) {
    check_prob(gamma2, "PD gamma2");
    KrausChannel ch;
    Matrix k1(2, 2), k2(2, 2);
    k1 << 1, 0, 0, std::sqrt(1.0 - gamma2);
    k2 << 0, 0, 0, std::sqrt(gamma2);
    ch.operators = {k1, k2};
    return ch;
}

void decohere(DensityMatrix& rho, int qubit, double t, double T1, double T2) {
    if (t < 0) throw std::invalid_argument("negative decoherence time");
    if (!(T1 > 0) || !(T2 > 0)) throw std::invalid_argument("coherence times must be positive");
    if (t == 0) return;
    apply_gad_pd_fast(rho, qubit, 1.0 - std::exp(-t / T1), 1.0 - std::exp(-t / T2));
}

void apply_gad_pd_fast(DensityMatrix& rho, int qubit, double gamma1, double gamma2) {
    // GAD pulls populations toward I/2 at rate gamma1/2 per side and scales
    // coherences by sqrt(1-gamma1); PD scales coherences by sqrt(1-gamma2)
    if (gamma1 < 1e-16 && gamma2 < 1e-16) return;
    const double coh = std::sqrt(1.0 - gamma1) * std::sqrt(1.0 - gamma2);
    const double stay = 1.0 - gamma1 / 2.0, hop = gamma1 / 2.0;
    const Eigen::Index bit = Eigen::Index(1) << (rho.n_qubits() - 1 - qubit);
    const Eigen::Index d = rho.dim();
    Matrix& m = rho.matrix();
    // walk the 2x2 block structure of the target bit in place
    for (Eigen::Index ch = 0; ch < d; ch += (bit << 1))
        for (Eigen::Index cl = 0; cl < bit; ++cl) {
            const Eigen::Index c0 = ch + cl, c1 = c0 + bit;
            for (Eigen::Index rh = 0; rh < d; rh += (bit << 1))
                for (Eigen::Index rl = 0; rl < bit; ++rl) {
                    const Eigen::Index r0 = rh + rl, r1 = r0 + bit;
                    const Complex a = m(r0, c0), dd = m(r1, c1);
                    m(r0, c0) = stay * a + hop * dd;
                    m(r1, c1) = stay * dd + hop * a;
                    m(r1, c0) *= coh;
                    m(r0, c1) *= coh;
                }
        }
}

void apply_depolarizing_fast(DensityMatrix& rho, double p, std::span<const int> targets) {
    check_prob(p, "depolarizing p");
    // uniform-Pauli mixing replaces the target subsystem by I/2^k with
    // probability 4^k p / (4^k - 1)
    const double dim = std::pow(4.0, double(targets.size()));
    const double mix = p * dim / (dim - 1.0);
    const double keep = 1.0 - mix;
    std::vector<int> others;
    for (int q = 0; q < rho.n_qubits(); ++q)
        if (std::find(targets.begin(), targets.end(), q) == targets.end()) others.push_back(q);
    DensityMatrix reduced = rho.partial_trace_keep(others);
    // embed I/2^k (x) reduced back in the original qubit order
    const Eigen::Index d = rho.dim();
    Eigen::Index tmask = 0;
    for (int t : targets) tmask |= Eigen::Index(1) << (rho.n_qubits() - 1 - t);
    std::vector<Eigen::Index> compress(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::Index out = 0;
        for (int q : others) {
            out <<= 1;
            if (i & (Eigen::Index(1) << (rho.n_qubits() - 1 - q))) out |= 1;
        }
        compress[i] = out;
    }
    const double scale = mix / std::pow(2.0, double(targets.size()));
    Matrix& m = rho.matrix();
    const Matrix& red = reduced.matrix();
    for (Eigen::Index c = 0; c < d; ++c) {
        const Eigen::Index cc = compress[c];
        const Eigen::Index ct = c & tmask;
        for (Eigen::Index r = 0; r < d; ++r) {
            Complex v = keep * m(r, c);
            if ((r & tmask) == ct) v += scale * red(compress[r], cc);
            m(r, c) = v;
        }
    }
}

DensityMatrix decohered(const DensityMatrix& rho, int qubit, double t, double T1, double T2) {
    DensityMatrix out = rho;
    decohere(out, qubit, t, T1, T2);
    return out;
}

DecoherenceAverage average_decoherence(std::span<const double> weights,
                                       std::span<const double> times, double T1, double T2) {
    if (weights.size() != times.size() || weights.empty())
        throw std::invalid_argument("weights/times size mismatch");
    // population factor m = E[e^{-t/T1}], coherence factor c = E[e^{-t/2T1 - t/2T2}]
    double wsum = 0, m = 0, c = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        wsum += weights[i];
        m += weights[i] * std::exp(-times[i] / T1);
        c += weights[i] * std::exp(-times[i] / (2 * T1) - times[i] / (2 * T2));
    }
    m /= wsum;
    c /= wsum;
    DecoherenceAverage avg;
    avg.gamma1 = 1.0 - m;
    // residual dephasing after GAD(gamma1): coherence scale c / sqrt(m)
    const double r = c / std::sqrt(m);
    avg.gamma2 = std::max(0.0, 1.0 - r * r);
    return avg;
}

void apply_decoherence(DensityMatrix& rho, int qubit, const DecoherenceAverage& avg) {
    const int tgt[1] = {qubit};
    apply_channel_in_place(rho, generalized_amplitude_damping(avg.gamma1), tgt);
    apply_channel_in_place(rho, phase_damping(avg.gamma2), tgt);
}

std::array<double, 4> decoherence_pauli_probs(double t, double T1, double T2) {
    DecoherenceAverage avg;
    avg.gamma1 = 1.0 - std::exp(-t / T1);
    avg.gamma2 = 1.0 - std::exp(-t / T2);
    return decoherence_pauli_probs(avg);
}

std::array<double, 4> decoherence_pauli_probs(const DecoherenceAverage& avg) {
    // Pauli transfer eigenvalues: rz = population factor, rx = ry = coherence
    const double rz = 1.0 - avg.gamma1;
    const double rxy = std::sqrt(1.0 - avg.gamma1) * std::sqrt(1.0 - avg.gamma2);
    return {
        (1 + 2 * rxy + rz) / 4.0, // I
        (1 - rz) / 4.0,           // X
        (1 - rz) / 4.0,           // Y
        (1 - 2 * rxy + rz) / 4.0, // Z
    };
}

CoherenceSet resolve_coherence_set(const std::string& name) {
    CoherenceSet s;
    s.name = name;
    if (name == "Set-1") {
        s.t1_link = s.t2_link = 1e4;
        s.t1_idle = s.t2_idle = 1e4;
    } else if (name == "Set-2") {
        s.t1_link = s.t2_link = 1e5;
        s.t1_idle = s.t2_idle = 1e5;
    } else if (name == "Set-3") {
        s.t1_link = s.t2_link = 1e6;
        s.t1_idle = s.t2_idle = 1e6;
    } else if (name == "Set-mix") {
        s.t1_link = s.t2_link = 1e4; // link times of Set-1
        s.t1_idle = s.t2_idle = 1e6; // idle times of Set-3
    } else if (name == "Set-D") {
        // diamond defect-center set: absolute seconds, Z-biased, DD gating
        s.absolute = true;
        s.t_link_s = 1e-5;
        s.dd_enabled = true;
        s.t_pulse = 1e-3;
        s.n_dd = 18;
        s.t1_link = 300.0;
        s.t2_link = 1.2e-2;
        s.t1_idle = 300.0;
        s.t2_idle = 10.0;
    } else {
        throw std::invalid_argument("unknown coherence set: " + name);
    }
    return s;
}

} // namespace dqec
