#include "dqec/schemes.hpp"

#include <cmath>
#include <stdexcept>

namespace dqec {

namespace {

void check01(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " out of [0,1]");
}

// phase flip with probability p: coherences scale by (1-2p)
KrausChannel phase_flip(double p) {
    KrausChannel ch;
    ch.operators = {std::sqrt(1.0 - p) * Matrix::Identity(2, 2), std::sqrt(p) * gates::Z};
    return ch;
}

// I1(x)/I0(x), stable for large arguments
double bessel_i1_i0_ratio(double x) {
    if (x < 500.0) return std::cyl_bessel_i(1.0, x) / std::cyl_bessel_i(0.0, x);
    // asymptotic: (1 - 3/8x - 15/128x^2) / (1 + 1/8x + 9/128x^2)
    const double ix = 1.0 / x;
    const double num = 1.0 - 0.375 * ix - (15.0 / 128.0) * ix * ix;
    const double den = 1.0 + 0.125 * ix + (9.0 / 128.0) * ix * ix;
    return num / den;
}

} // namespace

void EmissionParams::validate() const {
    check01(f_prep, "f_prep");
    check01(p_ee, "p_ee");
    check01(mu, "mu");
    check01(lambda_dephase, "lambda_dephase");
    check01(eta_ph, "eta_ph");
    check01(alpha_bright, "alpha_bright");
}

void ReflectionParams::validate() const {
    if (!(kappa_c > 0) || !(gamma > 0)) throw std::invalid_argument("rates must be positive");
    if (kappa_l < 0 || c1 < 0 || sigma < 0) throw std::invalid_argument("negative parameter");
    check01(eta_c, "eta_c");
    check01(p_dk, "p_dk");
}

void CarvingParams::validate() const {
    if (mode == CarvingMode::Cavity && (!(kappa_c > 0) || !(gamma > 0)))
        throw std::invalid_argument("rates must be positive");
    if (mode == CarvingMode::Waveguide && !(p_purcell >= 0))
        throw std::invalid_argument("negative Purcell ratio");
    if (sigma < 0) throw std::invalid_argument("negative sigma");
    check01(eta_f, "eta_f");
    check01(eta_det, "eta_det");
    if (n_sc < 2) throw std::invalid_argument("n_sc must be at least 2 for a heralded GHZ");
    if (alpha_coherent < 0) throw std::invalid_argument("negative coherent amplitude");
}

double lambda_from_phase_std(double sigma_phi) {
    if (!(sigma_phi > 0)) throw std::invalid_argument("phase std must be positive");
    return 0.5 * (1.0 + bessel_i1_i0_ratio(1.0 / (sigma_phi * sigma_phi)));
}

double ghz_fidelity(const DensityMatrix& rho) { return rho.overlap(ghz_vector(rho.n_qubits())); }

double bell_fidelity(const DensityMatrix& rho) { return rho.overlap(ghz_vector(2)); }

std::vector<std::pair<double, double>> gauss_hermite_nodes() {
    // 7-point Gauss-Hermite rule (nodes, weights) for int e^{-x^2} f(x) dx
    static const std::vector<std::pair<double, double>> gh = {
        {0.0, 0.8102646175568073},
        {0.8162878828589647, 0.4256072526101278},
        {-0.8162878828589647, 0.4256072526101278},
        {1.6735516287674714, 0.05451558281912703},
        {-1.6735516287674714, 0.05451558281912703},
        {2.6519613568352334, 9.717812450995192e-4},
        {-2.6519613568352334, 9.717812450995192e-4},
    };
    return gh;
}

// --- emission-based scheme ---------------------------------------------------

namespace {

// emitter initialisation with preparation infidelity as a dephasing factor
Matrix emitter_init(double alpha, double f_prep) {
    Matrix rho(2, 2);
    const double coh = (2.0 * f_prep - 1.0) * std::sqrt(alpha * (1.0 - alpha));
    rho << 1.0 - alpha, coh, coh, alpha;
    return rho;
}

// photonic measurement operators of the optical Bell measurement; applied as
// M rho M^dag, heralding on a single click (left = E10, right = E01)
struct ClickOperators {
    Matrix left, right;
};

ClickOperators click_operators(double mu) {
    const double rmu = std::sqrt(mu);
    const double a = (std::sqrt(1.0 + rmu) + std::sqrt(1.0 - rmu)) / (2.0 * std::sqrt(2.0));
    const double b = (std::sqrt(1.0 + rmu) - std::sqrt(1.0 - rmu)) / (2.0 * std::sqrt(2.0));
    const double c = std::sqrt(1.0 + mu) / 2.0;
    Matrix e01 = Matrix::Zero(4, 4), e10 = Matrix::Zero(4, 4);
    // basis |photonA photonB>: 1 = |01>, 2 = |10>, 3 = |11>
    e01(1, 1) = e01(2, 2) = a;
    e01(1, 2) = e01(2, 1) = -b;
    e01(3, 3) = c;
    e10(1, 1) = e10(2, 2) = a;
    e10(1, 2) = e10(2, 1) = b;
    e10(3, 3) = c;
    return {e10, e01};
}

// Take a (possibly entangled) two-emitter state, excite both emitters, apply
// the photonic noise, and herald on the given click operator. Returns the
// sub-normalized two-emitter state; its trace is the click probability.
// Qubit order during the step: (emitterA, emitterB, photonA, photonB).
DensityMatrix excite_and_click(const DensityMatrix& emitters, const EmissionParams& p,
                               bool include_lambda, const Matrix& click) {
    Matrix four = Matrix::Zero(16, 16);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int b2 = 0; b2 < 2; ++b2)
                    // |eA eB> -> |eA eB>|pA=eA pB=eB>
                    four(a * 10 + b * 5, a2 * 10 + b2 * 5) = emitters.matrix()(a * 2 + b, a2 * 2 + b2);
    DensityMatrix rho(4, std::move(four));

    apply_channel_in_place(rho, phase_flip(p.p_ee), std::array{0});
    apply_channel_in_place(rho, phase_flip(p.p_ee), std::array{1});
    if (include_lambda)
        apply_channel_in_place(rho, phase_flip(1.0 - p.lambda_dephase), std::array{2});
    apply_channel_in_place(rho, amplitude_damping(p.eta_ph), std::array{2});
    apply_channel_in_place(rho, amplitude_damping(p.eta_ph), std::array{3});

    rho.apply_operator(click, std::array{2, 3});
    return rho.partial_trace_keep(std::array{0, 1});
}

} // namespace

double single_click_success_probability(const EmissionParams& p) {
    const double ae = p.alpha_bright * p.eta_ph;
    return 0.5 * ae * (4.0 - ae * (3.0 - p.mu));
}

SchemeResult single_click(const EmissionParams& params, const CircuitNoise& noise) {
    params.validate();
    const auto clicks = click_operators(params.mu);

    DensityMatrix init(2, [&] {
        Matrix a = emitter_init(params.alpha_bright, params.f_prep);
        Matrix out(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.block(i * 2, j * 2, 2, 2) = a(i, j) * a;
        return out;
    }());

    DensityMatrix left = excite_and_click(init, params, true, clicks.left);
    DensityMatrix right = excite_and_click(init, params, true, clicks.right);

    // left click: X on emitter A; right click: X on A and phase correction on B
    left.apply_operator(gates::X, std::array{0});
    apply_channel_in_place(left, depolarizing_1q(noise.p_g), std::array{0});
    right.apply_operator(gates::X, std::array{0});
    right.apply_operator(gates::Z, std::array{1});
    apply_channel_in_place(right, depolarizing_1q(noise.p_g), std::array{0});
    apply_channel_in_place(right, depolarizing_1q(noise.p_g), std::array{1});

    SchemeResult res;
    res.state = DensityMatrix(2, left.matrix() + right.matrix());
    res.p_succ = res.state.trace_real();
    if (res.p_succ > 0) res.state.normalize();
    res.duration = 1.0;
    return res;
}

SchemeResult double_click(const EmissionParams& params_in, const CircuitNoise& noise) {
    EmissionParams params = params_in;
    params.alpha_bright = 0.5; // protocol initializes the emitters symmetrically
    params.validate();
    const auto clicks = click_operators(params.mu);
    // the phase instability cancels between the two heralding rounds
    const Matrix* ops[2] = {&clicks.left, &clicks.right};

    DensityMatrix init(2, [&] {
        Matrix a = emitter_init(params.alpha_bright, params.f_prep);
        Matrix out(4, 4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.block(i * 2, j * 2, 2, 2) = a(i, j) * a;
        return out;
    }());

    Matrix total = Matrix::Zero(4, 4);
    double p_succ = 0.0;
    for (int a1 = 0; a1 < 2; ++a1) {
        DensityMatrix mid = excite_and_click(init, params, false, *ops[a1]);
        // flip both emitters to expel the bright-state population
        mid.apply_operator(gates::X, std::array{0});
        mid.apply_operator(gates::X, std::array{1});
        apply_channel_in_place(mid, depolarizing_1q(noise.p_g), std::array{0});
        apply_channel_in_place(mid, depolarizing_1q(noise.p_g), std::array{1});
        for (int a2 = 0; a2 < 2; ++a2) {
            DensityMatrix out = excite_and_click(mid, params, false, *ops[a2]);
            if (a1 != a2) {
                out.apply_operator(gates::Z, std::array{1});
                apply_channel_in_place(out, depolarizing_1q(noise.p_g), std::array{1});
            }
            // rotate the heralded (|01>+|10>)/sqrt(2) form onto Phi+
            out.apply_operator(gates::X, std::array{0});
            apply_channel_in_place(out, depolarizing_1q(noise.p_g), std::array{0});
            p_succ += out.trace_real();
            total += out.matrix();
        }
    }

    SchemeResult res;
    res.state = DensityMatrix(2, std::move(total));
    if (p_succ > 0) res.state.normalize();
    res.p_succ = p_succ;
    res.duration = 1.0;
    return res;
}

// --- reflection scheme -------------------------------------------------------

Complex reflection_coefficient(const ReflectionParams& p, double delta, double omega) {
    const double ktot = p.kappa_c + p.kappa_l;
    const Complex den = 1.0 + Complex(0, 2.0) * omega / ktot +
                        4.0 * p.c1 / (1.0 + Complex(0, 2.0) * delta / p.gamma);
    return 1.0 - (2.0 * p.kappa_c / ktot) / den;
}

namespace {

struct HeraldBranches {
    DensityMatrix heralded; // sub-normalized, corrections applied
    DensityMatrix lost;     // normalized no-photon branch
    double p_raw = 0.0;
};

// one scattering pass of the time-bin photon through n cavities, then the
// X-basis photon measurement. Photon is qubit 0 (|0> = early, |1> = late).
HeraldBranches reflection_pass(Complex r0, Complex r1, int n, const CircuitNoise& noise) {
    DensityMatrix rho(n + 1);
    // photon |+>, spins |0>
    rho.apply_operator(gates::H, std::array{0});

    Matrix scat_e = Matrix::Zero(4, 4), scat_l = Matrix::Zero(4, 4);
    scat_e.diagonal() << r0, r1, 1, 1;
    scat_l.diagonal() << 1, 1, r0, r1;

    for (int j = 1; j <= n; ++j) {
        const int pair[2] = {0, j};
        rho.apply_operator(scat_e, pair);
        rho.apply_operator(gates::H, std::array{j});
        apply_channel_in_place(rho, depolarizing_1q(noise.p_g), std::array{j});
        rho.apply_operator(scat_l, pair);
        rho.apply_operator(gates::H, std::array{j});
        apply_channel_in_place(rho, depolarizing_1q(noise.p_g), std::array{j});
    }

    std::vector<int> spins(n);
    for (int j = 0; j < n; ++j) spins[j] = j + 1;

    HeraldBranches out;
    // no-click branch: trace the photon out
    out.lost = rho.partial_trace_keep(spins);
    const double lt = out.lost.trace_real();
    if (lt > 0) out.lost.matrix() /= lt;

    DensityMatrix plus = rho;
    plus.apply_operator(gates::projector_plus(), std::array{0});
    DensityMatrix minus = rho;
    minus.apply_operator(gates::projector_minus(), std::array{0});
    DensityMatrix sp = plus.partial_trace_keep(spins);
    DensityMatrix sm = minus.partial_trace_keep(spins);
    // minus herald: Z correction on the first spin
    sm.apply_operator(gates::Z, std::array{0});
    apply_channel_in_place(sm, depolarizing_1q(noise.p_g), std::array{0});

    out.heralded = DensityMatrix(n, sp.matrix() + sm.matrix());
    out.p_raw = out.heralded.trace_real();
    return out;
}

} // namespace

SchemeResult reflection_ghz_from_coefficients(Complex r0, Complex r1, int n,
                                              const CircuitNoise& noise) {
    if (n != 3 && n != 4) throw std::invalid_argument("reflection GHZ supports n in {3,4}");
    HeraldBranches hb = reflection_pass(r0, r1, n, noise);
    SchemeResult res;
    res.p_succ = hb.p_raw;
    res.state = std::move(hb.heralded);
    if (res.state.trace_real() > 0) res.state.normalize();
    res.duration = 1.0;
    return res;
}

SchemeResult reflection_ghz(const ReflectionParams& params, int n, const CircuitNoise& noise) {
    params.validate();
    if (n != 3 && n != 4) throw std::invalid_argument("reflection GHZ supports n in {3,4}");

    const auto gh = gauss_hermite_nodes();
    std::vector<std::pair<double, double>> d1_nodes, om_nodes;
    if (params.sigma > 0) {
        for (auto [x, w] : gh) {
            d1_nodes.push_back({params.delta1 + std::sqrt(2.0) * params.sigma * x, w});
            om_nodes.push_back({params.omega + std::sqrt(2.0) * params.sigma * x, w});
        }
    } else {
        d1_nodes = {{params.delta1, 1.0}};
        om_nodes = {{params.omega, 1.0}};
    }

    Matrix herald_acc = Matrix::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
    Matrix lost_acc = Matrix::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
    double p_raw = 0.0, wsum = 0.0;
    for (auto [d1, w1] : d1_nodes)
        for (auto [om, w2] : om_nodes) {
            const double w = w1 * w2;
            const Complex r0 = reflection_coefficient(params, d1 + params.delta, om);
            const Complex r1 = reflection_coefficient(params, d1, om);
            HeraldBranches hb = reflection_pass(r0, r1, n, noise);
            herald_acc += w * hb.heralded.matrix();
            lost_acc += w * (1.0 - hb.p_raw) * hb.lost.matrix();
            p_raw += w * hb.p_raw;
            wsum += w;
        }
    herald_acc /= wsum;
    lost_acc /= wsum;
    p_raw /= wsum;

    const double loss = std::pow(params.eta_c, n);
    const double p_true = p_raw * loss;
    // dark counts falsely herald the no-photon branch; they are counted as
    // infidelity, not as success
    const double p_false = params.p_dk * (1.0 - p_true);

    DensityMatrix lost(n, std::move(lost_acc));
    const double lt = lost.trace_real();
    Matrix dark = Matrix::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
    if (lt > 0 && p_false > 0) {
        lost.matrix() /= lt;
        DensityMatrix lz = lost;
        lz.apply_operator(gates::Z, std::array{0});
        dark = 0.5 * (lost.matrix() + lz.matrix());
    }

    SchemeResult res;
    Matrix final_m = loss * herald_acc + p_false * dark;
    res.state = DensityMatrix(n, std::move(final_m));
    const double tr = res.state.trace_real();
    if (tr > 0) res.state.normalize();
    res.p_succ = p_true;
    res.duration = 1.0;
    return res;
}

// --- carving scheme ----------------------------------------------------------

Complex carving_transmission(const CarvingParams& p, double delta) {
    return carving_transmission(p, delta, p.omega);
}

Complex carving_transmission(const CarvingParams& p, double delta, double omega) {
    if (p.mode == CarvingMode::Waveguide) {
        const Complex dd = Complex(0, 2.0) * delta / p.gamma;
        return (1.0 + dd) / (1.0 + p.p_purcell + dd);
    }
    const double ktot = 2.0 * p.kappa_c + p.kappa_l;
    const Complex den = 1.0 + Complex(0, 2.0) * omega / ktot +
                        4.0 * p.c2 / (1.0 + Complex(0, 2.0) * delta / p.gamma);
    return (2.0 * p.kappa_c / ktot) / den;
}

namespace {

// elementwise rho[k,m] *= T[k] conj(T[m])
void hadamard_outer(Matrix& rho, const Vector& t) {
    const Eigen::Index d = rho.rows();
    for (Eigen::Index m = 0; m < d; ++m) {
        const Complex cm = std::conj(t(m));
        for (Eigen::Index k = 0; k < d; ++k) rho(k, m) *= t(k) * cm;
    }
}

// elementwise rho[k,m] *= S[k,m]
void hadamard_matrix(Matrix& rho, const Matrix& s) { rho.array() *= s.array(); }

void not_all_noisy(DensityMatrix& rho, int n, double p_g) {
    for (int j = 0; j < n; ++j) {
        rho.apply_operator(gates::X, std::array{j});
        apply_channel_in_place(rho, depolarizing_1q(p_g), std::array{j});
    }
}

// final corrections shared by both carving variants: NOT on the lower-route
// spins, Z on the first spin of the odd-parity branch
SchemeResult carving_finish(DensityMatrix even, DensityMatrix odd, int n_u, int n_d,
                            const CircuitNoise& noise, double p_scale) {
    const int n = n_u + n_d;
    odd.apply_operator(gates::Z, std::array{0});
    apply_channel_in_place(odd, depolarizing_1q(noise.p_g), std::array{0});
    DensityMatrix rho(n, even.matrix() + odd.matrix());
    for (int j = n_u; j < n; ++j) {
        rho.apply_operator(gates::X, std::array{j});
        apply_channel_in_place(rho, depolarizing_1q(noise.p_g), std::array{j});
    }
    SchemeResult res;
    res.p_succ = rho.trace_real() * p_scale;
    if (rho.trace_real() > 0) rho.normalize();
    res.state = std::move(rho);
    res.duration = 1.0;
    return res;
}

} // namespace

SchemeResult carving_sps_from_coefficients(Complex t0, Complex t1, int n_u, int n_d, int n_sc,
                                           double eta_round, const CircuitNoise& noise) {
    const int n = n_u + n_d;
    const Eigen::Index d = Eigen::Index(1) << n;

    Vector tu = Vector::Ones(d), td = Vector::Ones(d);
    for (Eigen::Index k = 0; k < d; ++k)
        for (int j = 0; j < n; ++j) {
            const bool one = (k >> (n - 1 - j)) & 1;
            const Complex t = one ? t1 : t0;
            if (j < n_u)
                tu(k) *= t;
            else
                td(k) *= t;
        }
    const Vector tplus = (tu + td) / 2.0;
    const Vector tminus = (tu - td) / 2.0;

    // all spins in |+>
    Matrix uniform = Matrix::Constant(d, d, 1.0 / double(d));
    DensityMatrix even(n, uniform);                    // even number of d- clicks
    DensityMatrix odd(n, Matrix::Zero(d, d));          // odd number

    for (int s = 0; s < n_sc; ++s) {
        if (s > 0) {
            not_all_noisy(even, n, noise.p_g);
            not_all_noisy(odd, n, noise.p_g);
        }
        Matrix e_plus = even.matrix(), e_minus = even.matrix();
        Matrix o_plus = odd.matrix(), o_minus = odd.matrix();
        hadamard_outer(e_plus, tplus);
        hadamard_outer(e_minus, tminus);
        hadamard_outer(o_plus, tplus);
        hadamard_outer(o_minus, tminus);
        even = DensityMatrix(n, e_plus + o_minus);
        odd = DensityMatrix(n, e_minus + o_plus);
    }

    return carving_finish(std::move(even), std::move(odd), n_u, n_d, noise,
                          std::pow(eta_round, n_sc));
}

namespace {

Complex coh_overlap(Complex ket, Complex bra) {
    // Tr[|ket><bra|] for coherent amplitudes
    return std::exp(-(std::norm(ket) + std::norm(bra)) / 2.0 + ket * std::conj(bra));
}

double vac_overlap(Complex ket, Complex bra) {
    return std::exp(-(std::norm(ket) + std::norm(bra)) / 2.0);
}

} // namespace

SchemeResult carving_coherent_from_coefficients(Complex t0, Complex t1, Complex r0, Complex r1,
                                                Complex d0, Complex d1, int n_u, int n_d,
                                                int n_sc, double alpha, double eta_round,
                                                const CircuitNoise& noise) {
    const int n = n_u + n_d;
    const Eigen::Index dim = Eigen::Index(1) << n;
    const double a = alpha / std::sqrt(2.0);

    auto spin_bit = [&](Eigen::Index k, int j) { return int((k >> (n - 1 - j)) & 1); };
    auto route_start = [&](int j) { return j < n_u ? 0 : n_u; };

    // amplitude of the mode that reflected (or dissipated) at spin j, having
    // been transmitted through the earlier spins of the same route
    auto local_amp = [&](Eigen::Index k, int j, Complex c0, Complex c1) {
        Complex amp = a;
        for (int i = route_start(j); i < j; ++i) amp *= spin_bit(k, i) ? t1 : t0;
        amp *= spin_bit(k, j) ? c1 : c0;
        return amp;
    };

    Vector tu(dim), td(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        Complex pu = a, pd = a;
        for (int j = 0; j < n_u; ++j) pu *= spin_bit(k, j) ? t1 : t0;
        for (int j = n_u; j < n; ++j) pd *= spin_bit(k, j) ? t1 : t0;
        tu(k) = pu;
        td(k) = pd;
    }
    const double root_eta = std::sqrt(eta_round);
    const double root_loss = std::sqrt(1.0 - eta_round);

    // traced-mode and detection coefficient matrices
    Matrix s_common = Matrix::Ones(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k)
        for (Eigen::Index m = 0; m < dim; ++m) {
            Complex f = 1.0;
            for (int j = 0; j < n; ++j) {
                f *= coh_overlap(local_amp(k, j, r0, r1), local_amp(m, j, r0, r1));
                f *= coh_overlap(local_amp(k, j, d0, d1), local_amp(m, j, d0, d1));
            }
            const Complex tpk = (tu(k) + td(k)) / std::sqrt(2.0);
            const Complex tpm = (tu(m) + td(m)) / std::sqrt(2.0);
            const Complex tmk = (tu(k) - td(k)) / std::sqrt(2.0);
            const Complex tmm = (tu(m) - td(m)) / std::sqrt(2.0);
            // undetected fraction of both output ports is traced out
            f *= coh_overlap(root_loss * tpk, root_loss * tpm);
            f *= coh_overlap(root_loss * tmk, root_loss * tmm);
            s_common(k, m) = f;
        }

    Matrix s_plus(dim, dim), s_minus(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k)
        for (Eigen::Index m = 0; m < dim; ++m) {
            const Complex tpk = root_eta * (tu(k) + td(k)) / std::sqrt(2.0);
            const Complex tpm = root_eta * (tu(m) + td(m)) / std::sqrt(2.0);
            const Complex tmk = root_eta * (tu(k) - td(k)) / std::sqrt(2.0);
            const Complex tmm = root_eta * (tu(m) - td(m)) / std::sqrt(2.0);
            s_plus(k, m) = (coh_overlap(tpk, tpm) - vac_overlap(tpk, tpm)) * vac_overlap(tmk, tmm);
            s_minus(k, m) = vac_overlap(tpk, tpm) * (coh_overlap(tmk, tmm) - vac_overlap(tmk, tmm));
        }
    const Matrix t_plus = s_common.array() * s_plus.array();
    const Matrix t_minus = s_common.array() * s_minus.array();

    Matrix uniform = Matrix::Constant(dim, dim, 1.0 / double(dim));
    DensityMatrix even(n, uniform);
    DensityMatrix odd(n, Matrix::Zero(dim, dim));

    for (int s = 0; s < n_sc; ++s) {
        if (s > 0) {
            not_all_noisy(even, n, noise.p_g);
            not_all_noisy(odd, n, noise.p_g);
        }
        Matrix e_plus = even.matrix(), e_minus = even.matrix();
        Matrix o_plus = odd.matrix(), o_minus = odd.matrix();
        hadamard_matrix(e_plus, t_plus);
        hadamard_matrix(e_minus, t_minus);
        hadamard_matrix(o_plus, t_plus);
        hadamard_matrix(o_minus, t_minus);
        even = DensityMatrix(n, e_plus + o_minus);
        odd = DensityMatrix(n, e_minus + o_plus);
    }
    return carving_finish(std::move(even), std::move(odd), n_u, n_d, noise, 1.0);
}

SchemeResult carving_sps_ghz(const CarvingParams& params, int n_u, int n_d,
                             const CircuitNoise& noise) {
    params.validate();
    const int n = n_u + n_d;
    if (n != 3 && n != 4) throw std::invalid_argument("carving GHZ supports n in {3,4}");

    const auto gh = gauss_hermite_nodes();
    std::vector<std::pair<double, double>> d1_nodes, om_nodes;
    const bool jitter_omega = params.mode == CarvingMode::Cavity && params.sigma > 0;
    if (params.sigma > 0)
        for (auto [x, w] : gh)
            d1_nodes.push_back({params.delta1 + std::sqrt(2.0) * params.sigma * x, w});
    else
        d1_nodes = {{params.delta1, 1.0}};
    if (jitter_omega)
        for (auto [x, w] : gh)
            om_nodes.push_back({params.omega + std::sqrt(2.0) * params.sigma * x, w});
    else
        om_nodes = {{params.omega, 1.0}};

    const Eigen::Index dim = Eigen::Index(1) << n;
    Matrix acc = Matrix::Zero(dim, dim);
    double p_acc = 0.0, wsum = 0.0;
    const double eta_round = params.eta_f * params.eta_det;
    for (auto [d1, w1] : d1_nodes)
        for (auto [om, w2] : om_nodes) {
            const double w = w1 * w2;
            const Complex t0 = carving_transmission(params, d1 + params.delta, om);
            const Complex t1 = carving_transmission(params, d1, om);
            SchemeResult r =
                carving_sps_from_coefficients(t0, t1, n_u, n_d, params.n_sc, eta_round, noise);
            acc += w * r.p_succ * r.state.matrix();
            p_acc += w * r.p_succ;
            wsum += w;
        }
    SchemeResult res;
    res.state = DensityMatrix(n, acc / wsum);
    if (res.state.trace_real() > 0) res.state.normalize();
    res.p_succ = p_acc / wsum;
    res.duration = 1.0;
    return res;
}

SchemeResult carving_coherent_ghz(const CarvingParams& params, int n_u, int n_d,
                                  const CircuitNoise& noise) {
    params.validate();
    if (!(params.alpha_coherent > 0))
        throw std::invalid_argument("coherent carving needs alpha > 0");
    const int n = n_u + n_d;
    if (n != 3 && n != 4) throw std::invalid_argument("carving GHZ supports n in {3,4}");

    const auto gh = gauss_hermite_nodes();
    std::vector<std::pair<double, double>> d1_nodes, om_nodes;
    const bool jitter_omega = params.mode == CarvingMode::Cavity && params.sigma > 0;
    if (params.sigma > 0)
        for (auto [x, w] : gh)
            d1_nodes.push_back({params.delta1 + std::sqrt(2.0) * params.sigma * x, w});
    else
        d1_nodes = {{params.delta1, 1.0}};
    if (jitter_omega)
        for (auto [x, w] : gh)
            om_nodes.push_back({params.omega + std::sqrt(2.0) * params.sigma * x, w});
    else
        om_nodes = {{params.omega, 1.0}};

    const Eigen::Index dim = Eigen::Index(1) << n;
    Matrix acc = Matrix::Zero(dim, dim);
    double p_acc = 0.0, wsum = 0.0;
    const double eta_round = params.eta_f * params.eta_det;
    for (auto [d1, w1] : d1_nodes)
        for (auto [om, w2] : om_nodes) {
            const double w = w1 * w2;
            const Complex t0 = carving_transmission(params, d1 + params.delta, om);
            const Complex t1 = carving_transmission(params, d1, om);
            // two-sided scatterer: reflected field amplitude is t - 1
            const Complex r0 = t0 - 1.0, r1 = t1 - 1.0;
            const Complex d0 = std::sqrt(std::max(0.0, 1.0 - std::norm(t0) - std::norm(r0)));
            const Complex d1c = std::sqrt(std::max(0.0, 1.0 - std::norm(t1) - std::norm(r1)));
            SchemeResult r = carving_coherent_from_coefficients(
                t0, t1, r0, r1, d0, d1c, n_u, n_d, params.n_sc, params.alpha_coherent, eta_round,
                noise);
            acc += w * r.p_succ * r.state.matrix();
            p_acc += w * r.p_succ;
            wsum += w;
        }
    SchemeResult res;
    res.state = DensityMatrix(n, acc / wsum);
    if (res.state.trace_real() > 0) res.state.normalize();
    res.p_succ = p_acc / wsum;
    res.duration = 1.0;
    return res;
}

int scan_nsc(const CarvingParams& params, int n_u, int n_d, const CircuitNoise& noise,
             double p_succ_floor, bool coherent, int n_sc_max) {
    if (!(p_succ_floor >= 0)) throw std::invalid_argument("negative success floor");
    int best = -1;
    double best_infid = 2.0;
    for (int nsc = 2; nsc <= n_sc_max; ++nsc) {
        CarvingParams p = params;
        p.n_sc = nsc;
        SchemeResult r = coherent ? carving_coherent_ghz(p, n_u, n_d, noise)
                                  : carving_sps_ghz(p, n_u, n_d, noise);
        if (r.p_succ < p_succ_floor) continue;
        const double infid = 1.0 - ghz_fidelity(r.state);
        if (infid < best_infid - 1e-15) {
            best_infid = infid;
            best = nsc;
        }
    }
    if (best < 0) throw std::runtime_error("no n_sc meets the success-probability floor");
    return best;
}

std::pair<double, double> scan_detunings(const ReflectionParams& params, int n,
                                         const CircuitNoise& noise, const DetuningGrid& grid) {
    if (grid.omega_steps < 1 || grid.delta1_steps < 1)
        throw std::invalid_argument("empty detuning grid");
    double best_f = -1.0;
    std::pair<double, double> best{grid.omega_min, grid.delta1_min};
    for (int i = 0; i < grid.omega_steps; ++i)
        for (int j = 0; j < grid.delta1_steps; ++j) {
            ReflectionParams p = params;
            p.omega = grid.omega_steps == 1
                          ? grid.omega_min
                          : grid.omega_min + (grid.omega_max - grid.omega_min) * i /
                                                 double(grid.omega_steps - 1);
            p.delta1 = grid.delta1_steps == 1
                           ? grid.delta1_min
                           : grid.delta1_min + (grid.delta1_max - grid.delta1_min) * j /
                                                   double(grid.delta1_steps - 1);
            SchemeResult r = reflection_ghz(p, n, noise);
            const double f = ghz_fidelity(r.state);
            if (f > best_f) {
                best_f = f;
                best = {p.omega, p.delta1};
            }
        }
    return best;
}

} // namespace dqec
