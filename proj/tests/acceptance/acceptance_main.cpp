// Acceptance suite: runs every release criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "dqec/harness.hpp"
#include "dqec/rng.hpp"

using namespace dqec;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("CRITERION %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_seconds() {
    using Clock = std::chrono::steady_clock;
    static const Clock::time_point start = Clock::now();
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- criterion 1

void criterion_1_double_click_closed_forms() {
    double max_err_p = 0.0, max_err_f = 0.0;
    int points = 0;
    for (double eta : {0.05, 0.2, 0.45, 0.7, 1.0})
        for (double mu : {0.5, 0.8, 0.9, 0.95, 1.0})
            for (double fp : {0.95, 1.0})
                for (double pee : {0.0, 0.02}) {
                    EmissionParams p;
                    p.eta_ph = eta;
                    p.mu = mu;
                    p.f_prep = fp;
                    p.p_ee = pee;
                    p.lambda_dephase = 0.83; // must drop out of the double-click
                    SchemeResult r = double_click(p, CircuitNoise::uniform(0.0));
                    const double phi =
                        std::sqrt(mu) * (2 * fp - 1) * (1 - 2 * pee) * (1 - 2 * pee);
                    max_err_p = std::max(max_err_p, std::abs(r.p_succ - eta * eta / 2));
                    max_err_f =
                        std::max(max_err_f, std::abs(bell_fidelity(r.state) -
                                                     (1 + phi * phi) / 2));
                    ++points;
                }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "double-click p_g=0 over %d points: |dp|=%.2e, |dF|=%.2e (tol 1e-10)",
                  points, max_err_p, max_err_f);
    report(1, points == 100 && max_err_p < 1e-10 && max_err_f < 1e-10, buf);
}

// ---------------------------------------------------------------- criterion 2

void criterion_2_carving_ideal_limits() {
    SchemeResult r3 = carving_sps_from_coefficients(1.0, 0.0, 2, 1, 2, 1.0, {});
    SchemeResult r4 = carving_sps_from_coefficients(1.0, 0.0, 2, 2, 2, 1.0, {});
    const double e3p = std::abs(r3.p_succ - 1.0 / 16.0);
    const double e4p = std::abs(r4.p_succ - 1.0 / 32.0);
    const double e3f = std::abs(ghz_fidelity(r3.state) - 1.0);
    const double e4f = std::abs(ghz_fidelity(r4.state) - 1.0);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "lossless SPS carving: |dp3|=%.1e |dp4|=%.1e |dF|=%.1e (tol 1e-9)", e3p, e4p,
                  std::max(e3f, e4f));
    report(2, e3p < 1e-9 && e4p < 1e-9 && e3f < 1e-9 && e4f < 1e-9, buf);
}

// ---------------------------------------------------------------- criterion 3

void criterion_3_reflection_ideal_limit() {
    bool ok = true;
    double worst = 0.0;
    for (int n : {3, 4}) {
        SchemeResult r = reflection_ghz_from_coefficients(-1.0, 1.0, n, {});
        worst = std::max(worst, std::abs(r.p_succ - 1.0));
        worst = std::max(worst, std::abs(ghz_fidelity(r.state) - 1.0));
        ok = ok && std::abs(r.p_succ - 1.0) < 1e-9 && std::abs(ghz_fidelity(r.state) - 1.0) < 1e-9;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "r0=-1, r1=+1 gives exact GHZ with p_succ=1: err=%.1e", worst);
    report(3, ok, buf);
}

// ---------------------------------------------------------------- criterion 4

void criterion_4_superoperator_validity() {
    Rng rng(4242, 0);
    double worst_sum = 0.0;
    bool ok = true;
    for (int rep = 0; rep < 50; ++rep) {
        StabilizerConfig cfg;
        cfg.arch = rep % 2 ? Architecture::WT3 : Architecture::WT4;
        cfg.noise.p_g = 0.02 * rng.uniform();
        cfg.noise.p_m = 0.02 * rng.uniform();
        cfg.coherence = resolve_coherence_set(rep % 3 == 0 ? "Set-1" : "Set-3");
        cfg.t_cut = 2.0 + 60.0 * rng.uniform();
        const int n = cfg.arch == Architecture::WT4 ? 4 : 3;
        SchemeResult ghz;
        ghz.state = DensityMatrix::from_pure(n, ghz_vector(n));
        apply_depolarizing_fast(ghz.state, 0.1 * rng.uniform(), std::array{0});
        apply_depolarizing_fast(ghz.state, 0.1 * rng.uniform(), std::array{n - 1});
        ghz.p_succ = 0.05 + 0.95 * rng.uniform();
        ghz.duration = 1.0;
        SuperoperatorTable t = build_table(cfg, ghz);
        for (StabType type : {StabType::Z, StabType::X})
            worst_sum = std::max(worst_sum, std::abs(t.column_sum(type) - 1.0));
        ok = ok && worst_sum < 1e-8;
    }

    // noiseless configuration concentrates on (IIII, TRUE, FALSE)
    StabilizerConfig clean;
    clean.coherence = resolve_coherence_set("Set-3");
    clean.coherence.t1_link = clean.coherence.t2_link = 1e30;
    clean.coherence.t1_idle = clean.coherence.t2_idle = 1e30;
    clean.t_cut = 10.0;
    SchemeResult ghz4;
    ghz4.state = DensityMatrix::from_pure(4, ghz_vector(4));
    ghz4.p_succ = 1.0;
    SuperoperatorTable tc = build_table(clean, ghz4);
    const double mass =
        tc.row(SuperoperatorTable::row_index(PauliString("IIII").index(), true, false))
            .p_plaquette;
    ok = ok && std::abs(mass - 1.0) < 1e-9;

    // single-qubit depolarizing injection reproduces p/3 row masses
    const double pinj = 0.09;
    KrausChannel inject = depolarizing_1q(pinj);
    StabilizerConfig ci = clean;
    ci.inject = &inject;
    ci.inject_qubit = 0;
    SuperoperatorTable ti = build_table(ci, ghz4);
    double worst_inj = 0.0;
    for (const char* s : {"XIII", "YIII", "ZIII"}) {
        const auto& r = ti.row(SuperoperatorTable::row_index(PauliString(s).index(), true, false));
        worst_inj = std::max(worst_inj, std::abs(r.p_plaquette - pinj / 3));
        worst_inj = std::max(worst_inj, std::abs(r.p_vertex - pinj / 3));
    }
    ok = ok && worst_inj < 1e-9;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "50 random tables: |col sum-1|<=%.1e (tol 1e-8); noiseless IIII mass err %.1e; "
                  "injection p/3 err %.1e (tol 1e-9)",
                  worst_sum, std::abs(mass - 1.0), worst_inj);
    report(4, ok, buf);
}

// ---------------------------------------------------------------- criterion 5

void criterion_5_monte_carlo_oracle() {
    const double t_start = now_seconds();
    const double p = 0.01;

    StabilizerConfig cfg;
    cfg.arch = Architecture::WT4;
    cfg.type = StabType::Z;
    cfg.noise = CircuitNoise::uniform(p);
    cfg.coherence = resolve_coherence_set("Set-3");
    cfg.coherence.t1_link = cfg.coherence.t2_link = 1e30;
    cfg.coherence.t1_idle = cfg.coherence.t2_idle = 1e30;
    cfg.t_cut = 10.0;
    SchemeResult ghz;
    ghz.state = DensityMatrix::from_pure(4, ghz_vector(4));
    ghz.p_succ = 1.0;
    StabilizerBranches br = simulate_stabilizer(cfg, ghz);
    const auto table_probs = decompose_success(br, StabType::Z);

    // direct-sampled circuit oracle: independent Pauli-frame simulation of the
    // same noisy parity-measurement circuit
    const long samples = 1000000;
    std::vector<double> counts(SuperoperatorTable::kRowCount, 0.0);
    Rng rng(555, 0);
    for (long s = 0; s < samples; ++s) {
        PauliString data_err(4);
        int flips = 0;
        for (int j = 0; j < 4; ++j) {
            if (rng.uniform() < p) {
                // uniform non-identity two-qubit Pauli on (comm_j, data_j)
                const int idx = 1 + int(rng.uniform_int(15));
                const Pauli comm = static_cast<Pauli>(idx >> 2);
                const Pauli dat = static_cast<Pauli>(idx & 3);
                data_err.set(j, dat);
                // comm measured in X basis: Z and Y components flip it
                if (comm == Pauli::Z || comm == Pauli::Y) flips ^= 1;
            }
            if (rng.uniform() < p) flips ^= 1; // measurement flip
        }
        // recorded outcome reflects the pre-error parity: relative to the
        // post-error frame the record is off exactly when the data error
        // anticommutes with ZZZZ
        if (!data_err.commutes_with(PauliString("ZZZZ"))) flips ^= 1;
        const uint32_t canon = canonical_error_index(data_err.index(), StabType::Z);
        counts[SuperoperatorTable::row_index(canon, true, flips)] += 1.0;
    }
    double tvd = 0.0;
    for (int i = 0; i < SuperoperatorTable::kRowCount; ++i)
        tvd += std::abs(counts[i] / double(samples) - table_probs[i]);
    tvd /= 2.0;
    const double elapsed = now_seconds() - t_start;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "WT4 Z-stabilizer at p=0.01: TVD=%.2e vs 1e6-sample oracle (tol 2e-3), %.0f s",
                  tvd, elapsed);
    report(5, tvd <= 2e-3 && elapsed < 600.0, buf);
}

// ---------------------------------------------------------------- criterion 6

struct PhenomInstance {
    SyndromeHistory history;
    PauliFrame frame;
};

PhenomInstance phenom_instance(const ToricLayout& l, double p_err, double p_meas, Rng& rng) {
    const int d = l.distance();
    const int ns = l.n_stabilizers();
    PhenomInstance out;
    out.frame = PauliFrame(l.n_data());
    out.history.n_layers = d;
    out.history.n_stab = ns;
    for (int t = 0; t < 2; ++t) out.history.outcomes[t].assign((d + 1) * ns, 1);
    for (int layer = 0; layer < d; ++layer) {
        for (int q = 0; q < l.n_data(); ++q) {
            if (rng.bernoulli(p_err)) out.frame.x_bits[q] ^= 1;
            if (rng.bernoulli(p_err)) out.frame.z_bits[q] ^= 1;
        }
        for (int s = 0; s < ns; ++s) {
            int px = 0, pz = 0;
            for (int q : l.stabilizer_support(StabType::Z, s)) px ^= out.frame.x_bits[q];
            for (int q : l.stabilizer_support(StabType::X, s)) pz ^= out.frame.z_bits[q];
            int8_t oz = px ? -1 : 1, ox = pz ? -1 : 1;
            if (rng.bernoulli(p_meas)) oz = -oz;
            if (rng.bernoulli(p_meas)) ox = -ox;
            out.history.outcomes[0][layer * ns + s] = oz;
            out.history.outcomes[1][layer * ns + s] = ox;
        }
    }
    for (int s = 0; s < ns; ++s) {
        int px = 0, pz = 0;
        for (int q : l.stabilizer_support(StabType::Z, s)) px ^= out.frame.x_bits[q];
        for (int q : l.stabilizer_support(StabType::X, s)) pz ^= out.frame.z_bits[q];
        out.history.outcomes[0][d * ns + s] = px ? -1 : 1;
        out.history.outcomes[1][d * ns + s] = pz ? -1 : 1;
    }
    return out;
}

void criterion_6_decoder_equivalence() {
    ToricLayout layout(Architecture::WT4, 4);

    // exact weight agreement on 1000 small instances
    int checked = 0, weight_mismatch = 0, invalid_uf = 0;
    uint64_t stream = 0;
    while (checked < 1000) {
        Rng rng(66, stream++);
        PhenomInstance inst = phenom_instance(layout, 0.012, 0.008, rng);
        for (StabType type : {StabType::Z, StabType::X}) {
            MatchingGraph g = make_graph(layout, inst.history, type);
            if (g.defects.empty() || g.defects.size() > 8 || checked >= 1000) continue;
            ++checked;
            Correction bf = brute_force_decode(g, layout);
            Correction mw = mwpm_decode(g, layout);
            if (mw.total_weight != bf.total_weight) ++weight_mismatch;
            Correction uf = uf_decode(g, layout);
            if (!correction_annihilates_defects(g, layout, uf)) ++invalid_uf;
        }
    }

    // UF vs MWPM logical failure rates at a fixed phenomenological setting
    const int trials = 20000;
    int fail_uf = 0, fail_mw = 0;
    for (uint64_t s = 0; s < trials; ++s) {
        Rng rng(67, s);
        PhenomInstance inst = phenom_instance(layout, 0.03, 0.02, rng);
        for (auto decode : {uf_decode, mwpm_decode}) {
            PauliFrame corr(layout.n_data());
            for (StabType type : {StabType::Z, StabType::X}) {
                MatchingGraph g = make_graph(layout, inst.history, type);
                Correction c = decode(g, layout);
                for (int q = 0; q < layout.n_data(); ++q) {
                    corr.x_bits[q] ^= c.frame.x_bits[q];
                    corr.z_bits[q] ^= c.frame.z_bits[q];
                }
            }
            auto flags = check_logical(inst.frame, corr, layout);
            const bool fail = flags[0] || flags[1] || flags[2] || flags[3];
            if (decode == uf_decode)
                fail_uf += fail;
            else
                fail_mw += fail;
        }
    }
    const double ratio = double(fail_uf) / std::max(1, fail_mw);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "1000 instances: %d weight mismatches, %d invalid UF corrections; "
                  "UF/MWPM failure ratio %.3f (p_L: %.4f vs %.4f, bound 1.3)",
                  weight_mismatch, invalid_uf, ratio, fail_uf / double(trials),
                  fail_mw / double(trials));
    report(6, weight_mismatch == 0 && invalid_uf == 0 && ratio <= 1.3, buf);
}

// ---------------------------------------------------------------- criterion 7

void criterion_7_fit_recovery() {
    const double A = 0.1, B = 5.0, C = 20.0, p_th = 0.004, nu0 = 1.5;
    Rng rng(777, 0);
    int ok = 0;
    const int reps = 100;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<FitPoint> data;
        for (int d : {4, 6, 8, 10})
            for (double p : {0.0030, 0.0035, 0.0040, 0.0045, 0.0050}) {
                const double g = (p - p_th) * std::pow(d, 1.0 / nu0);
                const double y = A + B * g + C * g * g;
                const double u1 = std::max(rng.uniform(), 1e-12), u2 = rng.uniform();
                const double gauss = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
                data.push_back({d, p, y * (1.0 + 0.01 * gauss), 0.01 * y});
            }
        try {
            FitResult fit = fit_threshold(data);
            if (std::abs(fit.p_th - p_th) / p_th < 0.05) ++ok;
        } catch (const std::exception&) {
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "synthetic p_th recovered within 5%% in %d/%d runs (need 95)",
                  ok, reps);
    report(7, ok >= 95, buf);
}

// ------------------------------------------------------------ criteria 8 and 9

ExperimentConfig reference_reflection_config() {
    return ExperimentConfig::from_string(R"(
architecture = WT4
scheme = reflection
coherence_set = Set-3
distances = 4,6,8
p_values = 0.002,0.0025,0.003,0.0035,0.004,0.0045,0.005
n_trials = 20000
seed = 20250810
x_cut = 0.98
decoder = uf
c1 = 100
kappa_c = 10
kappa_l = 0.1
delta = 1000
omega = 1.0095
sigma = 0
eta_c = 0.82
)");
}

void criteria_8_and_9_subthreshold_scaling() {
    const double t_start = now_seconds();
    ExperimentConfig cfg = reference_reflection_config();

    ExperimentConfig sweep_cfg = cfg;
    sweep_cfg.n_trials = 6000;
    ThresholdOutcome th = find_threshold(sweep_cfg, nullptr);
    if (!th.found) {
        report(8, false, "no threshold found for the reference configuration");
        report(9, false, "replaced by criterion 8 (parameter transcription unavailable)");
        return;
    }
    std::printf("              fitted p_th = %.4f%% (nu0 = %.2f)\n", th.fit.p_th * 100,
                th.fit.nu0);

    // at half the fitted threshold the distances must order strictly with
    // non-overlapping 95%% intervals
    ExperimentConfig half = cfg;
    half.p_values = {th.fit.p_th / 2.0};
    half.n_trials = 20000;
    auto rows = run_sweep(half, nullptr);
    bool ordered = true;
    std::string detail;
    for (size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!(rows[i + 1].p_l < rows[i].p_l) || !(rows[i + 1].ci_hi < rows[i].ci_lo))
            ordered = false;
    }
    char pbuf[256];
    std::snprintf(pbuf, sizeof pbuf,
                  "p=p_th/2=%.5f: p_L(4)=%.4f [%.4f,%.4f] > p_L(6)=%.4f [%.4f,%.4f] > "
                  "p_L(8)=%.4f [%.4f,%.4f], %.0f s",
                  th.fit.p_th / 2, rows[0].p_l, rows[0].ci_lo, rows[0].ci_hi, rows[1].p_l,
                  rows[1].ci_lo, rows[1].ci_hi, rows[2].p_l, rows[2].ci_lo, rows[2].ci_hi,
                  now_seconds() - t_start);
    report(8, ordered, pbuf);

    char nbuf[220];
    std::snprintf(nbuf, sizeof nbuf,
                  "hardware-table transcription unavailable (figure-only source), replaced by "
                  "criterion 8 per the acceptance rules; reference fit gave p_th=%.4f%%",
                  th.fit.p_th * 100);
    report(9, ordered, nbuf);
}

// ---------------------------------------------------------------- criterion 10

void criterion_10_reproducibility() {
    ExperimentConfig cfg = reference_reflection_config();
    cfg.distances = {4, 6};
    cfg.p_values = {0.002, 0.004};
    cfg.n_trials = 2000;

    cfg.n_threads = 1;
    auto rows1 = run_sweep(cfg, nullptr);
    cfg.n_threads = 8;
    auto rows2 = run_sweep(cfg, nullptr);
    const std::string f1 = "/tmp/dqec_acc_runs1.csv", f2 = "/tmp/dqec_acc_runs2.csv";
    write_runs_csv(f1, rows1);
    write_runs_csv(f2, rows2);
    std::ifstream a(f1), b(f2);
    std::string sa((std::istreambuf_iterator<char>(a)), {});
    std::string sb((std::istreambuf_iterator<char>(b)), {});
    std::filesystem::remove(f1);
    std::filesystem::remove(f2);
    report(10, !sa.empty() && sa == sb,
           "identical config+seed produce byte-identical runs.csv across 1 and 8 threads");
}

} // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    criterion_1_double_click_closed_forms();
    criterion_2_carving_ideal_limits();
    criterion_3_reflection_ideal_limit();
    criterion_4_superoperator_validity();
    criterion_5_monte_carlo_oracle();
    criterion_6_decoder_equivalence();
    criterion_7_fit_recovery();
    criteria_8_and_9_subthreshold_scaling();
    criterion_10_reproducibility();
    std::printf("================\n%s (%.0f s total)\n",
                g_failures == 0 ? "all criteria passed" : "FAILURES PRESENT", now_seconds());
    return g_failures == 0 ? 0 : 1;
}
