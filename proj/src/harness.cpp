#include "dqec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace dqec {

DecoderKind decoder_from_name(const std::string& s) {
    if (s == "uf" || s == "union-find") return DecoderKind::UnionFind;
    if (s == "mwpm") return DecoderKind::Mwpm;
    throw std::invalid_argument("unknown decoder: " + s);
}

std::string decoder_name(DecoderKind k) {
    return k == DecoderKind::UnionFind ? "uf" : "mwpm";
}

void ExperimentConfig::validate() const {
    for (int d : distances)
        if (d < 4 || d % 2) throw std::invalid_argument("distances must be even and at least 4");
    for (double p : p_values)
        if (p < 0.0 || p > 0.05)
            throw std::invalid_argument("physical error probability out of [0, 0.05]");
    if (n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
    if (x_cut != 0.0 && (x_cut <= 0.0 || x_cut >= 1.0))
        throw std::invalid_argument("x_cut must lie in (0,1)");
    if (x_cut == 0.0 && t_cut <= 0.0)
        throw std::invalid_argument("either x_cut or t_cut must be set");
    if (scheme != "emission" && scheme != "reflection" && scheme != "carving_sps" &&
        scheme != "carving_coherent")
        throw std::invalid_argument("unknown scheme: " + scheme);
    if (scheme == "emission" && protocol_file.empty())
        throw std::invalid_argument("emission scheme needs a protocol_file");
}

// --- config parsing ----------------------------------------------------------------

namespace {

struct KeyValue {
    std::map<std::string, std::string> kv;

    bool has(const std::string& k) const { return kv.count(k) > 0; }
    std::string take(const std::string& k) {
        auto it = kv.find(k);
        std::string v = it->second;
        kv.erase(it);
        return v;
    }
    double number(const std::string& k) { return std::stod(take(k)); }
    long integer(const std::string& k) { return std::stol(take(k)); }
    bool flag(const std::string& k) {
        std::string v = take(k);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw std::invalid_argument("boolean key " + k + " must be true/false");
    }
};

KeyValue parse_kv(const std::string& text) {
    KeyValue out;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " is not key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        " has an empty key or value");
        if (out.kv.count(key))
            throw std::invalid_argument("duplicate config key: " + key);
        out.kv[key] = val;
    }
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

} // namespace

namespace {

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty() || path.front() == '/') return path;
    return base_dir + "/" + path;
}

} // namespace

ExperimentConfig ExperimentConfig::from_string(const std::string& text,
                                               const std::string& base_dir) {
    KeyValue kv = parse_kv(text);
    ExperimentConfig cfg;

    if (kv.has("scheme_params")) {
        std::ifstream in(resolve_path(base_dir, kv.take("scheme_params")));
        if (!in) throw std::invalid_argument("cannot open scheme_params file");
        std::stringstream ss;
        ss << in.rdbuf();
        KeyValue extra = parse_kv(ss.str());
        for (auto& [k, v] : extra.kv) {
            if (kv.kv.count(k)) throw std::invalid_argument("duplicate key from include: " + k);
            kv.kv[k] = v;
        }
    }

    if (kv.has("architecture")) cfg.arch = architecture_from_name(kv.take("architecture"));
    if (kv.has("scheme")) cfg.scheme = kv.take("scheme");
    if (kv.has("variant")) cfg.variant = kv.take("variant");
    if (kv.has("coherence_set")) cfg.coherence_set = kv.take("coherence_set");
    cfg.coherence = resolve_coherence_set(cfg.coherence_set);
    if (kv.has("distances")) {
        cfg.distances.clear();
        for (double d : parse_list(kv.take("distances"))) cfg.distances.push_back(int(d));
    }
    if (kv.has("p_values")) cfg.p_values = parse_list(kv.take("p_values"));
    if (kv.has("n_trials")) cfg.n_trials = kv.integer("n_trials");
    if (kv.has("seed")) cfg.seed = uint64_t(kv.integer("seed"));
    if (kv.has("x_cut")) cfg.x_cut = kv.number("x_cut");
    if (kv.has("t_cut")) cfg.t_cut = kv.number("t_cut");
    if (kv.has("decoder")) cfg.decoder = decoder_from_name(kv.take("decoder"));
    if (kv.has("protocol_file"))
        cfg.protocol_file = resolve_path(base_dir, kv.take("protocol_file"));
    if (kv.has("n_threads")) cfg.n_threads = int(kv.integer("n_threads"));

    // emission parameters
    if (kv.has("f_prep")) cfg.emission.f_prep = kv.number("f_prep");
    if (kv.has("p_ee")) cfg.emission.p_ee = kv.number("p_ee");
    if (kv.has("mu")) cfg.emission.mu = kv.number("mu");
    if (kv.has("lambda_dephase")) cfg.emission.lambda_dephase = kv.number("lambda_dephase");
    if (kv.has("sigma_phi"))
        cfg.emission.lambda_dephase = lambda_from_phase_std(kv.number("sigma_phi"));
    if (kv.has("eta_ph")) cfg.emission.eta_ph = kv.number("eta_ph");
    if (kv.has("alpha_bright")) cfg.emission.alpha_bright = kv.number("alpha_bright");

    // scattering-scheme parameters (shared symbols feed both structs)
    auto set_both = [&](const char* key, auto setter) {
        if (kv.has(key)) {
            const double v = kv.number(key);
            setter(v);
        }
    };
    set_both("c1", [&](double v) { cfg.reflection.c1 = v; });
    set_both("c2", [&](double v) { cfg.carving.c2 = v; });
    set_both("p_purcell", [&](double v) { cfg.carving.p_purcell = v; });
    set_both("kappa_c", [&](double v) { cfg.reflection.kappa_c = cfg.carving.kappa_c = v; });
    set_both("kappa_l", [&](double v) { cfg.reflection.kappa_l = cfg.carving.kappa_l = v; });
    set_both("gamma", [&](double v) { cfg.reflection.gamma = cfg.carving.gamma = v; });
    set_both("delta", [&](double v) { cfg.reflection.delta = cfg.carving.delta = v; });
    set_both("sigma", [&](double v) { cfg.reflection.sigma = cfg.carving.sigma = v; });
    set_both("omega", [&](double v) { cfg.reflection.omega = cfg.carving.omega = v; });
    set_both("delta1", [&](double v) { cfg.reflection.delta1 = cfg.carving.delta1 = v; });
    set_both("eta_c", [&](double v) { cfg.reflection.eta_c = v; });
    set_both("p_dk", [&](double v) { cfg.reflection.p_dk = v; });
    set_both("eta_f", [&](double v) { cfg.carving.eta_f = v; });
    set_both("eta_det", [&](double v) { cfg.carving.eta_det = v; });
    if (kv.has("n_sc")) cfg.carving.n_sc = int(kv.integer("n_sc"));
    set_both("alpha_coherent", [&](double v) { cfg.carving.alpha_coherent = v; });
    if (cfg.variant == "waveguide") cfg.carving.mode = CarvingMode::Waveguide;

    // operation times
    set_both("t_link", [&](double v) { cfg.times.t_link = v; });
    set_both("t_meas", [&](double v) { cfg.times.t_meas = v; });
    set_both("t_single_comm", [&](double v) { cfg.times.t_single_comm = v; });
    set_both("t_single_mem", [&](double v) { cfg.times.t_single_mem = v; });
    set_both("t_cz", [&](double v) { cfg.times.t_cz = v; });
    set_both("t_cx", [&](double v) { cfg.times.t_cx = v; });
    set_both("t_ciy", [&](double v) { cfg.times.t_ciy = v; });
    set_both("t_swap", [&](double v) { cfg.times.t_swap = v; });

    // coherence overrides
    set_both("t1_link", [&](double v) { cfg.coherence.t1_link = v; });
    set_both("t2_link", [&](double v) { cfg.coherence.t2_link = v; });
    set_both("t1_idle", [&](double v) { cfg.coherence.t1_idle = v; });
    set_both("t2_idle", [&](double v) { cfg.coherence.t2_idle = v; });
    if (kv.has("dd_enabled")) cfg.coherence.dd_enabled = kv.flag("dd_enabled");
    set_both("t_pulse", [&](double v) { cfg.coherence.t_pulse = v; });
    if (kv.has("n_dd")) cfg.coherence.n_dd = int(kv.integer("n_dd"));

    if (!kv.kv.empty()) {
        std::string keys;
        for (auto& [k, v] : kv.kv) keys += (keys.empty() ? "" : ", ") + k;
        throw std::invalid_argument("unknown config keys: " + keys);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto slash = path.find_last_of('/');
    const std::string dir = slash == std::string::npos ? std::string(".") : path.substr(0, slash);
    return from_string(ss.str(), dir);
}

// --- scheme dispatch ----------------------------------------------------------------

SchemeResult generate_ghz(const ExperimentConfig& cfg, double p) {
    const CircuitNoise noise = CircuitNoise::uniform(p);
    const int n = cfg.arch == Architecture::WT4 ? 4 : 3;
    const int n_u = n == 4 ? 2 : 2;
    const int n_d = n - n_u;

    if (cfg.scheme == "reflection") return reflection_ghz(cfg.reflection, n, noise);
    if (cfg.scheme == "carving_sps") return carving_sps_ghz(cfg.carving, n_u, n_d, noise);
    if (cfg.scheme == "carving_coherent")
        return carving_coherent_ghz(cfg.carving, n_u, n_d, noise);
    if (cfg.scheme == "emission") {
        if (cfg.variant != "single_click" && cfg.variant != "double_click")
            throw std::invalid_argument("emission scheme needs variant single_click or "
                                        "double_click");
        SchemeResult bell = cfg.variant == "single_click" ? single_click(cfg.emission, noise)
                                                          : double_click(cfg.emission, noise);
        Protocol prot = load_protocol(cfg.protocol_file);
        if (int(prot.root->modules().size()) != n)
            throw std::invalid_argument("protocol output size does not match architecture");
        return execute(prot, bell, noise, cfg.times, cfg.coherence);
    }
    throw std::invalid_argument("unknown scheme: " + cfg.scheme);
}

double resolve_cutoff(const ExperimentConfig& cfg, const SchemeResult& ghz) {
    if (cfg.x_cut > 0.0) return cutoff_to_time(cfg.x_cut, ghz.p_succ, ghz.duration);
    return cfg.t_cut;
}

SuperoperatorTable build_table_for(const ExperimentConfig& cfg, double p) {
    SchemeResult ghz = generate_ghz(cfg, p);
    StabilizerConfig sc;
    sc.arch = cfg.arch;
    sc.noise = CircuitNoise::uniform(p);
    sc.times = cfg.times;
    sc.coherence = cfg.coherence;
    sc.t_cut = resolve_cutoff(cfg, ghz);
    SuperoperatorTable t = build_table(sc, ghz);
    t.metadata()["scheme"] = cfg.scheme;
    t.metadata()["p"] = std::to_string(p);
    return t;
}

// --- Monte Carlo estimation ----------------------------------------------------------

std::pair<double, double> wilson_interval(long failures, long trials) {
    const double z = 1.959963984540054;
    const double n = double(trials);
    const double phat = failures / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
    // the interval always contains the point estimate
    const double lo = failures == 0 ? 0.0 : std::min(phat, std::max(0.0, center - half));
    const double hi = failures == trials ? 1.0 : std::max(phat, std::min(1.0, center + half));
    return {lo, hi};
}

namespace {

bool decode_trial_fails(const ToricLayout& layout, const TrialResult& trial,
                        DecoderKind decoder) {
    PauliFrame corr(layout.n_data());
    for (StabType type : {StabType::Z, StabType::X}) {
        MatchingGraph g = make_graph(layout, trial.history, type);
        Correction c =
            decoder == DecoderKind::UnionFind ? uf_decode(g, layout) : mwpm_decode(g, layout);
        for (int q = 0; q < layout.n_data(); ++q) {
            corr.x_bits[q] ^= c.frame.x_bits[q];
            corr.z_bits[q] ^= c.frame.z_bits[q];
        }
    }
    const auto flags = check_logical(trial.true_frame, corr, layout);
    return flags[0] || flags[1] || flags[2] || flags[3];
}

} // namespace

LogicalErrorResult estimate_logical_error(const ExperimentConfig& cfg,
                                          const SuperoperatorTable& table, int d,
                                          uint64_t seed_offset) {
    const ToricLayout layout(cfg.arch, d);
    const long trials = cfg.n_trials;
    const int hw = cfg.n_threads > 0 ? cfg.n_threads
                                     : std::max(1u, std::thread::hardware_concurrency());
    const int n_threads = int(std::min<long>(hw, std::max<long>(1, trials / 64)));

    std::vector<long> fail_counts(n_threads, 0);
    std::vector<std::thread> pool;
    for (int tid = 0; tid < n_threads; ++tid) {
        pool.emplace_back([&, tid] {
            long local = 0;
            for (long i = tid; i < trials; i += n_threads) {
                // stream keyed by the trial index alone: results do not depend
                // on the thread count
                Rng rng(cfg.seed, seed_offset + uint64_t(i));
                TrialResult trial = run_trial(layout, table, rng);
                if (decode_trial_fails(layout, trial, cfg.decoder)) ++local;
            }
            fail_counts[tid] = local;
        });
    }
    for (auto& t : pool) t.join();

    LogicalErrorResult out;
    out.trials = trials;
    for (long f : fail_counts) out.failures += f;
    out.p_l = double(out.failures) / double(trials);
    std::tie(out.ci_lo, out.ci_hi) = wilson_interval(out.failures, out.trials);
    return out;
}

// --- fitting -------------------------------------------------------------------------

namespace {

double fit_model(const std::array<double, 5>& th, int d, double p) {
    const double g = (p - th[3]) * std::pow(double(d), 1.0 / th[4]);
    return th[0] + th[1] * g + th[2] * g * g;
}

// weighted residual vector
void fit_residuals(const std::array<double, 5>& th, const std::vector<FitPoint>& data,
                   std::vector<double>& r) {
    r.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i)
        r[i] = (fit_model(th, data[i].d, data[i].p) - data[i].p_l) / data[i].sigma;
}

} // namespace

FitResult fit_threshold(const std::vector<FitPoint>& data) {
    std::set<int> dset;
    std::set<double> pset;
    for (const auto& pt : data) {
        dset.insert(pt.d);
        pset.insert(pt.p);
        if (!(pt.sigma > 0)) throw std::invalid_argument("fit points need positive sigma");
    }
    if (dset.size() < 3 || pset.size() < 4)
        throw std::invalid_argument("fit needs at least 3 distances and 4 p values");

    // initialization: crossing of the two largest-d curves by interpolation
    std::vector<int> ds(dset.begin(), dset.end());
    const int d1 = ds[ds.size() - 2], d2 = ds[ds.size() - 1];
    std::map<double, double> curve1, curve2;
    for (const auto& pt : data) {
        if (pt.d == d1) curve1[pt.p] = pt.p_l;
        if (pt.d == d2) curve2[pt.p] = pt.p_l;
    }
    double p_th0 = -1.0;
    {
        std::vector<double> ps;
        for (auto& [p, v] : curve1)
            if (curve2.count(p)) ps.push_back(p);
        for (size_t i = 0; i + 1 < ps.size(); ++i) {
            const double a = curve2[ps[i]] - curve1[ps[i]];
            const double b = curve2[ps[i + 1]] - curve1[ps[i + 1]];
            if (a == 0.0 && b == 0.0) continue;
            if (a <= 0.0 && b >= 0.0) {
                p_th0 = b == a ? ps[i] : ps[i] + (ps[i + 1] - ps[i]) * (0.0 - a) / (b - a);
                break;
            }
        }
    }
    if (p_th0 < 0.0) throw std::runtime_error("no crossing");

    // linear least squares for (A,B,C) at fixed (p_th, nu0)
    auto linear_abc = [&](double p_th, double nu0) {
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atb = Eigen::Vector3d::Zero();
        for (const auto& pt : data) {
            const double g = (pt.p - p_th) * std::pow(double(pt.d), 1.0 / nu0);
            Eigen::Vector3d row(1.0, g, g * g);
            const double w = 1.0 / (pt.sigma * pt.sigma);
            ata += w * row * row.transpose();
            atb += w * row * pt.p_l;
        }
        Eigen::Vector3d abc = ata.ldlt().solve(atb);
        return abc;
    };
    Eigen::Vector3d abc0 = linear_abc(p_th0, 1.0);
    std::array<double, 5> th = {abc0(0), abc0(1), abc0(2), p_th0, 1.0};

    // Levenberg-Marquardt with a numeric Jacobian
    std::vector<double> r, r_try;
    fit_residuals(th, data, r);
    double chi2 = 0;
    for (double v : r) chi2 += v * v;
    double lambda = 1e-3;
    Eigen::MatrixXd jac(data.size(), 5);
    Eigen::Matrix<double, 5, 5> jtj_final = Eigen::Matrix<double, 5, 5>::Zero();
    for (int iter = 0; iter < 200; ++iter) {
        for (int k = 0; k < 5; ++k) {
            std::array<double, 5> th_h = th;
            const double h = std::max(1e-9, std::abs(th[k]) * 1e-6);
            th_h[k] += h;
            fit_residuals(th_h, data, r_try);
            for (size_t i = 0; i < data.size(); ++i) jac(i, k) = (r_try[i] - r[i]) / h;
        }
        Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
        jtj_final = jtj;
        Eigen::Matrix<double, 5, 1> jtr;
        Eigen::VectorXd rv = Eigen::Map<Eigen::VectorXd>(r.data(), r.size());
        jtr = jac.transpose() * rv;
        if (jtr.norm() < 1e-14) break;

        Eigen::Matrix<double, 5, 5> lhs = jtj;
        for (int k = 0; k < 5; ++k) lhs(k, k) *= (1.0 + lambda);
        if (std::abs(lhs.determinant()) < 1e-300)
            throw std::runtime_error("degenerate Jacobian in threshold fit");
        Eigen::Matrix<double, 5, 1> step = lhs.ldlt().solve(-jtr);

        std::array<double, 5> th_new = th;
        for (int k = 0; k < 5; ++k) th_new[k] += step(k);
        th_new[4] = std::clamp(th_new[4], 0.05, 50.0);
        fit_residuals(th_new, data, r_try);
        double chi2_new = 0;
        for (double v : r_try) chi2_new += v * v;
        if (chi2_new < chi2) {
            const double improvement = chi2 - chi2_new;
            th = th_new;
            r = r_try;
            chi2 = chi2_new;
            lambda = std::max(1e-12, lambda * 0.5);
            if (improvement < 1e-15 * (1.0 + chi2)) break;
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
    }

    FitResult out;
    out.a = th[0];
    out.b = th[1];
    out.c = th[2];
    out.p_th = th[3];
    out.nu0 = th[4];
    out.residual_norm = std::sqrt(chi2);
    const double dof = std::max(1.0, double(data.size()) - 5.0);
    Eigen::Matrix<double, 5, 5> cov = jtj_final.inverse() * (chi2 / dof);
    for (int k = 0; k < 5; ++k) out.cov_diag[k] = cov(k, k);

    if (!(out.nu0 > 0)) throw std::runtime_error("fit produced a non-positive exponent");
    double pmin = 1e300, pmax = -1e300;
    for (const auto& pt : data) {
        pmin = std::min(pmin, pt.p);
        pmax = std::max(pmax, pt.p);
    }
    if (out.p_th < pmin || out.p_th > pmax)
        throw std::runtime_error("no crossing");
    return out;
}

// --- cut-off -------------------------------------------------------------------------

int cutoff_attempts(double x, double p_succ) {
    if (!(x > 0.0 && x < 1.0)) {
        if (x >= 1.0 && p_succ >= 1.0) return 1;
        throw std::invalid_argument("completion fraction must lie in (0,1)");
    }
    if (!(p_succ > 0.0) || p_succ > 1.0)
        throw std::invalid_argument("p_succ must lie in (0,1]");
    if (p_succ >= 1.0) return 1;
    const double k = std::log1p(-x) / std::log1p(-p_succ);
    int ik = int(std::ceil(k - 1e-9));
    while (1.0 - std::pow(1.0 - p_succ, ik) < x - 1e-15) ++ik;
    return std::max(1, ik);
}

double cutoff_to_time(double x, double p_succ, double attempt_duration) {
    return cutoff_attempts(x, p_succ) * attempt_duration;
}

double ege(double p_succ, double t, double T1, double T2) {
    if (!(t > 0) || !(T1 > 0) || !(T2 > 0))
        throw std::invalid_argument("ege needs positive times");
    const double inv = 1.0 / T1 + 1.0 / T2;
    if (inv == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * p_succ / (t * inv);
}

// --- runner --------------------------------------------------------------------------

std::vector<RunRow> run_sweep(const ExperimentConfig& cfg, std::ostream* progress) {
    cfg.validate();
    std::vector<RunRow> rows;
    std::vector<double> ps = cfg.p_values;
    std::sort(ps.begin(), ps.end());
    std::vector<int> ds = cfg.distances;
    std::sort(ds.begin(), ds.end());

    uint64_t stream_base = 0;
    for (double p : ps) {
        SuperoperatorTable table = build_table_for(cfg, p);
        for (int d : ds) {
            LogicalErrorResult res = estimate_logical_error(cfg, table, d, stream_base);
            stream_base += uint64_t(cfg.n_trials);
            RunRow row{cfg.arch,     cfg.scheme, cfg.coherence_set, d,
                       p,            res.trials, res.failures,      res.p_l,
                       res.ci_lo,    res.ci_hi,  cfg.seed};
            rows.push_back(row);
            if (progress)
                (*progress) << "d=" << d << " p=" << p << " p_L=" << res.p_l << " ["
                            << res.ci_lo << ", " << res.ci_hi << "]\n";
        }
    }
    return rows;
}

void write_runs_csv(const std::string& path, const std::vector<RunRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "arch,scheme,set,d,p,trials,failures,p_L,ci_lo,ci_hi,seed\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%d,%.17g,%ld,%ld,%.17g,%.17g,%.17g,%llu\n",
                      architecture_name(r.arch).c_str(), r.scheme.c_str(), r.set.c_str(), r.d,
                      r.p, r.trials, r.failures, r.p_l, r.ci_lo, r.ci_hi,
                      (unsigned long long)r.seed);
        out << buf;
    }
}

std::vector<RunRow> read_runs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "arch,scheme,set,d,p,trials,failures,p_L,ci_lo,ci_hi,seed")
        throw std::runtime_error("unrecognized runs.csv header");
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 11) throw std::runtime_error("malformed runs.csv row: " + line);
        RunRow r{architecture_from_name(f[0]), f[1],           f[2],
                 std::stoi(f[3]),              std::stod(f[4]), std::stol(f[5]),
                 std::stol(f[6]),              std::stod(f[7]), std::stod(f[8]),
                 std::stod(f[9]),              uint64_t(std::stoull(f[10]))};
        rows.push_back(r);
    }
    return rows;
}

std::vector<FitPoint> fit_points_from_rows(const std::vector<RunRow>& rows) {
    std::vector<FitPoint> pts;
    for (const auto& r : rows) {
        FitPoint pt;
        pt.d = r.d;
        pt.p = r.p;
        pt.p_l = r.p_l;
        pt.sigma = std::max(1e-6, (r.ci_hi - r.ci_lo) / 2.0);
        pts.push_back(pt);
    }
    return pts;
}

void write_fit_json(const std::string& path, const FitResult& fit) {
    nlohmann::json j;
    j["A"] = fit.a;
    j["B"] = fit.b;
    j["C"] = fit.c;
    j["p_th"] = fit.p_th;
    j["nu0"] = fit.nu0;
    j["cov_diag"] = fit.cov_diag;
    j["residual_norm"] = fit.residual_norm;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

bool monotone_within_intervals(const std::vector<RunRow>& rows) {
    std::map<int, std::vector<const RunRow*>> by_d;
    for (const auto& r : rows) by_d[r.d].push_back(&r);
    for (auto& [d, curve] : by_d) {
        std::sort(curve.begin(), curve.end(),
                  [](const RunRow* a, const RunRow* b) { return a->p < b->p; });
        for (size_t i = 0; i + 1 < curve.size(); ++i)
            if (curve[i + 1]->ci_hi < curve[i]->ci_lo) return false;
    }
    return true;
}

ThresholdOutcome find_threshold(const ExperimentConfig& cfg, std::ostream* progress) {
    ThresholdOutcome out;
    out.rows = run_sweep(cfg, progress);
    // abandon rule: logical error rates above 0.90 mean no usable signal
    bool all_saturated = true;
    for (const auto& r : out.rows)
        if (r.p_l <= 0.90) all_saturated = false;
    if (all_saturated) return out;
    try {
        out.fit = fit_threshold(fit_points_from_rows(out.rows));
        out.found = true;
    } catch (const std::exception&) {
        out.found = false;
    }
    return out;
}

std::pair<double, double> golden_section_max(const std::function<double(double)>& f,
                                             double lo, double hi, int iterations) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iterations; ++it) {
        // ties (within error bars upstream) shrink toward the smaller x
        if (f1 >= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

CutoffOutcome optimize_cutoff(const ExperimentConfig& cfg, std::ostream* progress) {
    CutoffOutcome best;
    const long reduced = std::max<long>(200, cfg.n_trials / 4);
    std::map<double, FitResult> fits;
    auto probe = [&](double x, long trials) -> std::optional<FitResult> {
        ExperimentConfig c = cfg;
        c.x_cut = x;
        c.t_cut = 0.0;
        c.n_trials = trials;
        ThresholdOutcome t = find_threshold(c, nullptr);
        if (progress)
            (*progress) << "x=" << x
                        << (t.found ? " p_th=" + std::to_string(t.fit.p_th) : " NT") << "\n";
        if (!t.found) return std::nullopt;
        return t.fit;
    };

    auto [x_best, v_best] = golden_section_max(
        [&](double x) {
            auto f = probe(x, reduced);
            if (f) fits[x] = *f;
            return f ? f->p_th : -1.0;
        },
        0.5, 0.999, 10);
    if (v_best < 0) return best; // NT everywhere

    auto final_fit = probe(x_best, cfg.n_trials);
    if (!final_fit) return best;
    best.found = true;
    best.x_star = x_best;
    best.fit = *final_fit;
    return best;
}

SchemeReport evaluate_scheme(const ExperimentConfig& cfg, double p) {
    SchemeResult r = generate_ghz(cfg, p);
    SchemeReport rep;
    rep.p_succ = r.p_succ;
    rep.duration = r.duration;
    rep.fidelity = r.state.overlap(ghz_vector(r.state.n_qubits()));
    return rep;
}

} // namespace dqec
