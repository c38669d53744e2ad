#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dqec/harness.hpp"

using namespace dqec;

namespace {

int cmd_scheme(const std::string& config_path, const std::string& out_path,
               std::vector<double> p_list) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (p_list.empty()) p_list = cfg.p_values;
    std::ofstream out;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        out.open(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        os = &out;
    }
    const int n = cfg.arch == Architecture::WT4 ? 4 : 3;
    (*os) << "scheme,variant,n,n_sc,p_g,fidelity,p_succ\n";
    char buf[160];
    for (double p : p_list) {
        SchemeReport rep = evaluate_scheme(cfg, p);
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%d,%.17g,%.17g,%.17g\n", cfg.scheme.c_str(),
                      cfg.variant.c_str(), n,
                      cfg.scheme.rfind("carving", 0) == 0 ? cfg.carving.n_sc : 0, p,
                      rep.fidelity, rep.p_succ);
        (*os) << buf;
    }
    return 0;
}

int cmd_superop(const std::string& config_path, double p, const std::string& out_path) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    SuperoperatorTable table = build_table_for(cfg, p);
    save_table(table, out_path);
    std::cout << "wrote " << out_path << " (p_ghz_within_cutoff="
              << table.metadata().at("p_ghz_within_cutoff") << ")\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_path) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    auto rows = run_sweep(cfg, &std::cerr);
    write_runs_csv(out_path, rows);
    std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_fit(const std::string& runs_path, const std::string& out_path) {
    auto rows = read_runs_csv(runs_path);
    FitResult fit = fit_threshold(fit_points_from_rows(rows));
    write_fit_json(out_path, fit);
    std::cout << "p_th = " << fit.p_th << " (nu0 = " << fit.nu0 << ")\n";
    return 0;
}

int cmd_cutoff(const std::string& config_path, const std::string& out_path) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    CutoffOutcome res = optimize_cutoff(cfg, &std::cerr);
    if (!res.found) {
        std::cout << "NT\n";
        return 2;
    }
    std::cout << "x* = " << res.x_star << ", p_th = " << res.fit.p_th << "\n";
    if (!out_path.empty()) write_fit_json(out_path, res.fit);
    return 0;
}

int cmd_report(const std::string& config_path, const std::string& out_path) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);

    auto threshold_with = [&](DecoderKind k) {
        ExperimentConfig c = cfg;
        c.decoder = k;
        return find_threshold(c, &std::cerr);
    };
    ThresholdOutcome uf = threshold_with(DecoderKind::UnionFind);
    ThresholdOutcome mwpm = threshold_with(DecoderKind::Mwpm);

    const double p_eval = uf.found ? uf.fit.p_th : 0.0;
    SchemeResult ghz = generate_ghz(cfg, p_eval);
    const double t_cut = resolve_cutoff(cfg, ghz);
    const double t_scale = cfg.coherence.absolute ? cfg.coherence.t_link_s : 1.0;
    const double eta_star = ege(ghz.p_succ, ghz.duration * t_scale, cfg.coherence.t1_link,
                                cfg.coherence.t2_link);

    SuperoperatorTable table = build_table_for(cfg, p_eval);
    double succ_mass = 0.0;
    for (const auto& r : table.rows())
        if (r.ghz_success) succ_mass += r.p_plaquette;
    const double stab_fid =
        table.row(SuperoperatorTable::row_index(PauliString("IIII").index(), true, false))
            .p_plaquette /
        std::max(1e-300, succ_mass);

    std::ofstream out;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        out.open(out_path);
        os = &out;
    }
    (*os) << "arch,scheme,set,p_succ,p_th_mwpm,p_th_uf,x,ege,t_cut,ghz_fidelity,stab_fidelity\n";
    auto fmt_th = [](const ThresholdOutcome& t) {
        return t.found ? std::to_string(t.fit.p_th) : std::string("NT");
    };
    char buf[320];
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6g,%s,%s,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                  architecture_name(cfg.arch).c_str(), cfg.scheme.c_str(),
                  cfg.coherence_set.c_str(), ghz.p_succ, fmt_th(mwpm).c_str(),
                  fmt_th(uf).c_str(), cfg.x_cut, eta_star, t_cut,
                  ghz.state.overlap(ghz_vector(ghz.state.n_qubits())), stab_fid);
    (*os) << buf;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed toric-code threshold simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, runs_path;
    std::vector<double> p_list;
    double p_single = 0.0;

    auto* scheme = app.add_subcommand("scheme", "evaluate GHZ fidelity and success probability");
    scheme->add_option("--config", config_path, "experiment config file")->required();
    scheme->add_option("--p", p_list, "gate error values (defaults to config p_values)");
    scheme->add_option("-o,--out", out_path, "output CSV (stdout when omitted)");

    auto* superop = app.add_subcommand("superop", "build and save a superoperator table");
    superop->add_option("--config", config_path, "experiment config file")->required();
    superop->add_option("--p", p_single, "physical error probability")->required();
    superop->add_option("-o,--out", out_path, "output table CSV")->required();

    auto* run = app.add_subcommand("run", "Monte Carlo logical-error sweep");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("-o,--out", out_path, "output runs.csv")->required();

    auto* fit = app.add_subcommand("fit", "finite-size-scaling threshold fit from runs.csv");
    fit->add_option("--runs", runs_path, "runs.csv produced by `run`")->required();
    fit->add_option("-o,--out", out_path, "output fit.json")->required();

    auto* cutoff = app.add_subcommand("cutoff", "optimize the GHZ completion fraction");
    cutoff->add_option("--config", config_path, "experiment config file")->required();
    cutoff->add_option("-o,--out", out_path, "optional fit.json at the optimum");

    auto* report = app.add_subcommand("report", "aggregate table for one configuration");
    report->add_option("--config", config_path, "experiment config file")->required();
    report->add_option("-o,--out", out_path, "output CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (scheme->parsed()) return cmd_scheme(config_path, out_path, p_list);
        if (superop->parsed()) return cmd_superop(config_path, p_single, out_path);
        if (run->parsed()) return cmd_run(config_path, out_path);
        if (fit->parsed()) return cmd_fit(runs_path, out_path);
        if (cutoff->parsed()) return cmd_cutoff(config_path, out_path);
        if (report->parsed()) return cmd_report(config_path, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
