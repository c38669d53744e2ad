#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dqec/decoders.hpp"
#include "dqec/protocols.hpp"
#include "dqec/superoperator.hpp"

namespace dqec {

enum class DecoderKind { UnionFind, Mwpm };
DecoderKind decoder_from_name(const std::string& s);
std::string decoder_name(DecoderKind k);

struct ExperimentConfig {
    Architecture arch = Architecture::WT4;
    std::string scheme = "reflection"; // emission | reflection | carving_sps | carving_coherent
    std::string variant;               // emission: single_click | double_click
                                       // carving: cavity | waveguide
    std::string coherence_set = "Set-3";
    std::vector<int> distances = {4, 6, 8};
    std::vector<double> p_values = {0.001};
    long n_trials = 1000;
    uint64_t seed = 1;
    double x_cut = 0.0; // completion fraction; 0 means use t_cut directly
    double t_cut = 0.0; // t_link units
    DecoderKind decoder = DecoderKind::UnionFind;
    std::string protocol_file; // emission GHZ fusion tree
    int n_threads = 0;         // 0: hardware concurrency

    EmissionParams emission;
    ReflectionParams reflection;
    CarvingParams carving;
    OperationTimes times;
    CoherenceSet coherence = resolve_coherence_set("Set-3");

    void validate() const;

    // flat typed key=value text; unknown keys are rejected. Relative
    // scheme_params / protocol_file paths resolve against base_dir.
    static ExperimentConfig from_string(const std::string& text,
                                        const std::string& base_dir = "");
    static ExperimentConfig from_file(const std::string& path);
};

// GHZ (or Bell-chain) generation for the configured scheme at physical error p
SchemeResult generate_ghz(const ExperimentConfig& cfg, double p);

// cut-off time in t_link units for the configured x_cut / t_cut
double resolve_cutoff(const ExperimentConfig& cfg, const SchemeResult& ghz);

SuperoperatorTable build_table_for(const ExperimentConfig& cfg, double p);

struct LogicalErrorResult {
    long trials = 0;
    long failures = 0;
    double p_l = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; // Wilson 95%
};

LogicalErrorResult estimate_logical_error(const ExperimentConfig& cfg,
                                          const SuperoperatorTable& table, int d,
                                          uint64_t seed_offset = 0);

// Wilson score interval at 95%
std::pair<double, double> wilson_interval(long failures, long trials);

// --- finite-size-scaling fit ---------------------------------------------------

struct FitPoint {
    int d = 0;
    double p = 0.0;
    double p_l = 0.0;
    double sigma = 0.0;
};

struct FitResult {
    double a = 0, b = 0, c = 0;
    double p_th = 0;
    double nu0 = 1;
    std::array<double, 5> cov_diag{};
    double residual_norm = 0;
};

// least squares for p_L = A + B g + C g^2 with g = (p - p_th) L^{1/nu0};
// throws std::runtime_error("no crossing") when the two largest distances
// never cross in the sampled range
FitResult fit_threshold(const std::vector<FitPoint>& data);

// --- cut-off machinery -----------------------------------------------------------

// smallest k with 1 - (1-p)^k >= x
int cutoff_attempts(double x, double p_succ);
double cutoff_to_time(double x, double p_succ, double attempt_duration);

double ege(double p_succ, double t, double T1, double T2);

// --- sweep runner ------------------------------------------------------------------

struct RunRow {
    Architecture arch;
    std::string scheme;
    std::string set;
    int d;
    double p;
    long trials;
    long failures;
    double p_l, ci_lo, ci_hi;
    uint64_t seed;
};

std::vector<RunRow> run_sweep(const ExperimentConfig& cfg, std::ostream* progress = nullptr);
void write_runs_csv(const std::string& path, const std::vector<RunRow>& rows);
std::vector<RunRow> read_runs_csv(const std::string& path);
std::vector<FitPoint> fit_points_from_rows(const std::vector<RunRow>& rows);
void write_fit_json(const std::string& path, const FitResult& fit);

// true when every per-distance curve is non-decreasing in p within the
// confidence intervals (interval overlap forgives statistical dips)
bool monotone_within_intervals(const std::vector<RunRow>& rows);

struct ThresholdOutcome {
    bool found = false;
    FitResult fit;
    std::vector<RunRow> rows;
};

// full sweep + fit; not-found either when the abandon rule fires (all
// logical error rates above 0.90) or when no crossing exists
ThresholdOutcome find_threshold(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

struct CutoffOutcome {
    bool found = false; // "NT" when false
    double x_star = 0.0;
    FitResult fit;
};

// golden-section argmax over [lo, hi]; f returning a negative value means
// "no threshold at this x". Returns (x*, f(x*)).
std::pair<double, double> golden_section_max(const std::function<double(double)>& f,
                                             double lo = 0.5, double hi = 0.999,
                                             int iterations = 10);

// golden-section search over the completion fraction x in [0.5, 0.999]
CutoffOutcome optimize_cutoff(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

struct SchemeReport {
    double fidelity = 0.0;
    double p_succ = 0.0;
    double duration = 1.0;
};
SchemeReport evaluate_scheme(const ExperimentConfig& cfg, double p);

} // namespace dqec
