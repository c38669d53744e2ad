#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "dqec/noise.hpp"
#include "dqec/schemes.hpp"

namespace dqec {

enum class Architecture { WT4, WT3 };
enum class StabType { Z, X }; // plaquette / vertex

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& s);

// One of the 4^4 x 2 x 2 = 1024 sampling rows of a noisy-stabilizer table.
struct SuperoperatorRow {
    PauliString error; // length 4, fixed data-qubit order
    bool ghz_success = true;
    bool meas_error = false;
    double p_plaquette = 0.0;
    double p_vertex = 0.0;
    double p_idle = 0.0; // WT3 only
};

class SuperoperatorTable {
public:
    static constexpr int kErrorCount = 256;
    static constexpr int kRowCount = 1024;

    SuperoperatorTable() = default;
    explicit SuperoperatorTable(Architecture arch);

    Architecture architecture() const { return arch_; }
    bool has_idle() const { return arch_ == Architecture::WT3; }

    static int row_index(uint32_t error_idx, bool ghz_success, bool meas_error) {
        return int(error_idx) * 4 + (ghz_success ? 0 : 2) + (meas_error ? 1 : 0);
    }
    SuperoperatorRow& row(int idx) { return rows_[idx]; }
    const SuperoperatorRow& row(int idx) const { return rows_[idx]; }
    const std::vector<SuperoperatorRow>& rows() const { return rows_; }

    std::map<std::string, std::string>& metadata() { return metadata_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }

    double column_sum(StabType type) const;
    double idle_sum(bool ghz_success) const;
    // throws if any column sum violates its normalization within tol
    void check_normalization(double tol = 1e-8) const;

    // cumulative tables for sampling; call after filling probabilities
    void finalize();
    bool finalized() const { return !cum_plaquette_.empty(); }

    // draws a row index from the requested column
    int sample(StabType type, double u) const;
    // draws a 4-qubit idle error string index conditioned on ghz_success
    uint32_t sample_idle(bool ghz_success, double u) const;

private:
    Architecture arch_ = Architecture::WT4;
    std::vector<SuperoperatorRow> rows_;
    std::map<std::string, std::string> metadata_;
    std::vector<double> cum_plaquette_, cum_vertex_;
    std::vector<double> cum_idle_true_, cum_idle_false_; // per error string
};

// Four maximally entangled pairs: data qubits 0..3, reference qubits 4..7.
DensityMatrix build_choi_input(int n_data);

struct StabilizerBranches {
    DensityMatrix success_even; // recorded +1 outcome, circuit+reference qubits
    DensityMatrix success_odd;  // recorded -1 outcome
    DensityMatrix fail;         // no GHZ within the cut-off
    double p_ghz = 0.0;         // P(GHZ within t_cut)
};

struct StabilizerConfig {
    Architecture arch = Architecture::WT4;
    StabType type = StabType::Z;
    CircuitNoise noise;
    OperationTimes times;
    CoherenceSet coherence = resolve_coherence_set("Set-3");
    double t_cut = 100.0; // t_link units
    // test hook: channel injected on one data qubit before the circuit
    const KrausChannel* inject = nullptr;
    int inject_qubit = 0;
};

StabilizerBranches simulate_stabilizer(const StabilizerConfig& cfg, const SchemeResult& ghz);

// Squared-overlap decomposition of the success branches onto the complete
// orthonormal family (E Pi_sigma x I)|Phi>, with each {E, E*S} pair assigned
// to its lower-weight representative. Returns 1024 row probabilities (the
// ghz_success = false rows stay zero).
std::vector<double> decompose_success(const StabilizerBranches& branches, StabType type);

// Pauli-twirl of the failure branch: 256 probabilities over error strings.
std::vector<double> decompose_failure(const DensityMatrix& fail);

// Idle-qubit error distribution for the WT3 unit cell, qubit order
// (5,6,7,8): two active-idle qubits at the link coherence times and two
// fully idle qubits at the idle coherence times.
struct Wt3IdleDurations {
    double t_active_idle = 0.0; // t_link units at T_link
    double t_full_idle = 0.0;   // t_link units at T_idle
    // gate/measurement windows appended at idle coherence times
    double t_windows = 0.0;
};
std::vector<double> wt3_idle_column(const CoherenceSet& coherence,
                                    const Wt3IdleDurations& durations);

SuperoperatorTable build_table(const StabilizerConfig& cfg, const SchemeResult& ghz);

void save_table(const SuperoperatorTable& table, const std::string& path);
SuperoperatorTable load_table(const std::string& path);

// geometric-success machinery shared with the harness
int attempts_within_cutoff(double t_cut, double attempt_duration);
double ghz_success_within_cutoff(double p_succ, double t_cut, double attempt_duration);

// canonical representative of {E, E*S}: lower weight, then lexicographic
uint32_t canonical_error_index(uint32_t error_idx, StabType type);

} // namespace dqec
