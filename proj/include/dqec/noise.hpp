#pragma once

#include <array>
#include <optional>
#include <string>

#include "dqec/channels.hpp"

namespace dqec {

// --- circuit-level noise -------------------------------------------------

struct CircuitNoise {
    double p_g = 0.0; // gate depolarizing probability
    double p_m = 0.0; // measurement flip probability

    static CircuitNoise uniform(double p) { return {p, p}; }
};

KrausChannel depolarizing_1q(double p);
KrausChannel depolarizing_2q(double p);

// photon loss; eta is the survival amplitude parameter:
// K1 = diag(1, sqrt(eta)), K2 = sqrt(1-eta) |0><1|
KrausChannel amplitude_damping(double eta);

// T1 relaxation toward the maximally mixed state, gamma1 = 1 - exp(-t/T1)
KrausChannel generalized_amplitude_damping(double gamma1);
// T2 pure dephasing, gamma2 = 1 - exp(-t/T2)
KrausChannel phase_damping(double gamma2);

// GAD(1-exp(-t/T1)) followed by PD(1-exp(-t/T2)) on one qubit
void decohere(DensityMatrix& rho, int qubit, double t, double T1, double T2);
DensityMatrix decohered(const DensityMatrix& rho, int qubit, double t, double T1, double T2);

// Single-pass equivalents of the operator-sum channels, used on the large
// stabilizer-circuit states. They agree with the Kraus route to numerical
// precision (asserted in the unit tests).
void apply_gad_pd_fast(DensityMatrix& rho, int qubit, double gamma1, double gamma2);
void apply_depolarizing_fast(DensityMatrix& rho, double p, std::span<const int> targets);

// Decoherence channel averaged over a discrete distribution of durations
// (used for the geometric waiting time for heralded entanglement). The
// average stays inside the GAD*PD family; this returns the effective
// (gamma1, gamma2) pair that reproduces it exactly.
struct DecoherenceAverage {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
};
DecoherenceAverage average_decoherence(std::span<const double> weights,
                                       std::span<const double> times, double T1, double T2);
void apply_decoherence(DensityMatrix& rho, int qubit, const DecoherenceAverage& avg);

// Pauli-twirl probabilities (p_I, p_X, p_Y, p_Z) of the decoherence channel
// for duration t; exact because the channel is unital and Pauli-diagonal.
std::array<double, 4> decoherence_pauli_probs(double t, double T1, double T2);
std::array<double, 4> decoherence_pauli_probs(const DecoherenceAverage& avg);

// --- hardware timing parameters ------------------------------------------

// Durations are in units of t_link unless the set is flagged absolute
// (Set-D uses seconds).
struct CoherenceSet {
    std::string name;
    double t1_link = 0.0;
    double t2_link = 0.0;
    double t1_idle = 0.0;
    double t2_idle = 0.0;
    bool absolute = false;   // values in seconds, t_link below applies
    double t_link_s = 1e-5;  // absolute link time (Set-D)
    bool dd_enabled = false; // dynamical decoupling gate timing
    double t_pulse = 1e-3;   // DD pi-pulse duration (absolute sets)
    int n_dd = 18;

    // refocusing window: gates on memory qubits can only fire here
    double dd_gate_time() const { return t_pulse + 2.0 * n_dd * t_link_s; }
};

// Named sets; values for Set-1/Set-2 idle times are documented defaults and
// overridable through the config layer.
CoherenceSet resolve_coherence_set(const std::string& name);

struct OperationTimes {
    double t_link = 1.0;
    double t_meas = 1.0;
    double t_single_comm = 0.01;
    double t_single_mem = 0.1;
    double t_cz = 10.0;
    double t_cx = 10.0;
    double t_ciy = 10.0;
    double t_swap = 30.0;
};

} // namespace dqec
