#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "dqec/density_matrix.hpp"
#include "dqec/noise.hpp"

namespace dqec {

// --- parameters ------------------------------------------------------------

struct EmissionParams {
    double f_prep = 1.0;         // emitter-photon preparation fidelity
    double p_ee = 0.0;           // double-excitation error probability
    double mu = 1.0;             // Hong-Ou-Mandel visibility
    double lambda_dephase = 1.0; // phase-instability dephasing parameter
    double eta_ph = 1.0;         // effective photon detection probability
    double alpha_bright = 0.5;   // bright-state population

    void validate() const;
};

// lambda = (1/2)(1 + I1(sigma^-2)/I0(sigma^-2)) from the interferometer
// phase-instability standard deviation
double lambda_from_phase_std(double sigma_phi);

struct ReflectionParams {
    double c1 = 1.0;      // cooperativity with the one-sided cavity
    double kappa_c = 1.0; // cavity-to-fiber loss rate
    double kappa_l = 0.0; // cavity-to-environment loss rate
    double gamma = 1.0;   // spin linewidth (rate unit)
    double delta = 0.0;   // transition splitting, delta0 = delta1 + delta (units of gamma)
    double sigma = 0.0;   // calibration-error std on delta1 and omega
    double eta_c = 1.0;   // circulator efficiency per module pass
    double p_dk = 0.0;    // dark-count probability per detection window
    double omega = 0.0;   // cavity detuning working point
    double delta1 = 0.0;  // coupled-transition detuning working point

    void validate() const;
};

enum class CarvingMode { Cavity, Waveguide };

struct CarvingParams {
    CarvingMode mode = CarvingMode::Cavity;
    double c2 = 1.0;        // cooperativity with the two-sided cavity
    double p_purcell = 1.0; // waveguide emission ratio Gamma/gamma
    double kappa_c = 1.0;
    double kappa_l = 0.0;
    double gamma = 1.0;
    double delta = 0.0;  // delta0 = delta1 + delta
    double sigma = 0.0;
    double omega = 0.0;
    double delta1 = 0.0;
    double eta_f = 1.0;   // fiber efficiency per scattering
    double eta_det = 1.0; // detector efficiency per scattering
    int n_sc = 2;         // scattering rounds
    double alpha_coherent = 0.1;

    void validate() const;
};

struct SchemeResult {
    DensityMatrix state; // normalized
    double p_succ = 0.0; // per attempt
    double duration = 1.0; // attempt duration in t_link units
};

// <GHZ_n| rho |GHZ_n> for a normalized state; the fidelity convention used
// when reporting scheme quality
double ghz_fidelity(const DensityMatrix& rho);
// <Phi+| rho |Phi+> with Phi+ = (|00>+|11>)/sqrt(2), the Bell convention the
// click protocols correct into
double bell_fidelity(const DensityMatrix& rho);

// --- emission-based Bell generation ----------------------------------------

SchemeResult single_click(const EmissionParams& params, const CircuitNoise& noise);
SchemeResult double_click(const EmissionParams& params, const CircuitNoise& noise);

// closed form (1/2) alpha eta (4 - alpha eta (3 - mu))
double single_click_success_probability(const EmissionParams& params);

// --- reflection GHZ ---------------------------------------------------------

// reflection coefficient r(delta, omega) for one spin-cavity system
Complex reflection_coefficient(const ReflectionParams& params, double delta, double omega);

SchemeResult reflection_ghz(const ReflectionParams& params, int n, const CircuitNoise& noise);

// jitter-free construction from explicit reflection coefficients; losses and
// dark counts are not applied here
SchemeResult reflection_ghz_from_coefficients(Complex r0, Complex r1, int n,
                                              const CircuitNoise& noise);

// --- carving GHZ ------------------------------------------------------------

Complex carving_transmission(const CarvingParams& params, double delta);
Complex carving_transmission(const CarvingParams& params, double delta, double omega);

SchemeResult carving_sps_ghz(const CarvingParams& params, int n_u, int n_d,
                             const CircuitNoise& noise);
SchemeResult carving_coherent_ghz(const CarvingParams& params, int n_u, int n_d,
                                  const CircuitNoise& noise);

// jitter-free constructions from explicit scattering coefficients
SchemeResult carving_sps_from_coefficients(Complex t0, Complex t1, int n_u, int n_d, int n_sc,
                                           double eta_round, const CircuitNoise& noise);
SchemeResult carving_coherent_from_coefficients(Complex t0, Complex t1, Complex r0, Complex r1,
                                                Complex d0, Complex d1, int n_u, int n_d,
                                                int n_sc, double alpha, double eta_round,
                                                const CircuitNoise& noise);

// smallest-infidelity scattering count subject to p_succ >= floor
int scan_nsc(const CarvingParams& params, int n_u, int n_d, const CircuitNoise& noise,
             double p_succ_floor, bool coherent = false, int n_sc_max = 12);

struct DetuningGrid {
    double omega_min = 0, omega_max = 0;
    int omega_steps = 1;
    double delta1_min = 0, delta1_max = 0;
    int delta1_steps = 1;
};

// arg-max of jitter-averaged GHZ fidelity over the (omega, delta1) grid
std::pair<double, double> scan_detunings(const ReflectionParams& params, int n,
                                         const CircuitNoise& noise, const DetuningGrid& grid);

// Gauss-Hermite nodes/weights used for the jitter averages (7 points)
std::vector<std::pair<double, double>> gauss_hermite_nodes();

} // namespace dqec
