#pragma once

#include <span>
#include <vector>

#include "dqec/density_matrix.hpp"

namespace dqec {

// Operator-sum channel rho -> sum_j K_j rho K_j^dag
struct KrausChannel {
    std::vector<Matrix> operators;

    Eigen::Index dim() const { return operators.empty() ? 0 : operators.front().rows(); }
    // max |sum K^dag K - I|
    double completeness_error() const;
};

struct Povm {
    std::vector<Matrix> elements;

    // max |sum E - I|
    double completeness_error() const;
    // most negative eigenvalue over all elements (>= -tol required)
    double min_element_eigenvalue() const;
};

// rho -> sum_j K_j rho K_j^dag on the given target qubits
DensityMatrix apply_channel(const DensityMatrix& rho, const KrausChannel& ch,
                            std::span<const int> targets);
void apply_channel_in_place(DensityMatrix& rho, const KrausChannel& ch,
                            std::span<const int> targets);

// Luders update for a PSD POVM element: returns (sqrt(E) rho sqrt(E), Tr[E rho]).
// Throws if the computed probability is below -1e-9 (element not PSD).
std::pair<DensityMatrix, double> apply_povm_element(const DensityMatrix& rho, const Matrix& element,
                                                    std::span<const int> targets);

// rho -> M rho M^dag for an arbitrary (not necessarily unitary) operator,
// returning the trace of the result alongside
std::pair<DensityMatrix, double> apply_measurement_operator(const DensityMatrix& rho,
                                                            const Matrix& m,
                                                            std::span<const int> targets);

namespace gates {

Matrix identity(int n_qubits);
extern const Matrix X, Y, Z, H;
extern const Matrix CZ, CNOT, SWAP; // control = first target
Matrix pauli_matrix(Pauli p);
Matrix projector0();                  // |0><0|
Matrix projector1();                  // |1><1|
Matrix projector_plus();              // |+><+|
Matrix projector_minus();             // |-><-|

} // namespace gates

} // namespace dqec
