#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "dqec/pauli.hpp"

namespace dqec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Dense density matrix on up to ~12 qubits. Qubit 0 is the most significant
// bit of the basis index, so |q0 q1 ... q_{n-1}> reads left to right.
// States may be sub-normalized: the trace carries the probability of the
// heralded branch they represent.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(int n_qubits); // |0...0><0...0|
    DensityMatrix(int n_qubits, Matrix m);

    static DensityMatrix from_pure(int n_qubits, const Vector& psi);

    int n_qubits() const { return n_; }
    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& matrix() const { return mat_; }
    Matrix& matrix() { return mat_; }

    double trace_real() const { return mat_.trace().real(); }
    void normalize();

    DensityMatrix tensor(const DensityMatrix& other) const;

    // rho -> A rho A^dag for a dense 2^k x 2^k operator A on `targets`
    void apply_operator(const Matrix& op, std::span<const int> targets);
    void apply_pauli(const PauliString& p, std::span<const int> targets);

    // structured-gate fast paths (equal to apply_operator on the same gate)
    void apply_cz(int a, int b);
    void apply_cnot(int control, int target);
    // both X-basis projections of one qubit with the qubit traced out
    std::pair<DensityMatrix, DensityMatrix> measure_x_and_remove(int qubit) const;

    // <psi|rho|psi> for a full-dimension pure state
    double overlap(const Vector& psi) const;

    DensityMatrix partial_trace_keep(std::span<const int> keep) const;

    double hermiticity_error() const;    // max |rho - rho^dag|
    double min_eigenvalue() const;       // smallest eigenvalue of (rho+rho^dag)/2
    double purity() const;               // Tr[rho^2]

private:
    int n_ = 0;
    Matrix mat_;
};

// Root fidelity F = Tr sqrt( sqrt(rho) sigma sqrt(rho) ). Symmetric in its
// arguments; F(rho, rho) = 1 for normalized rho. Negative eigenvalues within
// tolerance are clamped to zero here (and only here).
double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// <psi|rho|psi> with psi given on a subset of qubits equal to the whole state
double pure_overlap(const DensityMatrix& rho, const Vector& psi);

// n-qubit GHZ vector (|0...0> + |1...1>)/sqrt(2)
Vector ghz_vector(int n);

} // namespace dqec
