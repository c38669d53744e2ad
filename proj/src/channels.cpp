#include "dqec/channels.hpp"

#include <stdexcept>

namespace dqec {

double KrausChannel::completeness_error() const {
    if (operators.empty()) return 1.0;
    Matrix acc = Matrix::Zero(dim(), dim());
    for (const auto& k : operators) acc += k.adjoint() * k;
    return (acc - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

double Povm::completeness_error() const {
    if (elements.empty()) return 1.0;
    const Eigen::Index d = elements.front().rows();
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& e : elements) acc += e;
    return (acc - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

double Povm::min_element_eigenvalue() const {
    double m = 0.0;
    for (const auto& e : elements) {
        Eigen::SelfAdjointEigenSolver<Matrix> es((e + e.adjoint()) / 2.0);
        m = std::min(m, es.eigenvalues().minCoeff());
    }
    return m;
}

DensityMatrix apply_channel(const DensityMatrix& rho, const KrausChannel& ch,
                            std::span<const int> targets) {
    DensityMatrix out = rho;
    apply_channel_in_place(out, ch, targets);
    return out;
}

void apply_channel_in_place(DensityMatrix& rho, const KrausChannel& ch,
                            std::span<const int> targets) {
    if (ch.operators.empty()) throw std::invalid_argument("empty Kraus channel");
    const Eigen::Index want = Eigen::Index(1) << targets.size();
    if (ch.dim() != want) throw std::invalid_argument("channel dimension mismatch");

    Matrix acc = Matrix::Zero(rho.dim(), rho.dim());
    DensityMatrix scratch(rho.n_qubits());
    for (const auto& k : ch.operators) {
        scratch.matrix() = rho.matrix();
        scratch.apply_operator(k, targets);
        acc += scratch.matrix();
    }
    rho.matrix() = std::move(acc);
}

std::pair<DensityMatrix, double> apply_povm_element(const DensityMatrix& rho,
                                                    const Matrix& element,
                                                    std::span<const int> targets) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((element + element.adjoint()) / 2.0);
    const double min_ev = es.eigenvalues().minCoeff();
    if (min_ev < -1e-9) throw std::invalid_argument("POVM element is not PSD");
    const Matrix sqrt_e = es.eigenvectors() *
                          es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                          es.eigenvectors().adjoint();
    auto [out, prob] = apply_measurement_operator(rho, sqrt_e, targets);
    if (prob < -1e-9) throw std::runtime_error("negative POVM probability");
    return {std::move(out), prob};
}

std::pair<DensityMatrix, double> apply_measurement_operator(const DensityMatrix& rho,
                                                            const Matrix& m,
                                                            std::span<const int> targets) {
    DensityMatrix out = rho;
    out.apply_operator(m, targets);
    const double prob = out.trace_real();
    return {std::move(out), prob};
}

namespace gates {

Matrix identity(int n_qubits) {
    const Eigen::Index d = Eigen::Index(1) << n_qubits;
    return Matrix::Identity(d, d);
}

const Matrix X = (Matrix(2, 2) << 0, 1, 1, 0).finished();
const Matrix Y = (Matrix(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished();
const Matrix Z = (Matrix(2, 2) << 1, 0, 0, -1).finished();
const Matrix H = (Matrix(2, 2) << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 1 / std::sqrt(2.0),
                  -1 / std::sqrt(2.0))
                     .finished();

const Matrix CZ = (Matrix(4, 4) << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1).finished();
const Matrix CNOT =
    (Matrix(4, 4) << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0).finished();
const Matrix SWAP =
    (Matrix(4, 4) << 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1).finished();

Matrix pauli_matrix(Pauli p) {
    switch (p) {
        case Pauli::I: return Matrix::Identity(2, 2);
        case Pauli::X: return X;
        case Pauli::Y: return Y;
        case Pauli::Z: return Z;
    }
    return Matrix::Identity(2, 2);
}

Matrix projector0() { return (Matrix(2, 2) << 1, 0, 0, 0).finished(); }
Matrix projector1() { return (Matrix(2, 2) << 0, 0, 0, 1).finished(); }
Matrix projector_plus() { return (Matrix(2, 2) << 0.5, 0.5, 0.5, 0.5).finished(); }
Matrix projector_minus() { return (Matrix(2, 2) << 0.5, -0.5, -0.5, 0.5).finished(); }

} // namespace gates

} // namespace dqec
