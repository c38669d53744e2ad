#include "dqec/density_matrix.hpp"

#include <stdexcept>

namespace dqec {

namespace {

void check_targets(int n, std::span<const int> targets) {
    for (size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] < 0 || targets[i] >= n)
            throw std::invalid_argument("target qubit out of range");
        for (size_t j = i + 1; j < targets.size(); ++j)
            if (targets[i] == targets[j])
                throw std::invalid_argument("target qubits must be distinct");
    }
}

} // namespace

DensityMatrix::DensityMatrix(int n_qubits) : n_(n_qubits) {
    const Eigen::Index d = Eigen::Index(1) << n_;
    mat_ = Matrix::Zero(d, d);
    mat_(0, 0) = 1.0;
}

DensityMatrix::DensityMatrix(int n_qubits, Matrix m) : n_(n_qubits), mat_(std::move(m)) {
    const Eigen::Index d = Eigen::Index(1) << n_;
    if (mat_.rows() != d || mat_.cols() != d)
        throw std::invalid_argument("matrix dimension does not match qubit count");
}

DensityMatrix DensityMatrix::from_pure(int n_qubits, const Vector& psi) {
    const Eigen::Index d = Eigen::Index(1) << n_qubits;
    if (psi.size() != d) throw std::invalid_argument("state dimension mismatch");
    return DensityMatrix(n_qubits, psi * psi.adjoint());
}

void DensityMatrix::normalize() {
    const double t = trace_real();
    if (t <= 0) throw std::runtime_error("cannot normalize state with non-positive trace");
    mat_ /= t;
}

DensityMatrix DensityMatrix::tensor(const DensityMatrix& other) const {
    const Eigen::Index da = dim(), db = other.dim();
    Matrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            out.block(i * db, j * db, db, db) = mat_(i, j) * other.mat_;
    return DensityMatrix(n_ + other.n_, std::move(out));
}

void DensityMatrix::apply_operator(const Matrix& op, std::span<const int> targets) {
    check_targets(n_, targets);
    const int k = static_cast<int>(targets.size());
    const Eigen::Index blk = Eigen::Index(1) << k;
    if (op.rows() != blk || op.cols() != blk)
        throw std::invalid_argument("operator dimension does not match target count");

    const Eigen::Index d = dim();
    // bit position of target t (qubit 0 = most significant)
    std::vector<Eigen::Index> bit(k);
    for (int t = 0; t < k; ++t) bit[t] = Eigen::Index(1) << (n_ - 1 - targets[t]);

    // enumerate base indices with all target bits cleared
    Eigen::Index mask = 0;
    for (auto b : bit) mask |= b;
    std::vector<Eigen::Index> bases;
    bases.reserve(d >> k);
    for (Eigen::Index i = 0; i < d; ++i)
        if ((i & mask) == 0) bases.push_back(i);

    // scatter: sub-index x -> offset; x bit t (MSB order within targets)
    std::vector<Eigen::Index> offset(blk);
    for (Eigen::Index x = 0; x < blk; ++x) {
        Eigen::Index off = 0;
        for (int t = 0; t < k; ++t)
            if (x & (Eigen::Index(1) << (k - 1 - t))) off |= bit[t];
        offset[x] = off;
    }

    // left multiply: rho <- (A x I) rho
    std::vector<Complex> in(blk), out(blk);
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index base : bases) {
            for (Eigen::Index x = 0; x < blk; ++x) in[x] = mat_(base + offset[x], c);
            for (Eigen::Index x = 0; x < blk; ++x) {
                Complex acc = 0;
                for (Eigen::Index y = 0; y < blk; ++y) acc += op(x, y) * in[y];
                out[x] = acc;
            }
            for (Eigen::Index x = 0; x < blk; ++x) mat_(base + offset[x], c) = out[x];
        }
    }
    // right multiply: rho <- rho (A x I)^dag
    const Matrix opc = op.conjugate();
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index base : bases) {
            for (Eigen::Index x = 0; x < blk; ++x) in[x] = mat_(r, base + offset[x]);
            for (Eigen::Index x = 0; x < blk; ++x) {
                Complex acc = 0;
                for (Eigen::Index y = 0; y < blk; ++y) acc += opc(x, y) * in[y];
                out[x] = acc;
            }
            for (Eigen::Index x = 0; x < blk; ++x) mat_(r, base + offset[x]) = out[x];
        }
    }
}

void DensityMatrix::apply_pauli(const PauliString& p, std::span<const int> targets) {
    check_targets(n_, targets);
    if (p.size() != targets.size()) throw std::invalid_argument("Pauli length mismatch");
    const Eigen::Index d = dim();

    Eigen::Index xmask = 0;
    std::vector<Eigen::Index> zbits, ybits;
    for (size_t t = 0; t < targets.size(); ++t) {
        const Eigen::Index b = Eigen::Index(1) << (n_ - 1 - targets[t]);
        switch (p.op(t)) {
            case Pauli::I: break;
            case Pauli::X: xmask |= b; break;
            case Pauli::Y: xmask |= b; ybits.push_back(b); break;
            case Pauli::Z: zbits.push_back(b); break;
        }
    }

    // phase(i) for P|i>: Z gives (-1)^bit; Y gives i*(-1)^bit
    auto phase = [&](Eigen::Index i) -> Complex {
        Complex ph = 1.0;
        for (auto b : zbits)
            if (i & b) ph = -ph;
        for (auto b : ybits) ph *= (i & b) ? Complex(0, -1) : Complex(0, 1);
        return ph;
    };

    Matrix out(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
        const Complex pc = std::conj(phase(c));
        const Eigen::Index cc = c ^ xmask;
        for (Eigen::Index r = 0; r < d; ++r)
            out(r ^ xmask, cc) = phase(r) * pc * mat_(r, c);
    }
    mat_ = std::move(out);
}

void DensityMatrix::apply_cz(int a, int b) {
    const Eigen::Index ba = Eigen::Index(1) << (n_ - 1 - a);
    const Eigen::Index bb = Eigen::Index(1) << (n_ - 1 - b);
    const Eigen::Index both = ba | bb;
    const Eigen::Index d = dim();
    for (Eigen::Index c = 0; c < d; ++c) {
        const bool sc = (c & both) == both;
        for (Eigen::Index r = 0; r < d; ++r)
            if (((r & both) == both) != sc) mat_(r, c) = -mat_(r, c);
    }
}

void DensityMatrix::apply_cnot(int control, int target) {
    const Eigen::Index bc = Eigen::Index(1) << (n_ - 1 - control);
    const Eigen::Index bt = Eigen::Index(1) << (n_ - 1 - target);
    const Eigen::Index d = dim();
    // permutation i -> i^bt when the control bit is set: swap the affected
    // column pairs, then the affected row pairs, in place
    for (Eigen::Index c = 0; c < d; ++c)
        if ((c & bc) && !(c & bt)) mat_.col(c).swap(mat_.col(c ^ bt));
    for (Eigen::Index r = 0; r < d; ++r)
        if ((r & bc) && !(r & bt)) mat_.row(r).swap(mat_.row(r ^ bt));
}

std::pair<DensityMatrix, DensityMatrix> DensityMatrix::measure_x_and_remove(int qubit) const {
    const Eigen::Index bit = Eigen::Index(1) << (n_ - 1 - qubit);
    const Eigen::Index d = dim(), dh = d >> 1;
    Matrix plus(dh, dh), minus(dh, dh);
    auto embed = [&](Eigen::Index i) { return (i & (bit - 1)) | ((i & ~(bit - 1)) << 1); };
    for (Eigen::Index c = 0; c < dh; ++c) {
        const Eigen::Index c0 = embed(c), c1 = c0 | bit;
        for (Eigen::Index r = 0; r < dh; ++r) {
            const Eigen::Index r0 = embed(r), r1 = r0 | bit;
            const Complex same = mat_(r0, c0) + mat_(r1, c1);
            const Complex cross = mat_(r1, c0) + mat_(r0, c1);
            plus(r, c) = 0.5 * (same + cross);
            minus(r, c) = 0.5 * (same - cross);
        }
    }
    return {DensityMatrix(n_ - 1, std::move(plus)), DensityMatrix(n_ - 1, std::move(minus))};
}

double DensityMatrix::overlap(const Vector& psi) const {
    if (psi.size() != dim()) throw std::invalid_argument("state dimension mismatch");
    return (psi.adjoint() * mat_ * psi).value().real();
}

DensityMatrix DensityMatrix::partial_trace_keep(std::span<const int> keep) const {
    check_targets(n_, keep);
    if (keep.empty()) throw std::invalid_argument("must keep at least one qubit");
    const int k = static_cast<int>(keep.size());
    const Eigen::Index dk = Eigen::Index(1) << k;

    std::vector<Eigen::Index> kb(k);
    for (int t = 0; t < k; ++t) kb[t] = Eigen::Index(1) << (n_ - 1 - keep[t]);
    Eigen::Index kmask = 0;
    for (auto b : kb) kmask |= b;

    std::vector<Eigen::Index> koffset(dk);
    for (Eigen::Index x = 0; x < dk; ++x) {
        Eigen::Index off = 0;
        for (int t = 0; t < k; ++t)
            if (x & (Eigen::Index(1) << (k - 1 - t))) off |= kb[t];
        koffset[x] = off;
    }

    std::vector<Eigen::Index> tbases; // traced-subspace indices
    const Eigen::Index d = dim();
    for (Eigen::Index i = 0; i < d; ++i)
        if ((i & kmask) == 0) tbases.push_back(i);

    Matrix out = Matrix::Zero(dk, dk);
    for (Eigen::Index r = 0; r < dk; ++r)
        for (Eigen::Index c = 0; c < dk; ++c) {
            Complex acc = 0;
            for (Eigen::Index t : tbases) acc += mat_(t + koffset[r], t + koffset[c]);
            out(r, c) = acc;
        }
    return DensityMatrix(k, std::move(out));
}

double DensityMatrix::hermiticity_error() const {
    return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es((mat_ + mat_.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
}

double DensityMatrix::purity() const { return (mat_ * mat_).trace().real(); }

double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(( rho.matrix() + rho.matrix().adjoint()) / 2.0);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const Matrix sqrt_rho =
        es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    const Matrix m = sqrt_rho * sigma.matrix() * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Matrix> es2((m + m.adjoint()) / 2.0);
    return es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double pure_overlap(const DensityMatrix& rho, const Vector& psi) { return rho.overlap(psi); }

Vector ghz_vector(int n) {
    const Eigen::Index d = Eigen::Index(1) << n;
    Vector v = Vector::Zero(d);
    v(0) = v(d - 1) = 1.0 / std::sqrt(2.0);
    return v;
}

} // namespace dqec
