#include "dqec/pauli.hpp"

namespace dqec {

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
    }
    throw std::invalid_argument(std::string("not a Pauli label: ") + c);
}

PauliString::PauliString(const std::string& s) {
    ops_.reserve(s.size());
    for (char c : s) ops_.push_back(pauli_from_char(c));
}

int PauliString::weight() const {
    int w = 0;
    for (auto p : ops_)
        if (p != Pauli::I) ++w;
    return w;
}

bool PauliString::commutes_with(const PauliString& other) const {
    if (size() != other.size()) throw std::invalid_argument("Pauli length mismatch");
    int anti = 0;
    for (size_t i = 0; i < size(); ++i) {
        Pauli a = ops_[i], b = other.ops_[i];
        if (a != Pauli::I && b != Pauli::I && a != b) ++anti;
    }
    return (anti % 2) == 0;
}

PauliString PauliString::times(const PauliString& other) const {
    if (size() != other.size()) throw std::invalid_argument("Pauli length mismatch");
    PauliString out(size());
    for (size_t i = 0; i < size(); ++i) {
        auto a = static_cast<uint8_t>(ops_[i]);
        auto b = static_cast<uint8_t>(other.ops_[i]);
        // XOR on the (x,z) symplectic bits: I=00, X=10, Y=11, Z=01
        static constexpr uint8_t to_xz[4] = {0b00, 0b10, 0b11, 0b01};
        static constexpr Pauli from_xz[4] = {Pauli::I, Pauli::Z, Pauli::X, Pauli::Y};
        out.ops_[i] = from_xz[to_xz[a] ^ to_xz[b]];
    }
    return out;
}

std::string PauliString::str() const {
    std::string s;
    s.reserve(size());
    for (auto p : ops_) s.push_back(pauli_char(p));
    return s;
}

uint32_t PauliString::index() const {
    uint32_t idx = 0;
    for (auto p : ops_) idx = idx * 4 + static_cast<uint32_t>(p);
    return idx;
}

PauliString PauliString::from_index(uint32_t idx, size_t n) {
    PauliString out(n);
    for (size_t i = 0; i < n; ++i) {
        out.ops_[n - 1 - i] = static_cast<Pauli>(idx & 3u);
        idx >>= 2;
    }
    return out;
}

} // namespace dqec
