#pragma once

#include <cstdint>
#include <string>
#include <vector>
#include <stdexcept>

namespace dqec {

enum class Pauli : uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

// Phase-free n-qubit Pauli string. Products are computed componentwise with
// the phase discarded; that is all the superoperator bookkeeping needs.
class PauliString {
public:
    PauliString() = default;
    explicit PauliString(size_t n) : ops_(n, Pauli::I) {}
    explicit PauliString(const std::string& s);

    size_t size() const { return ops_.size(); }
    Pauli op(size_t i) const { return ops_[i]; }
    void set(size_t i, Pauli p) { ops_[i] = p; }

    int weight() const;
    bool is_identity() const { return weight() == 0; }

    // true if the two strings commute as operators
    bool commutes_with(const PauliString& other) const;

    // componentwise product, phase dropped
    PauliString times(const PauliString& other) const;

    std::string str() const;

    // enumeration index in base 4, qubit 0 most significant
    uint32_t index() const;
    static PauliString from_index(uint32_t idx, size_t n);

    bool operator==(const PauliString& o) const { return ops_ == o.ops_; }
    bool operator<(const PauliString& o) const { return ops_ < o.ops_; }

private:
    std::vector<Pauli> ops_;
};

} // namespace dqec
