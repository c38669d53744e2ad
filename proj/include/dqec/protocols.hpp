#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dqec/schemes.hpp"

namespace dqec {

// Fusion/distillation tree executed bottom-up to turn Bell pairs into a GHZ
// state shared between modules. Distillation consumes its sacrificial child
// by measuring a joint Pauli operator and post-selecting on the +1 outcome.
struct ProtocolNode {
    enum class Kind { CreateLink, Fuse, Distill };
    Kind kind = Kind::CreateLink;

    std::string module_a, module_b; // CreateLink endpoints
    std::string at_module;          // Fuse location

    std::unique_ptr<ProtocolNode> child_a; // Fuse: first input; Distill: target
    std::unique_ptr<ProtocolNode> child_b; // Fuse: second input; Distill: sacrificial

    // Distill: measured operator, one Pauli per sacrificial module in sorted
    // module order
    PauliString op;

    std::vector<std::string> modules() const; // sorted unique module labels
};

struct Protocol {
    std::unique_ptr<ProtocolNode> root;
    int k = 0;                  // number of create_link leaves
    int max_aux_per_module = 0; // peak simultaneous memory qubits per module
};

struct ProtocolViolation {
    bool ok = true;
    std::string message;
};

// Text format: optional `k N` / `max_aux N` annotation lines followed by one
// s-expression, e.g.
//   (distill (fuse B (link A B) (link B C)) (link A C) ZZ)
// Annotations, when present, are asserted against the parsed tree.
Protocol parse_protocol(const std::string& text);
Protocol load_protocol(const std::string& path);

// Checks the auxiliary-memory ceiling (at most two simultaneous protocol
// qubits per module) and distillation operator support.
ProtocolViolation validate(const Protocol& protocol);

// Executes the tree on copies of `bell`, applying gate/measurement noise,
// swap noise for storing link qubits in memory, and deterministic
// expected-waiting decoherence. Output qubits are ordered by sorted module
// label; p_succ is the product of distillation keep probabilities and
// duration the expected completion time in t_link units.
SchemeResult execute(const Protocol& protocol, const SchemeResult& bell,
                     const CircuitNoise& noise, const OperationTimes& times,
                     const CoherenceSet& coherence);

// Expected completion time (t_link units) for the given per-attempt link
// success probability. Children of a fuse run in parallel when their module
// sets are disjoint and sequentially otherwise; a distillation generates its
// sacrificial state after its target completes.
double expected_duration(const Protocol& protocol, double p_link, const OperationTimes& times);
double expected_duration(const Protocol& protocol, double p_link, const OperationTimes& times,
                         const CoherenceSet& coherence);

// Effective single-qubit channel of storing a comm-qubit state into memory
// with a noisy SWAP against a fresh |0> ancilla.
KrausChannel swap_store_channel(double p_g);

} // namespace dqec
