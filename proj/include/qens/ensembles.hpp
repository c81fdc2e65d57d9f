#pragma once

#include "qens/observables.hpp"
#include "qens/statevector.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace qens {

struct UniformSpec {
    unsigned num_qubits;
};

struct HaarSpec {
    unsigned num_qubits;
    std::uint64_t seed = 0;
};

/// H on the mixing set, then `iterations` rounds of oracle + diffusion.
struct GroverSpec {
    unsigned num_qubits;
    Predicate predicate;
    unsigned iterations = 1;
    std::vector<Qubit> mixing_set; ///< empty means the full register
};

enum class EntanglerKind { CNOT, CZ };

struct Edge {
    Qubit control;
    Qubit target;
    EntanglerKind kind = EntanglerKind::CNOT;
};

struct BiasAngle {
    Qubit qubit;
    double theta;
};

/// Oracle-free shallow template. Gates are laid down as
///   H(hadamard_set) -> Ry(bias) -> X(x_set) -> depth x shaping layer
///   -> optional Rz randomization,
/// where one shaping layer is Ry(bias) followed by the edge list when
/// `bias_in_layers` is set, and the edge list alone otherwise.
struct ShallowSpec {
    unsigned num_qubits;
    std::vector<Qubit> hadamard_set;
    std::vector<BiasAngle> bias_angles;
    std::vector<Qubit> x_set;
    std::vector<Edge> edges;
    unsigned depth = 0;
    bool bias_in_layers = true;
    /// Seed for a layer of Rz rotations on every qubit. Diagonal, so q_z is
    /// untouched and every sector projector commutes with it.
    std::optional<std::uint64_t> randomization_seed;

    /// Shipped template: active block {0,1,2,3} with a CNOT ring, X on the odd
    /// qubits from 5 upward, remaining qubits idle. n >= 6.
    static ShallowSpec default_template(unsigned num_qubits = 10,
                                        unsigned depth = 0);
};

using EnsembleSpec = std::variant<UniformSpec, HaarSpec, GroverSpec, ShallowSpec>;

unsigned ensemble_num_qubits(const EnsembleSpec &spec) noexcept;
const char *ensemble_kind_name(const EnsembleSpec &spec) noexcept;
void validate_ensemble(const EnsembleSpec &spec);

struct EnsembleDraw {
    QuantumState state;
    std::uint64_t draw_index;
    std::uint64_t seed_used;
};

CircuitSpec build_uniform_circuit(const UniformSpec &spec);
CircuitSpec build_grover_circuit(const GroverSpec &spec);
/// `randomization_stream` selects the Rz angles when randomization is enabled.
CircuitSpec build_shallow_circuit(const ShallowSpec &spec,
                                  std::uint64_t randomization_stream = 0);

/// Gaussian-normalize sampler for the Haar measure on pure states.
QuantumState sample_haar_state(unsigned num_qubits, std::uint64_t seed);

/// Deterministic in (spec, draw_index, master_seed).
EnsembleDraw prepare(const EnsembleSpec &spec, std::uint64_t draw_index,
                     std::uint64_t master_seed);

} // namespace qens
