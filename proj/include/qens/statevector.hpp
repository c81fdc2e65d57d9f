#pragma once

#include "qens/observables.hpp"

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace qens {

using Amplitude = std::complex<double>;

/// Dense pure state of n qubits: 2^n complex amplitudes, index convention
/// given by kBitOrderConvention.
class QuantumState {
  public:
    static constexpr unsigned kMaxQubits = 24;

    /// |0...0>. Throws CapacityError unless 1 <= n <= kMaxQubits.
    static QuantumState zero(unsigned num_qubits);

    /// Adopt an amplitude vector whose length is a power of two and whose
    /// squared norm is 1 within 1e-10.
    static QuantumState from_amplitudes(std::vector<Amplitude> amplitudes);

    unsigned num_qubits() const noexcept { return num_qubits_; }
    std::size_t dim() const noexcept { return amplitudes_.size(); }

    std::span<const Amplitude> amplitudes() const noexcept { return amplitudes_; }
    std::span<Amplitude> amplitudes() noexcept { return amplitudes_; }
    const Amplitude &operator[](BasisIndex z) const { return amplitudes_[z]; }

    double norm_squared() const noexcept;

  private:
    QuantumState(unsigned n, std::vector<Amplitude> amps)
        : num_qubits_(n), amplitudes_(std::move(amps)) {}

    unsigned num_qubits_;
    std::vector<Amplitude> amplitudes_;
};

void check_capacity(unsigned num_qubits);

namespace gates {

struct H {
    Qubit target;
};
struct X {
    Qubit target;
};
/// Ry(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>.
struct Ry {
    Qubit target;
    double theta;
};
/// diag(e^{-i theta/2}, e^{+i theta/2}).
struct Rz {
    Qubit target;
    double theta;
};
struct CNOT {
    Qubit control;
    Qubit target;
};
struct CZ {
    Qubit a;
    Qubit b;
};
/// Phase -1 on strings with every listed qubit set.
struct MCZ {
    std::vector<Qubit> qubits;
};
/// (-1)^{chi_G(z)} on every amplitude.
struct PhaseOracle {
    std::shared_ptr<const Predicate> predicate;
};
/// 2|s><s| - I with |s> uniform over the mixing qubits.
struct Diffusion {
    std::vector<Qubit> mixing_set;
};

} // namespace gates

using Gate = std::variant<gates::H, gates::X, gates::Ry, gates::Rz, gates::CNOT,
                          gates::CZ, gates::MCZ, gates::PhaseOracle,
                          gates::Diffusion>;

/// Throws ValidationError if the gate does not fit an n-qubit register.
void validate_gate(const Gate &gate, unsigned num_qubits);
const char *gate_name(const Gate &gate) noexcept;

/// Ordered gate list for a fixed register size.
class CircuitSpec {
  public:
    explicit CircuitSpec(unsigned num_qubits);

    unsigned num_qubits() const noexcept { return num_qubits_; }
    const std::vector<Gate> &gates() const noexcept { return gates_; }
    std::size_t size() const noexcept { return gates_.size(); }

    /// Validates before appending.
    CircuitSpec &add(Gate gate);

  private:
    unsigned num_qubits_;
    std::vector<Gate> gates_;
};

QuantumState new_zero_state(unsigned num_qubits);

void apply_gate(QuantumState &state, const Gate &gate);
void apply_circuit(QuantumState &state, const CircuitSpec &circuit);
QuantumState run_circuit(const CircuitSpec &circuit);

void apply_phase_oracle(QuantumState &state, const Predicate &predicate);

/// Mean inversion over the mixing subspace; qubits outside the set index
/// independent blocks that are reflected separately.
void apply_diffusion(QuantumState &state, const std::vector<Qubit> &mixing_set);

/// q_z = |<z|psi>|^2.
std::vector<double> basis_weights(const QuantumState &state);

/// i.i.d. computational-basis draws from q_z. Deterministic in seed.
std::vector<BasisIndex> sample_shots(const QuantumState &state,
                                     std::uint64_t n_shots, std::uint64_t seed);
std::vector<BasisIndex> sample_shots(std::span<const double> weights,
                                     std::uint64_t n_shots, std::uint64_t seed);

} // namespace qens
