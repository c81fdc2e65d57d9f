#include "qens/statevector.hpp"

#include "qens/errors.hpp"
#include "qens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qens {

namespace {

template <class> inline constexpr bool kAlwaysFalse = false;

void check_qubit(Qubit q, unsigned n, const char *gate) {
    if (q >= n) {
        throw ValidationError(std::string(gate) + ": qubit " + std::to_string(q) +
                              " out of range for n = " + std::to_string(n));
    }
}

// Visits every (i0, i1) pair differing only in bit `target`, i0 having it clear.
template <class F> void for_each_pair(std::size_t dim, Qubit target, F &&f) {
    const std::size_t stride = std::size_t{1} << target;
    for (std::size_t block = 0; block < dim; block += 2 * stride) {
        for (std::size_t j = block; j < block + stride; ++j) {
            f(j, j + stride);
        }
    }
}

void apply_single(std::span<Amplitude> a, Qubit target, Amplitude m00,
                  Amplitude m01, Amplitude m10, Amplitude m11) {
    for_each_pair(a.size(), target, [&](std::size_t i0, std::size_t i1) {
        const Amplitude x0 = a[i0];
        const Amplitude x1 = a[i1];
        a[i0] = m00 * x0 + m01 * x1;
        a[i1] = m10 * x0 + m11 * x1;
    });
}

void apply_ry(std::span<Amplitude> a, Qubit target, double theta) {
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    for_each_pair(a.size(), target, [&](std::size_t i0, std::size_t i1) {
        const Amplitude x0 = a[i0];
        const Amplitude x1 = a[i1];
        a[i0] = c * x0 - s * x1;
        a[i1] = s * x0 + c * x1;
    });
}

void negate_where(std::span<Amplitude> a, std::uint64_t mask) {
    for (std::size_t z = 0; z < a.size(); ++z) {
        if ((z & mask) == mask) {
            a[z] = -a[z];
        }
    }
}

} // namespace

void check_capacity(unsigned num_qubits) {
    if (num_qubits < 1 || num_qubits > QuantumState::kMaxQubits) {
        throw CapacityError("qubit count " + std::to_string(num_qubits) +
                            " outside supported range [1, " +
                            std::to_string(QuantumState::kMaxQubits) + "]");
    }
}

QuantumState QuantumState::zero(unsigned num_qubits) {
    check_capacity(num_qubits);
    std::vector<Amplitude> amps(std::size_t{1} << num_qubits);
    amps[0] = 1.0;
    return QuantumState(num_qubits, std::move(amps));
}

QuantumState QuantumState::from_amplitudes(std::vector<Amplitude> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        throw ValidationError("state: amplitude count must be a power of two >= 2");
    }
    const auto n = static_cast<unsigned>(__builtin_ctzll(dim));
    check_capacity(n);
    QuantumState s(n, std::move(amplitudes));
    if (std::abs(s.norm_squared() - 1.0) > 1e-10) {
        throw ValidationError("state: amplitudes are not normalized");
    }
    return s;
}

double QuantumState::norm_squared() const noexcept {
    double s = 0.0;
    for (const auto &a : amplitudes_) {
        s += std::norm(a);
    }
    return s;
}

QuantumState new_zero_state(unsigned num_qubits) {
    return QuantumState::zero(num_qubits);
}

// ---------------------------------------------------------------------------

void validate_gate(const Gate &gate, unsigned n) {
    std::visit(
        [n](const auto &g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, gates::H> || std::is_same_v<G, gates::X> ||
                          std::is_same_v<G, gates::Ry> ||
                          std::is_same_v<G, gates::Rz>) {
                check_qubit(g.target, n, gate_name(Gate{g}));
                if constexpr (std::is_same_v<G, gates::Ry> ||
                              std::is_same_v<G, gates::Rz>) {
                    if (!std::isfinite(g.theta)) {
                        throw ValidationError("rotation angle must be finite");
                    }
                }
            } else if constexpr (std::is_same_v<G, gates::CNOT>) {
                check_qubit(g.control, n, "CNOT");
                check_qubit(g.target, n, "CNOT");
                if (g.control == g.target) {
                    throw ValidationError("CNOT: control equals target");
                }
            } else if constexpr (std::is_same_v<G, gates::CZ>) {
                check_qubit(g.a, n, "CZ");
                check_qubit(g.b, n, "CZ");
                if (g.a == g.b) {
                    throw ValidationError("CZ: qubits must be distinct");
                }
            } else if constexpr (std::is_same_v<G, gates::MCZ>) {
                if (g.qubits.empty()) {
                    throw ValidationError("MCZ: qubit set must be non-empty");
                }
                qubit_mask(g.qubits, n, "MCZ");
            } else if constexpr (std::is_same_v<G, gates::PhaseOracle>) {
                if (!g.predicate) {
                    throw ValidationError("phase oracle: missing predicate");
                }
                if (g.predicate->num_qubits() != n) {
                    throw ValidationError(
                        "phase oracle: predicate arity " +
                        std::to_string(g.predicate->num_qubits()) +
                        " does not match n = " + std::to_string(n));
                }
            } else if constexpr (std::is_same_v<G, gates::Diffusion>) {
                if (g.mixing_set.empty()) {
                    throw ValidationError("diffusion: mixing set must be non-empty");
                }
                qubit_mask(g.mixing_set, n, "diffusion");
            } else {
                static_assert(kAlwaysFalse<G>);
            }
        },
        gate);
}

const char *gate_name(const Gate &gate) noexcept {
    static constexpr const char *kNames[] = {"H",  "X",   "Ry",          "Rz",
                                             "CNOT", "CZ", "MCZ", "PhaseOracle",
                                             "Diffusion"};
    return kNames[gate.index()];
}

CircuitSpec::CircuitSpec(unsigned num_qubits) : num_qubits_(num_qubits) {
    check_capacity(num_qubits);
}

CircuitSpec &CircuitSpec::add(Gate gate) {
    validate_gate(gate, num_qubits_);
    gates_.push_back(std::move(gate));
    return *this;
}

// ---------------------------------------------------------------------------

void apply_gate(QuantumState &state, const Gate &gate) {
    validate_gate(gate, state.num_qubits());
    auto a = state.amplitudes();
    std::visit(
        [&](const auto &g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, gates::H>) {
                const double r = 1.0 / std::sqrt(2.0);
                for_each_pair(a.size(), g.target, [&](std::size_t i0, std::size_t i1) {
                    const Amplitude x0 = a[i0];
                    const Amplitude x1 = a[i1];
                    a[i0] = r * (x0 + x1);
                    a[i1] = r * (x0 - x1);
                });
            } else if constexpr (std::is_same_v<G, gates::X>) {
                for_each_pair(a.size(), g.target, [&](std::size_t i0, std::size_t i1) {
                    std::swap(a[i0], a[i1]);
                });
            } else if constexpr (std::is_same_v<G, gates::Ry>) {
                apply_ry(a, g.target, g.theta);
            } else if constexpr (std::is_same_v<G, gates::Rz>) {
                const Amplitude lo = std::polar(1.0, -g.theta / 2);
                const Amplitude hi = std::polar(1.0, g.theta / 2);
                apply_single(a, g.target, lo, 0.0, 0.0, hi);
            } else if constexpr (std::is_same_v<G, gates::CNOT>) {
                const std::size_t cbit = std::size_t{1} << g.control;
                for_each_pair(a.size(), g.target, [&](std::size_t i0, std::size_t i1) {
                    if (i0 & cbit) {
                        std::swap(a[i0], a[i1]);
                    }
                });
            } else if constexpr (std::is_same_v<G, gates::CZ>) {
                negate_where(a, (std::uint64_t{1} << g.a) | (std::uint64_t{1} << g.b));
            } else if constexpr (std::is_same_v<G, gates::MCZ>) {
                negate_where(a, qubit_mask(g.qubits, state.num_qubits(), "MCZ"));
            } else if constexpr (std::is_same_v<G, gates::PhaseOracle>) {
                apply_phase_oracle(state, *g.predicate);
            } else if constexpr (std::is_same_v<G, gates::Diffusion>) {
                apply_diffusion(state, g.mixing_set);
            }
        },
        gate);
}

void apply_circuit(QuantumState &state, const CircuitSpec &circuit) {
    if (circuit.num_qubits() != state.num_qubits()) {
        throw ValidationError("circuit register size does not match state");
    }
    for (const auto &g : circuit.gates()) {
        apply_gate(state, g);
    }
}

QuantumState run_circuit(const CircuitSpec &circuit) {
    auto state = QuantumState::zero(circuit.num_qubits());
    apply_circuit(state, circuit);
    return state;
}

void apply_phase_oracle(QuantumState &state, const Predicate &predicate) {
    if (predicate.num_qubits() != state.num_qubits()) {
        throw ValidationError("phase oracle: predicate arity " +
                              std::to_string(predicate.num_qubits()) +
                              " does not match n = " +
                              std::to_string(state.num_qubits()));
    }
    auto a = state.amplitudes();
    for (std::size_t z = 0; z < a.size(); ++z) {
        if (predicate.contains(z)) {
            a[z] = -a[z];
        }
    }
}

void apply_diffusion(QuantumState &state, const std::vector<Qubit> &mixing_set) {
    if (mixing_set.empty()) {
        throw ValidationError("diffusion: mixing set must be non-empty");
    }
    const std::uint64_t mix = qubit_mask(mixing_set, state.num_qubits(), "diffusion");
    const std::uint64_t full = state.dim() - 1;
    const std::uint64_t rest = full & ~mix;
    const double block = static_cast<double>(std::uint64_t{1} << mixing_set.size());
    auto a = state.amplitudes();

    // Submask enumeration: outer walks assignments of the untouched qubits,
    // inner walks the mixing subspace attached to each.
    std::uint64_t outer = 0;
    do {
        Amplitude sum = 0.0;
        std::uint64_t inner = 0;
        do {
            sum += a[outer | inner];
            inner = (inner - mix) & mix;
        } while (inner != 0);
        const Amplitude twice_mean = 2.0 * sum / block;
        do {
            auto &x = a[outer | inner];
            x = twice_mean - x;
            inner = (inner - mix) & mix;
        } while (inner != 0);
        outer = (outer - rest) & rest;
    } while (outer != 0);
}

std::vector<double> basis_weights(const QuantumState &state) {
    const auto a = state.amplitudes();
    std::vector<double> q(a.size());
    std::transform(a.begin(), a.end(), q.begin(),
                   [](const Amplitude &x) { return std::norm(x); });
    return q;
}

std::vector<BasisIndex> sample_shots(std::span<const double> weights,
                                     std::uint64_t n_shots, std::uint64_t seed) {
    if (n_shots == 0) {
        throw ValidationError("sample_shots: shot count must be >= 1");
    }
    std::vector<double> cdf(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cdf[i] = acc;
    }
    Engine eng(seed);
    std::vector<BasisIndex> shots(n_shots);
    for (auto &s : shots) {
        const double u = uniform01(eng) * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) {
            // u rounded onto the total; take the last non-zero weight
            it = std::lower_bound(cdf.begin(), cdf.end(), acc);
        }
        s = static_cast<BasisIndex>(it - cdf.begin());
    }
    return shots;
}

std::vector<BasisIndex> sample_shots(const QuantumState &state, std::uint64_t n_shots,
                                     std::uint64_t seed) {
    const auto q = basis_weights(state);
    return sample_shots(q, n_shots, seed);
}

} // namespace qens
