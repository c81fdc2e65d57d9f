#include "qens/ensembles.hpp"

#include "qens/errors.hpp"
#include "qens/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qens {

namespace {

std::vector<Qubit> all_qubits(unsigned n) {
    std::vector<Qubit> q(n);
    for (Qubit i = 0; i < n; ++i) {
        q[i] = i;
    }
    return q;
}

std::vector<Qubit> mixing_set_of(const GroverSpec &spec) {
    return spec.mixing_set.empty() ? all_qubits(spec.num_qubits) : spec.mixing_set;
}

void add_shaping_layer(CircuitSpec &c, const ShallowSpec &spec) {
    if (spec.bias_in_layers) {
        for (const auto &b : spec.bias_angles) {
            c.add(gates::Ry{b.qubit, b.theta});
        }
    }
    for (const auto &e : spec.edges) {
        if (e.kind == EntanglerKind::CNOT) {
            c.add(gates::CNOT{e.control, e.target});
        } else {
            c.add(gates::CZ{e.control, e.target});
        }
    }
}

constexpr std::uint64_t kHaarStream = 0x4861617200000000ULL;
constexpr std::uint64_t kRandomizationStream = 0x52616e64000000ULL;

} // namespace

ShallowSpec ShallowSpec::default_template(unsigned num_qubits, unsigned depth) {
    if (num_qubits < 6) {
        throw ValidationError("default shallow template needs n >= 6, got " +
                              std::to_string(num_qubits));
    }
    ShallowSpec s{.num_qubits = num_qubits,
                  .hadamard_set = {0, 1, 2, 3},
                  .bias_angles = {{0, 0.2}, {1, 0.1}, {2, -0.2}, {3, -0.1}},
                  .x_set = {},
                  .edges = {{3, 2, EntanglerKind::CNOT},
                            {2, 1, EntanglerKind::CNOT},
                            {1, 0, EntanglerKind::CNOT},
                            {0, 3, EntanglerKind::CNOT}},
                  .depth = depth,
                  .bias_in_layers = true,
                  .randomization_seed = std::nullopt};
    for (Qubit q = 5; q < num_qubits; q += 2) {
        s.x_set.push_back(q);
    }
    return s;
}

unsigned ensemble_num_qubits(const EnsembleSpec &spec) noexcept {
    return std::visit([](const auto &s) { return s.num_qubits; }, spec);
}

const char *ensemble_kind_name(const EnsembleSpec &spec) noexcept {
    static constexpr const char *kNames[] = {"uniform", "haar", "grover", "shallow"};
    return kNames[spec.index()];
}

void validate_ensemble(const EnsembleSpec &spec) {
    check_capacity(ensemble_num_qubits(spec));
    if (const auto *g = std::get_if<GroverSpec>(&spec)) {
        build_grover_circuit(*g);
    } else if (const auto *s = std::get_if<ShallowSpec>(&spec)) {
        build_shallow_circuit(*s);
    }
}

CircuitSpec build_uniform_circuit(const UniformSpec &spec) {
    CircuitSpec c(spec.num_qubits);
    for (Qubit q = 0; q < spec.num_qubits; ++q) {
        c.add(gates::H{q});
    }
    return c;
}

CircuitSpec build_grover_circuit(const GroverSpec &spec) {
    if (spec.predicate.num_qubits() != spec.num_qubits) {
        throw ValidationError("grover: predicate arity " +
                              std::to_string(spec.predicate.num_qubits()) +
                              " does not match n = " +
                              std::to_string(spec.num_qubits));
    }
    CircuitSpec c(spec.num_qubits);
    const auto mixing = mixing_set_of(spec);
    for (Qubit q : mixing) {
        c.add(gates::H{q});
    }
    auto oracle = std::make_shared<const Predicate>(spec.predicate);
    for (unsigned t = 0; t < spec.iterations; ++t) {
        c.add(gates::PhaseOracle{oracle});
        c.add(gates::Diffusion{mixing});
    }
    return c;
}

CircuitSpec build_shallow_circuit(const ShallowSpec &spec,
                                  std::uint64_t randomization_stream) {
    CircuitSpec c(spec.num_qubits);
    for (Qubit q : spec.hadamard_set) {
        c.add(gates::H{q});
    }
    for (const auto &b : spec.bias_angles) {
        c.add(gates::Ry{b.qubit, b.theta});
    }
    for (Qubit q : spec.x_set) {
        c.add(gates::X{q});
    }
    for (const auto &e : spec.edges) {
        // gate validation below reports these too, but with less context
        if (e.control >= spec.num_qubits || e.target >= spec.num_qubits ||
            e.control == e.target) {
            throw ValidationError("shallow: invalid edge (" +
                                  std::to_string(e.control) + ", " +
                                  std::to_string(e.target) + ") for n = " +
                                  std::to_string(spec.num_qubits));
        }
    }
    for (unsigned layer = 0; layer < spec.depth; ++layer) {
        add_shaping_layer(c, spec);
    }
    if (spec.randomization_seed) {
        Engine eng(derive_seed(*spec.randomization_seed, kRandomizationStream,
                               randomization_stream));
        for (Qubit q = 0; q < spec.num_qubits; ++q) {
            c.add(gates::Rz{q, 2.0 * std::numbers::pi * uniform01(eng)});
        }
    }
    return c;
}

QuantumState sample_haar_state(unsigned num_qubits, std::uint64_t seed) {
    check_capacity(num_qubits);
    Engine eng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Amplitude> amps(std::size_t{1} << num_qubits);
    double norm2 = 0.0;
    for (auto &a : amps) {
        const double re = normal(eng);
        const double im = normal(eng);
        a = {re, im};
        norm2 += re * re + im * im;
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto &a : amps) {
        a *= scale;
    }
    return QuantumState::from_amplitudes(std::move(amps));
}

EnsembleDraw prepare(const EnsembleSpec &spec, std::uint64_t draw_index,
                     std::uint64_t master_seed) {
    return std::visit(
        [&](const auto &s) -> EnsembleDraw {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, UniformSpec>) {
                return {run_circuit(build_uniform_circuit(s)), draw_index, master_seed};
            } else if constexpr (std::is_same_v<S, HaarSpec>) {
                const auto seed =
                    derive_seed(derive_seed(master_seed, kHaarStream, s.seed), draw_index);
                return {sample_haar_state(s.num_qubits, seed), draw_index, seed};
            } else if constexpr (std::is_same_v<S, GroverSpec>) {
                return {run_circuit(build_grover_circuit(s)), draw_index, master_seed};
            } else {
                const auto stream = derive_seed(master_seed, draw_index);
                return {run_circuit(build_shallow_circuit(s, stream)), draw_index,
                        stream};
            }
        },
        spec);
}

} // namespace qens
