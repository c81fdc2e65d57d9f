#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace qens {

/// Integer label of a computational-basis state. Bit k is the measured value
/// of qubit k (qubit 0 is the least significant bit).
using BasisIndex = std::uint64_t;
using Qubit = unsigned;

inline constexpr const char *kBitOrderConvention =
    "bit k of basis index z is the outcome of qubit k (qubit 0 = LSB)";

/// Build a bit mask from a qubit list. Throws ValidationError if any index is
/// >= num_qubits or appears twice.
std::uint64_t qubit_mask(const std::vector<Qubit> &qubits, unsigned num_qubits,
                         const char *what);
std::vector<Qubit> mask_qubits(std::uint64_t mask);

inline int bit_parity(std::uint64_t x) noexcept { return __builtin_parityll(x); }

/// coefficient * prod_{j in support} Z_j. Empty support is a multiple of I.
struct ZString {
    std::vector<Qubit> support;
    double coefficient = 1.0;
};

/// Real linear combination of Pauli-Z strings, stored term-wise.
class DiagonalObservable {
  public:
    DiagonalObservable(unsigned num_qubits, std::vector<ZString> terms);

    static DiagonalObservable z_string(unsigned num_qubits,
                                       std::vector<Qubit> support,
                                       double coefficient = 1.0);

    unsigned num_qubits() const noexcept { return num_qubits_; }
    const std::vector<ZString> &terms() const noexcept { return terms_; }

    /// a_z = sum_t c_t (-1)^{popcount(z & mask_t)}.
    double profile(BasisIndex z) const noexcept {
        double acc = 0.0;
        for (const auto &t : compiled_) {
            acc += bit_parity(z & t.mask) ? -t.coefficient : t.coefficient;
        }
        return acc;
    }

    /// max_z |a_z| bound: sum of |c_t|.
    double max_abs_profile() const noexcept;

    /// The observable multiplied by the Z-string with the given mask. Used to
    /// evaluate <A Z_S> without touching sector labels.
    DiagonalObservable times_z_mask(std::uint64_t mask) const;

    /// Same terms re-declared on a (possibly larger) register.
    DiagonalObservable with_num_qubits(unsigned n) const;

    /// True when every term reduces to a multiple of the identity.
    bool is_identity_multiple() const noexcept;

  private:
    struct Compiled {
        std::uint64_t mask;
        double coefficient;
    };

    unsigned num_qubits_;
    std::vector<ZString> terms_;
    std::vector<Compiled> compiled_;
};

/// Two-way split of the basis into sector up (label 0) and down (label 1).
class SectorRule {
  public:
    enum class Kind { SingleQubit, ParitySubset };

    static SectorRule single_qubit(Qubit k);
    static SectorRule parity_subset(std::vector<Qubit> qubits);

    Kind kind() const noexcept { return kind_; }
    const std::vector<Qubit> &qubits() const noexcept { return qubits_; }
    std::uint64_t mask() const noexcept { return mask_; }

    /// Smallest register this rule can be applied to.
    unsigned min_qubits() const noexcept;
    void validate(unsigned num_qubits) const;

    /// 0 for sector up, 1 for sector down.
    int label(BasisIndex z) const noexcept { return bit_parity(z & mask_); }
    bool is_up(BasisIndex z) const noexcept { return label(z) == 0; }

  private:
    SectorRule(Kind kind, std::vector<Qubit> qubits);

    Kind kind_;
    std::vector<Qubit> qubits_;
    std::uint64_t mask_;
};

struct BitRequirement {
    Qubit qubit;
    int value; // 0 or 1
};

/// Good-set membership rule chi_G over n-bit strings.
class Predicate {
  public:
    struct BitConstraint {
        std::vector<BitRequirement> bits;
    };
    struct Parity {
        std::vector<Qubit> qubits;
        int required_parity = 0;
    };
    struct SectorParity {
        std::vector<BitRequirement> bits;
        std::vector<Qubit> parity_qubits;
        int required_parity = 0;
    };
    /// Inclusive [first, last] ranges of basis indices.
    struct IntervalUnion {
        std::vector<std::pair<BasisIndex, BasisIndex>> intervals;
    };
    using Rule = std::variant<BitConstraint, Parity, SectorParity, IntervalUnion>;

    Predicate(unsigned num_qubits, Rule rule);

    static Predicate bit_constraint(unsigned n, std::vector<BitRequirement> bits);
    static Predicate parity_rule(unsigned n, std::vector<Qubit> qubits,
                            int required_parity);
    static Predicate sector_parity(unsigned n, std::vector<BitRequirement> bits,
                                   std::vector<Qubit> parity_qubits,
                                   int required_parity);
    static Predicate interval_union(
        unsigned n, std::vector<std::pair<BasisIndex, BasisIndex>> intervals);

    unsigned num_qubits() const noexcept { return num_qubits_; }
    const Rule &rule() const noexcept { return rule_; }
    const char *kind_name() const noexcept;

    bool contains(BasisIndex z) const noexcept;

    /// Exact |G| from the closed form of each rule kind.
    std::uint64_t good_set_size() const noexcept;
    /// f = |G| / 2^n.
    double good_set_fraction() const noexcept;

  private:
    unsigned num_qubits_;
    Rule rule_;
    // compiled form
    std::uint64_t fixed_mask_ = 0;
    std::uint64_t fixed_value_ = 0;
    std::uint64_t parity_mask_ = 0;
    int parity_value_ = 0;
    bool uses_parity_ = false;
};

/// Heuristic good-set fraction for T Grover rounds: sin^2(pi / (4T + 2)).
/// Throws DomainError for T = 0.
double f_target(unsigned iterations);

/// Ideal good-set mass after T rounds: sin^2((2T + 1) asin(sqrt f)).
/// Throws DomainError unless 0 < f < 1.
double p_g_ideal(unsigned iterations, double fraction);

} // namespace qens
