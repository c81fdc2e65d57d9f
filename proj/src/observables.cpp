#include "qens/observables.hpp"

#include "qens/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qens {

namespace {

constexpr unsigned kMaxMaskQubits = 62;

void check_register(unsigned n, const char *what) {
    if (n == 0 || n > kMaxMaskQubits) {
        throw ValidationError(std::string(what) + ": qubit count " +
                              std::to_string(n) + " outside [1, " +
                              std::to_string(kMaxMaskQubits) + "]");
    }
}

void check_parity_value(int v, const char *what) {
    if (v != 0 && v != 1) {
        throw ValidationError(std::string(what) + ": parity must be 0 or 1, got " +
                              std::to_string(v));
    }
}

std::pair<std::uint64_t, std::uint64_t>
compile_bits(const std::vector<BitRequirement> &bits, unsigned n) {
    std::uint64_t mask = 0;
    std::uint64_t value = 0;
    for (const auto &b : bits) {
        if (b.qubit >= n) {
            throw ValidationError("predicate: bit constraint on qubit " +
                                  std::to_string(b.qubit) + " but n = " +
                                  std::to_string(n));
        }
        if (b.value != 0 && b.value != 1) {
            throw ValidationError("predicate: required bit value must be 0 or 1");
        }
        const std::uint64_t bit = std::uint64_t{1} << b.qubit;
        if (mask & bit) {
            throw ValidationError("predicate: qubit " + std::to_string(b.qubit) +
                                  " constrained twice");
        }
        mask |= bit;
        if (b.value) {
            value |= bit;
        }
    }
    return {mask, value};
}

} // namespace

std::uint64_t qubit_mask(const std::vector<Qubit> &qubits, unsigned num_qubits,
                         const char *what) {
    std::uint64_t mask = 0;
    for (Qubit q : qubits) {
        if (q >= num_qubits) {
            throw ValidationError(std::string(what) + ": qubit index " +
                                  std::to_string(q) + " out of range for n = " +
                                  std::to_string(num_qubits));
        }
        const std::uint64_t bit = std::uint64_t{1} << q;
        if (mask & bit) {
            throw ValidationError(std::string(what) + ": duplicate qubit " +
                                  std::to_string(q));
        }
        mask |= bit;
    }
    return mask;
}

std::vector<Qubit> mask_qubits(std::uint64_t mask) {
    std::vector<Qubit> out;
    for (Qubit q = 0; mask != 0; ++q, mask >>= 1) {
        if (mask & 1u) {
            out.push_back(q);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// DiagonalObservable

DiagonalObservable::DiagonalObservable(unsigned num_qubits,
                                       std::vector<ZString> terms)
    : num_qubits_(num_qubits), terms_(std::move(terms)) {
    check_register(num_qubits_, "observable");
    if (terms_.empty()) {
        throw ValidationError("observable: at least one term is required");
    }
    compiled_.reserve(terms_.size());
    for (const auto &t : terms_) {
        if (!std::isfinite(t.coefficient)) {
            throw ValidationError("observable: non-finite coefficient");
        }
        compiled_.push_back(
            {qubit_mask(t.support, num_qubits_, "observable term"), t.coefficient});
    }
}

DiagonalObservable DiagonalObservable::z_string(unsigned num_qubits,
                                                std::vector<Qubit> support,
                                                double coefficient) {
    return DiagonalObservable(num_qubits, {ZString{std::move(support), coefficient}});
}

double DiagonalObservable::max_abs_profile() const noexcept {
    double s = 0.0;
    for (const auto &t : compiled_) {
        s += std::abs(t.coefficient);
    }
    return s;
}

DiagonalObservable DiagonalObservable::times_z_mask(std::uint64_t mask) const {
    std::vector<ZString> out;
    out.reserve(compiled_.size());
    for (const auto &t : compiled_) {
        out.push_back({mask_qubits(t.mask ^ mask), t.coefficient});
    }
    return DiagonalObservable(num_qubits_, std::move(out));
}

DiagonalObservable DiagonalObservable::with_num_qubits(unsigned n) const {
    return DiagonalObservable(n, terms_);
}

bool DiagonalObservable::is_identity_multiple() const noexcept {
    return std::all_of(compiled_.begin(), compiled_.end(),
                       [](const Compiled &t) { return t.mask == 0; });
}

// ---------------------------------------------------------------------------
// SectorRule

SectorRule::SectorRule(Kind kind, std::vector<Qubit> qubits)
    : kind_(kind), qubits_(std::move(qubits)) {
    mask_ = qubit_mask(qubits_, kMaxMaskQubits, "sector rule");
    if (mask_ == 0) {
        throw ValidationError("sector rule: qubit set must be non-empty");
    }
}

SectorRule SectorRule::single_qubit(Qubit k) {
    return SectorRule(Kind::SingleQubit, {k});
}

SectorRule SectorRule::parity_subset(std::vector<Qubit> qubits) {
    return SectorRule(Kind::ParitySubset, std::move(qubits));
}

unsigned SectorRule::min_qubits() const noexcept {
    return 64u - static_cast<unsigned>(__builtin_clzll(mask_));
}

void SectorRule::validate(unsigned num_qubits) const {
    if (min_qubits() > num_qubits) {
        throw ValidationError("sector rule: references qubit " +
                              std::to_string(min_qubits() - 1) +
                              " but n = " + std::to_string(num_qubits));
    }
}

// ---------------------------------------------------------------------------
// Predicate

namespace {

void check_parity_set(const std::vector<Qubit> &qubits) {
    if (qubits.empty()) {
        throw ValidationError("predicate: parity qubit set must be non-empty");
    }
}

} // namespace

Predicate::Predicate(unsigned num_qubits, Rule rule)
    : num_qubits_(num_qubits), rule_(std::move(rule)) {
    check_register(num_qubits_, "predicate");
    const unsigned n = num_qubits_;
    std::visit(
        [&](auto &r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, BitConstraint>) {
                std::tie(fixed_mask_, fixed_value_) = compile_bits(r.bits, n);
            } else if constexpr (std::is_same_v<R, Parity>) {
                check_parity_value(r.required_parity, "predicate");
                check_parity_set(r.qubits);
                parity_mask_ = qubit_mask(r.qubits, n, "predicate parity set");
                parity_value_ = r.required_parity;
                uses_parity_ = true;
            } else if constexpr (std::is_same_v<R, SectorParity>) {
                check_parity_value(r.required_parity, "predicate");
                std::tie(fixed_mask_, fixed_value_) = compile_bits(r.bits, n);
                check_parity_set(r.parity_qubits);
                parity_mask_ =
                    qubit_mask(r.parity_qubits, n, "predicate parity set");
                parity_value_ = r.required_parity;
                uses_parity_ = true;
            } else {
                auto &iv = r.intervals;
                std::sort(iv.begin(), iv.end());
                const BasisIndex dim = BasisIndex{1} << n;
                for (std::size_t i = 0; i < iv.size(); ++i) {
                    if (iv[i].first > iv[i].second || iv[i].second >= dim) {
                        throw ValidationError(
                            "predicate: interval [" + std::to_string(iv[i].first) +
                            ", " + std::to_string(iv[i].second) +
                            "] invalid for n = " + std::to_string(n));
                    }
                    if (i > 0 && iv[i].first <= iv[i - 1].second) {
                        throw ValidationError("predicate: intervals overlap");
                    }
                }
            }
        },
        rule_);
}

Predicate Predicate::bit_constraint(unsigned n, std::vector<BitRequirement> bits) {
    return Predicate(n, BitConstraint{std::move(bits)});
}

Predicate Predicate::parity_rule(unsigned n, std::vector<Qubit> qubits,
                                 int required_parity) {
    return Predicate(n, Parity{std::move(qubits), required_parity});
}

Predicate Predicate::sector_parity(unsigned n, std::vector<BitRequirement> bits,
                                   std::vector<Qubit> parity_qubits,
                                   int required_parity) {
    return Predicate(
        n, SectorParity{std::move(bits), std::move(parity_qubits), required_parity});
}

Predicate Predicate::interval_union(
    unsigned n, std::vector<std::pair<BasisIndex, BasisIndex>> intervals) {
    return Predicate(n, IntervalUnion{std::move(intervals)});
}

const char *Predicate::kind_name() const noexcept {
    switch (rule_.index()) {
    case 0:
        return "bits";
    case 1:
        return "parity";
    case 2:
        return "sector_parity";
    default:
        return "intervals";
    }
}

bool Predicate::contains(BasisIndex z) const noexcept {
    if (const auto *iv = std::get_if<IntervalUnion>(&rule_)) {
        const auto &v = iv->intervals;
        auto it = std::upper_bound(
            v.begin(), v.end(), z,
            [](BasisIndex x, const auto &interval) { return x < interval.first; });
        return it != v.begin() && z <= std::prev(it)->second;
    }
    if ((z & fixed_mask_) != fixed_value_) {
        return false;
    }
    return !uses_parity_ || bit_parity(z & parity_mask_) == parity_value_;
}

std::uint64_t Predicate::good_set_size() const noexcept {
    const unsigned n = num_qubits_;
    if (const auto *iv = std::get_if<IntervalUnion>(&rule_)) {
        std::uint64_t total = 0;
        for (const auto &[lo, hi] : iv->intervals) {
            total += hi - lo + 1;
        }
        return total;
    }
    const unsigned constrained =
        static_cast<unsigned>(__builtin_popcountll(fixed_mask_));
    const std::uint64_t unconstrained = std::uint64_t{1} << (n - constrained);
    if (!uses_parity_) {
        return unconstrained;
    }
    // A free qubit inside the parity set splits the remaining strings evenly;
    // otherwise the parity is already decided by the fixed bits.
    if ((parity_mask_ & ~fixed_mask_) != 0) {
        return unconstrained / 2;
    }
    return bit_parity(fixed_value_ & parity_mask_) == parity_value_ ? unconstrained
                                                                    : 0;
}

double Predicate::good_set_fraction() const noexcept {
    return std::ldexp(static_cast<double>(good_set_size()),
                      -static_cast<int>(num_qubits_));
}

// ---------------------------------------------------------------------------

double f_target(unsigned iterations) {
    if (iterations == 0) {
        throw DomainError("f_target: iteration count must be >= 1");
    }
    const double s = std::sin(std::numbers::pi / (4.0 * iterations + 2.0));
    return s * s;
}

double p_g_ideal(unsigned iterations, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw DomainError("p_g_ideal: good-set fraction must lie in (0, 1)");
    }
    const double theta = std::asin(std::sqrt(fraction));
    const double s = std::sin((2.0 * iterations + 1.0) * theta);
    return s * s;
}

} // namespace qens
