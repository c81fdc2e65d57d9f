#include "qens/errors.hpp"
#include "qens/observables.hpp"

#include "support/brute.hpp"
#include "support/dense.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace qens;

TEST(Profile, Examples) {
    EXPECT_EQ(DiagonalObservable::z_string(2, {0}).profile(0b00), 1.0);
    EXPECT_EQ(DiagonalObservable::z_string(2, {0, 1}).profile(0b01), -1.0);
    const DiagonalObservable mix(2, {{{0}, 0.5}, {{1}, 0.5}});
    EXPECT_EQ(mix.profile(0b01), 0.0);
    for (std::uint64_t z = 0; z < 4; ++z) {
        EXPECT_EQ(mix.profile(z), brute::profile(mix, z));
    }
}

TEST(Profile, EmptySupportIsIdentityMultiple) {
    const DiagonalObservable c(3, {{{}, 2.5}});
    EXPECT_TRUE(c.is_identity_multiple());
    for (std::uint64_t z = 0; z < 8; ++z) {
        EXPECT_EQ(c.profile(z), 2.5);
    }
}

TEST(Profile, MatchesDenseDiagonalUpToSixQubits) {
    std::mt19937_64 eng(5);
    for (unsigned n = 1; n <= 6; ++n) {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<Qubit> support;
            for (Qubit q = 0; q < n; ++q) {
                if (eng() & 1U) {
                    support.push_back(q);
                }
            }
            const auto obs = DiagonalObservable::z_string(n, support);
            const auto m = dense::z_string(n, support);
            for (std::uint64_t z = 0; z < m.dim; ++z) {
                ASSERT_EQ(obs.profile(z), m(z, z).real());
                ASSERT_TRUE(obs.profile(z) == 1.0 || obs.profile(z) == -1.0);
            }
        }
    }
}

TEST(Profile, InvalidSupport) {
    EXPECT_THROW(DiagonalObservable::z_string(3, {3}), ValidationError);
    EXPECT_THROW(DiagonalObservable::z_string(3, {1, 1}), ValidationError);
    EXPECT_THROW(DiagonalObservable(3, {}), ValidationError);
}

TEST(Profile, TimesZMask) {
    const DiagonalObservable a(4, {{{0, 2}, 0.7}, {{3}, -0.4}});
    const auto b = a.times_z_mask(0b0101);
    for (std::uint64_t z = 0; z < 16; ++z) {
        const double zs = brute::parity_of(z, {0, 2}) ? -1.0 : 1.0;
        EXPECT_DOUBLE_EQ(b.profile(z), a.profile(z) * zs);
    }
}

TEST(Sector, Examples) {
    EXPECT_TRUE(SectorRule::single_qubit(0).is_up(0b10));
    EXPECT_FALSE(SectorRule::single_qubit(0).is_up(0b11));
    const auto par = SectorRule::parity_subset({0, 1});
    EXPECT_TRUE(par.is_up(0b11));
    const int expected[] = {0, 1, 1, 0};
    for (std::uint64_t z = 0; z < 4; ++z) {
        EXPECT_EQ(par.label(z), expected[z]);
    }
}

TEST(Sector, PartitionCounts) {
    const unsigned n = 8;
    for (const auto &rule : {SectorRule::single_qubit(5), SectorRule::parity_subset({1, 4, 7})}) {
        std::uint64_t up = 0, down = 0;
        for (std::uint64_t z = 0; z < (1u << n); ++z) {
            (rule.is_up(z) ? up : down) += 1;
        }
        EXPECT_EQ(up + down, 1u << n);
        EXPECT_EQ(up, down);
    }
}

TEST(Sector, ZDecomposition) {
    const unsigned n = 5;
    for (Qubit k = 0; k < n; ++k) {
        const auto rule = SectorRule::single_qubit(k);
        const auto zk = DiagonalObservable::z_string(n, {k});
        for (std::uint64_t z = 0; z < 32; ++z) {
            EXPECT_EQ(zk.profile(z), rule.is_up(z) ? 1.0 : -1.0);
        }
    }
}

TEST(Sector, Validation) {
    EXPECT_THROW(SectorRule::parity_subset({}), ValidationError);
    EXPECT_THROW(SectorRule::single_qubit(4).validate(4), ValidationError);
    EXPECT_NO_THROW(SectorRule::single_qubit(3).validate(4));
}

TEST(GoodSet, Examples) {
    for (unsigned n : {2u, 5u, 10u}) {
        EXPECT_EQ(Predicate::parity_rule(n, {0, n - 1}, 1).good_set_fraction(), 0.5);
    }
    const auto bits = Predicate::bit_constraint(10, {{0, 1}, {4, 0}, {9, 1}});
    EXPECT_EQ(bits.good_set_size(), 128u);
    EXPECT_EQ(bits.good_set_fraction(), 0.125);
    const auto iv = Predicate::interval_union(10, {{0, 31}, {64, 95}});
    EXPECT_EQ(iv.good_set_size(), 64u);
    EXPECT_EQ(iv.good_set_fraction(), 0.0625);
    EXPECT_EQ(brute::good_set_size(iv), 64u);
}

TEST(GoodSet, SectorParityEdgeCases) {
    // parity qubits all fixed: either everything or nothing survives
    const auto all_fixed_ok = Predicate::sector_parity(4, {{0, 1}, {1, 0}}, {0, 1}, 1);
    EXPECT_EQ(all_fixed_ok.good_set_size(), 4u);
    const auto all_fixed_bad = Predicate::sector_parity(4, {{0, 1}, {1, 0}}, {0, 1}, 0);
    EXPECT_EQ(all_fixed_bad.good_set_size(), 0u);
    EXPECT_EQ(brute::good_set_size(all_fixed_bad), 0u);
}

TEST(GoodSet, ClosedFormsMatchEnumeration) {
    std::mt19937_64 eng(17);
    for (unsigned n = 1; n <= 14; ++n) {
        for (int trial = 0; trial < 6; ++trial) {
            std::vector<Qubit> perm(n);
            std::iota(perm.begin(), perm.end(), 0u);
            std::shuffle(perm.begin(), perm.end(), eng);
            const unsigned c = static_cast<unsigned>(eng() % (n + 1));
            std::vector<BitRequirement> bits;
            for (unsigned i = 0; i < c; ++i) {
                bits.push_back({perm[i], static_cast<int>(eng() & 1U)});
            }
            std::shuffle(perm.begin(), perm.end(), eng);
            const unsigned p = 1 + static_cast<unsigned>(eng() % n);
            std::vector<Qubit> pq(perm.begin(), perm.begin() + p);
            const int parity = static_cast<int>(eng() & 1U);

            const std::uint64_t dim = std::uint64_t{1} << n;
            std::vector<std::pair<BasisIndex, BasisIndex>> intervals;
            BasisIndex lo = eng() % dim;
            while (lo < dim && intervals.size() < 4) {
                const BasisIndex hi = std::min<BasisIndex>(dim - 1, lo + eng() % (dim / 4 + 1));
                intervals.push_back({lo, hi});
                lo = hi + 2 + eng() % (dim / 4 + 1);
            }

            const std::vector<Predicate> preds{
                Predicate::bit_constraint(n, bits), Predicate::parity_rule(n, pq, parity),
                Predicate::sector_parity(n, bits, pq, parity),
                Predicate::interval_union(n, intervals)};
            for (const auto &pred : preds) {
                ASSERT_EQ(pred.good_set_size(), brute::good_set_size(pred))
                    << pred.kind_name() << " n=" << n;
                for (std::uint64_t z = 0; z < dim; ++z) {
                    ASSERT_EQ(pred.contains(z), brute::member(pred, z));
                }
            }
        }
    }
}

TEST(GoodSet, InvalidPredicates) {
    EXPECT_THROW(Predicate::bit_constraint(4, {{4, 1}}), ValidationError);
    EXPECT_THROW(Predicate::bit_constraint(4, {{1, 2}}), ValidationError);
    EXPECT_THROW(Predicate::bit_constraint(4, {{1, 0}, {1, 1}}), ValidationError);
    EXPECT_THROW(Predicate::parity_rule(4, {}, 0), ValidationError);
    EXPECT_THROW(Predicate::interval_union(4, {{3, 2}}), ValidationError);
    EXPECT_THROW(Predicate::interval_union(4, {{0, 16}}), ValidationError);
    EXPECT_THROW(Predicate::interval_union(4, {{0, 5}, {5, 7}}), ValidationError);
}

TEST(GroverFormulas, FTarget) {
    EXPECT_NEAR(f_target(1), 0.25, 1e-15);
    EXPECT_NEAR(f_target(4), 0.030153689607045786, 1e-15);
    for (unsigned t = 1; t < 50; ++t) {
        EXPECT_GT(f_target(t), f_target(t + 1));
    }
    EXPECT_THROW(f_target(0), DomainError);
}

TEST(GroverFormulas, PgIdeal) {
    for (double f : {0.01, 0.3, 0.77}) {
        EXPECT_NEAR(p_g_ideal(0, f), f, 1e-15);
    }
    EXPECT_NEAR(p_g_ideal(1, 0.25), 1.0, 1e-15);
    EXPECT_NEAR(p_g_ideal(4, f_target(4)), 1.0, 1e-15);
    EXPECT_THROW(p_g_ideal(1, 0.0), DomainError);
    EXPECT_THROW(p_g_ideal(1, 1.0), DomainError);
    EXPECT_THROW(p_g_ideal(1, -0.2), DomainError);
}

TEST(GroverFormulas, NonMonotoneInIterations) {
    const double f = f_target(4);
    EXPECT_LT(p_g_ideal(2, f), p_g_ideal(4, f));
    EXPECT_GT(p_g_ideal(4, f), p_g_ideal(7, f));
    for (unsigned t = 0; t < 30; ++t) {
        const double p = p_g_ideal(t, f);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
}
