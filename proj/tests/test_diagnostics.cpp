#include "qens/diagnostics.hpp"
#include "qens/errors.hpp"
#include "qens/rng.hpp"

#include "support/brute.hpp"
#include "support/random_cases.hpp"
#include "support/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace qens;

namespace {

QuantumState uniform(unsigned n) { return prepare(UniformSpec{n}, 0, 0).state; }

QuantumState grover(unsigned n, const Predicate &p, unsigned t) {
    return run_circuit(build_grover_circuit({n, p, t, {}}));
}

} // namespace

TEST(Exact, UniformDisjointSupportsGiveZero) {
    const auto e = exact_sector_estimates(uniform(6), DiagonalObservable::z_string(6, {2}),
                                          SectorRule::single_qubit(4));
    EXPECT_NEAR(e.c_e, 0.0, 1e-12);
    EXPECT_NEAR(e.pi_up, 0.5, 1e-12);
    EXPECT_EQ(e.mode, EstimateMode::Exact);
}

TEST(Exact, UniformSameQubitGivesOne) {
    const auto e = exact_sector_estimates(uniform(6), DiagonalObservable::z_string(6, {3}),
                                          SectorRule::single_qubit(3));
    EXPECT_NEAR(e.c_e, 1.0, 1e-15);
    EXPECT_NEAR(e.a_avg, 0.0, 1e-15);
}

TEST(Exact, ZeroState) {
    const auto e = exact_sector_estimates(new_zero_state(4), DiagonalObservable::z_string(4, {1}),
                                          SectorRule::single_qubit(1));
    EXPECT_EQ(e.pi_up, 1.0);
    EXPECT_EQ(e.pi_down, 0.0);
    EXPECT_EQ(e.w_up, 1.0);
    EXPECT_EQ(e.w_down, 0.0);
    EXPECT_EQ(e.c_e, 1.0);
}

TEST(Exact, ArityMismatch) {
    EXPECT_THROW(exact_sector_estimates(uniform(4), DiagonalObservable::z_string(5, {0}),
                                        SectorRule::single_qubit(0)),
                 ValidationError);
    EXPECT_THROW(exact_sector_estimates(uniform(4), DiagonalObservable::z_string(4, {0}),
                                        SectorRule::single_qubit(4)),
                 ValidationError);
}

TEST(Identities, RandomizedCasesAgreeAcrossCodePaths) {
    std::mt19937_64 eng(2718);
    for (int i = 0; i < 60; ++i) {
        const auto c = cases::random_case(eng, 2, 10);
        const auto q = basis_weights(c.state);
        const auto e = exact_sector_estimates(c.state, c.observable, c.rule);
        EXPECT_NEAR(e.c_e, e.w_up - e.w_down, 1e-12) << c.label;
        EXPECT_NEAR(expectation(q, c.observable), e.w_up + e.w_down, 1e-12) << c.label;
        EXPECT_NEAR(composed_correlator(q, c.observable, c.rule), e.c_e, 1e-12) << c.label;
        EXPECT_NEAR(structural_form_correlator(q, c.observable, c.rule), e.c_e, 1e-12)
            << c.label;
        EXPECT_NEAR(e.pi_up + e.pi_down, 1.0, 1e-10);
        const double bound = c.observable.max_abs_profile();
        EXPECT_LE(std::abs(e.w_up), e.pi_up * bound + 1e-12);
        EXPECT_LE(std::abs(e.w_down), e.pi_down * bound + 1e-12);
    }
}

TEST(DenseOracle, ExactEstimatesUpToFiveQubits) {
    std::mt19937_64 eng(31);
    for (int i = 0; i < 80; ++i) {
        const auto c = cases::random_case(eng, 1 + i % 5, 1 + i % 5);
        const unsigned n = c.state.num_qubits();
        const auto ref = reference::estimates(reference::as_vec(c.state), n, c.observable, c.rule);
        const auto e = exact_sector_estimates(c.state, c.observable, c.rule);
        EXPECT_NEAR(e.pi_up, ref.pi_up, 1e-12) << c.label;
        EXPECT_NEAR(e.pi_down, ref.pi_down, 1e-12) << c.label;
        EXPECT_NEAR(e.w_up, ref.w_up, 1e-12) << c.label;
        EXPECT_NEAR(e.w_down, ref.w_down, 1e-12) << c.label;
        EXPECT_NEAR(e.c_e, ref.c_e, 1e-12) << c.label;
        EXPECT_NEAR(e.a_avg, ref.a_avg, 1e-12) << c.label;
    }
}

TEST(DenseOracle, TraceConcentrationAndShotsUpToFiveQubits) {
    std::mt19937_64 eng(8);
    for (int i = 0; i < 40; ++i) {
        const auto c = cases::random_case(eng, 1 + i % 5, 1 + i % 5);
        const unsigned n = c.state.num_qubits();
        const auto v = reference::as_vec(c.state);

        const auto s = reference::running_sum(v, n, c.observable);
        const auto tr = cumulative_trace(c.state, c.observable);
        ASSERT_EQ(tr.entries.size(), s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
            EXPECT_NEAR(tr.entries[j].running_sum, s[j], 1e-12);
        }

        const std::uint64_t dim = std::uint64_t{1} << n;
        std::vector<std::uint64_t> ks{1, std::min<std::uint64_t>(3, dim), dim};
        const auto cc = concentration_curve(c.state, ks);
        for (std::size_t j = 0; j < ks.size(); ++j) {
            EXPECT_NEAR(cc.masses[j], reference::top_mass(v, ks[j]), 1e-12);
        }

        const auto shots = sample_shots(c.state, 257, 1000 + i);
        const auto ref = reference::shot_means(shots, n, c.observable, c.rule);
        const auto e = shot_sector_estimates(shots, c.observable, c.rule);
        EXPECT_NEAR(e.pi_up, ref.pi_up, 1e-12);
        EXPECT_NEAR(e.w_up, ref.w_up, 1e-12);
        EXPECT_NEAR(e.w_down, ref.w_down, 1e-12);
        EXPECT_NEAR(e.c_e, ref.c_e, 1e-12);
        EXPECT_NEAR(e.a_avg, ref.a_avg, 1e-12);
    }
}

TEST(Shots, ConstantSample) {
    const std::vector<BasisIndex> shots(50, 0b0100);
    const auto e = shot_sector_estimates(shots, DiagonalObservable::z_string(3, {0}),
                                         SectorRule::single_qubit(1));
    EXPECT_EQ(e.w_up, 1.0);
    EXPECT_EQ(e.w_down, 0.0);
    EXPECT_EQ(e.c_e, 1.0);
    EXPECT_EQ(e.std_errors.c_e, 0.0);
    EXPECT_EQ(e.std_errors.w_up, 0.0);
    EXPECT_EQ(e.n_shots, 50u);
    EXPECT_EQ(e.mode, EstimateMode::Shots);
}

TEST(Shots, SameQubitContrastHasZeroVariance) {
    // a_z (1[up] - 1[down]) = Z_k Z_k = 1 on every basis state
    for (std::uint64_t z = 0; z < 64; ++z) {
        const double a = brute::bit(z, 2) ? -1.0 : 1.0;
        const double sign = brute::bit(z, 2) ? -1.0 : 1.0;
        ASSERT_EQ(a * sign, 1.0);
    }
    const auto shots = sample_shots(uniform(6), 10000, 4);
    const auto e = shot_sector_estimates(shots, DiagonalObservable::z_string(6, {2}),
                                         SectorRule::single_qubit(2));
    EXPECT_EQ(e.c_e, 1.0);
    EXPECT_EQ(e.std_errors.c_e, 0.0);
    EXPECT_GT(e.std_errors.w_up, 0.0);
    EXPECT_EQ(e.pi_up + e.pi_down, 1.0);
}

TEST(Shots, Errors) {
    const auto obs = DiagonalObservable::z_string(3, {0});
    EXPECT_THROW(shot_sector_estimates(std::vector<BasisIndex>{}, obs, SectorRule::single_qubit(0)),
                 ValidationError);
    EXPECT_THROW(shot_sector_estimates(std::vector<BasisIndex>{8}, obs, SectorRule::single_qubit(0)),
                 ValidationError);
}

TEST(Shots, SelfConsistentWithExactOnGroverState) {
    const unsigned n = 8;
    const auto pred = Predicate::sector_parity(n, {{0, 0}, {5, 1}}, {1, 2}, 0);
    const auto state = grover(n, pred, 2);
    const auto obs = DiagonalObservable(n, {{{1, 2}, 1.0}, {{6}, 0.5}});
    const auto rule = SectorRule::single_qubit(0);
    const auto exact = exact_sector_estimates(state, obs, rule);
    const auto q = basis_weights(state);
    int inside = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto e = shot_sector_estimates(sample_shots(q, 2048, derive_seed(55, rep)), obs, rule);
        inside += std::abs(e.c_e - exact.c_e) <= 5 * e.std_errors.c_e ? 1 : 0;
    }
    EXPECT_GE(inside, 190);
}

TEST(Cumulative, UniformAlternates) {
    const unsigned n = 5;
    const auto tr = cumulative_trace(uniform(n), DiagonalObservable::z_string(n, {0}));
    const double step = 1.0 / 32;
    for (std::size_t i = 0; i < tr.entries.size(); ++i) {
        EXPECT_EQ(tr.entries[i].z, i);
        EXPECT_NEAR(tr.entries[i].contribution, (i % 2 ? -step : step), 1e-15);
        EXPECT_NEAR(tr.entries[i].running_sum, (i % 2 ? 0.0 : step), 1e-15);
    }
    EXPECT_NEAR(tr.final_sum(), 0.0, 1e-15);
}

TEST(Cumulative, ZeroStateSingleStep) {
    const auto tr = cumulative_trace(new_zero_state(4), DiagonalObservable::z_string(4, {0}));
    EXPECT_EQ(tr.entries[0].contribution, 1.0);
    for (const auto &e : tr.entries) {
        EXPECT_EQ(e.running_sum, 1.0);
    }
}

TEST(Cumulative, IncrementsAndTerminalValue) {
    std::mt19937_64 eng(12);
    for (int i = 0; i < 20; ++i) {
        const auto c = cases::random_case(eng, 2, 9);
        const auto tr = cumulative_trace(c.state, c.observable, c.rule);
        double prev = 0.0;
        for (const auto &e : tr.entries) {
            EXPECT_EQ(prev + e.contribution, e.running_sum);
            EXPECT_EQ(e.sector_up, c.rule.is_up(e.z));
            prev = e.running_sum;
        }
        const auto est = exact_sector_estimates(c.state, c.observable, c.rule);
        EXPECT_NEAR(tr.final_sum(), est.a_avg, 1e-10);
    }
}

TEST(Cumulative, GoodSetFlags) {
    const auto pred = Predicate::interval_union(4, {{3, 5}});
    const auto tr = cumulative_trace(uniform(4), DiagonalObservable::z_string(4, {0}),
                                     std::nullopt, pred);
    for (const auto &e : tr.entries) {
        EXPECT_EQ(e.in_good_set, e.z >= 3 && e.z <= 5);
    }
}

TEST(Cumulative, HaarFlatVersusAlignedGroverSteps) {
    const unsigned n = 10;
    const auto obs = DiagonalObservable::z_string(n, {0, 1, 2});
    int flat = 0;
    for (unsigned s = 0; s < 100; ++s) {
        const auto tr = cumulative_trace(prepare(HaarSpec{n, s}, 0, 1).state, obs);
        flat += tr.max_abs_running_sum() < 0.2 ? 1 : 0;
    }
    EXPECT_GE(flat, 95);

    // G sits entirely on a_z = +1 strings
    const auto pred = Predicate::sector_parity(n, {{3, 0}, {4, 0}, {5, 0}}, {0, 1, 2}, 0);
    const auto tr = cumulative_trace(grover(n, pred, 3), obs, std::nullopt, pred);
    EXPECT_GT(tr.final_sum(), 0.9);
    EXPECT_GT(tr.max_abs_running_sum(), 0.9);
}

TEST(Concentration, UniformAndZero) {
    const auto cu = concentration_curve(uniform(6), {1, 5, 64});
    EXPECT_NEAR(cu.masses[0], 1.0 / 64, 1e-15);
    EXPECT_NEAR(cu.masses[1], 5.0 / 64, 1e-15);
    EXPECT_NEAR(cu.masses[2], 1.0, 1e-12);
    const auto cz = concentration_curve(new_zero_state(6), {1});
    EXPECT_EQ(cz.masses[0], 1.0);
    EXPECT_EQ(cz.order[0], 0u);
}

TEST(Concentration, TiesBrokenByIndex) {
    const auto cu = concentration_curve(uniform(4), {16});
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_EQ(cu.order[i], i);
    }
}

TEST(Concentration, MonotoneAndCapacity) {
    const auto s = prepare(HaarSpec{7, 1}, 0, 0).state;
    std::vector<std::uint64_t> ks(128);
    std::iota(ks.begin(), ks.end(), 1);
    const auto c = concentration_curve(s, ks);
    for (std::size_t i = 1; i < ks.size(); ++i) {
        EXPECT_GE(c.masses[i], c.masses[i - 1]);
    }
    EXPECT_NEAR(c.masses.back(), 1.0, 1e-10);
    EXPECT_THROW(concentration_curve(s, {129}), ValidationError);
}

TEST(Concentration, GroverPeakMassEqualsGoodSetMass) {
    const unsigned n = 10;
    const auto pred = Predicate::bit_constraint(n, {{1, 0}, {4, 1}, {6, 1}, {9, 0}});
    ASSERT_EQ(pred.good_set_size(), 64u);
    const double f = pred.good_set_fraction();
    unsigned best = 0;
    for (unsigned t = 1; t <= 10; ++t) {
        if (p_g_ideal(t, f) > p_g_ideal(best, f)) {
            best = t;
        }
    }
    const auto c = concentration_curve(grover(n, pred, best), {64});
    EXPECT_NEAR(c.masses[0], p_g_ideal(best, f), 1e-9);
}

TEST(HaarScaling, SlopeNearMinusHalf) {
    HaarScalingConfig cfg{.n_list = {6, 8, 10, 12},
                          .observable = DiagonalObservable::z_string(6, {0}),
                          .rule = SectorRule::single_qubit(1),
                          .draws = 200,
                          .seed = 20,
                          .workers = 2,
                          .bootstrap_resamples = 100};
    const auto r = haar_scaling_study(cfg);
    EXPECT_FALSE(r.degenerate);
    EXPECT_TRUE(r.warnings.empty());
    ASSERT_EQ(r.points.size(), 4u);
    EXPECT_NEAR(r.slope, -0.5, 0.1);
    for (const auto &p : r.points) {
        EXPECT_EQ(p.abs_ce.size(), 200u);
        EXPECT_GT(p.median_se, 0.0);
    }
}

TEST(HaarScaling, DegenerateSameQubit) {
    HaarScalingConfig cfg{.n_list = {5},
                          .observable = DiagonalObservable::z_string(5, {2}),
                          .rule = SectorRule::single_qubit(2),
                          .draws = 20,
                          .seed = 1,
                          .workers = 1,
                          .bootstrap_resamples = 50};
    const auto r = haar_scaling_study(cfg);
    EXPECT_TRUE(r.degenerate);
    EXPECT_TRUE(std::isnan(r.slope));
    for (double x : r.points[0].abs_ce) {
        EXPECT_NEAR(x, 1.0, 1e-12);
    }
    EXPECT_EQ(r.warnings.size(), 3u);
}

TEST(HaarScaling, WorkerCountDoesNotChangeResult) {
    HaarScalingConfig cfg{.n_list = {4, 6},
                          .observable = DiagonalObservable::z_string(4, {0, 3}),
                          .rule = SectorRule::parity_subset({1, 2}),
                          .draws = 60,
                          .seed = 3,
                          .workers = 1,
                          .bootstrap_resamples = 40};
    const auto a = haar_scaling_study(cfg);
    cfg.workers = 4;
    const auto b = haar_scaling_study(cfg);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].abs_ce, b.points[i].abs_ce);
        EXPECT_EQ(a.points[i].median_se, b.points[i].median_se);
    }
    EXPECT_EQ(a.slope, b.slope);
}

TEST(HaarScaling, InputValidation) {
    HaarScalingConfig cfg{.n_list = {8, 6},
                          .observable = DiagonalObservable::z_string(4, {0}),
                          .rule = SectorRule::single_qubit(1),
                          .draws = 10,
                          .seed = 0,
                          .workers = 1,
                          .bootstrap_resamples = 10};
    EXPECT_THROW(haar_scaling_study(cfg), ValidationError);
    cfg.n_list = {};
    EXPECT_THROW(haar_scaling_study(cfg), ValidationError);
    cfg.n_list = {6, 30};
    EXPECT_THROW(haar_scaling_study(cfg), CapacityError);
}

TEST(Bootstrap, MedianStandardErrorScaling) {
    // SE of a median scales as N^{-1/2}: x2 draws -> 1/sqrt(2), x4 -> 1/2
    std::mt19937_64 eng(1);
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> big(6400);
    for (auto &x : big) {
        x = ex(eng);
    }
    auto se_for = [&](std::size_t n) {
        double acc = 0.0;
        for (int r = 0; r < 8; ++r) {
            std::vector<double> sub(big.begin() + r * 800, big.begin() + r * 800 + n);
            acc += bootstrap_median_se(sub, 400, derive_seed(7, n, r));
        }
        return acc / 8;
    };
    const double s200 = se_for(200), s400 = se_for(400), s800 = se_for(800);
    EXPECT_NEAR(s400 / s200, 1.0 / std::sqrt(2.0), 0.3 / std::sqrt(2.0));
    EXPECT_NEAR(s800 / s200, 0.5, 0.15);
}

TEST(Median, EvenAndOdd) {
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
}

class GroverSweepTest : public ::testing::Test {
  protected:
    static constexpr unsigned kN = 10;
    GroverSweepConfig config(Predicate pred, std::uint64_t shots = 0) {
        return {.num_qubits = kN,
                .predicate = std::move(pred),
                .t_list = {0, 1, 2, 3, 4, 5, 6, 7, 8},
                .mixing_set = {},
                .observable = DiagonalObservable::z_string(kN, {1, 2}),
                .rule = SectorRule::single_qubit(0),
                .shots = shots,
                .seeds = 3,
                .k_values = kDefaultKList,
                .master_seed = 99,
                .workers = 2};
    }
};

TEST_F(GroverSweepTest, AlignedPredicatePeaksWithGoodSetMass) {
    const auto pred = Predicate::sector_parity(kN, {{0, 0}, {3, 0}, {4, 0}}, {1, 2}, 0);
    const auto r = grover_sweep(config(pred));
    EXPECT_EQ(r.parameter_name, "T");
    EXPECT_NEAR(r.points[0].exact.pi_up, 0.5, 1e-12);
    EXPECT_NEAR(r.points[0].exact.c_e, 0.0, 1e-12);
    std::size_t best = 0;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        EXPECT_NEAR(*r.points[i].good_set_mass,
                    p_g_ideal(static_cast<unsigned>(r.points[i].parameter), 1.0 / 16), 1e-9);
        if (*r.points[i].good_set_mass > *r.points[best].good_set_mass) {
            best = i;
        }
    }
    EXPECT_EQ(r.peak_contrast().parameter, r.points[best].parameter);
    EXPECT_EQ(r.points[best].parameter, 3.0);
    EXPECT_GT(std::abs(r.peak_contrast().exact.c_e), 0.9);
    EXPECT_FALSE(r.sector_saturated);
}

TEST_F(GroverSweepTest, MisalignedPredicateLeavesContrastAtBaseline) {
    const auto pred = Predicate::sector_parity(kN, {{3, 0}, {4, 0}, {5, 0}}, {1, 2}, 0);
    const auto r = grover_sweep(config(pred));
    EXPECT_GT(*r.points[3].good_set_mass, 0.9);
    for (const auto &p : r.points) {
        EXPECT_NEAR(p.exact.c_e, 0.0, 1e-12);
    }
}

TEST_F(GroverSweepTest, ShotsAndDeterminism) {
    const auto pred = Predicate::sector_parity(kN, {{0, 0}, {3, 0}, {4, 0}}, {1, 2}, 0);
    auto cfg = config(pred, 2048);
    const auto a = grover_sweep(cfg);
    cfg.workers = 1;
    const auto b = grover_sweep(cfg);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        ASSERT_TRUE(a.points[i].shots.has_value());
        EXPECT_EQ(a.points[i].shots->mean.c_e, b.points[i].shots->mean.c_e);
        EXPECT_EQ(a.points[i].shots->std_over_seeds.c_e, b.points[i].shots->std_over_seeds.c_e);
        EXPECT_EQ(a.points[i].shots->seeds, 3u);
        EXPECT_NEAR(a.points[i].shots->sem.c_e,
                    a.points[i].shots->std_over_seeds.c_e / std::sqrt(3.0), 1e-15);
        EXPECT_LE(std::abs(a.points[i].shots->mean.c_e - a.points[i].exact.c_e),
                  5 * a.points[i].shots->mean_shot_se.c_e / std::sqrt(3.0) + 1e-12);
    }
    EXPECT_GE(a.points[0].shots->mean.pi_up, 0.47);
    EXPECT_LE(a.points[0].shots->mean.pi_up, 0.53);
}

TEST_F(GroverSweepTest, Validation) {
    auto cfg = config(Predicate::parity_rule(kN, {0}, 0));
    cfg.t_list = {};
    EXPECT_THROW(grover_sweep(cfg), ValidationError);
    cfg = config(Predicate::parity_rule(kN - 1, {0}, 0));
    EXPECT_THROW(grover_sweep(cfg), ValidationError);
    cfg = config(Predicate::parity_rule(kN, {0}, 0));
    cfg.k_values = {0};
    EXPECT_THROW(grover_sweep(cfg), ValidationError);
}

TEST(ShallowSweep, DefaultTemplateTrends) {
    const ShallowSweepConfig cfg{.base = ShallowSpec::default_template(10, 0),
                                 .d_list = {0, 1, 2, 3},
                                 .observable = DiagonalObservable::z_string(10, {0, 1}),
                                 .rule = SectorRule::single_qubit(4),
                                 .shots = 0,
                                 .seeds = 1,
                                 .k_values = {1, 8, 32, 64, 1024},
                                 .master_seed = 0,
                                 .workers = 1};
    const auto r = shallow_sweep(cfg);
    EXPECT_EQ(r.parameter_name, "d");
    EXPECT_TRUE(r.sector_saturated);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        EXPECT_EQ(r.points[i].exact.pi_down, 0.0);
        EXPECT_NEAR(r.points[i].exact.pi_up, 1.0, 1e-12);
        EXPECT_NEAR(r.points[i].concentration.mass(1024), 1.0, 1e-12);
        EXPECT_NEAR(r.points[i].concentration.mass(5000), 1.0, 1e-12);
        EXPECT_FALSE(r.points[i].good_set_mass.has_value());
        if (i > 0) {
            EXPECT_GT(r.points[i].concentration.mass(1), r.points[i - 1].concentration.mass(1));
            EXPECT_GT(r.points[i].concentration.mass(8), r.points[i - 1].concentration.mass(8));
        }
    }
    EXPECT_TRUE(std::isnan(r.points[0].concentration.mass(2)));
}
