#pragma once

#include "qens/ensembles.hpp"
#include "qens/observables.hpp"
#include "qens/statevector.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qens {

enum class EstimateMode { Exact, Shots };

/// Per-field standard errors; all zero in exact mode.
struct EstimateErrors {
    double pi_up = 0.0;
    double pi_down = 0.0;
    double w_up = 0.0;
    double w_down = 0.0;
    double c_e = 0.0;
    double a_avg = 0.0;
};

/// Sector masses, sector-resolved signed sums and the two combinations built
/// from them: c_e = w_up - w_down (contrast) and a_avg = w_up + w_down (<A>).
struct SectorEstimates {
    double pi_up = 0.0;
    double pi_down = 0.0;
    double w_up = 0.0;
    double w_down = 0.0;
    double c_e = 0.0;
    double a_avg = 0.0;
    EstimateMode mode = EstimateMode::Exact;
    std::uint64_t n_shots = 0;
    EstimateErrors std_errors;
};

/// From the full weight table. Also cross-checks c_e against <A Z_S>
/// (throws std::logic_error on disagreement beyond 1e-9).
SectorEstimates exact_sector_estimates(const QuantumState &state,
                                       const DiagonalObservable &obs,
                                       const SectorRule &rule);
SectorEstimates exact_sector_estimates(std::span<const double> weights,
                                       const DiagonalObservable &obs,
                                       const SectorRule &rule);

/// <A> = sum_z q_z a_z.
double expectation(std::span<const double> weights, const DiagonalObservable &obs);

/// <A Z_S> via the composed diagonal observable, where Z_S is the Z-string on
/// the rule's qubits. Equals c_e for diagonal A.
double composed_correlator(std::span<const double> weights,
                           const DiagonalObservable &obs, const SectorRule &rule);

/// 2 sum_j p_j a_j - <A>, with p_j the weights projected onto sector up.
double structural_form_correlator(std::span<const double> weights,
                                  const DiagonalObservable &obs,
                                  const SectorRule &rule);

/// Per-shot means: W_up = (1/N) sum a_z 1[up], W_down likewise. Standard
/// errors are sample standard deviations of the per-shot terms over sqrt(N).
SectorEstimates shot_sector_estimates(std::span<const BasisIndex> shots,
                                      const DiagonalObservable &obs,
                                      const SectorRule &rule);

struct CumulativeEntry {
    BasisIndex z;
    double a_z;
    double contribution; ///< q_z a_z
    double running_sum;  ///< S(i)
    bool sector_up;
    bool in_good_set;
};

/// Running sum of q_z a_z in integer basis order.
struct CumulativeTrace {
    std::vector<CumulativeEntry> entries;

    double final_sum() const noexcept {
        return entries.empty() ? 0.0 : entries.back().running_sum;
    }
    double max_abs_running_sum() const noexcept;
};

CumulativeTrace cumulative_trace(const QuantumState &state,
                                 const DiagonalObservable &obs,
                                 const std::optional<SectorRule> &rule = std::nullopt,
                                 const std::optional<Predicate> &good_set = std::nullopt);

/// Descending-sorted weights (ties by ascending basis index) and M(K).
struct ConcentrationCurve {
    std::vector<BasisIndex> order;
    std::vector<double> sorted_weights;
    std::vector<std::uint64_t> k_values;
    std::vector<double> masses;
    std::uint64_t num_states = 0;

    /// M(K); K beyond 2^n saturates at the full mass. NaN when the sorted
    /// weights were dropped and K was not among k_values.
    double mass(std::uint64_t k) const noexcept;
};

ConcentrationCurve concentration_curve(std::span<const double> weights,
                                       std::vector<std::uint64_t> k_values);
ConcentrationCurve concentration_curve(const QuantumState &state,
                                       std::vector<std::uint64_t> k_values);

// ---------------------------------------------------------------------------
// Haar baseline scaling study

struct HaarScalingConfig {
    std::vector<unsigned> n_list;
    DiagonalObservable observable;
    SectorRule rule;
    unsigned draws = 200;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    unsigned bootstrap_resamples = 200;
};

struct HaarScalingPoint {
    unsigned num_qubits;
    double median_abs_ce;
    double median_se; ///< bootstrap standard error of the median
    unsigned draws;
    std::vector<double> abs_ce;
};

struct HaarScalingResult {
    std::vector<HaarScalingPoint> points;
    /// Least-squares slope of log2(median |c_e|) against n; NaN if not fitted.
    double slope;
    double intercept;
    /// A Z_S reduces to the identity, so c_e = const for every state.
    bool degenerate = false;
    std::vector<std::string> warnings;
};

HaarScalingResult haar_scaling_study(const HaarScalingConfig &config);

/// Bootstrap standard error of the sample median.
double bootstrap_median_se(std::span<const double> values, unsigned resamples,
                           std::uint64_t seed);
double median(std::vector<double> values);

// ---------------------------------------------------------------------------
// Sweeps

/// Aggregate of the shot-mode estimates over seeds.
struct ShotSummary {
    SectorEstimates mean;
    EstimateErrors std_over_seeds; ///< sample std over seeds (0 if one seed)
    EstimateErrors sem;            ///< std_over_seeds / sqrt(seeds)
    EstimateErrors mean_shot_se;   ///< average within-run standard error
    unsigned seeds = 0;
    std::uint64_t shots_per_seed = 0;

    /// Error reported in tables: spread over seeds when there are several,
    /// otherwise the single run's shot standard error.
    const EstimateErrors &reported_errors() const noexcept {
        return seeds > 1 ? std_over_seeds : mean_shot_se;
    }
};

struct SweepPoint {
    double parameter;
    SectorEstimates exact;
    std::optional<ShotSummary> shots;
    ConcentrationCurve concentration; ///< masses only; order/weights dropped
    std::optional<double> good_set_mass;
};

struct SweepResult {
    std::string parameter_name;
    std::vector<SweepPoint> points;
    std::vector<std::uint64_t> k_values;
    std::uint64_t shots = 0;
    unsigned seeds = 0;
    std::uint64_t master_seed = 0;
    /// Exact pi_up (or pi_down) is 1 at every point.
    bool sector_saturated = false;

    /// The point with the largest exact |c_e|.
    const SweepPoint &peak_contrast() const;
};

inline const std::vector<std::uint64_t> kDefaultKList{1, 8, 32, 64};

struct GroverSweepConfig {
    unsigned num_qubits;
    Predicate predicate;
    std::vector<unsigned> t_list;
    std::vector<Qubit> mixing_set;
    DiagonalObservable observable;
    SectorRule rule;
    std::uint64_t shots = 0; ///< 0 = exact only
    unsigned seeds = 1;
    std::vector<std::uint64_t> k_values = kDefaultKList;
    std::uint64_t master_seed = 0;
    unsigned workers = 1;
};

struct ShallowSweepConfig {
    ShallowSpec base;
    std::vector<unsigned> d_list;
    DiagonalObservable observable;
    SectorRule rule;
    std::uint64_t shots = 0;
    unsigned seeds = 1;
    std::vector<std::uint64_t> k_values = kDefaultKList;
    std::uint64_t master_seed = 0;
    unsigned workers = 1;
};

SweepResult grover_sweep(const GroverSweepConfig &config);
SweepResult shallow_sweep(const ShallowSweepConfig &config);

} // namespace qens
