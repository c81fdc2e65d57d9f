#include "qens/diagnostics.hpp"

#include "parallel.hpp"
#include "qens/errors.hpp"
#include "qens/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qens {

namespace {

void check_arity(std::size_t dim, const DiagonalObservable &obs,
                 const SectorRule &rule) {
    const unsigned n = obs.num_qubits();
    if ((std::size_t{1} << n) != dim) {
        throw ValidationError("observable arity " + std::to_string(n) +
                              " does not match state of dimension " +
                              std::to_string(dim));
    }
    rule.validate(n);
}

using Field = double SectorEstimates::*;
using ErrorField = double EstimateErrors::*;

constexpr std::array<std::pair<Field, ErrorField>, 6> kFields{{
    {&SectorEstimates::pi_up, &EstimateErrors::pi_up},
    {&SectorEstimates::pi_down, &EstimateErrors::pi_down},
    {&SectorEstimates::w_up, &EstimateErrors::w_up},
    {&SectorEstimates::w_down, &EstimateErrors::w_down},
    {&SectorEstimates::c_e, &EstimateErrors::c_e},
    {&SectorEstimates::a_avg, &EstimateErrors::a_avg},
}};

ShotSummary summarize(const std::vector<SectorEstimates> &runs) {
    ShotSummary out;
    out.seeds = static_cast<unsigned>(runs.size());
    out.shots_per_seed = runs.front().n_shots;
    out.mean.mode = EstimateMode::Shots;
    out.mean.n_shots = runs.front().n_shots;
    const double m = static_cast<double>(runs.size());
    for (const auto &[field, err] : kFields) {
        double sum = 0.0;
        double se_sum = 0.0;
        for (const auto &r : runs) {
            sum += r.*field;
            se_sum += r.std_errors.*err;
        }
        const double mean = sum / m;
        double ss = 0.0;
        for (const auto &r : runs) {
            ss += (r.*field - mean) * (r.*field - mean);
        }
        const double sd = runs.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
        out.mean.*field = mean;
        out.mean.std_errors.*err = se_sum / m;
        out.std_over_seeds.*err = sd;
        out.sem.*err = sd / std::sqrt(m);
        out.mean_shot_se.*err = se_sum / m;
    }
    return out;
}

ConcentrationCurve masses_only(ConcentrationCurve c) {
    c.order.clear();
    c.order.shrink_to_fit();
    c.sorted_weights.clear();
    c.sorted_weights.shrink_to_fit();
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// Exact estimators

SectorEstimates exact_sector_estimates(std::span<const double> weights,
                                       const DiagonalObservable &obs,
                                       const SectorRule &rule) {
    check_arity(weights.size(), obs, rule);
    SectorEstimates e;
    for (std::size_t z = 0; z < weights.size(); ++z) {
        const double q = weights[z];
        if (q == 0.0) {
            continue;
        }
        const double qa = q * obs.profile(z);
        if (rule.is_up(z)) {
            e.pi_up += q;
            e.w_up += qa;
        } else {
            e.pi_down += q;
            e.w_down += qa;
        }
    }
    e.c_e = e.w_up - e.w_down;
    e.a_avg = e.w_up + e.w_down;
    e.mode = EstimateMode::Exact;
    return e;
}

SectorEstimates exact_sector_estimates(const QuantumState &state,
                                       const DiagonalObservable &obs,
                                       const SectorRule &rule) {
    const auto q = basis_weights(state);
    auto e = exact_sector_estimates(q, obs, rule);
    const double alt = composed_correlator(q, obs, rule);
    if (std::abs(alt - e.c_e) > 1e-9 * std::max(1.0, obs.max_abs_profile())) {
        throw std::logic_error("sector contrast disagrees with <A Z_S>");
    }
    return e;
}

double expectation(std::span<const double> weights, const DiagonalObservable &obs) {
    if ((std::size_t{1} << obs.num_qubits()) != weights.size()) {
        throw ValidationError("observable arity does not match weight table");
    }
    double s = 0.0;
    for (std::size_t z = 0; z < weights.size(); ++z) {
        s += weights[z] * obs.profile(z);
    }
    return s;
}

double composed_correlator(std::span<const double> weights,
                           const DiagonalObservable &obs, const SectorRule &rule) {
    rule.validate(obs.num_qubits());
    return expectation(weights, obs.times_z_mask(rule.mask()));
}

double structural_form_correlator(std::span<const double> weights,
                                  const DiagonalObservable &obs,
                                  const SectorRule &rule) {
    check_arity(weights.size(), obs, rule);
    std::vector<double> projected(weights.begin(), weights.end());
    for (std::size_t z = 0; z < projected.size(); ++z) {
        if (!rule.is_up(z)) {
            projected[z] = 0.0;
        }
    }
    return 2.0 * expectation(projected, obs) - expectation(weights, obs);
}

// ---------------------------------------------------------------------------
// Shot estimators

SectorEstimates shot_sector_estimates(std::span<const BasisIndex> shots,
                                      const DiagonalObservable &obs,
                                      const SectorRule &rule) {
    if (shots.empty()) {
        throw ValidationError("shot_sector_estimates: empty shot set");
    }
    rule.validate(obs.num_qubits());
    const BasisIndex dim = BasisIndex{1} << obs.num_qubits();

    // Sums and sums of squares of per-shot terms:
    // u = a 1[up], d = a 1[down], c = u - d, s = u + d = a, p = 1[up].
    double su = 0, sd = 0, sc = 0, ss = 0, sp = 0;
    double su2 = 0, sd2 = 0, sc2 = 0, ss2 = 0;
    for (BasisIndex z : shots) {
        if (z >= dim) {
            throw ValidationError("shot index " + std::to_string(z) +
                                  " out of range for n = " +
                                  std::to_string(obs.num_qubits()));
        }
        const double a = obs.profile(z);
        const bool up = rule.is_up(z);
        const double u = up ? a : 0.0;
        const double d = up ? 0.0 : a;
        const double c = u - d;
        su += u;
        sd += d;
        sc += c;
        ss += a;
        sp += up ? 1.0 : 0.0;
        su2 += u * u;
        sd2 += d * d;
        sc2 += c * c;
        ss2 += a * a;
    }
    const double n = static_cast<double>(shots.size());
    auto se = [n](double sum, double sum2) {
        if (n < 2) {
            return 0.0;
        }
        const double mean = sum / n;
        const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
        return std::sqrt(var / n);
    };

    SectorEstimates e;
    e.mode = EstimateMode::Shots;
    e.n_shots = shots.size();
    const auto up_count = static_cast<std::uint64_t>(sp);
    e.pi_up = sp / n;
    e.pi_down = static_cast<double>(shots.size() - up_count) / n;
    e.w_up = su / n;
    e.w_down = sd / n;
    e.c_e = e.w_up - e.w_down;
    e.a_avg = e.w_up + e.w_down;
    e.std_errors.pi_up = se(sp, sp);
    e.std_errors.pi_down = e.std_errors.pi_up;
    e.std_errors.w_up = se(su, su2);
    e.std_errors.w_down = se(sd, sd2);
    e.std_errors.c_e = se(sc, sc2);
    e.std_errors.a_avg = se(ss, ss2);
    return e;
}

// ---------------------------------------------------------------------------
// Cumulative trace and concentration

double CumulativeTrace::max_abs_running_sum() const noexcept {
    double m = 0.0;
    for (const auto &e : entries) {
        m = std::max(m, std::abs(e.running_sum));
    }
    return m;
}

CumulativeTrace cumulative_trace(const QuantumState &state,
                                 const DiagonalObservable &obs,
                                 const std::optional<SectorRule> &rule,
                                 const std::optional<Predicate> &good_set) {
    if (obs.num_qubits() != state.num_qubits()) {
        throw ValidationError("cumulative_trace: observable arity mismatch");
    }
    if (rule) {
        rule->validate(state.num_qubits());
    }
    if (good_set && good_set->num_qubits() != state.num_qubits()) {
        throw ValidationError("cumulative_trace: predicate arity mismatch");
    }
    CumulativeTrace trace;
    trace.entries.reserve(state.dim());
    double running = 0.0;
    for (BasisIndex z = 0; z < state.dim(); ++z) {
        const double a = obs.profile(z);
        const double contribution = std::norm(state[z]) * a;
        running += contribution;
        trace.entries.push_back({z, a, contribution, running,
                                 rule ? rule->is_up(z) : true,
                                 good_set ? good_set->contains(z) : false});
    }
    return trace;
}

double ConcentrationCurve::mass(std::uint64_t k) const noexcept {
    k = std::min(k, num_states);
    if (!sorted_weights.empty()) {
        const auto end = std::min<std::uint64_t>(k, sorted_weights.size());
        return std::accumulate(sorted_weights.begin(),
                               sorted_weights.begin() + static_cast<std::ptrdiff_t>(end),
                               0.0);
    }
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        if (std::min(k_values[i], num_states) == k) {
            return masses[i];
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

ConcentrationCurve concentration_curve(std::span<const double> weights,
                                       std::vector<std::uint64_t> k_values) {
    ConcentrationCurve c;
    c.num_states = weights.size();
    c.order.resize(weights.size());
    std::iota(c.order.begin(), c.order.end(), BasisIndex{0});
    std::stable_sort(c.order.begin(), c.order.end(),
                     [&](BasisIndex a, BasisIndex b) { return weights[a] > weights[b]; });
    c.sorted_weights.resize(weights.size());
    for (std::size_t i = 0; i < c.order.size(); ++i) {
        c.sorted_weights[i] = weights[c.order[i]];
    }
    std::vector<double> prefix(weights.size());
    std::partial_sum(c.sorted_weights.begin(), c.sorted_weights.end(), prefix.begin());
    c.k_values = std::move(k_values);
    c.masses.reserve(c.k_values.size());
    for (auto k : c.k_values) {
        if (k == 0) {
            c.masses.push_back(0.0);
        } else {
            c.masses.push_back(prefix[std::min<std::uint64_t>(k, prefix.size()) - 1]);
        }
    }
    return c;
}

ConcentrationCurve concentration_curve(const QuantumState &state,
                                       std::vector<std::uint64_t> k_values) {
    for (auto k : k_values) {
        if (k > state.dim()) {
            throw ValidationError("concentration_curve: K = " + std::to_string(k) +
                                  " exceeds 2^n = " + std::to_string(state.dim()));
        }
    }
    const auto q = basis_weights(state);
    return concentration_curve(q, std::move(k_values));
}

// ---------------------------------------------------------------------------
// Haar scaling

double median(std::vector<double> values) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

double bootstrap_median_se(std::span<const double> values, unsigned resamples,
                           std::uint64_t seed) {
    if (values.size() < 2 || resamples < 2) {
        return 0.0;
    }
    Engine eng(seed);
    std::vector<double> medians;
    medians.reserve(resamples);
    std::vector<double> sample(values.size());
    for (unsigned r = 0; r < resamples; ++r) {
        for (auto &s : sample) {
            const auto i = static_cast<std::size_t>(uniform01(eng) *
                                                    static_cast<double>(values.size()));
            s = values[std::min(i, values.size() - 1)];
        }
        medians.push_back(median(sample));
    }
    const double mean =
        std::accumulate(medians.begin(), medians.end(), 0.0) / medians.size();
    double ss = 0.0;
    for (double m : medians) {
        ss += (m - mean) * (m - mean);
    }
    return std::sqrt(ss / (medians.size() - 1.0));
}

HaarScalingResult haar_scaling_study(const HaarScalingConfig &config) {
    if (config.n_list.empty()) {
        throw ValidationError("haar_scaling_study: n_list is empty");
    }
    if (config.draws == 0) {
        throw ValidationError("haar_scaling_study: draws must be >= 1");
    }
    if (!std::is_sorted(config.n_list.begin(), config.n_list.end()) ||
        std::adjacent_find(config.n_list.begin(), config.n_list.end()) !=
            config.n_list.end()) {
        throw ValidationError("haar_scaling_study: n_list must be strictly ascending");
    }
    for (unsigned n : config.n_list) {
        check_capacity(n);
        config.rule.validate(n);
    }

    HaarScalingResult result;
    result.slope = std::numeric_limits<double>::quiet_NaN();
    result.intercept = std::numeric_limits<double>::quiet_NaN();
    if (config.n_list.size() < 4) {
        result.warnings.push_back("fewer than 4 register sizes; slope is poorly "
                                  "constrained");
    }
    if (config.draws < 50) {
        result.warnings.push_back("insufficient draws (< 50) per register size");
    }

    std::vector<DiagonalObservable> per_n;
    for (unsigned n : config.n_list) {
        per_n.push_back(config.observable.with_num_qubits(n));
    }
    result.degenerate =
        per_n.front().times_z_mask(config.rule.mask()).is_identity_multiple();

    const std::size_t cells = config.n_list.size() * config.draws;
    std::vector<double> abs_ce(cells);
    detail::parallel_for(cells, config.workers, [&](std::size_t cell) {
        const std::size_t ni = cell / config.draws;
        const std::size_t draw = cell % config.draws;
        const unsigned n = config.n_list[ni];
        const auto state = sample_haar_state(n, derive_seed(config.seed, n, draw));
        const auto q = basis_weights(state);
        abs_ce[cell] = std::abs(exact_sector_estimates(q, per_n[ni], config.rule).c_e);
    });

    for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
        HaarScalingPoint p;
        p.num_qubits = config.n_list[ni];
        p.draws = config.draws;
        p.abs_ce.assign(abs_ce.begin() + static_cast<std::ptrdiff_t>(ni * config.draws),
                        abs_ce.begin() +
                            static_cast<std::ptrdiff_t>((ni + 1) * config.draws));
        p.median_abs_ce = median(p.abs_ce);
        p.median_se = bootstrap_median_se(p.abs_ce, config.bootstrap_resamples,
                                          derive_seed(config.seed, 0xB007, p.num_qubits));
        result.points.push_back(std::move(p));
    }

    if (result.degenerate) {
        result.warnings.push_back("A Z_S is proportional to the identity; "
                                  "c_e is state independent and excluded from the fit");
        return result;
    }
    std::vector<std::pair<double, double>> xy;
    for (const auto &p : result.points) {
        if (p.median_abs_ce > 0.0) {
            xy.emplace_back(p.num_qubits, std::log2(p.median_abs_ce));
        }
    }
    if (xy.size() >= 2) {
        double mx = 0, my = 0;
        for (auto [x, y] : xy) {
            mx += x;
            my += y;
        }
        mx /= xy.size();
        my /= xy.size();
        double sxy = 0, sxx = 0;
        for (auto [x, y] : xy) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        result.slope = sxy / sxx;
        result.intercept = my - result.slope * mx;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sweeps

const SweepPoint &SweepResult::peak_contrast() const {
    if (points.empty()) {
        throw std::logic_error("peak_contrast on empty sweep");
    }
    return *std::max_element(points.begin(), points.end(),
                             [](const SweepPoint &a, const SweepPoint &b) {
                                 return std::abs(a.exact.c_e) < std::abs(b.exact.c_e);
                             });
}

namespace {

void check_sweep_common(std::uint64_t shots, unsigned seeds,
                        const std::vector<std::uint64_t> &k_values) {
    if (shots > 0 && seeds == 0) {
        throw ValidationError("sweep: seeds must be >= 1 when shots > 0");
    }
    for (auto k : k_values) {
        if (k == 0) {
            throw ValidationError("sweep: K values must be >= 1");
        }
    }
}

// `state_for(param_index, seed_index)` returns the weight table for a cell.
template <class StateFor>
SweepResult run_sweep(std::string name, const std::vector<double> &params,
                      const DiagonalObservable &obs, const SectorRule &rule,
                      std::uint64_t shots, unsigned seeds,
                      const std::vector<std::uint64_t> &k_values,
                      std::uint64_t master_seed, unsigned workers,
                      const std::optional<Predicate> &good_set, StateFor &&state_for) {
    SweepResult r;
    r.parameter_name = std::move(name);
    r.k_values = k_values;
    r.shots = shots;
    r.seeds = shots > 0 ? seeds : 0;
    r.master_seed = master_seed;
    r.points.resize(params.size());

    const unsigned runs = shots > 0 ? seeds : 0;
    std::vector<std::vector<SectorEstimates>> shot_runs(
        params.size(), std::vector<SectorEstimates>(runs));

    detail::parallel_for(params.size(), workers, [&](std::size_t pi) {
        const auto q = state_for(pi, 0);
        auto &pt = r.points[pi];
        pt.parameter = params[pi];
        pt.exact = exact_sector_estimates(q, obs, rule);
        pt.concentration = masses_only(concentration_curve(q, k_values));
        if (good_set) {
            double g = 0.0;
            for (std::size_t z = 0; z < q.size(); ++z) {
                if (good_set->contains(z)) {
                    g += q[z];
                }
            }
            pt.good_set_mass = g;
        }
    });
    if (runs > 0) {
        detail::parallel_for(params.size() * runs, workers, [&](std::size_t cell) {
            const std::size_t pi = cell / runs;
            const std::size_t si = cell % runs;
            const auto q = state_for(pi, si);
            const auto seed = derive_seed(master_seed, pi, si);
            const auto sample = sample_shots(q, shots, seed);
            shot_runs[pi][si] = shot_sector_estimates(sample, obs, rule);
        });
        for (std::size_t pi = 0; pi < params.size(); ++pi) {
            r.points[pi].shots = summarize(shot_runs[pi]);
        }
    }
    const bool all_up = std::all_of(r.points.begin(), r.points.end(), [](const auto &p) {
        return p.exact.pi_up >= 1.0 - 1e-12;
    });
    const bool all_down = std::all_of(r.points.begin(), r.points.end(), [](const auto &p) {
        return p.exact.pi_down >= 1.0 - 1e-12;
    });
    r.sector_saturated = !r.points.empty() && (all_up || all_down);
    return r;
}

} // namespace

SweepResult grover_sweep(const GroverSweepConfig &config) {
    if (config.t_list.empty()) {
        throw ValidationError("grover_sweep: T list is empty");
    }
    check_capacity(config.num_qubits);
    check_sweep_common(config.shots, config.seeds, config.k_values);
    if (config.observable.num_qubits() != config.num_qubits) {
        throw ValidationError("grover_sweep: observable arity " +
                              std::to_string(config.observable.num_qubits()) +
                              " does not match n = " + std::to_string(config.num_qubits));
    }
    config.rule.validate(config.num_qubits);

    std::vector<double> params(config.t_list.begin(), config.t_list.end());
    // States are deterministic in T: compute once per T and reuse for every seed.
    std::vector<std::vector<double>> weights(config.t_list.size());
    detail::parallel_for(config.t_list.size(), config.workers, [&](std::size_t i) {
        GroverSpec spec{config.num_qubits, config.predicate, config.t_list[i],
                        config.mixing_set};
        weights[i] = basis_weights(run_circuit(build_grover_circuit(spec)));
    });
    return run_sweep(
        "T", params, config.observable, config.rule, config.shots, config.seeds,
        config.k_values, config.master_seed, config.workers, config.predicate,
        [&](std::size_t pi, std::size_t) -> const std::vector<double> & {
            return weights[pi];
        });
}

SweepResult shallow_sweep(const ShallowSweepConfig &config) {
    if (config.d_list.empty()) {
        throw ValidationError("shallow_sweep: d list is empty");
    }
    const unsigned n = config.base.num_qubits;
    check_capacity(n);
    check_sweep_common(config.shots, config.seeds, config.k_values);
    if (config.observable.num_qubits() != n) {
        throw ValidationError("shallow_sweep: observable arity " +
                              std::to_string(config.observable.num_qubits()) +
                              " does not match n = " + std::to_string(n));
    }
    config.rule.validate(n);

    std::vector<double> params(config.d_list.begin(), config.d_list.end());
    auto spec_at = [&](std::size_t pi) {
        ShallowSpec s = config.base;
        s.depth = config.d_list[pi];
        return s;
    };
    validate_ensemble(spec_at(0));
    return run_sweep("d", params, config.observable, config.rule, config.shots,
                     config.seeds, config.k_values, config.master_seed, config.workers,
                     std::nullopt, [&](std::size_t pi, std::size_t si) {
                         return basis_weights(
                             prepare(EnsembleSpec{spec_at(pi)}, si, config.master_seed)
                                 .state);
                     });
}

} // namespace qens
