#include "qens/config.hpp"

#include "qens/errors.hpp"
#include "qens/report.hpp"
#include "qens/rng.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace qens {

namespace {

struct ExperimentName {
    ExperimentKind kind;
    const char *name;
};

constexpr ExperimentName kExperiments[] = {
    {ExperimentKind::Weights, "weights"},
    {ExperimentKind::Cumulative, "cumulative"},
    {ExperimentKind::Sector, "sector"},
    {ExperimentKind::GroverSweep, "grover-sweep"},
    {ExperimentKind::ShallowSweep, "shallow-sweep"},
    {ExperimentKind::HaarScaling, "haar-scaling"},
};

template <class T> T get_or(const json &j, const char *key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    return j.at(key).get<T>();
}

unsigned get_qubit_count(const json &j, const char *what) {
    if (!j.contains("n")) {
        throw ValidationError(std::string(what) + ": missing field \"n\"");
    }
    const auto n = j.at("n").get<long long>();
    if (n < 1) {
        throw ValidationError(std::string(what) + ": n must be >= 1");
    }
    if (n > QuantumState::kMaxQubits) {
        throw CapacityError(std::string(what) + ": n = " + std::to_string(n) +
                            " exceeds the capacity ceiling of " +
                            std::to_string(QuantumState::kMaxQubits) + " qubits");
    }
    return static_cast<unsigned>(n);
}

void check_declared_arity(const json &j, unsigned n, const char *what) {
    if (j.contains("n") && j.at("n").get<long long>() != static_cast<long long>(n)) {
        throw ValidationError(std::string(what) + " arity " +
                              std::to_string(j.at("n").get<long long>()) +
                              " does not match n = " + std::to_string(n));
    }
}

std::vector<BitRequirement> bits_from_json(const json &j) {
    std::vector<BitRequirement> out;
    for (const auto &pair : j) {
        if (!pair.is_array() || pair.size() != 2) {
            throw ValidationError("bit constraints must be [qubit, value] pairs");
        }
        out.push_back({pair.at(0).get<Qubit>(), pair.at(1).get<int>()});
    }
    return out;
}

json bits_to_json(const std::vector<BitRequirement> &bits) {
    json out = json::array();
    for (const auto &b : bits) {
        out.push_back({b.qubit, b.value});
    }
    return out;
}

class Collector {
  public:
    template <class F> void guard(const std::string &field, F &&f) {
        try {
            f();
        } catch (const CapacityError &e) {
            add(Diagnostic::Kind::Capacity, field, e.what());
        } catch (const ValidationError &e) {
            add(Diagnostic::Kind::Validation, field, e.what());
        } catch (const DomainError &e) {
            add(Diagnostic::Kind::Validation, field, e.what());
        } catch (const json::exception &e) {
            add(Diagnostic::Kind::Validation, field, e.what());
        }
    }

    void add(Diagnostic::Kind kind, std::string field, std::string message) {
        diags.push_back({kind, std::move(field), std::move(message)});
    }

    std::vector<Diagnostic> diags;
};

bool needs_ensemble(ExperimentKind k) { return k != ExperimentKind::HaarScaling; }
bool needs_observable(ExperimentKind k) { return k != ExperimentKind::Weights; }
bool needs_rule(ExperimentKind k) {
    return k == ExperimentKind::Sector || k == ExperimentKind::GroverSweep ||
           k == ExperimentKind::ShallowSweep || k == ExperimentKind::HaarScaling;
}

/// Shared by validate() and parse_run_config(): fills `cfg` as far as
/// possible and records every problem.
RunConfig parse_collect(const json &doc, Collector &c) {
    RunConfig cfg;
    cfg.document = doc;
    if (!doc.is_object()) {
        c.add(Diagnostic::Kind::Validation, "/", "config must be a JSON object");
        return cfg;
    }

    bool have_kind = false;
    c.guard("/experiment", [&] {
        if (!doc.contains("experiment")) {
            throw ValidationError("missing field \"experiment\"");
        }
        const auto name = doc.at("experiment").get<std::string>();
        for (const auto &e : kExperiments) {
            if (name == e.name) {
                cfg.experiment = e.kind;
                have_kind = true;
                return;
            }
        }
        throw ValidationError("unknown experiment \"" + name + "\"");
    });

    c.guard("/master_seed", [&] { cfg.master_seed = get_or<std::uint64_t>(doc, "master_seed", 0); });
    c.guard("/workers", [&] {
        cfg.workers = get_or<unsigned>(doc, "workers", 1);
        if (cfg.workers == 0) {
            throw ValidationError("workers must be >= 1");
        }
    });
    c.guard("/shots", [&] { cfg.shots = get_or<std::uint64_t>(doc, "shots", 0); });
    c.guard("/seeds", [&] {
        cfg.seeds = get_or<unsigned>(doc, "seeds", 1);
        if (cfg.seeds == 0) {
            throw ValidationError("seeds must be >= 1");
        }
    });
    c.guard("/draw_index", [&] { cfg.draw_index = get_or<std::uint64_t>(doc, "draw_index", 0); });
    c.guard("/k_list", [&] {
        cfg.k_list = get_or<std::vector<std::uint64_t>>(doc, "k_list", kDefaultKList);
        if (std::find(cfg.k_list.begin(), cfg.k_list.end(), 0) != cfg.k_list.end()) {
            throw ValidationError("K values must be >= 1");
        }
    });
    c.guard("/output", [&] {
        if (doc.contains("output")) {
            cfg.output_dir = get_or<std::string>(doc.at("output"), "dir", "out");
        }
    });
    if (!have_kind) {
        return cfg;
    }

    const auto kind = cfg.experiment;
    std::optional<unsigned> n;

    if (needs_ensemble(kind)) {
        c.guard("/ensemble", [&] {
            if (!doc.contains("ensemble")) {
                throw ValidationError("missing field \"ensemble\"");
            }
            cfg.ensemble = ensemble_from_json(doc.at("ensemble"));
            n = ensemble_num_qubits(*cfg.ensemble);
        });
        if (cfg.ensemble) {
            c.guard("/ensemble", [&] {
                if (kind == ExperimentKind::GroverSweep &&
                    !std::holds_alternative<GroverSpec>(*cfg.ensemble)) {
                    throw ValidationError("grover-sweep requires a grover ensemble");
                }
                if (kind == ExperimentKind::ShallowSweep &&
                    !std::holds_alternative<ShallowSpec>(*cfg.ensemble)) {
                    throw ValidationError("shallow-sweep requires a shallow ensemble");
                }
            });
        }
    } else {
        c.guard("/scaling", [&] {
            if (!doc.contains("scaling")) {
                throw ValidationError("missing field \"scaling\"");
            }
            const auto &s = doc.at("scaling");
            cfg.n_list = s.at("n_list").get<std::vector<unsigned>>();
            cfg.draws = get_or<unsigned>(s, "draws", 200);
            if (cfg.n_list.empty()) {
                throw ValidationError("n_list is empty");
            }
            for (unsigned v : cfg.n_list) {
                if (v == 0) {
                    throw ValidationError("n_list entries must be >= 1");
                }
                if (v > QuantumState::kMaxQubits) {
                    throw CapacityError("n_list entry " + std::to_string(v) +
                                        " exceeds the capacity ceiling of " +
                                        std::to_string(QuantumState::kMaxQubits) +
                                        " qubits");
                }
            }
            for (std::size_t i = 1; i < cfg.n_list.size(); ++i) {
                if (cfg.n_list[i] <= cfg.n_list[i - 1]) {
                    throw ValidationError("n_list must be strictly ascending");
                }
            }
            if (cfg.n_list.size() < 4) {
                throw ValidationError("n_list needs at least 4 register sizes, got " +
                                      std::to_string(cfg.n_list.size()));
            }
            if (cfg.draws == 0) {
                throw ValidationError("draws must be >= 1");
            }
            n = cfg.n_list.front();
        });
    }

    if (kind == ExperimentKind::GroverSweep || kind == ExperimentKind::ShallowSweep) {
        const char *key = kind == ExperimentKind::GroverSweep ? "T_list" : "d_list";
        c.guard(std::string("/sweep/") + key, [&] {
            if (!doc.contains("sweep") || !doc.at("sweep").contains(key)) {
                throw ValidationError(std::string("missing field \"sweep.") + key + "\"");
            }
            cfg.sweep_values = doc.at("sweep").at(key).get<std::vector<unsigned>>();
            if (cfg.sweep_values.empty()) {
                throw ValidationError(std::string(key) + " is empty");
            }
        });
    }

    if (!n) {
        return cfg; // component arity cannot be checked without a register size
    }

    c.guard("/observable", [&] {
        if (doc.contains("observable")) {
            cfg.observable = observable_from_json(doc.at("observable"), *n);
        } else if (needs_observable(kind)) {
            throw ValidationError("missing field \"observable\"");
        }
    });
    c.guard("/sector_rule", [&] {
        if (doc.contains("sector_rule")) {
            cfg.rule = sector_rule_from_json(doc.at("sector_rule"));
            cfg.rule->validate(*n);
        } else if (needs_rule(kind)) {
            throw ValidationError("missing field \"sector_rule\"");
        }
    });
    c.guard("/predicate", [&] {
        if (doc.contains("predicate")) {
            cfg.predicate = predicate_from_json(doc.at("predicate"), *n);
        } else if (cfg.ensemble) {
            if (const auto *g = std::get_if<GroverSpec>(&*cfg.ensemble)) {
                cfg.predicate = g->predicate;
            }
        }
    });
    return cfg;
}

} // namespace

const char *experiment_name(ExperimentKind kind) noexcept {
    for (const auto &e : kExperiments) {
        if (e.kind == kind) {
            return e.name;
        }
    }
    return "?";
}

std::string to_string(const Diagnostic &d) {
    return std::string(d.kind == Diagnostic::Kind::Capacity ? "capacity" : "invalid") +
           " " + d.field + ": " + d.message;
}

// ---------------------------------------------------------------------------
// Component serialisers

json predicate_to_json(const Predicate &p) {
    json j{{"kind", p.kind_name()}, {"n", p.num_qubits()}};
    std::visit(
        [&](const auto &r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, Predicate::BitConstraint>) {
                j["constraints"] = bits_to_json(r.bits);
            } else if constexpr (std::is_same_v<R, Predicate::Parity>) {
                j["qubits"] = r.qubits;
                j["parity"] = r.required_parity;
            } else if constexpr (std::is_same_v<R, Predicate::SectorParity>) {
                j["constraints"] = bits_to_json(r.bits);
                j["qubits"] = r.parity_qubits;
                j["parity"] = r.required_parity;
            } else {
                json iv = json::array();
                for (const auto &[lo, hi] : r.intervals) {
                    iv.push_back({lo, hi});
                }
                j["intervals"] = iv;
            }
        },
        p.rule());
    return j;
}

Predicate predicate_from_json(const json &j, unsigned num_qubits) {
    check_declared_arity(j, num_qubits, "predicate");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "bits") {
        return Predicate::bit_constraint(num_qubits, bits_from_json(j.at("constraints")));
    }
    if (kind == "parity") {
        return Predicate::parity_rule(num_qubits, j.at("qubits").get<std::vector<Qubit>>(),
                                      get_or<int>(j, "parity", 0));
    }
    if (kind == "sector_parity") {
        return Predicate::sector_parity(num_qubits, bits_from_json(j.at("constraints")),
                                        j.at("qubits").get<std::vector<Qubit>>(),
                                        get_or<int>(j, "parity", 0));
    }
    if (kind == "intervals") {
        std::vector<std::pair<BasisIndex, BasisIndex>> iv;
        for (const auto &pair : j.at("intervals")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw ValidationError("intervals must be [first, last] pairs");
            }
            iv.emplace_back(pair.at(0).get<BasisIndex>(), pair.at(1).get<BasisIndex>());
        }
        return Predicate::interval_union(num_qubits, std::move(iv));
    }
    throw ValidationError("unknown predicate kind \"" + kind + "\"");
}

json observable_to_json(const DiagonalObservable &obs) {
    json terms = json::array();
    for (const auto &t : obs.terms()) {
        terms.push_back({{"support", t.support}, {"coefficient", t.coefficient}});
    }
    return {{"n", obs.num_qubits()}, {"terms", terms}};
}

DiagonalObservable observable_from_json(const json &j, unsigned num_qubits) {
    check_declared_arity(j, num_qubits, "observable");
    std::vector<ZString> terms;
    for (const auto &t : j.at("terms")) {
        terms.push_back({t.at("support").get<std::vector<Qubit>>(),
                         get_or<double>(t, "coefficient", 1.0)});
    }
    return DiagonalObservable(num_qubits, std::move(terms));
}

json sector_rule_to_json(const SectorRule &rule) {
    if (rule.kind() == SectorRule::Kind::SingleQubit) {
        return {{"kind", "single_qubit"}, {"qubit", rule.qubits().front()}};
    }
    return {{"kind", "parity"}, {"qubits", rule.qubits()}};
}

SectorRule sector_rule_from_json(const json &j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "single_qubit") {
        return SectorRule::single_qubit(j.at("qubit").get<Qubit>());
    }
    if (kind == "parity") {
        return SectorRule::parity_subset(j.at("qubits").get<std::vector<Qubit>>());
    }
    throw ValidationError("unknown sector rule kind \"" + kind + "\"");
}

json ensemble_to_json(const EnsembleSpec &spec) {
    return std::visit(
        [](const auto &s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, UniformSpec>) {
                return {{"kind", "uniform"}, {"n", s.num_qubits}};
            } else if constexpr (std::is_same_v<S, HaarSpec>) {
                return {{"kind", "haar"}, {"n", s.num_qubits}, {"seed", s.seed}};
            } else if constexpr (std::is_same_v<S, GroverSpec>) {
                return {{"kind", "grover"},
                        {"n", s.num_qubits},
                        {"T", s.iterations},
                        {"predicate", predicate_to_json(s.predicate)},
                        {"mixing_set", s.mixing_set}};
            } else {
                json bias = json::array();
                for (const auto &b : s.bias_angles) {
                    bias.push_back({b.qubit, b.theta});
                }
                json edges = json::array();
                for (const auto &e : s.edges) {
                    edges.push_back({e.control, e.target,
                                     e.kind == EntanglerKind::CNOT ? "cnot" : "cz"});
                }
                json j{{"kind", "shallow"},
                       {"n", s.num_qubits},
                       {"hadamard", s.hadamard_set},
                       {"bias", bias},
                       {"x", s.x_set},
                       {"edges", edges},
                       {"depth", s.depth},
                       {"bias_in_layers", s.bias_in_layers}};
                if (s.randomization_seed) {
                    j["randomization_seed"] = *s.randomization_seed;
                }
                return j;
            }
        },
        spec);
}

EnsembleSpec ensemble_from_json(const json &j) {
    const auto kind = j.at("kind").get<std::string>();
    const unsigned n = get_qubit_count(j, "ensemble");
    if (kind == "uniform") {
        return UniformSpec{n};
    }
    if (kind == "haar") {
        return HaarSpec{n, get_or<std::uint64_t>(j, "seed", 0)};
    }
    if (kind == "grover") {
        if (!j.contains("predicate")) {
            throw ValidationError("grover ensemble: missing field \"predicate\"");
        }
        GroverSpec g{n, predicate_from_json(j.at("predicate"), n),
                     get_or<unsigned>(j, "T", 1),
                     get_or<std::vector<Qubit>>(j, "mixing_set", {})};
        EnsembleSpec spec = g;
        validate_ensemble(spec);
        return spec;
    }
    if (kind == "shallow") {
        ShallowSpec s{.num_qubits = n, .hadamard_set = {}, .bias_angles = {}, .x_set = {},
                      .edges = {}, .depth = 0, .bias_in_layers = true,
                      .randomization_seed = std::nullopt};
        if (get_or<std::string>(j, "template", "") == "default") {
            s = ShallowSpec::default_template(n);
        } else if (j.contains("template")) {
            throw ValidationError("unknown shallow template \"" +
                                  j.at("template").get<std::string>() + "\"");
        }
        s.hadamard_set = get_or(j, "hadamard", s.hadamard_set);
        s.x_set = get_or(j, "x", s.x_set);
        if (j.contains("bias")) {
            s.bias_angles.clear();
            for (const auto &b : j.at("bias")) {
                s.bias_angles.push_back({b.at(0).get<Qubit>(), b.at(1).get<double>()});
            }
        }
        if (j.contains("edges")) {
            s.edges.clear();
            for (const auto &e : j.at("edges")) {
                const auto gate = e.size() > 2 ? e.at(2).get<std::string>() : "cnot";
                if (gate != "cnot" && gate != "cz") {
                    throw ValidationError("edge gate must be \"cnot\" or \"cz\"");
                }
                s.edges.push_back({e.at(0).get<Qubit>(), e.at(1).get<Qubit>(),
                                   gate == "cnot" ? EntanglerKind::CNOT : EntanglerKind::CZ});
            }
        }
        s.depth = get_or(j, "depth", s.depth);
        s.bias_in_layers = get_or(j, "bias_in_layers", s.bias_in_layers);
        if (j.contains("randomization_seed") && !j.at("randomization_seed").is_null()) {
            s.randomization_seed = j.at("randomization_seed").get<std::uint64_t>();
        }
        EnsembleSpec spec = s;
        validate_ensemble(spec);
        return spec;
    }
    throw ValidationError("unknown ensemble kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------

std::vector<Diagnostic> validate(const json &document) {
    Collector c;
    parse_collect(document, c);
    return c.diags;
}

RunConfig parse_run_config(const json &document) {
    Collector c;
    auto cfg = parse_collect(document, c);
    if (c.diags.empty()) {
        return cfg;
    }
    for (const auto &d : c.diags) {
        if (d.kind == Diagnostic::Kind::Capacity) {
            throw CapacityError(to_string(d));
        }
    }
    throw ValidationError(to_string(c.diags.front()));
}

json load_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ValidationError("config is not valid JSON: " + std::string(e.what()));
    }
}

json apply_overrides(json document, const RunOverrides &overrides) {
    if (!document.is_object()) {
        return document;
    }
    if (overrides.master_seed) {
        document["master_seed"] = *overrides.master_seed;
    }
    if (overrides.workers) {
        document["workers"] = *overrides.workers;
    }
    if (overrides.output_dir) {
        document["output"]["dir"] = overrides.output_dir->string();
    }
    return document;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::vector<std::uint64_t> sweep_k_values(const std::vector<std::uint64_t> &user) {
    std::set<std::uint64_t> ks(user.begin(), user.end());
    ks.insert(kDefaultKList.begin(), kDefaultKList.end());
    return {ks.begin(), ks.end()};
}

std::string fmt(double x) { return format_double(x); }

} // namespace

RunOutcome run(const RunConfig &config) {
    const OutputMeta meta{config.document, config.master_seed};
    RunOutcome out;
    auto emit = [&](const char *name, const std::string &body) {
        const auto path = config.output_dir / name;
        write_file_atomic(path, body);
        out.files.push_back(path);
    };
    std::ostringstream summary;

    switch (config.experiment) {
    case ExperimentKind::Weights: {
        const auto draw = prepare(*config.ensemble, config.draw_index, config.master_seed);
        const auto q = basis_weights(draw.state);
        emit("weights.csv", weights_csv(meta, q, config.predicate, config.rule));
        const auto curve = concentration_curve(q, {1});
        summary << "weights: " << q.size() << " rows, M(1) = " << fmt(curve.masses[0]);
        break;
    }
    case ExperimentKind::Cumulative: {
        const auto draw = prepare(*config.ensemble, config.draw_index, config.master_seed);
        const auto trace =
            cumulative_trace(draw.state, *config.observable, config.rule, config.predicate);
        emit("cumulative.csv", cumulative_csv(meta, trace));
        summary << "cumulative: S(final) = <A> = " << fmt(trace.final_sum())
                << ", max |S(i)| = " << fmt(trace.max_abs_running_sum());
        break;
    }
    case ExperimentKind::Sector: {
        const auto draw = prepare(*config.ensemble, config.draw_index, config.master_seed);
        const auto exact = exact_sector_estimates(draw.state, *config.observable, *config.rule);
        json body{{"meta", meta.to_json()}, {"exact", estimates_to_json(exact)}};
        summary << "sector: pi_up = " << fmt(exact.pi_up) << ", C_E = " << fmt(exact.c_e);
        if (config.shots > 0) {
            const auto q = basis_weights(draw.state);
            json runs = json::array();
            double mean_c = 0.0;
            double mean_se = 0.0;
            for (unsigned s = 0; s < config.seeds; ++s) {
                const auto shots =
                    sample_shots(q, config.shots, derive_seed(config.master_seed, 0x5EC7, s));
                const auto e = shot_sector_estimates(shots, *config.observable, *config.rule);
                mean_c += e.c_e / config.seeds;
                mean_se += e.std_errors.c_e / config.seeds;
                runs.push_back(estimates_to_json(e));
            }
            body["shots"] = runs;
            summary << " (exact); shot C_E = " << fmt(mean_c) << " +/- " << fmt(mean_se)
                    << " [" << config.shots << " shots x " << config.seeds << " seeds]";
        } else {
            summary << " (exact)";
        }
        emit("sector.json", dump_json(body));
        break;
    }
    case ExperimentKind::GroverSweep: {
        const auto &g = std::get<GroverSpec>(*config.ensemble);
        GroverSweepConfig sc{g.num_qubits,      g.predicate,   config.sweep_values,
                             g.mixing_set,      *config.observable, *config.rule,
                             config.shots,      config.seeds,  sweep_k_values(config.k_list),
                             config.master_seed, config.workers};
        const auto sweep = grover_sweep(sc);
        emit("sweep.csv", sweep_csv(meta, sweep));
        emit("sweep.json", dump_json(sweep_to_json(meta, sweep)));
        const auto &peak = sweep.peak_contrast();
        summary << "grover-sweep: peak |C_E| = " << fmt(std::abs(peak.exact.c_e))
                << " at T = " << peak.parameter << ", P_G = " << fmt(*peak.good_set_mass);
        break;
    }
    case ExperimentKind::ShallowSweep: {
        ShallowSweepConfig sc{std::get<ShallowSpec>(*config.ensemble),
                              config.sweep_values,
                              *config.observable,
                              *config.rule,
                              config.shots,
                              config.seeds,
                              sweep_k_values(config.k_list),
                              config.master_seed,
                              config.workers};
        const auto sweep = shallow_sweep(sc);
        emit("sweep.csv", sweep_csv(meta, sweep));
        emit("sweep.json", dump_json(sweep_to_json(meta, sweep)));
        const auto &first = sweep.points.front();
        const auto &last = sweep.points.back();
        summary << "shallow-sweep: M(1) " << fmt(first.concentration.mass(1)) << " -> "
                << fmt(last.concentration.mass(1)) << " over d = " << first.parameter
                << ".." << last.parameter
                << (sweep.sector_saturated ? ", sector saturated" : "");
        break;
    }
    case ExperimentKind::HaarScaling: {
        HaarScalingConfig hc{config.n_list, *config.observable, *config.rule,
                             config.draws,  config.master_seed, config.workers};
        const auto scaling = haar_scaling_study(hc);
        emit("scaling.csv", scaling_csv(meta, scaling));
        emit("scaling.json", dump_json(scaling_to_json(meta, scaling)));
        summary << "haar-scaling: slope of log2 median |C_E| vs n = " << fmt(scaling.slope);
        if (scaling.degenerate) {
            summary << " (degenerate observable, not fitted)";
        }
        break;
    }
    }
    out.summary = summary.str();
    return out;
}

} // namespace qens
