#pragma once

#include "qens/diagnostics.hpp"
#include "qens/ensembles.hpp"
#include "qens/observables.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qens {

using json = nlohmann::json;

enum class ExperimentKind {
    Weights,
    Cumulative,
    Sector,
    GroverSweep,
    ShallowSweep,
    HaarScaling,
};

const char *experiment_name(ExperimentKind kind) noexcept;

/// One problem found in a run configuration. `field` is a JSON pointer-like
/// path ("/ensemble/predicate").
struct Diagnostic {
    enum class Kind { Validation, Capacity };
    Kind kind = Kind::Validation;
    std::string field;
    std::string message;
};

std::string to_string(const Diagnostic &d);

/// Parsed, validated run description. `document` is the effective JSON
/// (overrides applied) and is what every output embeds.
struct RunConfig {
    ExperimentKind experiment = ExperimentKind::Weights;
    std::optional<EnsembleSpec> ensemble;
    std::optional<DiagonalObservable> observable;
    std::optional<SectorRule> rule;
    std::optional<Predicate> predicate;
    std::uint64_t shots = 0;
    unsigned seeds = 1;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> k_list = kDefaultKList;
    std::vector<unsigned> sweep_values; ///< T list or d list
    std::vector<unsigned> n_list;       ///< haar-scaling
    unsigned draws = 200;               ///< haar-scaling
    std::uint64_t draw_index = 0;       ///< single-state experiments
    unsigned workers = 1;
    std::filesystem::path output_dir = "out";
    json document;
};

/// Pure check: empty iff parse_run_config would succeed.
std::vector<Diagnostic> validate(const json &document);

/// Throws CapacityError if any diagnostic is a capacity problem, otherwise
/// ValidationError carrying the first diagnostic.
RunConfig parse_run_config(const json &document);

/// Reads and parses a JSON file. Throws IoError if it cannot be read and
/// ValidationError if it is not JSON.
json load_json_file(const std::filesystem::path &path);

// Component (de)serialisers. The *_from_json functions take the register size
// the component must match and throw ValidationError on malformed input.
json predicate_to_json(const Predicate &p);
Predicate predicate_from_json(const json &j, unsigned num_qubits);
json observable_to_json(const DiagonalObservable &obs);
DiagonalObservable observable_from_json(const json &j, unsigned num_qubits);
json sector_rule_to_json(const SectorRule &rule);
SectorRule sector_rule_from_json(const json &j);
json ensemble_to_json(const EnsembleSpec &spec);
EnsembleSpec ensemble_from_json(const json &j);

struct RunOverrides {
    std::optional<std::uint64_t> master_seed;
    std::optional<unsigned> workers;
    std::optional<std::filesystem::path> output_dir;
};

/// Applies overrides to the document before validation.
json apply_overrides(json document, const RunOverrides &overrides);

struct RunOutcome {
    std::string summary;
    std::vector<std::filesystem::path> files;
};

/// Executes the experiment and writes its outputs atomically into
/// config.output_dir. Throws IoError when files cannot be written.
RunOutcome run(const RunConfig &config);

} // namespace qens
