// Command-line front end: validate and run experiment configs.
//
//   qens run --config cfg.json [--seed N] [--workers N] [--out-dir DIR]
//   qens validate --config cfg.json
//
// Exit codes: 0 success, 2 validation, 3 capacity, 4 I/O.

#include "qens/config.hpp"
#include "qens/errors.hpp"
#include "qens/observables.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kCapacity = 3, kIo = 4 };

std::optional<unsigned> workers_from_env() {
    if (const char *v = std::getenv("QENS_WORKERS")) {
        try {
            const int w = std::stoi(v);
            if (w > 0) {
                return static_cast<unsigned>(w);
            }
        } catch (const std::exception &) {
        }
        std::cerr << "warning: ignoring invalid QENS_WORKERS=" << v << '\n';
    }
    return std::nullopt;
}

int report_diagnostics(const std::vector<qens::Diagnostic> &diags) {
    bool capacity = false;
    for (const auto &d : diags) {
        std::cerr << "error: " << qens::to_string(d) << '\n';
        capacity = capacity || d.kind == qens::Diagnostic::Kind::Capacity;
    }
    return capacity ? kCapacity : kValidation;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Statevector ensemble-engineering diagnostics.\n"
                 "Basis ordering: " +
                 std::string(qens::kBitOrderConvention)};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_dir;

    auto *run_cmd = app.add_subcommand("run", "Execute an experiment config");
    run_cmd->add_option("-c,--config", config_path, "Path to JSON run config")
        ->required();
    run_cmd->add_option("-s,--seed", seed, "Master seed override");
    run_cmd->add_option("-w,--workers", workers,
                        "Worker threads (default: config, then $QENS_WORKERS)")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("-o,--out-dir", out_dir, "Output directory override");

    auto *validate_cmd = app.add_subcommand("validate", "Check a config without running");
    validate_cmd->add_option("-c,--config", config_path, "Path to JSON run config")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        auto document = qens::load_json_file(config_path);
        qens::RunOverrides overrides;
        overrides.master_seed = seed;
        overrides.workers = workers;
        if (!overrides.workers && !(document.is_object() && document.contains("workers"))) {
            overrides.workers = workers_from_env();
        }
        if (out_dir) {
            overrides.output_dir = *out_dir;
        }
        document = qens::apply_overrides(std::move(document), overrides);

        if (const auto diags = qens::validate(document); !diags.empty()) {
            return report_diagnostics(diags);
        }
        if (validate_cmd->parsed()) {
            std::cout << "ok\n";
            return kOk;
        }
        const auto config = qens::parse_run_config(document);
        const auto outcome = qens::run(config);
        std::cout << outcome.summary << '\n';
        return kOk;
    } catch (const qens::IoError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const qens::CapacityError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCapacity;
    } catch (const qens::ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const qens::DomainError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    }
}
