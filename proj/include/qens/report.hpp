#pragma once

#include "qens/diagnostics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace qens {

inline constexpr const char *kToolName = "qens";
inline constexpr const char *kToolVersion = "0.1.0";
inline constexpr std::string_view kTimestampPrefix = "# generated: ";

/// Locale-independent, 17 significant digits.
std::string format_double(double x);

/// FNV-1a 64-bit over the compact dump of the document, as 16 hex digits.
std::string config_hash(const nlohmann::json &document);

/// Provenance carried by every output file.
struct OutputMeta {
    nlohmann::json config;
    std::uint64_t master_seed = 0;

    /// Comment block for CSV files; the timestamp is the last line.
    std::string csv_header() const;
    nlohmann::json to_json() const;
};

/// Write to `<path>.tmp` then rename over `path`. Throws IoError.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);

std::string weights_csv(const OutputMeta &meta, std::span<const double> weights,
                        const std::optional<Predicate> &good_set,
                        const std::optional<SectorRule> &rule);
std::string cumulative_csv(const OutputMeta &meta, const CumulativeTrace &trace);
std::string sweep_csv(const OutputMeta &meta, const SweepResult &sweep);
std::string scaling_csv(const OutputMeta &meta, const HaarScalingResult &scaling);

nlohmann::json estimates_to_json(const SectorEstimates &e);
nlohmann::json sweep_to_json(const OutputMeta &meta, const SweepResult &sweep);
nlohmann::json scaling_to_json(const OutputMeta &meta, const HaarScalingResult &scaling);

/// Pretty dump with a trailing newline.
std::string dump_json(const nlohmann::json &j);

} // namespace qens
