#include "qens/report.hpp"

#include "qens/errors.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

namespace qens {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    // Shortest representation that round-trips; never more than 17
    // significant digits.
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    (void)ec;
    return std::string(buf.data(), end);
}

std::string config_hash(const json &document) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : document.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf.data());
}

std::string OutputMeta::csv_header() const {
    std::ostringstream os;
    os << "# tool: " << kToolName << ' ' << kToolVersion << '\n';
    os << "# config_hash: fnv1a64:" << config_hash(config) << '\n';
    os << "# master_seed: " << master_seed << '\n';
    os << "# bit_order: " << kBitOrderConvention << '\n';
    os << "# config: " << config.dump() << '\n';

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::array<char, 32> ts{};
    std::strftime(ts.data(), ts.size(), "%Y-%m-%dT%H:%M:%SZ", &utc);
    os << kTimestampPrefix << ts.data() << '\n';
    return os.str();
}

json OutputMeta::to_json() const {
    return {{"tool", kToolName},
            {"version", kToolVersion},
            {"config_hash", std::string("fnv1a64:") + config_hash(config)},
            {"master_seed", master_seed},
            {"bit_order", kBitOrderConvention},
            {"config", config}};
}

void write_file_atomic(const std::filesystem::path &path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() +
                          ": " + ec.message());
        }
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

std::string dump_json(const json &j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

std::string weights_csv(const OutputMeta &meta, std::span<const double> weights,
                        const std::optional<Predicate> &good_set,
                        const std::optional<SectorRule> &rule) {
    std::ostringstream os;
    os << meta.csv_header() << "z,q,in_good_set,sector\n";
    for (std::size_t z = 0; z < weights.size(); ++z) {
        os << z << ',' << format_double(weights[z]) << ','
           << (good_set && good_set->contains(z) ? 1 : 0) << ','
           << (rule ? rule->label(z) : 0) << '\n';
    }
    return os.str();
}

std::string cumulative_csv(const OutputMeta &meta, const CumulativeTrace &trace) {
    std::ostringstream os;
    os << meta.csv_header() << "i,z,a_z,contribution,S\n";
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
        const auto &e = trace.entries[i];
        os << i << ',' << e.z << ',' << format_double(e.a_z) << ','
           << format_double(e.contribution) << ',' << format_double(e.running_sum)
           << '\n';
    }
    return os.str();
}

std::string sweep_csv(const OutputMeta &meta, const SweepResult &sweep) {
    std::ostringstream os;
    os << meta.csv_header()
       << "param,pi_up,pi_up_err,pi_down,w_up,w_up_err,w_down,w_down_err,c_e,c_e_err,"
          "M1,M8,M32,M64\n";
    for (const auto &p : sweep.points) {
        const SectorEstimates &e = p.shots ? p.shots->mean : p.exact;
        const EstimateErrors err = p.shots ? p.shots->reported_errors() : EstimateErrors{};
        os << format_double(p.parameter) << ',' << format_double(e.pi_up) << ','
           << format_double(err.pi_up) << ',' << format_double(e.pi_down) << ','
           << format_double(e.w_up) << ',' << format_double(err.w_up) << ','
           << format_double(e.w_down) << ',' << format_double(err.w_down) << ','
           << format_double(e.c_e) << ',' << format_double(err.c_e);
        for (std::uint64_t k : {1, 8, 32, 64}) {
            const double m = p.concentration.mass(k);
            os << ',' << format_double(m);
        }
        os << '\n';
    }
    return os.str();
}

std::string scaling_csv(const OutputMeta &meta, const HaarScalingResult &scaling) {
    std::ostringstream os;
    os << meta.csv_header() << "n,median_abs_ce,se,draws\n";
    for (const auto &p : scaling.points) {
        os << p.num_qubits << ',' << format_double(p.median_abs_ce) << ','
           << format_double(p.median_se) << ',' << p.draws << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------

namespace {

json errors_to_json(const EstimateErrors &e) {
    return {{"pi_up", e.pi_up}, {"pi_down", e.pi_down}, {"w_up", e.w_up},
            {"w_down", e.w_down}, {"c_e", e.c_e},       {"a_avg", e.a_avg}};
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace

json estimates_to_json(const SectorEstimates &e) {
    json j{{"mode", e.mode == EstimateMode::Exact ? "exact" : "shots"},
           {"pi_up", e.pi_up},
           {"pi_down", e.pi_down},
           {"w_up", e.w_up},
           {"w_down", e.w_down},
           {"c_e", e.c_e},
           {"a_avg", e.a_avg}};
    if (e.mode == EstimateMode::Shots) {
        j["n_shots"] = e.n_shots;
        j["std_errors"] = errors_to_json(e.std_errors);
    }
    return j;
}

json sweep_to_json(const OutputMeta &meta, const SweepResult &sweep) {
    json points = json::array();
    for (const auto &p : sweep.points) {
        json pj{{"param", p.parameter}, {"exact", estimates_to_json(p.exact)}};
        json m = json::object();
        for (std::size_t i = 0; i < p.concentration.k_values.size(); ++i) {
            m[std::to_string(p.concentration.k_values[i])] = p.concentration.masses[i];
        }
        pj["M"] = m;
        if (p.good_set_mass) {
            pj["good_set_mass"] = *p.good_set_mass;
        }
        if (p.shots) {
            pj["shots"] = {{"mean", estimates_to_json(p.shots->mean)},
                           {"std_over_seeds", errors_to_json(p.shots->std_over_seeds)},
                           {"sem_over_seeds", errors_to_json(p.shots->sem)},
                           {"mean_shot_se", errors_to_json(p.shots->mean_shot_se)},
                           {"seeds", p.shots->seeds},
                           {"shots_per_seed", p.shots->shots_per_seed}};
        }
        points.push_back(std::move(pj));
    }
    return {{"meta", meta.to_json()},
            {"parameter", sweep.parameter_name},
            {"shots", sweep.shots},
            {"seeds", sweep.seeds},
            {"k_values", sweep.k_values},
            {"sector_saturated", sweep.sector_saturated},
            {"csv_err_convention",
             "std over seeds when seeds > 1, otherwise single-run shot standard error"},
            {"points", std::move(points)}};
}

json scaling_to_json(const OutputMeta &meta, const HaarScalingResult &scaling) {
    json points = json::array();
    for (const auto &p : scaling.points) {
        points.push_back({{"n", p.num_qubits},
                          {"median_abs_ce", p.median_abs_ce},
                          {"se", p.median_se},
                          {"draws", p.draws}});
    }
    return {{"meta", meta.to_json()},
            {"slope", finite_or_null(scaling.slope)},
            {"intercept", finite_or_null(scaling.intercept)},
            {"degenerate", scaling.degenerate},
            {"warnings", scaling.warnings},
            {"points", std::move(points)}};
}

} // namespace qens
