#pragma once

/// @file report.hpp
/// @brief CSV / JSON output of run metrics and plot-ready data.
///
/// Numbers are written in shortest round-trip form so identical runs give
/// byte-identical files.

#include <cucumber/csv.hpp>
#include <cucumber/simulator.hpp>
#include <cucumber/time.hpp>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>

namespace cucumber::report {

namespace detail {

inline std::string opt(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

} // namespace detail

inline std::string metrics_csv_header() {
    return "scenario,policy,alpha,fingerprint,requests_total,accepted,acceptance_rate,ree_energy_j,grid_energy_j,"
           "ree_coverage,deadline_misses,unfinished,uncapped_jobs\n";
}

inline std::string metrics_csv_row(const RunMetrics& m) {
    std::string row;
    row += m.scenario + ',' + m.policy + ',' + csv::format_double(m.alpha) + ',' + m.fingerprint + ',';
    row += std::to_string(m.requests_total) + ',' + std::to_string(m.accepted) + ',';
    row += detail::opt(m.acceptance_rate) + ',' + csv::format_double(m.ree_energy) + ',' +
           csv::format_double(m.grid_energy) + ',' + detail::opt(m.ree_coverage) + ',';
    row += std::to_string(m.deadline_misses) + ',' + std::to_string(m.unfinished) + ',' +
           std::to_string(m.uncapped_jobs) + '\n';
    return row;
}

inline std::string metrics_csv(std::span<const RunMetrics> runs) {
    std::string out = metrics_csv_header();
    for (const auto& m : runs) {
        out += metrics_csv_row(m);
    }
    return out;
}

inline nlohmann::ordered_json metrics_json(const RunMetrics& m, bool include_jobs = true) {
    nlohmann::ordered_json j;
    j["scenario"] = m.scenario;
    j["policy"] = m.policy;
    j["alpha"] = m.alpha;
    j["fingerprint"] = m.fingerprint;
    j["requests_total"] = m.requests_total;
    j["accepted"] = m.accepted;
    j["acceptance_rate"] = detail::opt_json(m.acceptance_rate);
    j["ree_energy_j"] = m.ree_energy;
    j["grid_energy_j"] = m.grid_energy;
    j["ree_coverage"] = detail::opt_json(m.ree_coverage);
    j["deadline_misses"] = m.deadline_misses;
    j["unfinished"] = m.unfinished;
    j["uncapped_jobs"] = m.uncapped_jobs;
    j["warnings"] = m.warnings;
    if (include_jobs) {
        auto& jobs = j["jobs"] = nlohmann::ordered_json::array();
        for (const auto& r : m.jobs) {
            nlohmann::ordered_json jr;
            jr["id"] = r.id;
            jr["arrival"] = r.arrival;
            jr["size"] = r.size;
            jr["deadline"] = r.deadline;
            jr["accepted"] = r.accepted;
            if (!r.accepted) {
                jr["reason"] = r.reject_reason;
            }
            jr["start"] = detail::opt_json(r.start);
            jr["completion"] = detail::opt_json(r.completion);
            jr["late"] = r.late;
            jr["uncapped"] = r.uncapped;
            jr["ree_energy_j"] = r.ree_joules;
            jr["grid_energy_j"] = r.grid_joules;
            jobs.push_back(std::move(jr));
        }
    }
    return j;
}

/// Accepted requests per hour of day (UTC) of their arrival.
inline std::array<std::size_t, 24> hourly_acceptance(const RunMetrics& m) {
    std::array<std::size_t, 24> hours{};
    for (const auto& r : m.jobs) {
        if (!r.accepted) {
            continue;
        }
        const auto t = static_cast<std::int64_t>(std::floor(r.arrival));
        const auto since_midnight = t - floor_to_day(t);
        hours[static_cast<std::size_t>(since_midnight / 3600) % 24] += 1;
    }
    return hours;
}

inline std::string hourly_acceptance_csv(const RunMetrics& m) {
    std::string out = "hour,accepted\n";
    const auto hours = hourly_acceptance(m);
    for (std::size_t h = 0; h < hours.size(); ++h) {
        out += std::to_string(h) + ',' + std::to_string(hours[h]) + '\n';
    }
    return out;
}

inline std::string power_trace_csv(const RunMetrics& m) {
    std::string out = "time,production_w,baseload_w,job_w,job_grid_w\n";
    for (const auto& s : m.trace) {
        out += format_iso8601(s.time) + ',' + csv::format_double(s.production) + ',' +
               csv::format_double(s.baseload_power) + ',' + csv::format_double(s.job_power) + ',' +
               csv::format_double(s.job_grid_power) + '\n';
    }
    return out;
}

/// Writes `hourly_acceptance.csv` and `power_trace.csv` under `dir`.
inline void write_plot_data(const std::filesystem::path& dir, const RunMetrics& m) {
    std::filesystem::create_directories(dir);
    csv::write_file((dir / "hourly_acceptance.csv").string(), hourly_acceptance_csv(m));
    csv::write_file((dir / "power_trace.csv").string(), power_trace_csv(m));
}

/// Fixed-width table for terminals.
inline std::string summary_table(std::span<const RunMetrics> runs) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %-18s %8s %8s %9s %12s %12s %7s\n", "scenario", "policy", "requests",
                  "accepted", "accept%", "ree_kwh", "grid_kwh", "misses");
    out += line;
    for (const auto& m : runs) {
        const auto label = m.policy == "cucumber" ? "cucumber(" + csv::format_double(m.alpha) + ")" : m.policy;
        std::snprintf(line, sizeof line, "%-28s %-18s %8zu %8zu %9.2f %12.4f %12.4f %7zu\n", m.scenario.c_str(),
                      label.c_str(), m.requests_total, m.accepted, 100.0 * m.acceptance_rate.value_or(0.0),
                      m.ree_energy / 3.6e6, m.grid_energy / 3.6e6, m.deadline_misses);
        out += line;
    }
    return out;
}

} // namespace cucumber::report
