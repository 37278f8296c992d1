#pragma once

/// @file forecast_io.hpp
/// @brief Forecast and workload trace CSV formats.
///
/// Forecast CSV: header row, first column `timestamp` (ISO-8601 UTC), then
/// either `p<percent>` columns (quantiles), `m<k>` columns (ensemble members)
/// or a single `value` column (point). Rows are uniformly spaced; the spacing
/// is the grid step.
///
/// Workload CSV: header `id,arrival,size,deadline`; times as ISO-8601 UTC or
/// seconds since the epoch, size as positive capacity-seconds.

#include <cucumber/admission.hpp>
#include <cucumber/csv.hpp>
#include <cucumber/forecast.hpp>
#include <cucumber/time.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

namespace cucumber {

enum class RepresentationHint { any, ensemble, quantiles, point };

namespace detail {

enum class ColumnKind { quantile, member, value };

struct ForecastColumn {
    ColumnKind kind;
    double key; ///< level for quantiles, index for members
};

inline ForecastColumn classify_column(std::string_view name, const std::string& path, std::size_t col) {
    if (name == "value") {
        return {ColumnKind::value, 0};
    }
    if (name.size() > 1 && (name[0] == 'p' || name[0] == 'm')) {
        auto num = csv::parse_double(name.substr(1));
        if (num) {
            if (name[0] == 'p') {
                const double level = *num / 100.0;
                if (!(level > 0.0 && level < 1.0)) {
                    throw ParseError(path, 1, col, "quantile column '" + std::string(name) + "' outside (0, 100)");
                }
                return {ColumnKind::quantile, level};
            }
            if (*num >= 0 && std::floor(*num) == *num) {
                return {ColumnKind::member, *num};
            }
        }
    }
    throw ParseError(path, 1, col, "unrecognised column '" + std::string(name) + "' (expected p<level>, m<k> or value)");
}

inline std::int64_t parse_time_field(std::string_view field, const std::string& path, std::size_t row,
                                     std::size_t col) {
    if (auto t = parse_iso8601(field)) {
        return *t;
    }
    throw ParseError(path, row, col, "invalid ISO-8601 timestamp '" + std::string(field) + "'");
}

inline Seconds parse_trace_time(std::string_view field, const std::string& path, std::size_t row, std::size_t col) {
    if (auto t = parse_iso8601(field)) {
        return static_cast<Seconds>(*t);
    }
    if (auto v = csv::parse_double(field); v && std::isfinite(*v)) {
        return *v;
    }
    throw ParseError(path, row, col, "invalid time '" + std::string(field) + "'");
}

inline std::string format_trace_time(Seconds t) {
    if (std::floor(t) == t && std::abs(t) < 1e15) {
        return format_iso8601(static_cast<std::int64_t>(t));
    }
    return csv::format_double(t);
}

inline std::string format_percent(double level) {
    const double pct = std::round(level * 100.0 * 1e9) / 1e9;
    return csv::format_double(pct);
}

} // namespace detail

/// Reads a forecast CSV. `step_hint` supplies the grid step for single-row
/// files, where it cannot be inferred.
template <SeriesUnit U>
ProbabilisticSeries<U> ingest_forecast_csv(const std::string& path, RepresentationHint hint = RepresentationHint::any,
                                           std::optional<std::int64_t> step_hint = std::nullopt) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) {
        throw ParseError(path, std::nullopt, std::nullopt, "empty file");
    }
    const auto header = csv::split(lines[0].text);
    if (header.empty() || header[0] != "timestamp") {
        throw ParseError(path, lines[0].number, 1, "first column must be 'timestamp'");
    }
    if (header.size() < 2) {
        throw ParseError(path, lines[0].number, std::nullopt, "no value columns");
    }
    std::vector<detail::ForecastColumn> cols;
    for (std::size_t c = 1; c < header.size(); ++c) {
        cols.push_back(detail::classify_column(header[c], path, c + 1));
    }
    const auto kind = cols[0].kind;
    if (std::any_of(cols.begin(), cols.end(), [&](const auto& c) { return c.kind != kind; })) {
        throw ParseError(path, lines[0].number, std::nullopt, "mixed column kinds in header");
    }
    if (kind == detail::ColumnKind::value && cols.size() != 1) {
        throw ParseError(path, lines[0].number, std::nullopt, "point forecasts have exactly one 'value' column");
    }
    const bool hint_ok = hint == RepresentationHint::any ||
                         (hint == RepresentationHint::quantiles && kind == detail::ColumnKind::quantile) ||
                         (hint == RepresentationHint::ensemble && kind == detail::ColumnKind::member) ||
                         (hint == RepresentationHint::point && kind == detail::ColumnKind::value);
    if (!hint_ok) {
        throw ParseError(path, lines[0].number, std::nullopt, "header does not match the expected representation");
    }
    if (lines.size() < 2) {
        throw ParseError(path, std::nullopt, std::nullopt, "no data rows");
    }

    std::vector<std::int64_t> times;
    std::vector<std::vector<double>> columns(cols.size());
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = csv::split(lines[r].text);
        const auto row = lines[r].number;
        if (fields.size() != header.size()) {
            throw ParseError(path, row, std::nullopt,
                             "expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        times.push_back(detail::parse_time_field(fields[0], path, row, 1));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            auto v = csv::parse_double(fields[c + 1]);
            if (!v || !std::isfinite(*v)) {
                throw ParseError(path, row, c + 2, "invalid number '" + std::string(fields[c + 1]) + "'");
            }
            if (*v < 0.0) {
                throw InvariantViolation(r - 1, path + " row " + std::to_string(row) + ": negative value");
            }
            columns[c].push_back(*v);
        }
    }

    std::int64_t step = 0;
    if (times.size() == 1) {
        if (!step_hint) {
            throw ParseError(path, lines[1].number, 1, "cannot infer the step from a single row");
        }
        step = *step_hint;
    } else {
        step = times[1] - times[0];
        if (step <= 0) {
            throw ParseError(path, lines[2].number, 1, "timestamps must increase");
        }
        for (std::size_t i = 2; i < times.size(); ++i) {
            if (times[i] - times[i - 1] != step) {
                throw ParseError(path, lines[i + 1].number, 1, "rows are not uniformly spaced");
            }
        }
    }
    const TimeGrid grid(times[0], step, times.size());

    // Name the offending file row in invariant errors raised by the series.
    auto build = [&](Representation repr) {
        try {
            return ProbabilisticSeries<U>(grid, std::move(repr));
        } catch (const InvariantViolation& e) {
            throw InvariantViolation(e.step(), path + " row " + std::to_string(lines[e.step() + 1].number) + ": " +
                                                   e.what());
        }
    };

    switch (kind) {
    case detail::ColumnKind::value:
        return build(Point{std::move(columns[0])});
    case detail::ColumnKind::member: {
        std::vector<std::size_t> order(cols.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cols[a].key < cols[b].key; });
        Ensemble e;
        for (auto i : order) {
            e.members.push_back(std::move(columns[i]));
        }
        return build(std::move(e));
    }
    case detail::ColumnKind::quantile: {
        std::vector<std::size_t> order(cols.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cols[a].key < cols[b].key; });
        Quantiles q;
        for (auto i : order) {
            q.levels.push_back(cols[i].key);
            q.trajectories.push_back(std::move(columns[i]));
        }
        return build(std::move(q));
    }
    }
    throw ParseError(path, std::nullopt, std::nullopt, "unreachable");
}

/// Reads a point-series CSV (single `value` column).
template <SeriesUnit U>
PointSeries<U> ingest_point_csv(const std::string& path, std::optional<std::int64_t> step_hint = std::nullopt) {
    auto s = ingest_forecast_csv<U>(path, RepresentationHint::point, step_hint);
    return PointSeries<U>(s.grid(), std::get<Point>(s.representation()).values);
}

template <SeriesUnit U>
std::string forecast_csv(const ProbabilisticSeries<U>& series) {
    std::ostringstream os;
    const auto& grid = series.grid();
    std::vector<const std::vector<double>*> cols;
    os << "timestamp";
    std::visit(
        [&](const auto& rep) {
            using T = std::decay_t<decltype(rep)>;
            if constexpr (std::is_same_v<T, Ensemble>) {
                for (std::size_t k = 0; k < rep.members.size(); ++k) {
                    os << ",m" << k;
                    cols.push_back(&rep.members[k]);
                }
            } else if constexpr (std::is_same_v<T, Quantiles>) {
                for (std::size_t j = 0; j < rep.levels.size(); ++j) {
                    os << ",p" << detail::format_percent(rep.levels[j]);
                    cols.push_back(&rep.trajectories[j]);
                }
            } else {
                os << ",value";
                cols.push_back(&rep.values);
            }
        },
        series.representation());
    os << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << format_iso8601(grid.time_at(i));
        for (const auto* c : cols) {
            os << ',' << csv::format_double((*c)[i]);
        }
        os << '\n';
    }
    return os.str();
}

template <SeriesUnit U>
std::string forecast_csv(const PointSeries<U>& series) {
    return forecast_csv(ProbabilisticSeries<U>(series));
}

template <class Series>
void write_forecast_csv(const std::string& path, const Series& series) {
    csv::write_file(path, forecast_csv(series));
}

// Workload traces ------------------------------------------------------------

inline std::vector<WorkloadRequest> read_workloads_csv(const std::string& path) {
    const auto lines = csv::read_lines(path);
    if (lines.empty()) {
        throw ParseError(path, std::nullopt, std::nullopt, "empty file");
    }
    const auto header = csv::split(lines[0].text);
    if (header.size() != 4 || header[0] != "id" || header[1] != "arrival" || header[2] != "size" ||
        header[3] != "deadline") {
        throw ParseError(path, lines[0].number, std::nullopt, "header must be 'id,arrival,size,deadline'");
    }
    std::vector<WorkloadRequest> out;
    std::unordered_set<std::string> ids;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto row = lines[r].number;
        const auto f = csv::split(lines[r].text);
        if (f.size() != 4) {
            throw ParseError(path, row, std::nullopt, "expected 4 fields, got " + std::to_string(f.size()));
        }
        WorkloadRequest req;
        req.id = std::string(f[0]);
        if (req.id.empty()) {
            throw ParseError(path, row, 1, "empty id");
        }
        if (!ids.insert(req.id).second) {
            throw ParseError(path, row, 1, "duplicate id '" + req.id + "'");
        }
        req.arrival = detail::parse_trace_time(f[1], path, row, 2);
        auto size = csv::parse_double(f[2]);
        if (!size || !(*size > 0.0) || !std::isfinite(*size)) {
            throw ParseError(path, row, 3, "size must be a positive number");
        }
        req.size = *size;
        req.deadline = detail::parse_trace_time(f[3], path, row, 4);
        if (!(req.deadline > req.arrival)) {
            throw ParseError(path, row, 4, "deadline must be after arrival");
        }
        out.push_back(std::move(req));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.arrival < b.arrival; });
    return out;
}

inline std::string workloads_csv(const std::vector<WorkloadRequest>& trace) {
    std::ostringstream os;
    os << "id,arrival,size,deadline\n";
    for (const auto& r : trace) {
        os << r.id << ',' << detail::format_trace_time(r.arrival) << ',' << csv::format_double(r.size) << ','
           << detail::format_trace_time(r.deadline) << '\n';
    }
    return os.str();
}

inline void write_workloads_csv(const std::string& path, const std::vector<WorkloadRequest>& trace) {
    csv::write_file(path, workloads_csv(trace));
}

} // namespace cucumber
