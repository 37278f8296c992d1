#pragma once

/// @file time.hpp
/// @brief Uniform time grids and ISO-8601 UTC timestamp handling.

#include <cucumber/errors.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace cucumber {

/// Simulation time in seconds since the Unix epoch. Event times may fall
/// between grid points, hence floating point.
using Seconds = double;

inline constexpr Seconds kNever = std::numeric_limits<Seconds>::infinity();

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// A uniform grid of `num_steps` intervals; step i covers
/// [start + i*step, start + (i+1)*step).
class TimeGrid {
public:
    TimeGrid(std::int64_t start, std::int64_t step, std::size_t num_steps)
        : start_(start)
        , step_(step)
        , num_steps_(num_steps) {
        if (step <= 0) {
            throw ConfigError("time grid step must be positive, got " + std::to_string(step));
        }
        if (num_steps == 0) {
            throw ConfigError("time grid must have at least one step");
        }
    }

    [[nodiscard]] std::int64_t start() const noexcept { return start_; }
    [[nodiscard]] std::int64_t step() const noexcept { return step_; }
    [[nodiscard]] std::size_t size() const noexcept { return num_steps_; }
    [[nodiscard]] std::int64_t end() const noexcept {
        return start_ + step_ * static_cast<std::int64_t>(num_steps_);
    }
    [[nodiscard]] std::int64_t time_at(std::size_t i) const noexcept {
        return start_ + step_ * static_cast<std::int64_t>(i);
    }

    /// Index of the step containing `t`, or nullopt when outside the grid.
    [[nodiscard]] std::optional<std::size_t> index_of(Seconds t) const noexcept {
        if (t < static_cast<Seconds>(start_) || t >= static_cast<Seconds>(end())) {
            return std::nullopt;
        }
        auto i = static_cast<std::size_t>(std::floor((t - static_cast<Seconds>(start_)) / static_cast<Seconds>(step_)));
        return i < num_steps_ ? std::optional{i} : std::nullopt;
    }

    /// Same start and step, different length.
    [[nodiscard]] TimeGrid resized(std::size_t num_steps) const { return {start_, step_, num_steps}; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::int64_t start_;
    std::int64_t step_;
    std::size_t num_steps_;
};

inline std::string describe(const TimeGrid& g) {
    return "[start=" + std::to_string(g.start()) + ", step=" + std::to_string(g.step()) +
           ", steps=" + std::to_string(g.size()) + "]";
}

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b, std::string_view what) {
    if (!(a == b)) {
        throw GridMismatch(std::string(what) + ": grids differ " + describe(a) + " vs " + describe(b));
    }
}

// ISO-8601 -------------------------------------------------------------------

/// Parses `YYYY-MM-DDTHH:MM:SS` with an optional trailing `Z` (UTC).
/// Returns nullopt on any malformed input.
inline std::optional<std::int64_t> parse_iso8601(std::string_view text) {
    if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) {
        text.remove_suffix(1);
    }
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (text[i] < '0' || text[i] > '9') {
                return std::nullopt;
            }
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2);
    auto h = digits(11, 2), mi = digits(14, 2), s = digits(17, 2);
    if (!y || !mo || !d || !h || !mi || !s) {
        return std::nullopt;
    }
    using namespace std::chrono;
    year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok() || *h > 23 || *mi > 59 || *s > 59) {
        return std::nullopt;
    }
    auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days_since_epoch) * kSecondsPerDay + *h * 3600 + *mi * 60 + *s;
}

/// `YYYY-MM-DDTHH:MM:SSZ`
inline std::string format_iso8601(std::int64_t t) {
    using namespace std::chrono;
    auto day_count = t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
    auto secs = t - day_count * kSecondsPerDay;
    year_month_day ymd{sys_days{days{day_count}}};
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs % 3600) / 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

/// Compact form used for file names: `YYYYMMDDTHHMMSSZ`.
inline std::string format_iso8601_basic(std::int64_t t) {
    std::string full = format_iso8601(t);
    std::string out;
    for (char c : full) {
        if (c != '-' && c != ':') {
            out.push_back(c);
        }
    }
    return out;
}

/// Start of the UTC day containing `t`.
inline std::int64_t floor_to_day(Seconds t) {
    return static_cast<std::int64_t>(std::floor(t / static_cast<Seconds>(kSecondsPerDay))) * kSecondsPerDay;
}

} // namespace cucumber
