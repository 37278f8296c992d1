#pragma once

/// @file scenario.hpp
/// @brief Scenario data (workloads, actuals, per-refresh forecasts), synthetic
/// generators for solar sites, baseload and workload traces, and the on-disk
/// scenario directory format.
///
/// Directory layout:
///   manifest.json
///   workloads.csv
///   baseload_actual.csv            (utilization, point)
///   production_actual.csv          (watts, point)
///   baseload_forecast/<ts>.csv     (utilization, one file per refresh)
///   production_forecast/<ts>.csv   (watts, one file per refresh)

#include <cucumber/admission.hpp>
#include <cucumber/forecast.hpp>
#include <cucumber/forecast_io.hpp>
#include <cucumber/random.hpp>
#include <cucumber/time.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cucumber {

struct Scenario {
    std::string name;
    std::vector<WorkloadRequest> workloads;
    LoadSeries baseload_actual;
    std::map<std::int64_t, LoadForecast> baseload_forecasts;
    PowerSeries production_actual;
    std::map<std::int64_t, PowerForecast> production_forecasts;
    /// Length of the arrival window from the start of the actuals.
    std::int64_t run_seconds = 0;

    [[nodiscard]] const TimeGrid& grid() const noexcept { return production_actual.grid(); }
    [[nodiscard]] std::int64_t start() const noexcept { return grid().start(); }
    [[nodiscard]] std::int64_t run_end() const noexcept { return start() + run_seconds; }

    /// Forecast horizon in steps (the shortest over all refreshes).
    [[nodiscard]] std::size_t horizon_steps() const {
        std::size_t h = std::numeric_limits<std::size_t>::max();
        for (const auto& [_, f] : baseload_forecasts) {
            h = std::min(h, f.grid().size());
        }
        for (const auto& [_, f] : production_forecasts) {
            h = std::min(h, f.grid().size());
        }
        return h == std::numeric_limits<std::size_t>::max() ? 0 : h;
    }

    void validate() const {
        require_same_grid(baseload_actual.grid(), production_actual.grid(), "scenario actuals");
        const auto& g = grid();
        if (run_seconds <= 0 || run_end() > g.end()) {
            throw DataError("scenario run window must be positive and covered by the actuals");
        }
        auto check_forecasts = [&](const auto& forecasts, std::string_view role) {
            if (forecasts.empty()) {
                throw ManifestError("scenario has no " + std::string(role) + " forecasts");
            }
            std::optional<std::size_t> horizon;
            for (const auto& [refresh, f] : forecasts) {
                if (f.grid().start() != refresh) {
                    throw GridMismatch(std::string(role) + " forecast keyed " + format_iso8601(refresh) +
                                       " starts at " + format_iso8601(f.grid().start()));
                }
                if (f.grid().step() != g.step()) {
                    throw GridMismatch(std::string(role) + " forecast at " + format_iso8601(refresh) + " has step " +
                                       std::to_string(f.grid().step()) + ", actuals have " +
                                       std::to_string(g.step()));
                }
                if ((refresh - g.start()) % g.step() != 0) {
                    throw GridMismatch(std::string(role) + " forecast at " + format_iso8601(refresh) +
                                       " is not aligned to the actuals grid");
                }
                if (horizon && *horizon != f.grid().size()) {
                    throw GridMismatch(std::string(role) + " forecasts have inconsistent horizons");
                }
                horizon = f.grid().size();
            }
        };
        check_forecasts(baseload_forecasts, "baseload");
        check_forecasts(production_forecasts, "production");
        for (const auto& w : workloads) {
            w.validate();
            if (w.arrival < static_cast<Seconds>(g.start()) || w.arrival >= static_cast<Seconds>(run_end())) {
                throw DataError("request " + w.id + " arrives outside the run window");
            }
        }
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Sites and generators -------------------------------------------------------

struct SiteProfile {
    std::string name;
    double daylight_hours = 12;
    double sunshine_hours = 6;
    double peak_watts = 400;

    void validate() const {
        if (!(daylight_hours >= 0.0 && daylight_hours <= 24.0)) {
            throw InvalidProfile("daylight_hours must lie in [0, 24]");
        }
        if (!(sunshine_hours >= 0.0 && sunshine_hours <= daylight_hours)) {
            throw InvalidProfile("sunshine_hours must lie in [0, daylight_hours]");
        }
        if (!(peak_watts >= 0.0) || !std::isfinite(peak_watts)) {
            throw InvalidProfile("peak_watts must be non-negative");
        }
    }

    /// Clear-sky production at `t`: a half sine between sunrise and sunset
    /// centred on 12:00 UTC.
    [[nodiscard]] double clear_sky(Seconds t) const noexcept {
        if (daylight_hours <= 0.0) {
            return 0.0;
        }
        const double hour = (t - static_cast<Seconds>(floor_to_day(t))) / 3600.0;
        const double sunrise = 12.0 - daylight_hours / 2.0;
        const double phase = (hour - sunrise) / daylight_hours;
        if (phase < 0.0 || phase > 1.0) {
            return 0.0;
        }
        return std::max(0.0, peak_watts * std::sin(std::numbers::pi * phase));
    }
};

inline SiteProfile berlin_like() { return {"berlin-like", 8, 2, 400}; }
inline SiteProfile mexico_city_like() { return {"mexico-city-like", 11, 7, 400}; }
inline SiteProfile cape_town_like() { return {"cape-town-like", 14, 11, 400}; }

inline SiteProfile site_by_name(const std::string& name) {
    for (auto s : {berlin_like(), mexico_city_like(), cape_town_like()}) {
        if (s.name == name) {
            return s;
        }
    }
    throw InvalidProfile("unknown site '" + name + "' (expected berlin-like, mexico-city-like, cape-town-like)");
}

/// 2024-01-15T00:00:00Z
inline constexpr std::int64_t kDefaultScenarioStart = 1705276800;

struct SynthesisGrid {
    std::int64_t start = kDefaultScenarioStart;
    std::int64_t step_seconds = 600;
    std::size_t horizon_steps = 144;

    [[nodiscard]] std::size_t steps_per_day() const { return static_cast<std::size_t>(kSecondsPerDay / step_seconds); }

    /// Actuals span the run plus enough days to cover the last horizon.
    [[nodiscard]] TimeGrid actual_grid(int days) const {
        const auto per_day = steps_per_day();
        const auto pad_days = (horizon_steps + per_day - 1) / per_day;
        return TimeGrid(start, step_seconds, (static_cast<std::size_t>(days) + pad_days) * per_day);
    }

    void validate(int days) const {
        if (days <= 0) {
            throw ConfigError("days must be positive");
        }
        if (step_seconds <= 0 || kSecondsPerDay % step_seconds != 0) {
            throw ConfigError("step_seconds must divide one day");
        }
        if (horizon_steps == 0) {
            throw ConfigError("horizon_steps must be positive");
        }
    }
};

/// Forecast error model for synthetic solar forecasts, as fractions of the
/// clear-sky value. Errors grow linearly with lead time across the horizon.
struct SolarErrorModel {
    double median_bias = 0.0;
    double median_sigma_near = 0.05;
    double median_sigma_far = 0.30;
    double band_near = 0.05;
    double band_far = 0.35;
    double error_correlation = 0.9; ///< AR(1) coefficient along the horizon
};

struct SolarOptions {
    SynthesisGrid grid;
    SolarErrorModel error;
    double cloudy_attenuation_min = 0.05;
    double cloudy_attenuation_max = 0.25;
    double cloud_persistence_hours = 2.0;
    /// Forecast as this many ensemble members instead of p10/p50/p90.
    std::size_t ensemble_members = 0;
};

struct SolarData {
    PowerSeries actual;
    std::map<std::int64_t, PowerForecast> forecasts;
};

namespace detail {

/// Shared AR(1) lead-time error path for one refresh.
inline std::vector<double> ar1_path(Rng& rng, std::size_t n, double rho) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> e(n);
    double prev = normal(rng);
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t i = 0; i < n; ++i) {
        prev = i == 0 ? prev : rho * prev + innovation * normal(rng);
        e[i] = prev;
    }
    return e;
}

/// Members spread around `median` with the p10-p90 half-width `band`, each
/// along its own AR(1) path, clamped to [lo, hi].
inline std::vector<std::vector<double>> ensemble_around(Rng& rng, std::span<const double> median,
                                                        std::span<const double> band, std::size_t members, double rho,
                                                        double lo, std::span<const double> hi) {
    std::vector<std::vector<double>> out(members);
    for (auto& m : out) {
        const auto z = ar1_path(rng, median.size(), rho);
        m.resize(median.size());
        for (std::size_t h = 0; h < median.size(); ++h) {
            m[h] = std::clamp(median[h] + band[h] / 1.2816 * z[h], lo, hi[h]);
        }
    }
    return out;
}

inline double lead_fraction(std::size_t h, std::size_t horizon) {
    return horizon <= 1 ? 0.0 : static_cast<double>(h) / static_cast<double>(horizon - 1);
}

} // namespace detail

/// Clear-sky curve times a two-state (sunny / cloudy) Markov attenuation whose
/// stationary sunny share is sunshine_hours / daylight_hours. Forecasts carry
/// p10/p50/p90 bands around a noisy median, all within [0, clear sky].
inline SolarData synthesize_solar(const SiteProfile& site, int days, std::uint64_t seed,
                                  const SolarOptions& opts = {}) {
    site.validate();
    opts.grid.validate(days);
    if (!(opts.cloudy_attenuation_min >= 0.0 && opts.cloudy_attenuation_min <= opts.cloudy_attenuation_max &&
          opts.cloudy_attenuation_max <= 1.0)) {
        throw InvalidProfile("cloudy attenuation bounds must satisfy 0 <= min <= max <= 1");
    }
    const TimeGrid grid = opts.grid.actual_grid(days);
    const double sunny_share = site.daylight_hours > 0.0 ? site.sunshine_hours / site.daylight_hours : 0.0;
    const double switch_rate = std::min(
        1.0, static_cast<double>(opts.grid.step_seconds) / (std::max(1e-9, opts.cloud_persistence_hours) * 3600.0));
    const double p_leave_sunny = switch_rate * (1.0 - sunny_share);
    const double p_leave_cloudy = switch_rate * sunny_share;

    Rng weather = make_rng(seed, "solar-weather");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> cloudy(opts.cloudy_attenuation_min, opts.cloudy_attenuation_max);

    std::vector<double> clear(grid.size()), actual(grid.size());
    bool sunny = unit(weather) < sunny_share;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0) {
            const double u = unit(weather);
            sunny = sunny ? !(u < p_leave_sunny) : (u < p_leave_cloudy);
        }
        const double attenuation = sunny ? 1.0 : cloudy(weather);
        clear[i] = site.clear_sky(static_cast<Seconds>(grid.time_at(i)));
        actual[i] = std::clamp(clear[i] * attenuation, 0.0, site.peak_watts);
    }

    SolarData out{PowerSeries(grid, actual), {}};
    const auto refreshes = static_cast<std::size_t>(days) * opts.grid.steps_per_day();
    const auto horizon = opts.grid.horizon_steps;
    const auto& err = opts.error;
    for (std::size_t r = 0; r < refreshes; ++r) {
        Rng rng = make_rng(seed, "solar-forecast", r);
        const auto e = detail::ar1_path(rng, horizon, err.error_correlation);
        std::vector<double> p10(horizon), p50(horizon), p90(horizon), bands(horizon), ceiling(horizon);
        for (std::size_t h = 0; h < horizon; ++h) {
            const std::size_t j = r + h;
            const double c = clear[j];
            const double lead = detail::lead_fraction(h, horizon);
            const double sigma = err.median_sigma_near + (err.median_sigma_far - err.median_sigma_near) * lead;
            const double band = (err.band_near + (err.band_far - err.band_near) * lead) * c;
            const double median = std::clamp(actual[j] + (err.median_bias + sigma * e[h]) * c, 0.0, c);
            p50[h] = median;
            p10[h] = std::max(0.0, median - band);
            p90[h] = std::min(c, median + band);
            bands[h] = band;
            ceiling[h] = c;
        }
        const TimeGrid fg(grid.time_at(r), grid.step(), horizon);
        if (opts.ensemble_members > 0) {
            out.forecasts.emplace(fg.start(), PowerForecast(fg, Ensemble{detail::ensemble_around(
                                                                    rng, p50, bands, opts.ensemble_members,
                                                                    err.error_correlation, 0.0, ceiling)}));
            continue;
        }
        out.forecasts.emplace(fg.start(),
                              PowerForecast(fg, Quantiles{{0.1, 0.5, 0.9}, {std::move(p10), std::move(p50), std::move(p90)}}));
    }
    return out;
}

// Baseload -------------------------------------------------------------------

enum class WorkloadKind { relaxed_deadlines, tight_deadlines };

inline WorkloadKind workload_kind_by_name(const std::string& name) {
    if (name == "relaxed" || name == "relaxed-deadlines" || name == "ml-training") {
        return WorkloadKind::relaxed_deadlines;
    }
    if (name == "tight" || name == "tight-deadlines" || name == "edge-computing") {
        return WorkloadKind::tight_deadlines;
    }
    throw ConfigError("unknown workload kind '" + name + "' (expected relaxed or tight)");
}

inline std::string to_string(WorkloadKind k) {
    return k == WorkloadKind::relaxed_deadlines ? "relaxed" : "tight";
}

/// Highest synthetic baseload utilization; leaves at least 30 % of the node free.
inline constexpr double kMaxSyntheticBaseload = 0.7;

struct BaseloadData {
    LoadSeries actual;
    std::map<std::int64_t, LoadForecast> forecasts;
};

/// Synthetic baseload. Relaxed-deadline scenarios get a bursty, hard to
/// predict regime process (training-cluster-like); tight-deadline scenarios a
/// smooth diurnal curve (request-driven edge service).
inline BaseloadData synthesize_baseload(WorkloadKind kind, int days, std::uint64_t seed, const SynthesisGrid& sg = {},
                                        std::size_t ensemble_members = 0) {
    sg.validate(days);
    const TimeGrid grid = sg.actual_grid(days);
    Rng rng = make_rng(seed, "baseload-actual");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> level(0.1, 0.55);
    std::exponential_distribution<double> regime_len(1.0 / (3.0 * 3600.0));

    std::vector<double> actual(grid.size());
    double current = level(rng);
    Seconds regime_end = static_cast<Seconds>(grid.start()) + regime_len(rng);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto t = static_cast<Seconds>(grid.time_at(i));
        double u = 0;
        if (kind == WorkloadKind::relaxed_deadlines) {
            while (t >= regime_end) {
                current = level(rng);
                regime_end += regime_len(rng);
            }
            u = current + 0.03 * normal(rng);
        } else {
            const double hour = (t - static_cast<Seconds>(floor_to_day(t))) / 3600.0;
            const double shape = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (hour - 4.0) / 24.0));
            u = 0.1 + 0.45 * shape + 0.02 * normal(rng);
        }
        actual[i] = std::clamp(u, 0.02, kMaxSyntheticBaseload);
    }

    BaseloadData out{LoadSeries(grid, actual), {}};
    const double near = kind == WorkloadKind::relaxed_deadlines ? 0.05 : 0.02;
    const double far = kind == WorkloadKind::relaxed_deadlines ? 0.15 : 0.06;
    const auto refreshes = static_cast<std::size_t>(days) * sg.steps_per_day();
    const auto horizon = sg.horizon_steps;
    for (std::size_t r = 0; r < refreshes; ++r) {
        Rng frng = make_rng(seed, "baseload-forecast", r);
        const auto e = detail::ar1_path(frng, horizon, 0.9);
        std::vector<double> p10(horizon), p50(horizon), p90(horizon), bands(horizon);
        for (std::size_t h = 0; h < horizon; ++h) {
            const double sigma = near + (far - near) * detail::lead_fraction(h, horizon);
            const double median = std::clamp(actual[r + h] + sigma * e[h], 0.0, 1.0);
            const double band = 1.2816 * sigma;
            p50[h] = median;
            p10[h] = std::clamp(median - band, 0.0, 1.0);
            p90[h] = std::clamp(median + band, 0.0, 1.0);
            bands[h] = band;
        }
        const TimeGrid fg(grid.time_at(r), grid.step(), horizon);
        if (ensemble_members > 0) {
            const std::vector<double> ones(horizon, 1.0);
            out.forecasts.emplace(fg.start(),
                                  LoadForecast(fg, Ensemble{detail::ensemble_around(frng, p50, bands, ensemble_members,
                                                                                    0.9, 0.0, ones)}));
            continue;
        }
        out.forecasts.emplace(fg.start(),
                              LoadForecast(fg, Quantiles{{0.1, 0.5, 0.9}, {std::move(p10), std::move(p50), std::move(p90)}}));
    }
    return out;
}

// Workloads ------------------------------------------------------------------

struct WorkloadOptions {
    std::int64_t start = kDefaultScenarioStart;
    int days = 1;
    // Relaxed deadlines: arrivals uniform, deadline at the next midnight.
    double relaxed_size_median = 900;
    double relaxed_size_sigma = 0.8;
    double relaxed_size_max = 7200;
    /// Sizes are capped at this fraction of the slack so every job fits on the
    /// free capacity left by the synthetic baseload.
    double relaxed_feasible_fraction = 0.25;
    // Tight deadlines: diurnal arrivals, lognormal slack, one job size.
    double tight_median_slack = 41 * 60;
    double tight_slack_sigma = 0.5;
    double tight_min_slack = 15 * 60;
    double tight_job_size = 180;
};

inline std::size_t default_workload_count(WorkloadKind kind, int days) {
    return static_cast<std::size_t>(days) * (kind == WorkloadKind::relaxed_deadlines ? 40 : 100);
}

inline std::vector<WorkloadRequest> synthesize_workloads(WorkloadKind kind, std::size_t count, std::uint64_t seed,
                                                         const WorkloadOptions& opts = {}) {
    if (count == 0) {
        throw ConfigError("workload count must be positive");
    }
    if (opts.days <= 0) {
        throw ConfigError("days must be positive");
    }
    Rng rng = make_rng(seed, "workloads");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto start = static_cast<Seconds>(opts.start);
    const Seconds span = static_cast<Seconds>(opts.days) * static_cast<Seconds>(kSecondsPerDay);

    std::vector<Seconds> arrivals;
    arrivals.reserve(count);
    if (kind == WorkloadKind::relaxed_deadlines) {
        for (std::size_t i = 0; i < count; ++i) {
            arrivals.push_back(std::floor(start + unit(rng) * span));
        }
    } else {
        // Thinning against a diurnal rate peaking in the late afternoon.
        auto rate = [](Seconds t) {
            const double hour = (t - static_cast<Seconds>(floor_to_day(t))) / 3600.0;
            return 0.25 + 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (hour - 5.0) / 24.0));
        };
        while (arrivals.size() < count) {
            const Seconds t = std::floor(start + unit(rng) * span);
            if (unit(rng) * 1.25 < rate(t)) {
                arrivals.push_back(t);
            }
        }
    }
    std::sort(arrivals.begin(), arrivals.end());

    std::vector<WorkloadRequest> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        WorkloadRequest r;
        char id[32];
        std::snprintf(id, sizeof id, "job-%06zu", i);
        r.id = id;
        r.arrival = arrivals[i];
        if (kind == WorkloadKind::relaxed_deadlines) {
            r.deadline = static_cast<Seconds>(floor_to_day(r.arrival) + kSecondsPerDay);
            const double drawn = opts.relaxed_size_median * std::exp(opts.relaxed_size_sigma * normal(rng));
            const double cap = std::min(opts.relaxed_size_max, opts.relaxed_feasible_fraction * (r.deadline - r.arrival));
            r.size = std::max(1.0, std::round(std::min(drawn, cap)));
        } else {
            const double slack =
                std::max(opts.tight_min_slack, opts.tight_median_slack * std::exp(opts.tight_slack_sigma * normal(rng)));
            r.deadline = r.arrival + std::round(slack);
            r.size = opts.tight_job_size;
        }
        out.push_back(std::move(r));
    }
    return out;
}

// Synthetic scenario ---------------------------------------------------------

struct SyntheticSpec {
    SiteProfile site = cape_town_like();
    WorkloadKind kind = WorkloadKind::relaxed_deadlines;
    int days = 14;
    std::uint64_t seed = 0;
    std::optional<std::size_t> count; ///< default: per-kind daily rate times days
    std::size_t ensemble_members = 0; ///< 0: quantile forecasts
    SynthesisGrid grid;
    SolarOptions solar;
    WorkloadOptions workload;

    [[nodiscard]] std::string name() const { return site.name + "/" + to_string(kind); }
};

inline Scenario synthesize_scenario(const SyntheticSpec& spec) {
    SolarOptions solar = spec.solar;
    solar.grid = spec.grid;
    solar.ensemble_members = spec.ensemble_members;
    WorkloadOptions wopts = spec.workload;
    wopts.start = spec.grid.start;
    wopts.days = spec.days;
    auto production = synthesize_solar(spec.site, spec.days, derive_seed(spec.seed, "solar"), solar);
    auto baseload = synthesize_baseload(spec.kind, spec.days, derive_seed(spec.seed, "baseload"), spec.grid,
                                        spec.ensemble_members);
    auto trace = synthesize_workloads(spec.kind, spec.count.value_or(default_workload_count(spec.kind, spec.days)),
                                      derive_seed(spec.seed, "workloads"), wopts);
    Scenario s{spec.name(),
               std::move(trace),
               std::move(baseload.actual),
               std::move(baseload.forecasts),
               std::move(production.actual),
               std::move(production.forecasts),
               static_cast<std::int64_t>(spec.days) * kSecondsPerDay};
    s.validate();
    return s;
}

// Directory format -----------------------------------------------------------

inline constexpr const char* kManifestFile = "manifest.json";

namespace detail {

template <class Forecasts>
void save_forecast_dir(const std::filesystem::path& dir, const Forecasts& forecasts) {
    std::filesystem::create_directories(dir);
    for (const auto& [refresh, f] : forecasts) {
        write_forecast_csv((dir / (format_iso8601_basic(refresh) + ".csv")).string(), f);
    }
}

template <SeriesUnit U>
std::map<std::int64_t, ProbabilisticSeries<U>> load_forecast_dir(const std::filesystem::path& dir,
                                                                  std::int64_t step) {
    if (!std::filesystem::is_directory(dir)) {
        throw ManifestError("forecast directory " + dir.string() + " does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::map<std::int64_t, ProbabilisticSeries<U>> out;
    for (const auto& f : files) {
        auto series = ingest_forecast_csv<U>(f.string(), RepresentationHint::any, step);
        if (series.grid().step() != step) {
            throw GridMismatch(f.string() + ": step " + std::to_string(series.grid().step()) +
                               " differs from the manifest step " + std::to_string(step));
        }
        const auto key = series.grid().start();
        if (!out.emplace(key, std::move(series)).second) {
            throw DataError(f.string() + ": duplicate refresh time " + format_iso8601(key));
        }
    }
    return out;
}

} // namespace detail

inline void save_scenario(const Scenario& s, const std::filesystem::path& dir) {
    s.validate();
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json m;
    m["name"] = s.name;
    m["start"] = format_iso8601(s.start());
    m["step_seconds"] = s.grid().step();
    m["horizon_steps"] = s.horizon_steps();
    m["run_seconds"] = s.run_seconds;
    m["units"] = {{"baseload", std::string(Utilization::name)}, {"production", std::string(Watts::name)}};
    m["files"] = {{"workloads", "workloads.csv"},
                  {"baseload_actual", "baseload_actual.csv"},
                  {"production_actual", "production_actual.csv"},
                  {"baseload_forecast", "baseload_forecast"},
                  {"production_forecast", "production_forecast"}};
    csv::write_file((dir / kManifestFile).string(), m.dump(2) + "\n");
    write_workloads_csv((dir / "workloads.csv").string(), s.workloads);
    write_forecast_csv((dir / "baseload_actual.csv").string(), s.baseload_actual);
    write_forecast_csv((dir / "production_actual.csv").string(), s.production_actual);
    detail::save_forecast_dir(dir / "baseload_forecast", s.baseload_forecasts);
    detail::save_forecast_dir(dir / "production_forecast", s.production_forecasts);
}

inline Scenario load_scenario(const std::filesystem::path& dir) {
    const auto manifest_path = dir / kManifestFile;
    std::ifstream in(manifest_path);
    if (!in) {
        throw ManifestError("missing " + manifest_path.string());
    }
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path.string(), std::nullopt, std::nullopt, e.what());
    }
    auto require = [&](const nlohmann::json& obj, const char* key, const std::string& what) -> const nlohmann::json& {
        if (!obj.is_object() || !obj.contains(key)) {
            throw ManifestError(manifest_path.string() + ": missing " + what);
        }
        return obj.at(key);
    };
    try {
        const auto& files = require(m, "files", "'files'");
        auto role_path = [&](const char* role) {
            const auto rel = require(files, role, std::string("file role '") + role + "'").get<std::string>();
            auto p = dir / rel;
            if (!std::filesystem::exists(p)) {
                throw ManifestError(manifest_path.string() + ": file for role '" + role + "' not found: " + p.string());
            }
            return p;
        };
        const auto step = require(m, "step_seconds", "'step_seconds'").get<std::int64_t>();
        if (m.contains("units")) {
            const auto& u = m.at("units");
            if (u.value("baseload", std::string(Utilization::name)) != Utilization::name ||
                u.value("production", std::string(Watts::name)) != Watts::name) {
                throw ManifestError(manifest_path.string() + ": baseload must be utilization and production watts");
            }
        }
        const auto workloads = role_path("workloads");
        const auto baseload_actual = role_path("baseload_actual");
        const auto production_actual = role_path("production_actual");
        const auto baseload_forecast = role_path("baseload_forecast");
        const auto production_forecast = role_path("production_forecast");

        auto base = ingest_point_csv<Utilization>(baseload_actual.string(), step);
        auto prod = ingest_point_csv<Watts>(production_actual.string(), step);
        if (base.grid().step() != step || prod.grid().step() != step) {
            throw GridMismatch("actuals step differs from the manifest step " + std::to_string(step));
        }
        const auto run_seconds =
            m.contains("run_seconds") ? m.at("run_seconds").get<std::int64_t>() : prod.grid().end() - prod.grid().start();
        Scenario s{m.value("name", dir.filename().string()),
                   read_workloads_csv(workloads.string()),
                   std::move(base),
                   detail::load_forecast_dir<Utilization>(baseload_forecast, step),
                   std::move(prod),
                   detail::load_forecast_dir<Watts>(production_forecast, step),
                   run_seconds};
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(manifest_path.string() + ": " + e.what());
    }
}

} // namespace cucumber
