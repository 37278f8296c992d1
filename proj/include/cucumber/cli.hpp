#pragma once

/// @file cli.hpp
/// @brief `cucumber-sim` command line: generate, run, sweep, report.
///
/// Exit codes: 0 success, 1 at least one sweep cell failed, 2 configuration
/// or usage error, 3 data error, 4 I/O or other failure.
/// Reports go to `--out` or stdout; diagnostics always go to stderr.

#include <cucumber/report.hpp>
#include <cucumber/scenario.hpp>
#include <cucumber/simulator.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cucumber::cli {

enum ExitCode : int {
    kOk = 0,
    kCellFailed = 1,
    kConfigError = 2,
    kDataError = 3,
    kIoError = 4,
};

/// Simulation settings as given by a config file and flags. Unset fields
/// fall back to the SimulationConfig defaults.
struct RunOptions {
    std::optional<std::string> policy;
    std::optional<double> alpha;
    std::optional<std::size_t> sample_count;
    std::optional<std::uint64_t> seed;
    std::optional<double> p_static;
    std::optional<double> p_max;
    std::optional<std::int64_t> step_seconds;
    std::optional<std::size_t> horizon_steps;
    std::optional<std::int64_t> refresh_seconds;
    std::optional<double> load_reduction_alpha;
    std::optional<bool> perfect_forecasts;

    /// Fields set in `over` replace ours.
    void merge(const RunOptions& over) {
        auto take = [](auto& dst, const auto& src) {
            if (src) {
                dst = src;
            }
        };
        take(policy, over.policy);
        take(alpha, over.alpha);
        take(sample_count, over.sample_count);
        take(seed, over.seed);
        take(p_static, over.p_static);
        take(p_max, over.p_max);
        take(step_seconds, over.step_seconds);
        take(horizon_steps, over.horizon_steps);
        take(refresh_seconds, over.refresh_seconds);
        take(load_reduction_alpha, over.load_reduction_alpha);
        take(perfect_forecasts, over.perfect_forecasts);
    }

    static RunOptions from_json(const nlohmann::json& j) {
        if (!j.is_object()) {
            throw ConfigError("configuration must be a JSON object");
        }
        static const std::set<std::string> known{
            "policy",        "alpha",           "sample_count", "seed",
            "p_static",      "p_max",           "step_seconds", "horizon_steps",
            "refresh_seconds", "load_reduction_alpha", "perfect_forecasts", "scenario",
            "synthetic"};
        for (const auto& [key, value] : j.items()) {
            if (!known.contains(key)) {
                throw ConfigError("unknown configuration key '" + key + "'");
            }
        }
        RunOptions o;
        try {
            auto get = [&j](const char* key, auto& dst) {
                if (j.contains(key)) {
                    dst = j.at(key).get<typename std::decay_t<decltype(dst)>::value_type>();
                }
            };
            get("policy", o.policy);
            get("alpha", o.alpha);
            get("sample_count", o.sample_count);
            get("seed", o.seed);
            get("p_static", o.p_static);
            get("p_max", o.p_max);
            get("step_seconds", o.step_seconds);
            get("horizon_steps", o.horizon_steps);
            get("refresh_seconds", o.refresh_seconds);
            get("load_reduction_alpha", o.load_reduction_alpha);
            get("perfect_forecasts", o.perfect_forecasts);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad configuration value: ") + e.what());
        }
        return o;
    }

    [[nodiscard]] SimulationConfig to_config() const {
        SimulationConfig c;
        const double a = alpha.value_or(0.5);
        c.policy = AdmissionPolicy::parse(policy.value_or("cucumber"), a);
        c.power = PowerModel(p_static.value_or(30.0), p_max.value_or(180.0));
        c.step_seconds = step_seconds.value_or(c.step_seconds);
        c.horizon_steps = horizon_steps.value_or(c.horizon_steps);
        c.forecast_refresh_seconds = refresh_seconds.value_or(c.step_seconds);
        c.sample_count = sample_count.value_or(c.sample_count);
        c.load_reduction_alpha = load_reduction_alpha.value_or(c.load_reduction_alpha);
        c.perfect_forecasts = perfect_forecasts.value_or(false);
        c.seed = seed.value_or(0);
        c.validate();
        return c;
    }
};

inline std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("CUCUMBER_SIM_SEED");
    if (raw == nullptr || *raw == '\0') {
        return std::nullopt;
    }
    std::uint64_t v = 0;
    const std::string_view s(raw);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("CUCUMBER_SIM_SEED must be a non-negative integer");
    }
    return v;
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
    if (out_path.empty() || out_path == "-") {
        out << content;
        return;
    }
    const auto parent = std::filesystem::path(out_path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    csv::write_file(out_path, content);
}

// Sweep cells ----------------------------------------------------------------

struct Cell {
    nlohmann::json source;
    RunOptions options;
    std::optional<std::filesystem::path> scenario_dir;
    std::optional<SyntheticSpec> synthetic;
    std::string synthetic_key;
};

inline SyntheticSpec synthetic_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("'synthetic' must be an object");
    }
    SyntheticSpec s;
    try {
        s.site = site_by_name(j.value("site", std::string("cape-town-like")));
        s.kind = workload_kind_by_name(j.value("kind", std::string("relaxed")));
        s.days = j.value("days", 14);
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("count")) {
            s.count = j.at("count").get<std::size_t>();
        }
        s.ensemble_members = j.value("ensemble_members", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad synthetic scenario: ") + e.what());
    }
    if (s.days <= 0) {
        throw ConfigError("synthetic days must be positive");
    }
    return s;
}

inline std::vector<Cell> read_matrix(const std::filesystem::path& path, std::ostream& err) {
    const auto doc = read_json_file(path);
    if (!doc.is_array()) {
        throw ConfigError("matrix file must be a JSON list of cells");
    }
    std::vector<Cell> cells;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < doc.size(); ++k) {
        const auto& j = doc[k];
        Cell c;
        c.source = j;
        c.options = RunOptions::from_json(j);
        const bool has_dir = j.contains("scenario");
        const bool has_syn = j.contains("synthetic");
        if (has_dir == has_syn) {
            throw ConfigError("matrix cell " + std::to_string(k) + " needs exactly one of 'scenario' or 'synthetic'");
        }
        if (has_dir) {
            c.scenario_dir = path.parent_path() / j.at("scenario").get<std::string>();
        } else {
            c.synthetic = synthetic_from_json(j.at("synthetic"));
            c.synthetic_key = j.at("synthetic").dump();
        }
        const auto canonical = j.dump();
        if (!seen.insert(canonical).second) {
            err << "warning: duplicate matrix cell " << k << " skipped\n";
            continue;
        }
        cells.push_back(std::move(c));
    }
    return cells;
}

// Commands -------------------------------------------------------------------

struct CommonFlags {
    RunOptions options;
    std::string config_file;
    std::string out;
    std::string format = "csv";
    std::string plot_data;
};

inline void add_run_flags(CLI::App* cmd, CommonFlags& f, std::map<std::string, CLI::Option*>& opts,
                          std::map<std::string, std::string>& text) {
    // Values are captured as text and converted after parsing so that an
    // absent flag does not override a config file value.
    auto add = [&](const std::string& name, const std::string& help) {
        opts[name] = cmd->add_option("--" + name, text[name], help);
    };
    add("policy", "optimal-no-ree | optimal-ree-aware | naive | cucumber | conservative | expected | optimistic");
    add("alpha", "confidence level in (0, 1) for cucumber");
    add("sample-count", "joint fusion sample count");
    add("seed", "master seed (falls back to CUCUMBER_SIM_SEED)");
    add("p-static", "static power in W (default 30)");
    add("p-max", "maximum power in W (default 180)");
    add("step-seconds", "step length in s (default 600)");
    add("horizon-steps", "forecast horizon in steps (default 144)");
    add("refresh-seconds", "forecast refresh cadence in s (default: one step)");
    add("load-reduction-alpha", "quantile used to reduce a probabilistic load forecast (default 0.5)");
    opts["perfect-forecasts"] = cmd->add_flag("--perfect-forecasts", "use the actuals as forecasts for every policy");
    cmd->add_option("--config", f.config_file, "JSON file with run settings; flags take precedence");
    cmd->add_option("--out", f.out, "output file (default stdout)");
    cmd->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--plot-data", f.plot_data, "directory for hourly acceptance and power trace CSVs");
}

template <class T>
T parse_number(const std::string& name, const std::string& s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("--" + name + ": '" + s + "' is not a valid number");
    }
    return v;
}

inline RunOptions resolve_options(const CommonFlags& f, const std::map<std::string, CLI::Option*>& opts,
                                  const std::map<std::string, std::string>& text) {
    RunOptions o;
    if (!f.config_file.empty()) {
        o = RunOptions::from_json(read_json_file(f.config_file));
    }
    RunOptions flags;
    auto set = [&](const char* name) { return opts.at(name)->count() > 0; };
    auto val = [&](const char* name) { return text.at(name); };
    if (set("policy")) {
        flags.policy = val("policy");
    }
    if (set("alpha")) {
        flags.alpha = parse_number<double>("alpha", val("alpha"));
    }
    if (set("sample-count")) {
        flags.sample_count = parse_number<std::size_t>("sample-count", val("sample-count"));
    }
    if (set("seed")) {
        flags.seed = parse_number<std::uint64_t>("seed", val("seed"));
    }
    if (set("p-static")) {
        flags.p_static = parse_number<double>("p-static", val("p-static"));
    }
    if (set("p-max")) {
        flags.p_max = parse_number<double>("p-max", val("p-max"));
    }
    if (set("step-seconds")) {
        flags.step_seconds = parse_number<std::int64_t>("step-seconds", val("step-seconds"));
    }
    if (set("horizon-steps")) {
        flags.horizon_steps = parse_number<std::size_t>("horizon-steps", val("horizon-steps"));
    }
    if (set("refresh-seconds")) {
        flags.refresh_seconds = parse_number<std::int64_t>("refresh-seconds", val("refresh-seconds"));
    }
    if (set("load-reduction-alpha")) {
        flags.load_reduction_alpha = parse_number<double>("load-reduction-alpha", val("load-reduction-alpha"));
    }
    if (set("perfect-forecasts")) {
        flags.perfect_forecasts = true;
    }
    o.merge(flags);
    if (!o.seed) {
        o.seed = env_seed();
    }
    return o;
}

inline int cmd_generate(const std::string& site, const std::string& kind, int days, std::uint64_t seed,
                        std::optional<std::size_t> count, std::size_t ensemble_members, const std::string& out_dir,
                        std::ostream& out) {
    SyntheticSpec spec;
    spec.site = site_by_name(site);
    spec.kind = workload_kind_by_name(kind);
    if (days <= 0) {
        throw ConfigError("--days must be positive");
    }
    spec.days = days;
    spec.seed = seed;
    spec.count = count;
    spec.ensemble_members = ensemble_members;
    const auto s = synthesize_scenario(spec);
    save_scenario(s, out_dir);
    out << out_dir << '\n';
    return kOk;
}

inline std::string render(std::span<const RunMetrics> runs, const std::string& format) {
    if (format == "json") {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& m : runs) {
            arr.push_back(report::metrics_json(m));
        }
        return (runs.size() == 1 ? arr[0] : arr).dump(2) + '\n';
    }
    return report::metrics_csv(runs);
}

inline int cmd_run(const std::string& scenario_dir, const RunOptions& options, const CommonFlags& f,
                   std::ostream& out, std::ostream& err) {
    auto config = options.to_config();
    config.record_trace = !f.plot_data.empty();
    const auto scenario = load_scenario(scenario_dir);
    const auto metrics = run(scenario, config);
    for (const auto& w : metrics.warnings) {
        err << "warning: " << w << '\n';
    }
    emit(render(std::span(&metrics, 1), f.format), f.out, out);
    if (!f.plot_data.empty()) {
        report::write_plot_data(f.plot_data, metrics);
    }
    return kOk;
}

inline int cmd_sweep(const std::string& matrix_file, const RunOptions& defaults, const CommonFlags& f, unsigned jobs,
                     std::ostream& out, std::ostream& err) {
    const auto cells = read_matrix(matrix_file, err);
    std::map<std::string, std::shared_ptr<const Scenario>> synthetic_cache;
    std::map<std::string, std::shared_ptr<const Scenario>> dir_cache;
    std::vector<RunSpec> specs(cells.size());
    std::vector<std::string> setup_errors(cells.size());
    std::vector<bool> setup_config_error(cells.size(), false);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& c = cells[k];
        try {
            RunOptions o = defaults;
            o.merge(c.options);
            specs[k].config = o.to_config();
            specs[k].config.record_trace = !f.plot_data.empty();
            if (c.synthetic) {
                auto& slot = synthetic_cache[c.synthetic_key];
                if (!slot) {
                    slot = std::make_shared<const Scenario>(synthesize_scenario(*c.synthetic));
                }
                specs[k].scenario = slot;
            } else {
                const auto key = c.scenario_dir->lexically_normal().string();
                auto& slot = dir_cache[key];
                if (!slot) {
                    slot = std::make_shared<const Scenario>(load_scenario(*c.scenario_dir));
                }
                specs[k].scenario = slot;
            }
        } catch (const ConfigError& e) {
            setup_errors[k] = e.what();
            setup_config_error[k] = true;
        } catch (const std::exception& e) {
            setup_errors[k] = e.what();
        }
    }

    std::vector<std::size_t> runnable;
    std::vector<RunSpec> to_run;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (setup_errors[k].empty()) {
            runnable.push_back(k);
            to_run.push_back(specs[k]);
        }
    }
    const auto results = run_matrix(to_run, jobs);

    std::vector<CellResult> all(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        all[k].error = setup_errors[k];
        all[k].config_error = setup_config_error[k];
    }
    for (std::size_t r = 0; r < runnable.size(); ++r) {
        all[runnable[r]] = results[r];
    }

    std::vector<RunMetrics> ok;
    bool failed = false;
    for (std::size_t k = 0; k < all.size(); ++k) {
        if (all[k].ok()) {
            ok.push_back(*all[k].metrics);
        } else {
            failed = true;
            err << "error: cell " << k << " (" << cells[k].source.dump() << "): " << all[k].error << '\n';
        }
    }
    emit(render(ok, f.format), f.out, out);
    // The summary is for humans; keep it off the stream carrying the report.
    std::ostream& table = (f.out.empty() || f.out == "-") ? err : out;
    table << report::summary_table(ok);
    if (!f.plot_data.empty()) {
        for (std::size_t k = 0; k < all.size(); ++k) {
            if (all[k].ok()) {
                report::write_plot_data(std::filesystem::path(f.plot_data) / ("cell-" + std::to_string(k)),
                                        *all[k].metrics);
            }
        }
    }
    return failed ? kCellFailed : kOk;
}

/// Re-renders saved JSON reports (one run object or a list) as CSV or a table.
inline int cmd_report(const std::vector<std::string>& inputs, const std::string& format, const std::string& out_path,
                      std::ostream& out) {
    std::vector<RunMetrics> runs;
    for (const auto& path : inputs) {
        const auto doc = read_json_file(path);
        auto add = [&](const nlohmann::json& j) {
            RunMetrics m;
            try {
                m.scenario = j.at("scenario").get<std::string>();
                m.policy = j.at("policy").get<std::string>();
                m.alpha = j.at("alpha").get<double>();
                m.fingerprint = j.at("fingerprint").get<std::string>();
                m.requests_total = j.at("requests_total").get<std::size_t>();
                m.accepted = j.at("accepted").get<std::size_t>();
                if (!j.at("acceptance_rate").is_null()) {
                    m.acceptance_rate = j.at("acceptance_rate").get<double>();
                }
                m.ree_energy = j.at("ree_energy_j").get<double>();
                m.grid_energy = j.at("grid_energy_j").get<double>();
                if (!j.at("ree_coverage").is_null()) {
                    m.ree_coverage = j.at("ree_coverage").get<double>();
                }
                m.deadline_misses = j.at("deadline_misses").get<std::size_t>();
                m.unfinished = j.at("unfinished").get<std::size_t>();
                m.uncapped_jobs = j.at("uncapped_jobs").get<std::size_t>();
            } catch (const nlohmann::json::exception& e) {
                throw DataError(path + ": not a run report: " + e.what());
            }
            runs.push_back(std::move(m));
        };
        if (doc.is_array()) {
            for (const auto& j : doc) {
                add(j);
            }
        } else {
            add(doc);
        }
    }
    emit(format == "table" ? report::summary_table(runs) : report::metrics_csv(runs), out_path, out);
    return kOk;
}

// Entry point ----------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Renewable-aware admission control simulator", "cucumber-sim"};
    app.require_subcommand(1);

    std::string site = "cape-town-like", kind = "relaxed", gen_out;
    int days = 14;
    std::uint64_t gen_seed = 0;
    std::size_t gen_count = 0;
    std::size_t gen_members = 0;
    auto* gen = app.add_subcommand("generate", "synthesize a scenario directory");
    gen->add_option("--site", site, "berlin-like | mexico-city-like | cape-town-like");
    gen->add_option("--kind", kind, "relaxed | tight");
    gen->add_option("--days", days, "simulated days");
    auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "generation seed (falls back to CUCUMBER_SIM_SEED)");
    auto* count_opt = gen->add_option("--count", gen_count, "number of requests (default: per-kind daily rate)");
    gen->add_option("--ensemble-members", gen_members, "write ensemble forecasts with this many members (default: quantiles)");
    gen->add_option("--out", gen_out, "output directory")->required();

    CommonFlags run_flags;
    std::map<std::string, CLI::Option*> run_opts;
    std::map<std::string, std::string> run_text;
    std::string scenario_dir;
    auto* run_cmd = app.add_subcommand("run", "simulate one policy on one scenario");
    run_cmd->add_option("scenario", scenario_dir, "scenario directory")->required();
    add_run_flags(run_cmd, run_flags, run_opts, run_text);

    CommonFlags sweep_flags;
    std::map<std::string, CLI::Option*> sweep_opts;
    std::map<std::string, std::string> sweep_text;
    std::string matrix_file;
    unsigned jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "run every cell of a matrix file");
    sweep->add_option("matrix", matrix_file, "JSON list of cells")->required();
    sweep->add_option("--jobs", jobs, "parallel cells (default 1)")->check(CLI::PositiveNumber);
    add_run_flags(sweep, sweep_flags, sweep_opts, sweep_text);

    std::vector<std::string> report_inputs;
    std::string report_format = "csv", report_out;
    auto* rep = app.add_subcommand("report", "convert saved JSON run reports");
    rep->add_option("inputs", report_inputs, "JSON reports from run or sweep")->required();
    rep->add_option("--format", report_format, "csv | table")->check(CLI::IsMember({"csv", "table"}));
    rep->add_option("--out", report_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*gen) {
            std::uint64_t seed = gen_seed;
            if (gen_seed_opt->count() == 0) {
                seed = env_seed().value_or(0);
            }
            std::optional<std::size_t> count;
            if (count_opt->count() > 0) {
                count = gen_count;
            }
            return cmd_generate(site, kind, days, seed, count, gen_members, gen_out, out);
        }
        if (*run_cmd) {
            return cmd_run(scenario_dir, resolve_options(run_flags, run_opts, run_text), run_flags, out, err);
        }
        if (*sweep) {
            return cmd_sweep(matrix_file, resolve_options(sweep_flags, sweep_opts, sweep_text), sweep_flags, jobs, out,
                             err);
        }
        return cmd_report(report_inputs, report_format, report_out, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    }
}

} // namespace cucumber::cli
