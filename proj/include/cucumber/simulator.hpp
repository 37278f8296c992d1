#pragma once

/// @file simulator.hpp
/// @brief Deterministic discrete-event simulation of one node: forecast
/// refreshes, admission at arrival, capped execution with mitigation, and
/// REE / grid energy metering.
///
/// Within a step the measured baseload and production are constant. Events
/// at equal timestamps are ordered: forecast refresh, mitigation evaluation,
/// arrival, completion. Arrivals and completions may fall mid-step and split
/// it; energy is metered per sub-interval.

#include <cucumber/admission.hpp>
#include <cucumber/forecast.hpp>
#include <cucumber/freep.hpp>
#include <cucumber/governor.hpp>
#include <cucumber/power.hpp>
#include <cucumber/random.hpp>
#include <cucumber/scenario.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace cucumber {

struct SimulationConfig {
    std::int64_t step_seconds = 600;
    std::size_t horizon_steps = 144;
    std::int64_t forecast_refresh_seconds = 600;
    PowerModel power{30.0, 180.0};
    AdmissionPolicy policy = AdmissionPolicy::expected();
    std::size_t sample_count = 1000;
    std::uint64_t seed = 0;
    /// Quantile used to reduce a probabilistic load forecast to one series.
    double load_reduction_alpha = 0.5;
    /// Replace realistic forecasts by the actuals for every policy.
    bool perfect_forecasts = false;
    /// Arrival window; defaults to the scenario's.
    std::optional<std::int64_t> run_seconds;
    AdmissionCheck admission_check = AdmissionCheck::grouped;
    bool record_trace = false;

    void validate() const {
        if (step_seconds <= 0) {
            throw ConfigError("step_seconds must be positive");
        }
        if (horizon_steps == 0) {
            throw ConfigError("horizon_steps must be positive");
        }
        if (forecast_refresh_seconds <= 0 || forecast_refresh_seconds % step_seconds != 0) {
            throw ConfigError("forecast refresh must be a positive multiple of the step");
        }
        if (sample_count == 0) {
            throw ConfigError("sample_count must be positive");
        }
        if (!(load_reduction_alpha > 0.0 && load_reduction_alpha < 1.0)) {
            throw InvalidAlpha(load_reduction_alpha);
        }
        if (run_seconds && *run_seconds <= 0) {
            throw ConfigError("run duration must be positive");
        }
    }
};

struct JobRecord {
    std::string id;
    Seconds arrival = 0;
    double size = 0;
    Seconds deadline = 0;
    bool accepted = false;
    std::string reject_reason;
    std::optional<Seconds> start;
    std::optional<Seconds> completion;
    bool late = false;
    bool uncapped = false;
    double ree_joules = 0;
    double grid_joules = 0;
};

/// Step averages of the node's power flows.
struct PowerSample {
    std::int64_t time = 0;
    double production = 0;
    double baseload_power = 0;
    double job_power = 0;
    double job_grid_power = 0;
};

struct RunMetrics {
    std::string scenario;
    std::string policy;
    double alpha = 0;
    std::string fingerprint;
    std::size_t requests_total = 0;
    std::size_t accepted = 0;
    std::optional<double> acceptance_rate;
    double ree_energy = 0;
    double grid_energy = 0;
    std::optional<double> ree_coverage;
    std::size_t deadline_misses = 0;
    std::size_t unfinished = 0;
    std::size_t uncapped_jobs = 0;
    std::vector<JobRecord> jobs;
    std::vector<PowerSample> trace;
    std::vector<std::string> warnings;

    [[nodiscard]] double total_job_energy() const noexcept { return ree_energy + grid_energy; }
};

struct EnergySplit {
    double ree_joules = 0;
    double grid_joules = 0;
};

/// Baseload has first claim on production; the job takes what is left and
/// the remainder of its draw comes from the grid.
inline EnergySplit energy_split(Seconds duration, double production, double baseload_power, double job_power) {
    const double surplus = std::max(0.0, production - baseload_power);
    const double ree_power = std::min(job_power, surplus);
    return {ree_power * duration, (job_power - ree_power) * duration};
}

/// Stable identifier of a (scenario, config) pair.
inline std::string config_fingerprint(const std::string& scenario, const SimulationConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "scenario=" << scenario << ";policy=" << c.policy.name() << ";alpha=" << c.policy.alpha()
       << ";samples=" << c.sample_count << ";seed=" << c.seed << ";p_static=" << c.power.p_static()
       << ";p_max=" << c.power.p_max() << ";step=" << c.step_seconds << ";horizon=" << c.horizon_steps
       << ";refresh=" << c.forecast_refresh_seconds << ";reduction=" << c.load_reduction_alpha
       << ";perfect=" << c.perfect_forecasts << ";run=" << c.run_seconds.value_or(-1);
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
    return buf;
}

namespace detail {

class Simulation {
public:
    Simulation(const Scenario& scenario, const SimulationConfig& config)
        : sc_(scenario)
        , cfg_(config)
        , grid_(scenario.grid()) {
        cfg_.validate();
        if (cfg_.step_seconds != grid_.step()) {
            throw ConfigError("config step " + std::to_string(cfg_.step_seconds) + " s differs from scenario step " +
                              std::to_string(grid_.step()) + " s");
        }
        const auto available = sc_.horizon_steps();
        if (!cfg_.perfect_forecasts && needs_realistic() && cfg_.horizon_steps > available) {
            throw ConfigError("horizon of " + std::to_string(cfg_.horizon_steps) +
                              " steps exceeds the scenario forecasts (" + std::to_string(available) + ")");
        }
        run_end_ = static_cast<Seconds>(sc_.start() + cfg_.run_seconds.value_or(sc_.run_seconds));
        if (run_end_ > static_cast<Seconds>(grid_.end())) {
            throw ConfigError("run duration exceeds the scenario actuals");
        }
        m_.scenario = sc_.name;
        m_.policy = cfg_.policy.name();
        m_.alpha = cfg_.policy.alpha();
        m_.fingerprint = config_fingerprint(sc_.name, cfg_);
        const auto horizon_seconds = static_cast<Seconds>(cfg_.horizon_steps) * static_cast<Seconds>(grid_.step());
        for (const auto& w : sc_.workloads) {
            if (w.deadline - w.arrival > horizon_seconds) {
                m_.warnings.push_back("request slack exceeds the forecast horizon; such requests cannot be admitted "
                                      "by forecast-based policies");
                break;
            }
        }
    }

    RunMetrics run() {
        const auto& arrivals = sc_.workloads;
        std::size_t next_arrival = 0;
        std::size_t refresh_index = 0;
        const auto steps_per_refresh = static_cast<std::size_t>(cfg_.forecast_refresh_seconds / grid_.step());

        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const auto t0 = static_cast<Seconds>(grid_.time_at(i));
            const auto t1 = t0 + static_cast<Seconds>(grid_.step());
            const bool arrivals_left = next_arrival < arrivals.size() && arrivals[next_arrival].arrival < run_end_;
            if (t0 >= run_end_ && queue_.empty() && !arrivals_left) {
                break;
            }
            base_ = sc_.baseload_actual[i];
            prod_ = sc_.production_actual[i];
            baseload_power_ = cfg_.power.load_to_power(base_);
            cap_ = runtime_cap(base_, prod_, cfg_.power);

            if (i % steps_per_refresh == 0) {
                refresh(i, t0, refresh_index++);
                if (auto* job = queue_.running()) {
                    mitigate(*job, t0);
                }
            }

            PowerSample sample{grid_.time_at(i), prod_, baseload_power_, 0, 0};
            sample_ = &sample;
            Seconds t = t0;
            while (true) {
                QueuedJob* job = queue_.running();
                const double rate = job ? rate_for(*job) : 0.0;
                Seconds tc = kNever;
                if (job) {
                    if (job->remaining <= kWorkTolerance) {
                        tc = t;
                    } else if (rate > 0.0) {
                        tc = t + job->remaining / rate;
                    }
                }
                Seconds ta = kNever;
                if (next_arrival < arrivals.size() && arrivals[next_arrival].arrival < t1 &&
                    arrivals[next_arrival].arrival < run_end_) {
                    ta = std::max(t, arrivals[next_arrival].arrival);
                }
                if (ta != kNever && ta <= tc) {
                    advance(t, ta, false);
                    t = ta;
                    arrive(arrivals[next_arrival++], t);
                    continue;
                }
                if (tc < t1) {
                    advance(t, tc, true);
                    t = tc;
                    complete(t);
                    continue;
                }
                advance(t, t1, false);
                break;
            }
            sample_ = nullptr;
            if (cfg_.record_trace) {
                const double dt = static_cast<double>(grid_.step());
                sample.job_power /= dt;
                sample.job_grid_power /= dt;
                m_.trace.push_back(sample);
            }
        }
        finish();
        return std::move(m_);
    }

private:
    [[nodiscard]] bool needs_realistic() const noexcept {
        return !cfg_.policy.uses_perfect_data();
    }

    [[nodiscard]] bool admission_uses_perfect() const noexcept {
        return cfg_.perfect_forecasts || cfg_.policy.uses_perfect_data();
    }

    [[nodiscard]] const FreepForecast& planning_forecast() const {
        return admission_uses_perfect() ? *perfect_ : *realistic_;
    }

    void refresh(std::size_t step_index, Seconds t0, std::size_t refresh_index) {
        const auto& power = cfg_.power;
        if (admission_uses_perfect()) {
            const auto base = sc_.baseload_actual.slice(step_index, cfg_.horizon_steps);
            const auto prod = sc_.production_actual.slice(step_index, cfg_.horizon_steps);
            const auto cons = consumption_forecast(power, LoadForecast(base));
            const auto p_ree = fuse_ree_fallback(PowerForecast(prod), cons, 0.5);
            perfect_.emplace(compute_freep(base, p_ree, power));
            return;
        }
        const auto key = static_cast<std::int64_t>(t0);
        auto bit = sc_.baseload_forecasts.find(key);
        auto pit = sc_.production_forecasts.find(key);
        if (bit == sc_.baseload_forecasts.end() || pit == sc_.production_forecasts.end()) {
            if (t0 < run_end_) {
                throw DataError("no forecast for refresh at " + format_iso8601(key));
            }
            return; // past the arrival window: keep the last forecast
        }
        const auto base_fc = bit->second.truncated(cfg_.horizon_steps);
        const auto prod_fc = pit->second.truncated(cfg_.horizon_steps);
        const auto cons_fc = consumption_forecast(power, base_fc);
        const double alpha = cfg_.policy.alpha();
        PowerSeries p_ree = (prod_fc.is_quantiles() || cons_fc.is_quantiles())
                                ? fuse_ree_fallback(prod_fc, cons_fc, alpha)
                                : JointReeSample(prod_fc, cons_fc, cfg_.sample_count,
                                                 derive_seed(cfg_.seed, "fusion", refresh_index))
                                      .fused(alpha);
        const auto u_pred = reduce_load_forecast(base_fc, cfg_.load_reduction_alpha);
        realistic_.emplace(compute_freep(u_pred, p_ree, power));
    }

    [[nodiscard]] double rate_for(const QueuedJob& job) const {
        const bool uncapped = !cfg_.policy.capped_execution() || governor_.mode(job.id()) == CapMode::uncapped;
        return uncapped ? 1.0 - base_ : cap_;
    }

    void mitigate(const QueuedJob& job, Seconds now) {
        if (!cfg_.policy.capped_execution()) {
            return;
        }
        if (governor_.evaluate(job, planning_forecast(), now) == Mitigation::uncap) {
            records_[record_index_.at(job.id())].uncapped = true;
        }
    }

    void advance(Seconds from, Seconds to, bool completes) {
        const Seconds dt = to - from;
        if (!(dt > 0.0)) {
            if (completes) {
                if (auto* job = queue_.running()) {
                    job->remaining = 0;
                }
            }
            return;
        }
        QueuedJob* job = queue_.running();
        if (job == nullptr) {
            return;
        }
        const double rate = rate_for(*job);
        job->remaining = completes ? 0.0 : std::max(0.0, job->remaining - rate * dt);
        const double job_power = rate * cfg_.power.dynamic_range();
        const auto split = energy_split(dt, prod_, baseload_power_, job_power);
        auto& rec = records_[record_index_.at(job->id())];
        rec.ree_joules += split.ree_joules;
        rec.grid_joules += split.grid_joules;
        m_.ree_energy += split.ree_joules;
        m_.grid_energy += split.grid_joules;
        if (sample_ != nullptr) {
            sample_->job_power += job_power * dt;
            sample_->job_grid_power += split.grid_joules;
        }
    }

    void arrive(const WorkloadRequest& request, Seconds now) {
        JobRecord rec;
        rec.id = request.id;
        rec.arrival = request.arrival;
        rec.size = request.size;
        rec.deadline = request.deadline;
        const bool ree_now = prod_ - baseload_power_ > 0.0;
        const FreepForecast* fc = nullptr;
        if (perfect_) {
            fc = &*perfect_;
        }
        if (!admission_uses_perfect() && realistic_) {
            fc = &*realistic_;
        }
        if (fc == nullptr) {
            throw DataError("no forecast available at " + format_iso8601(static_cast<std::int64_t>(now)));
        }
        const auto decision = admit(cfg_.policy, request, queue_, *fc, ree_now, now, cfg_.admission_check);
        rec.accepted = decision.accepted;
        rec.reject_reason = decision.reason;
        record_index_.emplace(request.id, records_.size());
        records_.push_back(std::move(rec));
        if (decision.accepted) {
            queue_.enqueue(request);
            start_next(now);
        }
    }

    void start_next(Seconds now) {
        const bool was_running = queue_.has_running();
        QueuedJob* job = queue_.start_next();
        if (job == nullptr || was_running) {
            return;
        }
        job->state = JobState::running;
        records_[record_index_.at(job->id())].start = now;
        mitigate(*job, now);
    }

    void complete(Seconds now) {
        auto done = queue_.finish_running();
        auto& rec = records_[record_index_.at(done.id())];
        rec.completion = now;
        rec.late = !on_time(now, done.deadline());
        governor_.forget(done.id());
        start_next(now);
    }

    void finish() {
        const auto data_end = static_cast<Seconds>(grid_.end());
        for (const auto& job : queue_.jobs()) {
            auto& rec = records_[record_index_.at(job.id())];
            ++m_.unfinished;
            rec.late = job.deadline() <= data_end;
        }
        m_.requests_total = records_.size();
        for (const auto& r : records_) {
            m_.accepted += r.accepted ? 1 : 0;
            m_.deadline_misses += r.late ? 1 : 0;
            m_.uncapped_jobs += r.uncapped ? 1 : 0;
        }
        if (m_.requests_total > 0) {
            m_.acceptance_rate = static_cast<double>(m_.accepted) / static_cast<double>(m_.requests_total);
        }
        if (m_.total_job_energy() > 0.0) {
            m_.ree_coverage = m_.ree_energy / m_.total_job_energy();
        }
        m_.jobs = std::move(records_);
    }

    const Scenario& sc_;
    SimulationConfig cfg_;
    TimeGrid grid_;
    Seconds run_end_ = 0;

    JobQueue queue_;
    GovernorState governor_;
    std::optional<FreepForecast> realistic_;
    std::optional<FreepForecast> perfect_;

    double base_ = 0;
    double prod_ = 0;
    double baseload_power_ = 0;
    double cap_ = 0;
    PowerSample* sample_ = nullptr;

    std::vector<JobRecord> records_;
    std::unordered_map<std::string, std::size_t> record_index_;
    RunMetrics m_;
};

} // namespace detail

inline RunMetrics run(const Scenario& scenario, const SimulationConfig& config) {
    return detail::Simulation(scenario, config).run();
}

// Matrix ---------------------------------------------------------------------

struct RunSpec {
    std::shared_ptr<const Scenario> scenario;
    SimulationConfig config;
};

struct CellResult {
    std::optional<RunMetrics> metrics;
    std::string error;
    bool config_error = false;

    [[nodiscard]] bool ok() const noexcept { return metrics.has_value(); }
};

/// Runs every spec independently; results are in input order regardless of
/// `parallelism`. A failing cell records its error and does not stop others.
inline std::vector<CellResult> run_matrix(std::span<const RunSpec> specs, unsigned parallelism = 1) {
    std::vector<CellResult> results(specs.size());
    auto run_one = [&](std::size_t k) {
        try {
            if (!specs[k].scenario) {
                throw ConfigError("cell has no scenario");
            }
            results[k].metrics = run(*specs[k].scenario, specs[k].config);
        } catch (const ConfigError& e) {
            results[k].error = e.what();
            results[k].config_error = true;
        } catch (const std::exception& e) {
            results[k].error = e.what();
        }
    };
    parallelism = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(specs.size())));
    if (parallelism <= 1) {
        for (std::size_t k = 0; k < specs.size(); ++k) {
            run_one(k);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < parallelism; ++w) {
        workers.emplace_back([&] {
            for (std::size_t k = next++; k < specs.size(); k = next++) {
                run_one(k);
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    return results;
}

} // namespace cucumber
