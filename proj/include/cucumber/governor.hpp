#pragma once

/// @file governor.hpp
/// @brief Runtime power capping of delay-tolerant jobs and deadline mitigation.

#include <cucumber/admission.hpp>
#include <cucumber/freep.hpp>
#include <cucumber/power.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace cucumber {

/// Utilization a delay-tolerant job may use right now without drawing grid
/// power: the production surplus over the baseload's draw, converted through
/// the marginal power of the node, bounded by the free capacity.
///
/// The returned cap never implies more power than the surplus, i.e.
/// cap * (p_max - p_static) <= surplus holds exactly in floating point.
inline double runtime_cap(double measured_baseload, double measured_production, const PowerModel& model) {
    const double baseload = std::clamp(measured_baseload, 0.0, 1.0);
    const double surplus = measured_production - model.load_to_power(baseload);
    if (!(surplus > 0.0)) {
        return 0.0;
    }
    const double range = model.dynamic_range();
    double cap = std::min(1.0 - baseload, surplus / range);
    while (cap > 0.0 && cap * range > surplus) {
        cap = std::nextafter(cap, 0.0);
    }
    return std::max(0.0, cap);
}

enum class CapMode { capped, uncapped };

enum class Mitigation { keep_capped, uncap };

struct MitigationResult {
    Mitigation action = Mitigation::keep_capped;
    Seconds completion_capped = kNever;   ///< projected under freep capacity
    Seconds completion_uncapped = kNever; ///< projected under all free capacity
};

/// Projects the running job's completion on the freep capacity forecast; if
/// it would miss its deadline the job should be uncapped and finish on all
/// free capacity. Only the running job matters: execution is
/// non-preemptive, so queued jobs cannot delay it.
inline MitigationResult evaluate_mitigation(const QueuedJob& running, const FreepForecast& freep, Seconds now) {
    MitigationResult r;
    r.completion_capped = freep.freep_capacity().advance(now, running.remaining);
    r.completion_uncapped = freep.free_capacity().advance(now, running.remaining);
    r.action = on_time(r.completion_capped, running.deadline()) ? Mitigation::keep_capped : Mitigation::uncap;
    return r;
}

/// Per-job cap mode. Uncapped is absorbing until the job leaves.
class GovernorState {
public:
    [[nodiscard]] CapMode mode(const std::string& job) const {
        auto it = modes_.find(job);
        return it == modes_.end() ? CapMode::capped : it->second;
    }

    void uncap(const std::string& job) { modes_[job] = CapMode::uncapped; }

    void forget(const std::string& job) { modes_.erase(job); }

    [[nodiscard]] Seconds last_evaluation() const noexcept { return last_evaluation_; }

    /// Applies a mitigation result for `job` evaluated at `now`.
    Mitigation evaluate(const QueuedJob& job, const FreepForecast& freep, Seconds now) {
        last_evaluation_ = now;
        if (mode(job.id()) == CapMode::uncapped) {
            return Mitigation::uncap;
        }
        const auto r = evaluate_mitigation(job, freep, now);
        if (r.action == Mitigation::uncap) {
            uncap(job.id());
        }
        return r.action;
    }

private:
    std::unordered_map<std::string, CapMode> modes_;
    Seconds last_evaluation_ = -kNever;
};

} // namespace cucumber
