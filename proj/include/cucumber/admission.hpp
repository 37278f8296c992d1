#pragma once

/// @file admission.hpp
/// @brief Deadline-feasibility admission control over a capacity forecast.
///
/// A request is admitted only if replaying the queue with the request
/// inserted (non-preemptive EDF, FIFO among equal deadlines, the running job
/// first) on the capacity forecast finishes every job by its deadline.

#include <cucumber/capacity.hpp>
#include <cucumber/errors.hpp>
#include <cucumber/freep.hpp>
#include <cucumber/time.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cucumber {

/// Completion this close past a deadline still counts as on time.
inline constexpr Seconds kDeadlineTolerance = 1e-6;

[[nodiscard]] inline bool on_time(Seconds completion, Seconds deadline) noexcept {
    return completion <= deadline + kDeadlineTolerance;
}

/// A delay-tolerant job. `size` is in capacity-seconds: a job that needs the
/// whole node for 600 s has size 600.
struct WorkloadRequest {
    std::string id;
    Seconds arrival = 0;
    double size = 0;
    Seconds deadline = 0;

    void validate() const {
        if (!(size > 0.0) || !std::isfinite(size)) {
            throw DataError("request " + id + ": size must be positive");
        }
        if (!(deadline > arrival)) {
            throw DataError("request " + id + ": deadline must be after arrival");
        }
    }

    friend bool operator==(const WorkloadRequest&, const WorkloadRequest&) = default;
};

enum class JobState { waiting, running, completed, completed_late };

struct QueuedJob {
    WorkloadRequest request;
    double remaining = 0;
    JobState state = JobState::waiting;
    std::uint64_t sequence = 0; ///< arrival order, breaks deadline ties

    [[nodiscard]] Seconds deadline() const noexcept { return request.deadline; }
    [[nodiscard]] const std::string& id() const noexcept { return request.id; }
};

/// Jobs in execution order: the running job (if any) first, then waiting jobs
/// by ascending deadline, FIFO among equal deadlines.
class JobQueue {
public:
    [[nodiscard]] bool empty() const noexcept { return jobs_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return jobs_.size(); }
    [[nodiscard]] std::span<const QueuedJob> jobs() const noexcept { return jobs_; }

    [[nodiscard]] bool has_running() const noexcept {
        return !jobs_.empty() && jobs_.front().state == JobState::running;
    }

    [[nodiscard]] QueuedJob* running() noexcept { return has_running() ? &jobs_.front() : nullptr; }
    [[nodiscard]] const QueuedJob* running() const noexcept { return has_running() ? &jobs_.front() : nullptr; }

    /// Position a new request would take in execution order.
    [[nodiscard]] std::size_t insertion_index(const WorkloadRequest& request) const noexcept {
        const auto first_waiting = jobs_.begin() + (has_running() ? 1 : 0);
        auto it = std::upper_bound(first_waiting, jobs_.end(), request.deadline,
                                   [](Seconds d, const QueuedJob& j) { return d < j.deadline(); });
        return static_cast<std::size_t>(it - jobs_.begin());
    }

    /// Execution order with `request` inserted, as a new vector.
    [[nodiscard]] std::vector<QueuedJob> with_request(const WorkloadRequest& request) const {
        std::vector<QueuedJob> out;
        out.reserve(jobs_.size() + 1);
        const auto pos = insertion_index(request);
        out.insert(out.end(), jobs_.begin(), jobs_.begin() + static_cast<std::ptrdiff_t>(pos));
        out.push_back(QueuedJob{request, request.size, JobState::waiting, next_sequence_});
        out.insert(out.end(), jobs_.begin() + static_cast<std::ptrdiff_t>(pos), jobs_.end());
        return out;
    }

    QueuedJob& enqueue(const WorkloadRequest& request) {
        const auto pos = insertion_index(request);
        auto it = jobs_.insert(jobs_.begin() + static_cast<std::ptrdiff_t>(pos),
                               QueuedJob{request, request.size, JobState::waiting, next_sequence_++});
        return *it;
    }

    /// Starts the EDF-first waiting job if nothing is running.
    QueuedJob* start_next() noexcept {
        if (jobs_.empty() || has_running()) {
            return running();
        }
        jobs_.front().state = JobState::running;
        return &jobs_.front();
    }

    /// Removes and returns the running job.
    QueuedJob finish_running() {
        if (!has_running()) {
            throw Error("no running job to finish");
        }
        QueuedJob done = std::move(jobs_.front());
        jobs_.erase(jobs_.begin());
        return done;
    }

private:
    std::vector<QueuedJob> jobs_;
    std::uint64_t next_sequence_ = 0;
};

// Replay ---------------------------------------------------------------------

/// Projected completion time of each job when the queue consumes `capacity`
/// sequentially from `now`. Jobs that do not fit in the profile get kNever.
inline std::vector<Seconds> feasible_schedule(std::span<const QueuedJob> ordered, const StepCapacity& capacity,
                                              Seconds now) {
    std::vector<Seconds> completion(ordered.size(), kNever);
    Seconds t = now;
    for (std::size_t k = 0; k < ordered.size(); ++k) {
        t = capacity.advance(t, ordered[k].remaining);
        if (t == kNever) {
            break;
        }
        completion[k] = t;
    }
    return completion;
}

struct Violation {
    std::string job_id;
    Seconds lateness = 0; ///< completion - deadline; infinite beyond the horizon
};

/// First job in `ordered` whose projected completion misses its deadline.
inline std::optional<Violation> first_violation(std::span<const QueuedJob> ordered, const StepCapacity& capacity,
                                                Seconds now) {
    const auto completion = feasible_schedule(ordered, capacity, now);
    for (std::size_t k = 0; k < ordered.size(); ++k) {
        if (!on_time(completion[k], ordered[k].deadline())) {
            return Violation{ordered[k].id(), completion[k] - ordered[k].deadline()};
        }
    }
    return std::nullopt;
}

// Deadline groups ------------------------------------------------------------

/// A maximal run of consecutive jobs (in execution order) sharing a deadline.
/// The last job of the group finishes once the capacity integral from `now`
/// reaches `cumulative_remaining`, so the whole group is on time iff
/// cumulative_remaining <= capacity_to_deadline.
struct DeadlineGroup {
    Seconds deadline = 0;
    std::size_t first = 0; ///< index of the first job in execution order
    std::size_t count = 0;
    double group_remaining = 0;
    double cumulative_remaining = 0;
    double capacity_to_deadline = 0;
    Seconds time_to_deadline = 0;

    [[nodiscard]] double margin() const noexcept { return capacity_to_deadline - cumulative_remaining; }
};

inline std::vector<DeadlineGroup> group_by_deadline(std::span<const QueuedJob> ordered, const StepCapacity& capacity,
                                                    Seconds now) {
    std::vector<DeadlineGroup> groups;
    double cumulative = 0;
    for (std::size_t k = 0; k < ordered.size(); ++k) {
        const auto& job = ordered[k];
        cumulative += job.remaining;
        if (groups.empty() || groups.back().deadline != job.deadline()) {
            groups.push_back(DeadlineGroup{job.deadline(), k, 0, 0, 0, 0, job.deadline() - now});
        }
        auto& g = groups.back();
        ++g.count;
        g.group_remaining += job.remaining;
        g.cumulative_remaining = cumulative;
    }
    for (auto& g : groups) {
        g.capacity_to_deadline = capacity.integral(now, g.deadline);
    }
    return groups;
}

// Policies -------------------------------------------------------------------

class AdmissionPolicy {
public:
    enum class Kind { optimal_no_ree, optimal_ree_aware, naive, cucumber };

    static AdmissionPolicy optimal_no_ree() noexcept { return AdmissionPolicy(Kind::optimal_no_ree, 0.5); }
    static AdmissionPolicy optimal_ree_aware() noexcept { return AdmissionPolicy(Kind::optimal_ree_aware, 0.5); }
    static AdmissionPolicy naive() noexcept { return AdmissionPolicy(Kind::naive, 0.5); }
    static AdmissionPolicy cucumber(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw InvalidAlpha(alpha);
        }
        return AdmissionPolicy(Kind::cucumber, alpha);
    }
    static AdmissionPolicy conservative() { return cucumber(0.1); }
    static AdmissionPolicy expected() { return cucumber(0.5); }
    static AdmissionPolicy optimistic() { return cucumber(0.9); }

    /// Kebab-case name; `alpha` is only read for `cucumber`. The presets
    /// `conservative`, `expected` and `optimistic` are also accepted.
    static AdmissionPolicy parse(std::string_view name, double alpha = 0.5) {
        if (name == "optimal-no-ree") {
            return optimal_no_ree();
        }
        if (name == "optimal-ree-aware") {
            return optimal_ree_aware();
        }
        if (name == "naive") {
            return naive();
        }
        if (name == "cucumber") {
            return cucumber(alpha);
        }
        if (name == "conservative") {
            return conservative();
        }
        if (name == "expected") {
            return expected();
        }
        if (name == "optimistic") {
            return optimistic();
        }
        throw ConfigError("unknown policy '" + std::string(name) +
                          "' (expected optimal-no-ree, optimal-ree-aware, naive, cucumber)");
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }

    /// Whether admission uses perfect (actual) data by definition.
    [[nodiscard]] bool uses_perfect_data() const noexcept {
        return kind_ == Kind::optimal_no_ree || kind_ == Kind::optimal_ree_aware;
    }

    /// Whether accepted jobs run under the REE power cap.
    [[nodiscard]] bool capped_execution() const noexcept { return kind_ != Kind::optimal_no_ree; }

    [[nodiscard]] std::string name() const {
        switch (kind_) {
        case Kind::optimal_no_ree:
            return "optimal-no-ree";
        case Kind::optimal_ree_aware:
            return "optimal-ree-aware";
        case Kind::naive:
            return "naive";
        case Kind::cucumber:
            return "cucumber";
        }
        return "unknown";
    }

    /// Name plus alpha for cucumber, e.g. `cucumber(0.5)`.
    [[nodiscard]] std::string label() const {
        if (kind_ != Kind::cucumber) {
            return name();
        }
        std::ostringstream os;
        os << "cucumber(" << alpha_ << ")";
        return os.str();
    }

    friend bool operator==(const AdmissionPolicy&, const AdmissionPolicy&) = default;

private:
    AdmissionPolicy(Kind kind, double alpha) noexcept
        : kind_(kind)
        , alpha_(alpha) {}

    Kind kind_;
    double alpha_;
};

struct AdmissionDecision {
    bool accepted = false;
    std::string reason;           ///< empty when accepted
    std::string violating_job;    ///< first job projected late, if any
    Seconds lateness = 0;         ///< its projected lateness

    explicit operator bool() const noexcept { return accepted; }

    static AdmissionDecision accept() { return {true, {}, {}, 0}; }
    static AdmissionDecision reject(std::string reason, std::string job = {}, Seconds lateness = 0) {
        return {false, std::move(reason), std::move(job), lateness};
    }
};

/// How the deadline test is evaluated. Both give identical decisions; the
/// grouped form checks one inequality per deadline group and only replays
/// the queue when a group sits within rounding distance of its deadline.
enum class AdmissionCheck { grouped, full_replay };

namespace detail {

inline AdmissionDecision reject_from_replay(std::span<const QueuedJob> ordered, const StepCapacity& capacity,
                                            Seconds now, const DeadlineGroup* group) {
    if (auto v = first_violation(ordered, capacity, now)) {
        return AdmissionDecision::reject("projected deadline violation", v->job_id, v->lateness);
    }
    const auto& last = ordered[group->first + group->count - 1];
    return AdmissionDecision::reject("projected deadline violation", last.id(), 0);
}

inline AdmissionDecision deadline_test(std::span<const QueuedJob> ordered, const StepCapacity& capacity, Seconds now,
                                       AdmissionCheck check) {
    if (check == AdmissionCheck::full_replay) {
        if (auto v = first_violation(ordered, capacity, now)) {
            return AdmissionDecision::reject("projected deadline violation", v->job_id, v->lateness);
        }
        return AdmissionDecision::accept();
    }
    bool inconclusive = false;
    const auto groups = group_by_deadline(ordered, capacity, now);
    for (const auto& g : groups) {
        const double band = kDeadlineTolerance + 1e-9 * std::max(1.0, g.cumulative_remaining);
        if (g.margin() < -band) {
            return reject_from_replay(ordered, capacity, now, &g);
        }
        if (g.margin() <= band) {
            inconclusive = true;
        }
    }
    if (inconclusive) {
        return deadline_test(ordered, capacity, now, AdmissionCheck::full_replay);
    }
    return AdmissionDecision::accept();
}

} // namespace detail

/// Accept or reject `request` arriving at `now`.
///
/// Cucumber and OptimalReeAware test against the freep capacity of `freep`,
/// OptimalNoRee against its free capacity; the caller passes the realistic or
/// the perfect forecast as appropriate. Naive ignores the forecast and accepts
/// only when REE is available right now and no job is queued or running.
inline AdmissionDecision admit(const AdmissionPolicy& policy, const WorkloadRequest& request, const JobQueue& queue,
                               const FreepForecast& freep, bool current_ree_available, Seconds now,
                               AdmissionCheck check = AdmissionCheck::grouped) {
    if (std::abs(request.arrival - now) > kDeadlineTolerance) {
        throw ConfigError("request " + request.id + " evaluated at a time other than its arrival");
    }
    request.validate();
    using Kind = AdmissionPolicy::Kind;
    if (policy.kind() == Kind::naive) {
        if (!current_ree_available) {
            return AdmissionDecision::reject("no REE available");
        }
        if (!queue.empty()) {
            return AdmissionDecision::reject("node busy");
        }
        return AdmissionDecision::accept();
    }
    const StepCapacity capacity =
        policy.kind() == Kind::optimal_no_ree ? freep.free_capacity() : freep.freep_capacity();
    const auto ordered = queue.with_request(request);
    return detail::deadline_test(ordered, capacity, now, check);
}

} // namespace cucumber
