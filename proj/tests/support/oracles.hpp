#pragma once

// Reference implementations used only by tests.

#include <cucumber/admission.hpp>
#include <cucumber/freep.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace cucumber::testing {

/// Outcome of simulating a queue tick by tick.
struct TickOutcome {
    bool all_on_time = true;
    /// Some job finished within one tick of its deadline, where tick
    /// quantization can flip the verdict.
    bool near_boundary = false;
};

/// Simulates the queue with 1-second ticks: the running job first, then by
/// deadline, then arrival order; the request goes last among equal deadlines.
/// Capacity is sampled at the start of each tick. Integer step boundaries and
/// an integer `now` make that sampling exact.
inline TickOutcome tick_oracle(const std::vector<QueuedJob>& current, const WorkloadRequest& request,
                               const std::vector<double>& capacity, double step, double now) {
    struct Item {
        double remaining;
        double deadline;
        int rank; // 0 running, 1 waiting
        std::uint64_t order;
    };
    std::vector<Item> items;
    std::uint64_t last = 0;
    for (const auto& j : current) {
        items.push_back({j.remaining, j.deadline(), j.state == JobState::running ? 0 : 1, j.sequence});
        last = std::max(last, j.sequence + 1);
    }
    items.push_back({request.size, request.deadline, 1, last});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.rank != b.rank) {
            return a.rank < b.rank;
        }
        if (a.deadline != b.deadline) {
            return a.deadline < b.deadline;
        }
        return a.order < b.order;
    });

    TickOutcome out;
    const double end = step * static_cast<double>(capacity.size());
    double t = now;
    std::size_t k = 0;
    double done = 0.0;
    while (k < items.size()) {
        if (items[k].remaining - done <= 1e-9) {
            const double finish = t;
            if (finish > items[k].deadline + 1e-6) {
                out.all_on_time = false;
            }
            if (std::abs(finish - items[k].deadline) <= 1.0) {
                out.near_boundary = true;
            }
            // Work done past the finish in this tick carries over.
            done -= items[k].remaining;
            ++k;
            continue;
        }
        if (t >= end) {
            out.all_on_time = false;
            break;
        }
        const auto idx = static_cast<std::size_t>(std::floor(t / step));
        done += capacity[idx];
        t += 1.0;
    }
    return out;
}

/// A random small admission instance: capacity profile, queue and request.
struct Instance {
    std::vector<double> capacity;
    JobQueue queue;
    WorkloadRequest request;
    double now = 0;
};

inline Instance random_instance(std::mt19937_64& rng, double step = 600.0) {
    std::uniform_int_distribution<int> steps_d(1, 12), jobs_d(0, 5), size_d(1, 1500), level_d(0, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Instance in;
    const int steps = steps_d(rng);
    for (int i = 0; i < steps; ++i) {
        static const double levels[] = {0.0, 0.25, 0.5, 1.0};
        const int l = level_d(rng);
        in.capacity.push_back(l < 4 ? levels[l] : std::round(unit(rng) * 100.0) / 100.0);
    }
    const double horizon = step * steps;
    in.now = std::floor(unit(rng) * std::min(600.0, horizon));
    std::uniform_int_distribution<int> deadline_d(1, static_cast<int>(horizon + 600.0 - in.now));
    const int jobs = jobs_d(rng);
    for (int j = 0; j < jobs; ++j) {
        WorkloadRequest r{"q" + std::to_string(j), in.now - 1.0 - j, static_cast<double>(size_d(rng)),
                          in.now + deadline_d(rng)};
        // Coarse deadlines create equal-deadline groups.
        if (unit(rng) < 0.4) {
            r.deadline = in.now + std::ceil((r.deadline - in.now) / 600.0) * 600.0;
        }
        in.queue.enqueue(r);
    }
    if (!in.queue.empty() && unit(rng) < 0.7) {
        auto* running = in.queue.start_next();
        running->remaining = std::max(1.0, std::floor(running->remaining * unit(rng)));
    }
    in.request = WorkloadRequest{"new", in.now, static_cast<double>(size_d(rng)), in.now + deadline_d(rng)};
    if (unit(rng) < 0.3 && !in.queue.empty()) {
        in.request.deadline = in.queue.jobs().back().deadline();
    }
    return in;
}

inline FreepForecast freep_of(const std::vector<double>& capacity, double step = 600.0) {
    return FreepForecast(TimeGrid(0, static_cast<std::int64_t>(step), capacity.size()), capacity,
                         std::vector<double>(capacity.size(), 1.0));
}

} // namespace cucumber::testing
