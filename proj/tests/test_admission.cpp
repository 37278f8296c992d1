#include <cucumber/admission.hpp>

#include "support/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace cucumber;
using cucumber::testing::freep_of;

namespace {

WorkloadRequest req(std::string id, double arrival, double size, double deadline) {
    return {std::move(id), arrival, size, deadline};
}

std::vector<Seconds> schedule(const std::vector<double>& caps, std::vector<double> sizes) {
    std::vector<QueuedJob> jobs;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        jobs.push_back({req("j" + std::to_string(k), 0, sizes[k], 1e9), sizes[k], JobState::waiting, k});
    }
    return feasible_schedule(jobs, StepCapacity(0.0, 600.0, caps), 0.0);
}

} // namespace

TEST_CASE("sequential completion times") {
    CHECK(schedule({0.5, 0.5, 0.5}, {600}) == std::vector<Seconds>{1200});
    CHECK(schedule({1.0}, {300}) == std::vector<Seconds>{300});
    CHECK(schedule({0.5, 0.5, 0.5, 0.5}, {600, 600}) == std::vector<Seconds>{1200, 2400});
    CHECK(schedule({0.5}, {600}) == std::vector<Seconds>{kNever});
}

TEST_CASE("admission on a constant freep profile") {
    const auto policy = AdmissionPolicy::expected();
    JobQueue empty;
    const auto half = freep_of({0.5, 0.5, 0.5, 0.5});
    CHECK(admit(policy, req("a", 0, 600, 1200), empty, half, false, 0).accepted);
    const auto zero = freep_of({0.0, 0.0, 0.0, 0.0});
    CHECK_FALSE(admit(policy, req("a", 0, 600, 1200), empty, zero, true, 0).accepted);

    JobQueue one;
    one.enqueue(req("q", 0, 600, 1200));
    const auto d = admit(policy, req("b", 0, 600, 1200), one, half, false, 0);
    CHECK_FALSE(d.accepted);
    CHECK(d.violating_job == "b");
    CHECK(d.lateness == 1200);
    CHECK_FALSE(d.reason.empty());
}

TEST_CASE("admission arguments are validated") {
    const auto policy = AdmissionPolicy::expected();
    JobQueue q;
    const auto half = freep_of({0.5});
    CHECK_THROWS_AS(admit(policy, req("a", 10, 60, 100), q, half, false, 0), ConfigError);
    CHECK_THROWS_AS(admit(policy, req("a", 0, 0, 100), q, half, false, 0), DataError);
    CHECK_THROWS_AS(admit(policy, req("a", 0, 10, 0), q, half, false, 0), DataError);
    CHECK_THROWS_AS(AdmissionPolicy::cucumber(1.5), InvalidAlpha);
    CHECK_THROWS_AS(AdmissionPolicy::parse("greedy"), ConfigError);
    CHECK(AdmissionPolicy::parse("conservative") == AdmissionPolicy::cucumber(0.1));
    CHECK(AdmissionPolicy::parse("cucumber", 0.9).label() == "cucumber(0.9)");
}

TEST_CASE("naive accepts only into an empty node with REE available") {
    const auto naive = AdmissionPolicy::naive();
    const auto zero = freep_of({0.0});
    JobQueue empty;
    CHECK(admit(naive, req("a", 0, 6000, 7000), empty, zero, true, 0).accepted);
    CHECK_FALSE(admit(naive, req("a", 0, 60, 7000), empty, zero, false, 0).accepted);
    JobQueue busy;
    busy.enqueue(req("q", 0, 60, 7000));
    CHECK_FALSE(admit(naive, req("a", 0, 60, 7000), busy, zero, true, 0).accepted);
}

TEST_CASE("optimal without REE tests against all free capacity") {
    const FreepForecast f(TimeGrid(0, 600, 2), {0.0, 0.0}, {0.5, 0.5});
    JobQueue q;
    CHECK(admit(AdmissionPolicy::optimal_no_ree(), req("a", 0, 600, 1200), q, f, false, 0).accepted);
    CHECK_FALSE(admit(AdmissionPolicy::optimal_ree_aware(), req("a", 0, 600, 1200), q, f, false, 0).accepted);
}

TEST_CASE("queue keeps the running job first and orders by deadline") {
    JobQueue q;
    q.enqueue(req("late", 0, 10, 500));
    q.start_next();
    q.enqueue(req("early", 1, 10, 100));
    q.enqueue(req("tie", 2, 10, 100));
    REQUIRE(q.size() == 3);
    CHECK(q.jobs()[0].id() == "late");
    CHECK(q.jobs()[1].id() == "early");
    CHECK(q.jobs()[2].id() == "tie");
    const auto with = q.with_request(req("new", 3, 10, 100));
    CHECK(with[3].id() == "new");
    CHECK(q.finish_running().id() == "late");
    CHECK(q.start_next()->id() == "early");
}

TEST_CASE("deadline groups") {
    JobQueue q;
    const auto cap = freep_of({0.5, 0.5, 0.5, 0.5});
    const auto single = group_by_deadline(q.with_request(req("r", 0, 100, 600)), cap.freep_capacity(), 0);
    REQUIRE(single.size() == 1);
    CHECK(single[0].count == 1);
    CHECK(single[0].capacity_to_deadline == 300);

    q.enqueue(req("a", 0, 100, 600));
    q.enqueue(req("b", 0, 100, 1200));
    const auto groups = group_by_deadline(q.with_request(req("r", 0, 100, 600)), cap.freep_capacity(), 0);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].count == 2);
    CHECK(groups[0].cumulative_remaining == 200);
    CHECK(groups[1].cumulative_remaining == 300);
    CHECK(groups[1].capacity_to_deadline == 600);
}

TEST_CASE("grouped check decides like full replay") {
    std::mt19937_64 rng(101);
    const auto policy = AdmissionPolicy::expected();
    for (int trial = 0; trial < 5000; ++trial) {
        auto in = cucumber::testing::random_instance(rng);
        const auto f = freep_of(in.capacity);
        const auto grouped = admit(policy, in.request, in.queue, f, false, in.now, AdmissionCheck::grouped);
        const auto replay = admit(policy, in.request, in.queue, f, false, in.now, AdmissionCheck::full_replay);
        INFO("trial " << trial);
        CHECK(grouped.accepted == replay.accepted);
        CHECK(grouped.violating_job == replay.violating_job);
    }
}

TEST_CASE("admission agrees with the tick oracle") {
    std::mt19937_64 rng(202);
    const auto policy = AdmissionPolicy::expected();
    int disagreements = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto in = cucumber::testing::random_instance(rng);
        const auto f = freep_of(in.capacity);
        const bool accepted = admit(policy, in.request, in.queue, f, false, in.now).accepted;
        const std::vector<QueuedJob> current(in.queue.jobs().begin(), in.queue.jobs().end());
        const auto oracle = cucumber::testing::tick_oracle(current, in.request, in.capacity, 600.0, in.now);
        if (accepted != oracle.all_on_time && !oracle.near_boundary) {
            ++disagreements;
        }
    }
    CHECK(disagreements == 0);
}

TEST_CASE("more capacity never turns an accept into a reject") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto policy = AdmissionPolicy::expected();
    for (int trial = 0; trial < 2000; ++trial) {
        auto in = cucumber::testing::random_instance(rng);
        auto more = in.capacity;
        for (auto& c : more) {
            c = std::min(1.0, c + unit(rng) * 0.3);
        }
        const bool low = admit(policy, in.request, in.queue, freep_of(in.capacity), false, in.now).accepted;
        const bool high = admit(policy, in.request, in.queue, freep_of(more), false, in.now).accepted;
        if (low) {
            CHECK(high);
        }
    }
}
