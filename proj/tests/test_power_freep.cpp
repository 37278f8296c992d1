#include <cucumber/freep.hpp>
#include <cucumber/power.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace cucumber;
using Catch::Matchers::WithinAbs;

namespace {
const PowerModel kNode{30.0, 180.0};
TimeGrid grid(std::size_t n) { return TimeGrid(0, 600, n); }
} // namespace

TEST_CASE("linear power model") {
    CHECK(kNode.load_to_power(0.0) == 30.0);
    CHECK(kNode.load_to_power(1.0) == 180.0);
    CHECK(kNode.load_to_power(0.5) == 105.0);
    CHECK(kNode.power_to_load(180.0) == 1.0);
    CHECK(kNode.power_to_load(20.0) == 0.0);
    CHECK(kNode.power_to_load(105.0) == 0.5);
    CHECK(kNode.power_to_load(1000.0) == 1.0);
    CHECK_THROWS_AS(kNode.load_to_power(1.2), InvalidUtilization);
    CHECK_THROWS_AS(kNode.load_to_power(-0.1), InvalidUtilization);
    CHECK_THROWS_AS(PowerModel(180.0, 30.0), ConfigError);
    CHECK_THROWS_AS(PowerModel(-1.0, 30.0), ConfigError);
}

TEST_CASE("power model round trip and monotonicity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = unit(rng), b = unit(rng);
        CHECK_THAT(kNode.power_to_load(kNode.load_to_power(a)), WithinAbs(a, 1e-12));
        if (a <= b) {
            CHECK(kNode.load_to_power(a) <= kNode.load_to_power(b));
        }
    }
}

TEST_CASE("consumption forecast maps every trajectory") {
    const auto g = grid(2);
    const auto idle = consumption_forecast(kNode, LoadForecast(g, Point{{0, 0}}));
    CHECK(quantile(idle, 0.5)[0] == 30.0);

    const auto q = consumption_forecast(kNode, LoadForecast(g, Quantiles{{0.1, 0.9}, {{0.2, 0.2}, {0.8, 0.8}}}));
    REQUIRE(q.is_quantiles());
    CHECK_THAT(quantile(q, 0.1)[0], WithinAbs(60.0, 1e-9));
    CHECK_THAT(quantile(q, 0.9)[1], WithinAbs(150.0, 1e-9));

    const PowerSeries others = PowerSeries::constant(g, 20.0);
    const auto plus = consumption_forecast(kNode, LoadForecast(g, Point{{0.5, 0.5}}), others);
    CHECK(quantile(plus, 0.5)[1] == 125.0);

    const auto ens = consumption_forecast(kNode, LoadForecast(g, Ensemble{{{0.0, 1.0}, {1.0, 0.0}}}));
    CHECK(ens.is_ensemble());
    CHECK(ens.member(0, 1) == 180.0);
    CHECK(ens.member(1, 1) == 30.0);
}

TEST_CASE("freep capacity triples") {
    const auto g = grid(1);
    auto one = [&](double u, double p) {
        return compute_freep(LoadSeries(g, {u}), PowerSeries(g, {p}), kNode);
    };
    const auto a = one(0.4, 180.0);
    CHECK_THAT(a.u_free()[0], WithinAbs(0.6, 1e-9));
    CHECK_THAT(a.u_freep()[0], WithinAbs(0.6, 1e-9));
    const auto b = one(0.0, 30.0);
    CHECK(b.u_freep()[0] == 0.0);
    CHECK(b.u_free()[0] == 1.0);
    const auto c = one(1.0, 500.0);
    CHECK(c.u_free()[0] == 0.0);
    CHECK(c.u_freep()[0] == 0.0);
    const auto d = one(0.2, 105.0);
    CHECK_THAT(d.u_freep()[0], WithinAbs(0.5, 1e-9));
}

TEST_CASE("freep never exceeds free capacity") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0), watts(0.0, 500.0);
    const std::size_t n = 50;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> u(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = unit(rng);
            p[i] = watts(rng);
        }
        const auto f = compute_freep(LoadSeries(grid(n), u), PowerSeries(grid(n), p), kNode);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(f.u_freep()[i] >= 0.0);
            CHECK(f.u_freep()[i] <= f.u_free()[i]);
            CHECK(f.u_free()[i] <= 1.0);
        }
    }
}

TEST_CASE("freep rejects mismatched grids and inconsistent values") {
    CHECK_THROWS_AS(compute_freep(LoadSeries(grid(2), {0.1, 0.1}), PowerSeries(grid(3), {1, 1, 1}), kNode),
                    GridMismatch);
    CHECK_THROWS_AS(FreepForecast(grid(1), {0.7}, {0.5}), InvariantViolation);
}

TEST_CASE("load forecast reduction") {
    const auto g = grid(2);
    const LoadForecast point(g, Point{{0.3, 0.6}});
    CHECK(reduce_load_forecast(point, 0.9).values()[1] == 0.6);
    const LoadForecast q(g, Quantiles{{0.1, 0.5, 0.9}, {{0.1, 0.1}, {0.3, 0.4}, {0.8, 0.9}}});
    CHECK(reduce_load_forecast(q, 0.5)[1] == 0.4);
    const LoadForecast ens(g, Ensemble{{{0.2, 0.2}, {0.4, 0.4}, {0.6, 0.6}}});
    CHECK(reduce_load_forecast(ens, 0.5)[0] == 0.4);
}

TEST_CASE("step capacity integral and advance") {
    const std::vector<double> half{0.5, 0.5, 0.5};
    const StepCapacity cap(0.0, 600.0, half);
    CHECK(cap.advance(0.0, 600.0) == 1200.0);
    CHECK(cap.integral(0.0, 1200.0) == 600.0);
    CHECK(cap.integral(-100.0, 100.0) == 50.0);
    CHECK(cap.advance(0.0, 1000.0) == kNever);
    CHECK(cap.advance(2000.0, 0.0) == 2000.0);
    CHECK(cap.rate_at(1799.0) == 0.5);
    CHECK(cap.rate_at(1800.0) == 0.0);
    const std::vector<double> mixed{0.0, 1.0};
    const StepCapacity m(100.0, 600.0, mixed);
    CHECK(m.advance(0.0, 300.0) == 1000.0);
}

TEST_CASE("advance inverts the integral") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> v(8);
        for (auto& x : v) {
            x = unit(rng) < 0.2 ? 0.0 : unit(rng);
        }
        const StepCapacity cap(0.0, 600.0, v);
        const double from = unit(rng) * 2000.0;
        const double work = unit(rng) * cap.integral(from, cap.end());
        const double t = cap.advance(from, work);
        REQUIRE(t != kNever);
        CHECK_THAT(cap.integral(from, t), WithinAbs(work, 1e-6));
    }
}
