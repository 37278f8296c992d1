// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cucumber/admission.hpp>
#include <cucumber/forecast.hpp>
#include <cucumber/freep.hpp>
#include <cucumber/power.hpp>
#include <cucumber/report.hpp>
#include <cucumber/scenario.hpp>
#include <cucumber/simulator.hpp>

#include "../support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cucumber;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kExactTol = 1e-9;
constexpr double kAc1BudgetS = 1.0;
constexpr int kAc2Instances = 2000;
constexpr double kAc2BudgetS = 60.0;
constexpr double kAc3BudgetPerScenarioS = 30.0;
constexpr int kInvariantDays = 7;
constexpr int kAc5Scenarios = 20;
constexpr int kAc5Days = 2;
constexpr std::size_t kAc5Members = 10;
constexpr int kAc6Days = 7;
constexpr double kAc8BudgetS = 600.0;
constexpr std::size_t kAc8Cells = 36;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [" << what << "]";
        }
    }
};

bool near(double a, double b) { return std::abs(a - b) <= kExactTol; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path scratch(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("cucumber-acceptance-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<SyntheticSpec> invariant_scenarios() {
    std::vector<SyntheticSpec> out;
    for (const auto& site : {berlin_like(), mexico_city_like(), cape_town_like()}) {
        for (auto kind : {WorkloadKind::relaxed_deadlines, WorkloadKind::tight_deadlines}) {
            for (std::uint64_t seed : {1, 2}) {
                SyntheticSpec s;
                s.site = site;
                s.kind = kind;
                s.days = kInvariantDays;
                s.seed = seed;
                out.push_back(s);
            }
        }
    }
    return out;
}

std::string tag(const SyntheticSpec& s) { return s.name() + "#" + std::to_string(s.seed); }

Outcome ac1() {
    Outcome o;
    const auto t0 = Clock::now();
    const PowerModel node{30.0, 180.0};
    o.require(near(node.load_to_power(0.0), 30.0), "P(0)=30");
    o.require(near(node.load_to_power(1.0), 180.0), "P(1)=180");
    o.require(near(node.load_to_power(0.5), 105.0), "P(0.5)=105");
    o.require(near(node.power_to_load(180.0), 1.0), "U(180)=1");
    o.require(near(node.power_to_load(20.0), 0.0), "U(20)=0");
    o.require(near(node.power_to_load(105.0), 0.5), "U(105)=0.5");

    const TimeGrid g(0, 600, 1);
    const PowerForecast p200(g, Point{{200}}), c120(g, Point{{120}}), p50(g, Point{{50}});
    for (double a : {0.1, 0.5, 0.9}) {
        o.require(near(fuse_ree_joint(p200, c120, a, 100, 1)[0], 80.0), "joint 200-120");
    }
    o.require(near(fuse_ree_joint(p50, c120, 0.5, 100, 1)[0], 0.0), "joint clamp");
    const PowerForecast pe(g, Ensemble{{{100}, {300}}}), ce(g, Ensemble{{{50}, {150}}});
    o.require(near(fuse_ree_joint(pe, ce, 0.5, 10000, 7)[0], 100.0), "joint ensemble median");

    const PowerForecast pq(g, Quantiles{{0.1, 0.5, 0.9}, {{40}, {100}, {160}}});
    const PowerForecast cq(g, Quantiles{{0.1, 0.5, 0.9}, {{30}, {50}, {80}}});
    o.require(near(fuse_ree_fallback(pq, PowerForecast(g, Point{{50}}), 0.9)[0], 110.0), "fallback 110");
    o.require(near(fuse_ree_fallback(pq, cq, 0.1)[0], 0.0), "fallback clamp");
    o.require(near(fuse_ree_fallback(p50, p50, 0.5)[0], 0.0), "fallback identical");

    auto freep = [&](double u, double p) { return compute_freep(LoadSeries(g, {u}), PowerSeries(g, {p}), node); };
    const auto a = freep(0.4, 180.0);
    o.require(near(a.u_free()[0], 0.6) && near(a.u_freep()[0], 0.6), "freep(0.4,180)");
    const auto b = freep(0.0, 30.0);
    o.require(near(b.u_freep()[0], 0.0), "freep(0,30)");
    const auto c = freep(1.0, 500.0);
    o.require(near(c.u_free()[0], 0.0) && near(c.u_freep()[0], 0.0), "freep(1,500)");

    const double dt = seconds_since(t0);
    o.require(dt < kAc1BudgetS, "runtime");
    o.detail << " " << dt << " s";
    return o;
}

Outcome ac2() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    const auto policy = AdmissionPolicy::expected();
    int disagreements = 0, boundary = 0;
    for (int trial = 0; trial < kAc2Instances; ++trial) {
        auto in = cucumber::testing::random_instance(rng);
        const auto f = cucumber::testing::freep_of(in.capacity);
        const bool accepted = admit(policy, in.request, in.queue, f, false, in.now).accepted;
        const std::vector<QueuedJob> current(in.queue.jobs().begin(), in.queue.jobs().end());
        const auto oracle = cucumber::testing::tick_oracle(current, in.request, in.capacity, 600.0, in.now);
        if (accepted != oracle.all_on_time) {
            if (oracle.near_boundary) {
                ++boundary;
            } else {
                ++disagreements;
            }
        }
    }
    const double dt = seconds_since(t0);
    o.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
    o.require(dt < kAc2BudgetS, "runtime");
    o.detail << " " << kAc2Instances << " instances, " << disagreements << " disagreements, " << boundary
             << " within the 1 s boundary tolerance, " << dt << " s";
    return o;
}

SimulationConfig perfect(AdmissionPolicy p) {
    SimulationConfig c;
    c.policy = p;
    c.perfect_forecasts = true;
    return c;
}

Outcome ac3() {
    Outcome o;
    double worst = 0;
    for (const auto& spec : invariant_scenarios()) {
        const auto t0 = Clock::now();
        const auto s = synthesize_scenario(spec);
        SimulationConfig oracle_cfg;
        oracle_cfg.policy = AdmissionPolicy::optimal_ree_aware();
        const auto a = run(s, oracle_cfg);
        const auto b = run(s, perfect(AdmissionPolicy::expected()));
        const double dt = seconds_since(t0);
        worst = std::max(worst, dt);
        o.require(a.grid_energy == 0.0, tag(spec) + " optimal-ree-aware grid " + std::to_string(a.grid_energy));
        o.require(b.grid_energy == 0.0, tag(spec) + " perfect cucumber grid " + std::to_string(b.grid_energy));
        o.require(dt < kAc3BudgetPerScenarioS, tag(spec) + " runtime");
    }
    o.detail << " " << invariant_scenarios().size() << " scenarios, slowest " << worst << " s";
    return o;
}

Outcome ac4() {
    Outcome o;
    std::size_t runs = 0, accepted = 0;
    for (const auto& spec : invariant_scenarios()) {
        const auto s = synthesize_scenario(spec);
        for (const auto& p : {AdmissionPolicy::optimal_no_ree(), AdmissionPolicy::optimal_ree_aware(),
                              AdmissionPolicy::naive(), AdmissionPolicy::conservative(), AdmissionPolicy::expected(),
                              AdmissionPolicy::optimistic()}) {
            const auto m = run(s, perfect(p));
            ++runs;
            accepted += m.accepted;
            o.require(m.deadline_misses == 0,
                      tag(spec) + " " + p.label() + " misses " + std::to_string(m.deadline_misses));
        }
    }
    o.detail << " " << runs << " runs, " << accepted << " accepted jobs";
    return o;
}

Outcome ac5() {
    Outcome o;
    const std::vector<SiteProfile> sites{berlin_like(), mexico_city_like(), cape_town_like()};
    int violations = 0;
    for (int k = 0; k < kAc5Scenarios; ++k) {
        SyntheticSpec spec;
        spec.site = sites[static_cast<std::size_t>(k) % sites.size()];
        spec.kind = k % 2 == 0 ? WorkloadKind::relaxed_deadlines : WorkloadKind::tight_deadlines;
        spec.days = kAc5Days;
        spec.seed = 100 + static_cast<std::uint64_t>(k);
        spec.ensemble_members = kAc5Members;
        const auto s = synthesize_scenario(spec);
        std::vector<std::size_t> counts;
        for (double alpha : {0.1, 0.5, 0.9}) {
            SimulationConfig c;
            c.policy = AdmissionPolicy::cucumber(alpha);
            c.seed = spec.seed;
            counts.push_back(run(s, c).accepted);
        }
        if (!(counts[0] <= counts[1] && counts[1] <= counts[2])) {
            ++violations;
            o.require(false, tag(spec) + " seed " + std::to_string(spec.seed) + " accepted " +
                                 std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
                                 std::to_string(counts[2]));
        }
    }
    o.detail << " " << kAc5Scenarios << " ensemble scenarios, " << violations << " violations";
    return o;
}

Outcome ac6() {
    Outcome o;
    SyntheticSpec spec;
    spec.site = cape_town_like();
    spec.kind = WorkloadKind::relaxed_deadlines;
    spec.days = kAc6Days;
    spec.seed = 1;
    const auto s = synthesize_scenario(spec);

    // First actual production > 0 per day.
    std::map<std::int64_t, Seconds> sunrise;
    const auto& prod = s.production_actual;
    for (std::size_t i = 0; i < prod.size(); ++i) {
        const auto t = prod.grid().time_at(i);
        const auto day = floor_to_day(static_cast<Seconds>(t));
        if (prod[i] > 0.0 && !sunrise.contains(day)) {
            sunrise[day] = static_cast<Seconds>(t);
        }
    }
    auto before_sunrise = [&](const RunMetrics& m) {
        std::size_t n = 0;
        for (const auto& j : m.jobs) {
            const auto it = sunrise.find(floor_to_day(j.arrival));
            if (j.accepted && it != sunrise.end() && j.arrival < it->second) {
                ++n;
            }
        }
        return n;
    };
    SimulationConfig c;
    c.policy = AdmissionPolicy::expected();
    const auto cucumber = run(s, c);
    c.policy = AdmissionPolicy::naive();
    const auto naive = run(s, c);
    const auto cu = before_sunrise(cucumber), na = before_sunrise(naive);
    o.require(cu >= 1, "cucumber accepted none before sunrise");
    o.require(na == 0, "naive accepted " + std::to_string(na) + " before sunrise");
    o.detail << " before first production: cucumber " << cu << ", naive " << na << "; hourly cucumber";
    for (auto h : report::hourly_acceptance(cucumber)) {
        o.detail << " " << h;
    }
    return o;
}

Outcome ac7() {
    Outcome o;
    const auto dir = scratch("determinism");
    const fs::path matrix = fs::path(CUCUMBER_SOURCE_DIR) / "configs" / "determinism_matrix.json";
    std::vector<std::string> outputs;
    for (int k = 0; k < 2; ++k) {
        const auto out = dir / ("run" + std::to_string(k) + ".csv");
        const int code = shell(quoted(CUCUMBER_SIM_BINARY) + " sweep " + quoted(matrix) + " --jobs 2 --out " +
                               quoted(out) + " > /dev/null");
        o.require(code == 0, "sweep exit status " + std::to_string(code));
        outputs.push_back(slurp(out));
    }
    o.require(!outputs[0].empty(), "empty report");
    o.require(outputs[0] == outputs[1], "reports differ");
    o.detail << " " << outputs[0].size() << " bytes each";
    return o;
}

Outcome ac8() {
    Outcome o;
    const auto dir = scratch("full");
    const fs::path matrix = fs::path(CUCUMBER_SOURCE_DIR) / "configs" / "full_matrix.json";
    const auto out = dir / "full.csv";
    const auto t0 = Clock::now();
    const int code = shell(quoted(CUCUMBER_SIM_BINARY) + " sweep " + quoted(matrix) + " --jobs 1 --out " +
                           quoted(out) + " > /dev/null");
    const double dt = seconds_since(t0);
    const auto csv = slurp(out);
    const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    o.require(code == 0, "sweep exit status " + std::to_string(code));
    o.require(rows == kAc8Cells + 1, std::to_string(rows == 0 ? 0 : rows - 1) + " rows");
    o.require(dt < kAc8BudgetS, "runtime");
    o.detail << " " << (rows == 0 ? 0 : rows - 1) << " cells, " << dt << " s";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 equation unit suite", ac1},
        {"AC2 admission vs tick oracle", ac2},
        {"AC3 zero grid energy with perfect knowledge", ac3},
        {"AC4 no misses with perfect forecasts", ac4},
        {"AC5 acceptance non-decreasing in alpha", ac5},
        {"AC6 night-time acceptance shape", ac6},
        {"AC7 sweep determinism", ac7},
        {"AC8 36-cell matrix", ac8},
    };
    bool all = true;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " exception: " << e.what();
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ":" << o.detail.str() << std::endl;
    }
    return all ? 0 : 1;
}
