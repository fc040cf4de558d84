#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "railyard/ev/policy.hpp"
#include "railyard/scenario/generator.hpp"

using namespace railyard;
using namespace railyard::ev;
using scenario::EvSession;
using scenario::VehicleKind;

namespace {

constexpr double kDt = 1.0 / 6.0;

EvSession car(std::size_t arrival, std::size_t departure, double energy, double p_max = 22.0) {
    EvSession s;
    s.kind = VehicleKind::Car;
    s.arrival = arrival;
    s.departure = departure;
    s.energy_kwh = energy;
    s.p_nominal_kw = 11.0;
    s.p_max_kw = p_max;
    s.efficiency = 1.0;
    return s;
}

scenario::Scenario quiet_day(std::vector<EvSession> sessions, double demand = 0.0) {
    const scenario::TimeGrid g;
    scenario::SeriesBundle b;
    b.demand_kw.assign(g.steps(), demand);
    b.rbe_available_kw.assign(g.steps(), 0.0);
    b.radiation_w_m2.assign(g.steps(), 0.0);
    b.buy_eur_kwh.assign(g.steps(), 0.1);
    b.sell_eur_kwh.assign(g.steps(), 0.1);
    return scenario::build_scenario(0, 1.0, g, std::move(b), std::move(sessions), scenario::PvParams{});
}

// Minimum peak when per-vehicle caps never bind: a single shared resource
// meeting cumulative deadlines, so the aggregate demand-by-deadline bound
// is exact.
double aggregate_peak_oracle(const RhProblem& p) {
    double best = p.min_first_step_kw;
    for (std::size_t k = p.step + 1; k <= p.horizon_end; ++k) {
        double need = 0.0;
        for (std::size_t i = 0; i < p.vehicles.size(); ++i) {
            const EvSession& s = (*p.sessions)[p.vehicles[i]];
            need += std::max(0.0, satisfaction_threshold(s, k, p.dt) - p.soc[i]) / s.efficiency;
        }
        best = std::max(best, need / (static_cast<double>(k - p.step) * p.dt));
    }
    return best;
}

}  // namespace

TEST_CASE("plugged-in set follows parking window and charge state") {
    std::vector<EvSession> none;
    CHECK(plugged_in_set(none, {}, 10).empty());

    std::vector<EvSession> s = {car(10, 20, 5.0), car(5, 30, 5.0)};
    std::vector<double> soc = {0.0, 5.0};
    const auto set = plugged_in_set(s, soc, 12);
    REQUIRE(set.size() == 1);
    CHECK(set[0] == 0);
    CHECK(plugged_in_set(s, soc, 20).empty());
    CHECK(plugged_in_set(s, soc, 9).empty());
}

TEST_CASE("required power and uncoordinated step") {
    std::vector<EvSession> s = {car(0, 100, 50.0), car(0, 100, 50.0)};
    std::vector<double> soc = {48.0, 0.0};
    CHECK(required_power(s, soc, {}, kDt) == 0.0);
    CHECK(required_power(s, soc, {0}, kDt) == doctest::Approx(12.0));
    CHECK(required_power(s, soc, {0, 1}, kDt) == doctest::Approx(34.0));

    const auto p = uncoordinated_step(s, soc, {0, 1}, kDt);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == doctest::Approx(12.0));
    CHECK(p[1] == doctest::Approx(22.0));
    CHECK(uncoordinated_step(s, soc, {}, kDt).empty());
}

TEST_CASE("satisfaction threshold") {
    const EvSession s = car(10, 100, 20.0);
    CHECK(satisfaction_threshold(s, 10, kDt) == 0.0);
    CHECK(satisfaction_threshold(s, 13, kDt) == doctest::Approx(5.5));
    CHECK(satisfaction_threshold(s, 100, kDt) == 20.0);
}

TEST_CASE("horizon is the latest fulfillment with a one-step floor") {
    // 30 and 42 steps at 11 kW and 1/6 h.
    std::vector<EvSession> s = {car(0, 100, 55.0), car(0, 100, 77.0)};
    CHECK(horizon_end(s, {0, 1}, 5, kDt) == 42);
    CHECK(horizon_end(s, {0}, 5, kDt) == 30);
    CHECK(horizon_end(s, {0}, 35, kDt) == 36);
    CHECK_THROWS_AS(horizon_end(s, {}, 5, kDt), std::invalid_argument);
}

TEST_CASE("single car is charged flat at its nominal rate") {
    std::vector<EvSession> s = {car(40, 100, 11.0)};
    RhProblem p;
    p.step = 40;
    p.dt = kDt;
    p.sessions = &s;
    p.vehicles = {0};
    p.soc = {0.0};
    p.horizon_end = horizon_end(s, p.vehicles, p.step, kDt);
    CHECK(p.horizon_end == 46);
    const RhSchedule sched = optimize_charging(p);
    CHECK(sched.peak_kw == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(sched.first_step_total() == doctest::Approx(11.0).epsilon(1e-9));

    const auto sc = quiet_day(s);
    const ChargingProfile opt = simulate_day(sc, ChargingMode::Optimized);
    const ChargingProfile unc = simulate_day(sc, ChargingMode::Uncoordinated);
    CHECK(opt.day_peak_kw == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(unc.day_peak_kw == doctest::Approx(22.0));
    CHECK(opt.delivered_kwh[0] == doctest::Approx(11.0));
    CHECK(unc.delivered_kwh[0] == doctest::Approx(11.0));
}

TEST_CASE("day without sessions has a zero profile") {
    const auto sc = quiet_day({});
    for (ChargingMode mode : {ChargingMode::Optimized, ChargingMode::Uncoordinated}) {
        const ChargingProfile prof = simulate_day(sc, mode);
        CHECK(prof.day_peak_kw == 0.0);
        for (double p : prof.p_ev_kw) CHECK(p == 0.0);
    }
}

TEST_CASE("line limit below train demand is reported as infeasible") {
    std::vector<EvSession> s = {car(40, 100, 11.0)};
    const auto sc = quiet_day(s, 500.0);
    PolicyOptions opts;
    opts.line_limit_kw = 400.0;
    try {
        simulate_day(sc, ChargingMode::Optimized, opts);
        FAIL("expected ChargingInfeasible");
    } catch (const ChargingInfeasible& e) {
        CHECK(e.constraint_class() == InfeasibleClass::LineLimit);
        CHECK(e.step() == 0);
    }

    // Demand fits, but not demand plus the nominal-rate charging.
    std::vector<double> demand(144, 500.0);
    RhProblem p;
    p.step = 40;
    p.dt = kDt;
    p.sessions = &s;
    p.vehicles = {0};
    p.soc = {0.0};
    p.horizon_end = 46;
    p.demand_kw = &demand;
    p.line_limit_kw = 505.0;
    try {
        optimize_charging(p);
        FAIL("expected ChargingInfeasible");
    } catch (const ChargingInfeasible& e) {
        CHECK(e.constraint_class() == InfeasibleClass::LineLimit);
        CHECK(e.step() == 40);
    }
    p.line_limit_kw = 511.0;
    CHECK(optimize_charging(p).peak_kw == doctest::Approx(11.0));
}

TEST_CASE("line limit binds while charging") {
    std::vector<EvSession> s = {car(40, 100, 30.0), car(40, 100, 30.0)};
    std::vector<double> demand(144, 100.0);
    for (std::size_t t = 42; t < 46; ++t) demand[t] = 120.0;
    auto sc = quiet_day(s, 100.0);
    sc.demand_kw = demand;
    PolicyOptions opts;
    opts.line_limit_kw = 145.0;
    const ChargingProfile prof = simulate_day(sc, ChargingMode::Optimized, opts);
    for (std::size_t t = 0; t < 144; ++t) CHECK(prof.p_ev_kw[t] + demand[t] <= 145.0 + 1e-6);
    for (double d : prof.delivered_kwh) CHECK(d == doctest::Approx(30.0));
}

TEST_CASE("horizon LP peak matches the deadline oracle on random instances") {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_real_distribution<double> energy(0.5, 60.0);
    std::uniform_int_distribution<int> age(0, 12);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t t = 50;
        std::vector<EvSession> s;
        std::vector<double> soc;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            EvSession e = car(t - static_cast<std::size_t>(age(rng)), 140, energy(rng), 1000.0);
            const double theta = satisfaction_threshold(e, t, kDt);
            const double level = theta + frac(rng) * 0.5 * (e.energy_kwh - theta);
            s.push_back(e);
            soc.push_back(level);
        }
        RhProblem p;
        p.step = t;
        p.dt = kDt;
        p.sessions = &s;
        p.vehicles = plugged_in_set(s, soc, t);
        if (p.vehicles.empty()) continue;
        for (std::size_t v : p.vehicles) p.soc.push_back(soc[v]);
        p.horizon_end = horizon_end(s, p.vehicles, t, kDt);
        p.min_first_step_kw = frac(rng) < 0.3 ? 20.0 * frac(rng) : 0.0;

        const RhSchedule sched = optimize_charging(p);
        const double oracle = aggregate_peak_oracle(p);
        CHECK(std::abs(sched.peak_kw - oracle) <= 1e-3);
        CHECK(std::abs(sched.first_step_total() - sched.peak_kw) <= 1e-6);
        for (std::size_t j = 1; j + p.step < p.horizon_end; ++j) {
            double total = 0.0;
            for (const auto& row : sched.power_kw) total += row[j];
            CHECK(total <= sched.first_step_total() + 1e-6);
        }
    }
}

TEST_CASE("synthetic days keep the charging invariants") {
    scenario::ScenarioConfig cfg;
    for (std::size_t i = 0; i < 6; ++i) {
        const auto sc = scenario::generate_scenario(cfg, 99, i, 6);
        const ChargingProfile opt = simulate_day(sc, ChargingMode::Optimized);
        const ChargingProfile unc = simulate_day(sc, ChargingMode::Uncoordinated);
        CHECK(opt.day_peak_kw <= unc.day_peak_kw + 1e-6);
        CHECK(opt.rh_solves > 0);

        for (const ChargingProfile* prof : {&opt, &unc}) {
            std::vector<double> replay(sc.sessions.size(), 0.0);
            double peak = 0.0;
            for (std::size_t t = 0; t < sc.grid.steps(); ++t) {
                double total = 0.0;
                for (const VehiclePower& vp : prof->per_step[t]) {
                    const EvSession& s = sc.sessions[vp.vehicle];
                    CHECK(vp.p_kw >= 0.0);
                    CHECK(vp.p_kw <= s.p_max_kw + 1e-9);
                    CHECK(t >= s.arrival);
                    CHECK(t < s.departure);
                    replay[vp.vehicle] += s.efficiency * vp.p_kw * sc.grid.dt();
                    CHECK(replay[vp.vehicle] <= s.energy_kwh + 1e-9);
                    total += vp.p_kw;
                }
                CHECK(total == prof->p_ev_kw[t]);
                peak = std::max(peak, total);
            }
            CHECK(peak == prof->day_peak_kw);
            for (std::size_t v = 0; v < sc.sessions.size(); ++v) CHECK(replay[v] == prof->delivered_kwh[v]);
        }

        for (std::size_t v = 0; v < sc.sessions.size(); ++v) {
            const EvSession& s = sc.sessions[v];
            const double need = std::min(satisfaction_threshold(s, s.departure, sc.grid.dt()), s.energy_kwh);
            CHECK(opt.delivered_kwh[v] >= need - 1e-6);
        }
    }
}
