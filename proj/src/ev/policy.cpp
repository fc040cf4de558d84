#include "railyard/ev/policy.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "railyard/solver/linear_model.hpp"

namespace railyard::ev {

using solver::kInfinity;
using solver::LinearModel;
using solver::LpStatus;
using solver::RowSense;
using solver::Term;
using solver::VarId;

namespace {

// Vehicles within this much of their demand count as charged.
constexpr double kChargedTolerance = 1e-9;
// Thresholds that miss reachability by less than this are treated as
// accumulated rounding and clamped.
constexpr double kThresholdDrift = 1e-6;

double remaining_power(const EvSession& s, double soc, double dt) {
    return std::max(0.0, (s.energy_kwh - soc) / (s.efficiency * dt));
}

double demand_at(const std::vector<double>& demand, std::size_t k) { return demand[k % demand.size()]; }

struct BuiltModel {
    LinearModel model;
    std::vector<std::vector<VarId>> power;  // [vehicle][k - t]
    VarId peak;
};

BuiltModel build_rh_model(const RhProblem& p, bool with_line, bool with_running) {
    const auto& sessions = *p.sessions;
    const std::size_t t = p.step;
    const std::size_t len = p.horizon_end - t;
    BuiltModel b;
    LinearModel& m = b.model;

    double total_max = 0.0;
    for (std::size_t v : p.vehicles) total_max += sessions[v].p_max_kw;
    const double eps = total_max > 0.0 ? 0.5e-3 / total_max : 0.0;

    b.peak = m.add_variable("peak", 0.0, kInfinity);
    m.set_objective_coefficient(b.peak, 1.0);

    std::vector<Term> first_step;
    std::vector<std::vector<Term>> step_sum(len);
    b.power.resize(p.vehicles.size());
    for (std::size_t i = 0; i < p.vehicles.size(); ++i) {
        const EvSession& s = sessions[p.vehicles[i]];
        const double soc0 = p.soc[i];
        const double gain = s.efficiency * p.dt;
        const std::size_t until_departure = s.departure > t ? s.departure - t : 0;
        const double alpha = eps / static_cast<double>(std::max<std::size_t>(1, until_departure));

        VarId prev_soc{};
        for (std::size_t j = 0; j < len; ++j) {
            const VarId pw = m.add_variable(fmt::format("p_{}_{}", p.vehicles[i], t + j), 0.0, s.p_max_kw);
            b.power[i].push_back(pw);
            step_sum[j].push_back({pw, 1.0});
            if (j == 0) {
                first_step.push_back({pw, 1.0});
                m.set_objective_coefficient(pw, -alpha);
            }
            const std::size_t k = t + j + 1;
            double theta = satisfaction_threshold(s, k, p.dt);
            const double reachable = soc0 + gain * s.p_max_kw * static_cast<double>(j + 1);
            if (theta > reachable && theta - reachable < kThresholdDrift) theta = reachable;
            theta = std::min(theta, s.energy_kwh);
            const VarId soc = m.add_variable(fmt::format("soc_{}_{}", p.vehicles[i], k), theta, s.energy_kwh);
            if (j == 0) {
                m.add_constraint({{soc, 1.0}, {pw, -gain}}, RowSense::Equal, soc0);
            } else {
                m.add_constraint({{soc, 1.0}, {prev_soc, -1.0}, {pw, -gain}}, RowSense::Equal, 0.0);
            }
            prev_soc = soc;
        }
    }

    std::vector<Term> peak_row = first_step;
    peak_row.push_back({b.peak, -1.0});
    m.add_constraint(std::move(peak_row), RowSense::LessEqual, 0.0, "peak");
    if (with_running && p.min_first_step_kw > 0.0) {
        m.add_constraint(first_step, RowSense::GreaterEqual, p.min_first_step_kw, "running_peak");
    }
    for (std::size_t j = 1; j < len; ++j) {
        std::vector<Term> row = step_sum[j];
        for (const Term& term : first_step) row.push_back({term.var, -1.0});
        m.add_constraint(std::move(row), RowSense::LessEqual, 0.0, fmt::format("first_is_peak_{}", t + j));
    }
    if (with_line && p.line_limit_kw) {
        const std::size_t rows = p.scope == LineLimitScope::Horizon ? len : 1;
        for (std::size_t j = 0; j < rows; ++j) {
            m.add_constraint(step_sum[j], RowSense::LessEqual, *p.line_limit_kw - demand_at(*p.demand_kw, t + j),
                             fmt::format("line_{}", t + j));
        }
    }
    return b;
}

}  // namespace

const char* to_string(ChargingMode mode) {
    return mode == ChargingMode::Optimized ? "optimized" : "uncoordinated";
}

const char* to_string(LineLimitScope scope) {
    return scope == LineLimitScope::Horizon ? "horizon" : "first_step";
}

const char* to_string(InfeasibleClass c) {
    switch (c) {
        case InfeasibleClass::LineLimit: return "line_limit";
        case InfeasibleClass::RunningPeak: return "running_peak";
        case InfeasibleClass::Satisfaction: return "satisfaction";
    }
    return "unknown";
}

ChargingInfeasible::ChargingInfeasible(std::size_t step, InfeasibleClass cls, const std::string& detail)
    : std::runtime_error(fmt::format("charging infeasible at step {} ({}): {}", step, to_string(cls), detail)),
      step_(step),
      class_(cls) {}

std::vector<std::size_t> plugged_in_set(const std::vector<EvSession>& sessions, const std::vector<double>& soc,
                                        std::size_t t) {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < sessions.size(); ++v) {
        const EvSession& s = sessions[v];
        if (s.arrival <= t && t < s.departure && soc[v] < s.energy_kwh - kChargedTolerance) out.push_back(v);
    }
    return out;
}

double required_power(const std::vector<EvSession>& sessions, const std::vector<double>& soc,
                      const std::vector<std::size_t>& set, double dt) {
    double total = 0.0;
    for (std::size_t v : set) total += std::min(sessions[v].p_max_kw, remaining_power(sessions[v], soc[v], dt));
    return total;
}

double satisfaction_threshold(const EvSession& s, std::size_t t, double dt) {
    if (t <= s.arrival) return 0.0;
    const double nominal = s.efficiency * s.p_nominal_kw * static_cast<double>(t - s.arrival) * dt;
    return std::min(nominal, s.energy_kwh);
}

std::size_t horizon_end(const std::vector<EvSession>& sessions, const std::vector<std::size_t>& set,
                        std::size_t t, double dt) {
    if (set.empty()) throw std::invalid_argument("horizon_end: empty plugged-in set");
    std::size_t end = t + 1;
    for (std::size_t v : set) end = std::max(end, scenario::fulfillment_time(sessions[v], dt));
    return end;
}

std::vector<double> uncoordinated_step(const std::vector<EvSession>& sessions, const std::vector<double>& soc,
                                       const std::vector<std::size_t>& set, double dt) {
    std::vector<double> out;
    out.reserve(set.size());
    for (std::size_t v : set) out.push_back(std::min(sessions[v].p_max_kw, remaining_power(sessions[v], soc[v], dt)));
    return out;
}

double RhSchedule::first_step_total() const {
    double total = 0.0;
    for (const auto& row : power_kw) total += row.empty() ? 0.0 : row.front();
    return total;
}

RhSchedule optimize_charging(const RhProblem& p, const solver::SimplexOptions& lp) {
    if (p.sessions == nullptr || p.vehicles.empty()) {
        throw std::invalid_argument("optimize_charging: no plugged-in vehicles");
    }
    if (p.soc.size() != p.vehicles.size()) throw std::invalid_argument("optimize_charging: soc size mismatch");
    if (p.horizon_end <= p.step) throw std::invalid_argument("optimize_charging: empty horizon");
    if (p.line_limit_kw && (p.demand_kw == nullptr || p.demand_kw->empty())) {
        throw std::invalid_argument("optimize_charging: line limit needs a demand series");
    }

    BuiltModel b = build_rh_model(p, true, true);
    const solver::LpSolution sol = solver::solve_lp(b.model, lp);
    if (sol.status == LpStatus::Optimal) {
        RhSchedule out;
        out.power_kw.resize(p.vehicles.size());
        for (std::size_t i = 0; i < p.vehicles.size(); ++i) {
            for (VarId id : b.power[i]) out.power_kw[i].push_back(sol.values[id.index]);
        }
        out.peak_kw = sol.values[b.peak.index];
        out.lp_iterations = sol.iterations;
        return out;
    }
    if (sol.status != LpStatus::Infeasible) {
        throw std::runtime_error(fmt::format("charging LP at step {}: solver returned {}", p.step,
                                             solver::to_string(sol.status)));
    }

    // Blame the first family whose removal restores feasibility.
    const bool line_free = solver::solve_lp(build_rh_model(p, false, true).model, lp).status == LpStatus::Optimal;
    if (p.line_limit_kw && line_free) {
        throw ChargingInfeasible(p.step, InfeasibleClass::LineLimit,
                                 fmt::format("line limit {} kW cannot carry the required charging", *p.line_limit_kw));
    }
    const bool running_free = solver::solve_lp(build_rh_model(p, false, false).model, lp).status == LpStatus::Optimal;
    if (running_free) {
        throw ChargingInfeasible(p.step, InfeasibleClass::RunningPeak,
                                 fmt::format("running peak {} kW cannot be met", p.min_first_step_kw));
    }
    throw ChargingInfeasible(p.step, InfeasibleClass::Satisfaction, "satisfaction thresholds are unreachable");
}

ChargingProfile simulate_day(const Scenario& sc, ChargingMode mode, const PolicyOptions& opts) {
    const std::size_t n = sc.grid.steps();
    const double dt = sc.grid.dt();
    const auto& sessions = sc.sessions;

    if (mode == ChargingMode::Optimized && opts.line_limit_kw) {
        for (std::size_t t = 0; t < n; ++t) {
            if (sc.demand_kw[t] > *opts.line_limit_kw) {
                throw ChargingInfeasible(t, InfeasibleClass::LineLimit,
                                         fmt::format("train demand {} kW exceeds the line limit {} kW",
                                                     sc.demand_kw[t], *opts.line_limit_kw));
            }
        }
    }

    ChargingProfile prof;
    prof.mode = mode;
    prof.dt = dt;
    prof.per_step.resize(n);
    prof.p_ev_kw.assign(n, 0.0);
    prof.running_peak_kw.assign(n, 0.0);
    std::vector<double> soc(sessions.size(), 0.0);
    double running_peak = 0.0;

    for (std::size_t t = 0; t < n; ++t) {
        const std::vector<std::size_t> set = plugged_in_set(sessions, soc, t);
        std::vector<double> power;
        if (!set.empty()) {
            const double needed = required_power(sessions, soc, set, dt);
            const double headroom = opts.line_limit_kw ? *opts.line_limit_kw - sc.demand_kw[t] : kInfinity;
            const bool optimize =
                mode == ChargingMode::Optimized && (needed > running_peak || needed > headroom);
            if (optimize) {
                RhProblem p;
                p.step = t;
                p.horizon_end = horizon_end(sessions, set, t, dt);
                p.dt = dt;
                p.sessions = &sessions;
                p.vehicles = set;
                for (std::size_t v : set) p.soc.push_back(soc[v]);
                p.min_first_step_kw = std::min(running_peak, std::max(0.0, headroom));
                p.demand_kw = &sc.demand_kw;
                p.line_limit_kw = opts.line_limit_kw;
                p.scope = opts.scope;
                const RhSchedule sched = optimize_charging(p, opts.lp);
                ++prof.rh_solves;
                power.reserve(set.size());
                for (std::size_t i = 0; i < set.size(); ++i) power.push_back(sched.power_kw[i].front());
                running_peak = std::max(running_peak, sched.peak_kw);
            } else {
                power = uncoordinated_step(sessions, soc, set, dt);
            }
        }

        double total = 0.0;
        for (std::size_t i = 0; i < set.size(); ++i) {
            const std::size_t v = set[i];
            const double cap = std::min(sessions[v].p_max_kw, remaining_power(sessions[v], soc[v], dt));
            const double pw = std::clamp(power[i], 0.0, cap);
            soc[v] += sessions[v].efficiency * pw * dt;
            prof.per_step[t].push_back({v, pw});
            total += pw;
        }
        prof.p_ev_kw[t] = total;
        running_peak = std::max(running_peak, total);
        prof.running_peak_kw[t] = running_peak;
        prof.day_peak_kw = std::max(prof.day_peak_kw, total);
    }
    prof.delivered_kwh = std::move(soc);
    return prof;
}

}  // namespace railyard::ev
