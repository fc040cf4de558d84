#include "railyard/ems/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace railyard::ems {

using scenario::InputError;
using solver::Integrality;
using solver::RowSense;
using solver::VarId;

namespace {

double discharge_coefficient(const EssParams& ess) {
    return ess.discharge_form == DischargeForm::MultiplyEta ? ess.eta_discharge : 1.0 / ess.eta_discharge;
}

void check_alignment(const Scenario& sc, const std::vector<double>& p_ev_kw) {
    if (p_ev_kw.size() != sc.grid.steps()) {
        throw InputError(fmt::format("EV profile length mismatch: {} values for {} steps", p_ev_kw.size(),
                                     sc.grid.steps()));
    }
    for (std::size_t t = 0; t < p_ev_kw.size(); ++t) {
        if (!std::isfinite(p_ev_kw[t]) || p_ev_kw[t] < 0.0) {
            throw InputError(fmt::format("EV profile step {}: invalid power {}", t, p_ev_kw[t]));
        }
    }
}

// Steps whose net load cannot be balanced under any binary choice.
void check_steps(const Scenario& sc, const std::vector<double>& p_ev_kw, const EmsParams& p) {
    for (std::size_t t = 0; t < p_ev_kw.size(); ++t) {
        const double net = sc.demand_kw[t] + p_ev_kw[t] - sc.pv_kw[t];
        if (net > p.p_buy_max_kw + p.ess.p_discharge_max_kw) {
            throw EmsInfeasible(t, fmt::format("net load {:.3f} kW exceeds purchase plus discharge limits", net));
        }
        if (-net > p.p_sell_max_kw + p.ess.p_charge_max_kw) {
            throw EmsInfeasible(t, fmt::format("surplus {:.3f} kW exceeds sale plus charge limits", -net));
        }
    }
}

}  // namespace

const char* to_string(DischargeForm form) { return form == DischargeForm::MultiplyEta ? "multiply" : "divide"; }

void validate(const EmsParams& p) {
    const auto fail = [](const char* key, const char* what) {
        throw InputError(fmt::format("{}: {}", key, what));
    };
    if (!(p.p_buy_max_kw >= 0.0)) fail("exchange.p_buy_max", "must be non-negative");
    if (!(p.p_sell_max_kw >= 0.0)) fail("exchange.p_sell_max", "must be non-negative");
    const EssParams& e = p.ess;
    if (!(e.capacity_kwh >= 0.0)) fail("ess.capacity", "must be non-negative");
    if (!(e.soc_min_kwh >= 0.0 && e.soc_min_kwh <= e.capacity_kwh)) fail("ess.soc_min", "must lie in [0, capacity]");
    if (!(e.soc_init_kwh >= e.soc_min_kwh && e.soc_init_kwh <= e.capacity_kwh)) {
        fail("ess.soc_init", "must lie in [soc_min, capacity]");
    }
    if (!(e.p_charge_max_kw > 0.0)) fail("ess.p_charge_max", "must be positive");
    if (!(e.p_discharge_max_kw > 0.0)) fail("ess.p_discharge_max", "must be positive");
    if (!(e.self_discharge >= 0.0 && e.self_discharge < 1.0)) fail("ess.self_discharge", "must lie in [0, 1)");
    if (!(e.eta_charge > 0.0 && e.eta_charge <= 1.0)) fail("ess.eta_charge", "must lie in (0, 1]");
    if (!(e.eta_discharge > 0.0 && e.eta_discharge <= 1.0)) fail("ess.eta_discharge", "must lie in (0, 1]");
}

EmsInfeasible::EmsInfeasible(std::size_t step, const std::string& detail)
    : std::runtime_error(fmt::format("EMS infeasible at step {}: {}", step, detail)), step_(step) {}

EmsModel build_ems_model(const Scenario& sc, const std::vector<double>& p_ev_kw, const EmsParams& params) {
    validate(params);
    check_alignment(sc, p_ev_kw);
    const std::size_t n = sc.grid.steps();
    const double dt = sc.grid.dt();
    const EssParams& ess = params.ess;
    const double keep = 1.0 - ess.self_discharge;
    const double out_coef = discharge_coefficient(ess);

    EmsModel em;
    auto& m = em.model;
    for (std::size_t t = 0; t < n; ++t) {
        em.p_g.push_back(m.add_variable(fmt::format("p_g_{}", t), 0.0, solver::kInfinity));
        em.p_s.push_back(m.add_variable(fmt::format("p_s_{}", t), 0.0, solver::kInfinity));
        em.p_bplus.push_back(m.add_variable(fmt::format("p_bplus_{}", t), 0.0, solver::kInfinity));
        em.p_bminus.push_back(m.add_variable(fmt::format("p_bminus_{}", t), 0.0, solver::kInfinity));
        em.p_rbe.push_back(m.add_variable(fmt::format("p_rbe_{}", t), 0.0, sc.rbe_available_kw[t]));
        double soc_lo = ess.soc_min_kwh;
        if (ess.terminal_soc_at_least_initial && t + 1 == n) soc_lo = std::max(soc_lo, ess.soc_init_kwh);
        em.soc_b.push_back(m.add_variable(fmt::format("soc_b_{}", t), soc_lo, ess.capacity_kwh));
        em.p_ev.push_back(m.add_variable(fmt::format("p_ev_{}", t), p_ev_kw[t], p_ev_kw[t]));
        em.u_g.push_back(m.add_variable(fmt::format("u_g_{}", t), 0.0, 1.0, Integrality::Binary));
        em.u_b.push_back(m.add_variable(fmt::format("u_b_{}", t), 0.0, 1.0, Integrality::Binary));
    }

    for (std::size_t t = 0; t < n; ++t) {
        m.add_constraint({{em.p_g[t], 1.0},
                          {em.p_bminus[t], 1.0},
                          {em.p_ev[t], -1.0},
                          {em.p_bplus[t], -1.0},
                          {em.p_s[t], -1.0}},
                         RowSense::Equal, sc.demand_kw[t] - sc.pv_kw[t], fmt::format("balance_{}", t));
        m.add_constraint({{em.p_g[t], 1.0}, {em.u_g[t], -params.p_buy_max_kw}}, RowSense::LessEqual, 0.0,
                         fmt::format("buy_{}", t));
        m.add_constraint({{em.p_s[t], 1.0}, {em.u_g[t], params.p_sell_max_kw}}, RowSense::LessEqual,
                         params.p_sell_max_kw, fmt::format("sell_{}", t));
        m.add_constraint({{em.p_rbe[t], 1.0}, {em.p_bplus[t], 1.0}, {em.u_b[t], -ess.p_charge_max_kw}},
                         RowSense::LessEqual, 0.0, fmt::format("charge_{}", t));
        m.add_constraint({{em.p_bminus[t], 1.0}, {em.u_b[t], ess.p_discharge_max_kw}}, RowSense::LessEqual,
                         ess.p_discharge_max_kw, fmt::format("discharge_{}", t));
        // Valid inequalities that leave the integer set unchanged but make
        // each step's relaxation the hull of its on/off choices.
        const double rbe_cap = sc.rbe_available_kw[t];
        if (rbe_cap > 0.0 && rbe_cap < ess.p_charge_max_kw) {
            m.add_constraint({{em.p_rbe[t], 1.0}, {em.u_b[t], -rbe_cap}}, RowSense::LessEqual, 0.0,
                             fmt::format("rbe_on_{}", t));
        }
        const double net = sc.demand_kw[t] + p_ev_kw[t] - sc.pv_kw[t];
        const double buy_cap = std::max(0.0, net + ess.p_charge_max_kw);
        if (buy_cap < params.p_buy_max_kw) {
            m.add_constraint({{em.p_g[t], 1.0}, {em.u_g[t], -buy_cap}}, RowSense::LessEqual, 0.0,
                             fmt::format("buy_tight_{}", t));
        }
        const double sell_cap = std::max(0.0, -net + ess.p_discharge_max_kw);
        if (sell_cap < params.p_sell_max_kw) {
            m.add_constraint({{em.p_s[t], 1.0}, {em.u_g[t], sell_cap}}, RowSense::LessEqual, sell_cap,
                             fmt::format("sell_tight_{}", t));
        }

        // Only one direction is active per step, so a step never moves more
        // energy than the stored level above the floor or the headroom allows.
        const double soc_lo = m.variable(em.soc_b[t]).lower;
        std::vector<solver::Term> drain = {{em.p_bminus[t], out_coef * dt}, {em.u_b[t], -soc_lo}};
        std::vector<solver::Term> fill = {{em.p_rbe[t], ess.eta_charge * dt}, {em.p_bplus[t], ess.eta_charge * dt}};
        double drain_rhs = -soc_lo;
        double fill_rhs = ess.capacity_kwh;
        if (t == 0) {
            drain_rhs += keep * ess.soc_init_kwh;
            fill_rhs -= keep * ess.soc_init_kwh;
        } else {
            drain.push_back({em.soc_b[t - 1], -keep});
            fill.push_back({em.soc_b[t - 1], keep});
        }
        m.add_constraint(std::move(drain), RowSense::LessEqual, drain_rhs, fmt::format("drain_{}", t));
        m.add_constraint(std::move(fill), RowSense::LessEqual, fill_rhs, fmt::format("fill_{}", t));

        std::vector<solver::Term> rec = {{em.soc_b[t], 1.0},
                                         {em.p_rbe[t], -ess.eta_charge * dt},
                                         {em.p_bplus[t], -ess.eta_charge * dt},
                                         {em.p_bminus[t], out_coef * dt}};
        double rhs = 0.0;
        if (t == 0) {
            rhs = keep * ess.soc_init_kwh;
        } else {
            rec.push_back({em.soc_b[t - 1], -keep});
        }
        m.add_constraint(std::move(rec), RowSense::Equal, rhs, fmt::format("soc_{}", t));

        m.set_objective_coefficient(em.p_g[t], sc.buy_eur_kwh[t] * dt);
        m.set_objective_coefficient(em.p_s[t], -sc.sell_eur_kwh[t] * dt);
    }
    return em;
}

EmsSolution solve_ems(const Scenario& sc, const std::vector<double>& p_ev_kw, const EmsParams& params,
                      const EmsOptions& options) {
    EmsModel em = build_ems_model(sc, p_ev_kw, params);
    check_steps(sc, p_ev_kw, params);
    const std::size_t n = sc.grid.steps();

    solver::MilpOptions mo;
    mo.gap_limit = options.gap_limit;
    mo.node_limit = options.node_limit;
    mo.time_limit_seconds = options.time_limit_seconds;
    mo.rins_node_limit = options.rins_node_limit;
    mo.rins_frequency = options.rins_frequency;
    if (options.rounding_hint) {
        // Pick the dominant direction of each exchange pair.
        mo.rounding_hint = [&em, n](const std::vector<double>& x) -> std::optional<std::vector<double>> {
            std::vector<double> out = x;
            for (std::size_t t = 0; t < n; ++t) {
                out[em.u_g[t].index] = x[em.p_g[t].index] >= x[em.p_s[t].index] ? 1.0 : 0.0;
                const double in = x[em.p_rbe[t].index] + x[em.p_bplus[t].index];
                out[em.u_b[t].index] = in >= x[em.p_bminus[t].index] ? 1.0 : 0.0;
            }
            return out;
        };
    }
    const solver::MilpSolution ms = solver::solve_milp(em.model, mo);
    if (ms.status == solver::MilpStatus::Infeasible) throw EmsInfeasible(0, "no dispatch satisfies the day");
    if (ms.status == solver::MilpStatus::Unbounded) throw std::runtime_error("EMS relaxation is unbounded");
    if (ms.status == solver::MilpStatus::NoSolutionFound) {
        throw std::runtime_error("EMS search hit its limit before finding a dispatch");
    }

    // Re-solve with the binaries fixed exactly so near-integral values
    // cannot leak flow through a closed direction.
    std::vector<double> x = ms.values;
    solver::LinearModel fixed = em.model;
    for (std::size_t t = 0; t < n; ++t) {
        for (VarId u : {em.u_g[t], em.u_b[t]}) {
            const double r = std::round(x[u.index]);
            fixed.set_bounds(u, r, r);
        }
    }
    const solver::LpSolution polished = solver::solve_lp(fixed);
    if (polished.status == solver::LpStatus::Optimal) x = polished.values;

    EmsSolution sol;
    sol.status = ms.status;
    sol.bound_eur = ms.bound;
    sol.gap = ms.gap;
    sol.nodes = ms.nodes;
    for (std::size_t t = 0; t < n; ++t) {
        sol.p_g.push_back(x[em.p_g[t].index]);
        sol.p_s.push_back(x[em.p_s[t].index]);
        sol.p_bplus.push_back(x[em.p_bplus[t].index]);
        sol.p_bminus.push_back(x[em.p_bminus[t].index]);
        sol.p_rbe.push_back(x[em.p_rbe[t].index]);
        sol.soc_b.push_back(x[em.soc_b[t].index]);
        sol.u_g.push_back(static_cast<int>(std::lround(x[em.u_g[t].index])));
        sol.u_b.push_back(static_cast<int>(std::lround(x[em.u_b[t].index])));
    }
    const double dt = sc.grid.dt();
    double cost = 0.0;
    for (std::size_t t = 0; t < n; ++t) cost += (sc.buy_eur_kwh[t] * sol.p_g[t] - sc.sell_eur_kwh[t] * sol.p_s[t]) * dt;
    sol.cost_eur = cost;
    return sol;
}

double baseline_cost(const Scenario& sc, const std::vector<double>& p_ev_kw) {
    check_alignment(sc, p_ev_kw);
    double cost = 0.0;
    for (std::size_t t = 0; t < p_ev_kw.size(); ++t) {
        cost += sc.buy_eur_kwh[t] * (sc.demand_kw[t] + p_ev_kw[t]) * sc.grid.dt();
    }
    return cost;
}

double expected_cost(const std::vector<double>& costs, const std::vector<double>& probabilities) {
    if (costs.size() != probabilities.size()) {
        throw InputError(fmt::format("expected cost: {} costs but {} probabilities", costs.size(),
                                     probabilities.size()));
    }
    double total_p = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < costs.size(); ++s) {
        if (probabilities[s] < 0.0) throw InputError(fmt::format("expected cost: negative probability at {}", s));
        total_p += probabilities[s];
        total += probabilities[s] * costs[s];
    }
    if (std::abs(total_p - 1.0) > 1e-9) {
        throw InputError(fmt::format("expected cost: probabilities sum to {}, not 1", total_p));
    }
    return total;
}

double ReplayResiduals::worst_linear() const {
    return std::max({balance, limits, soc_bounds, soc_recursion});
}

ReplayResiduals replay(const Scenario& sc, const std::vector<double>& p_ev_kw, const EmsParams& params,
                       const EmsSolution& sol) {
    check_alignment(sc, p_ev_kw);
    const std::size_t n = sc.grid.steps();
    const double dt = sc.grid.dt();
    const EssParams& ess = params.ess;
    ReplayResiduals r;
    const auto worse = [](double& slot, double v) { slot = std::max(slot, v); };

    double prev = ess.soc_init_kwh;
    double cost = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double g = sol.p_g[t], s = sol.p_s[t], bp = sol.p_bplus[t], bm = sol.p_bminus[t], rbe = sol.p_rbe[t];
        const int ug = sol.u_g[t], ub = sol.u_b[t];
        worse(r.balance, std::abs(g + sc.pv_kw[t] + bm - sc.demand_kw[t] - p_ev_kw[t] - bp - s));
        worse(r.exchange_exclusive, g * s);
        worse(r.storage_exclusive, (rbe + bp) * bm);
        for (double v : {g, s, bp, bm, rbe}) worse(r.limits, -v);
        worse(r.limits, g - params.p_buy_max_kw * ug);
        worse(r.limits, s - params.p_sell_max_kw * (1 - ug));
        worse(r.limits, rbe - sc.rbe_available_kw[t]);
        worse(r.limits, rbe + bp - ess.p_charge_max_kw * ub);
        worse(r.limits, bm - ess.p_discharge_max_kw * (1 - ub));
        if ((ug != 0 && ug != 1) || (ub != 0 && ub != 1)) worse(r.limits, 1.0);
        worse(r.soc_bounds, ess.soc_min_kwh - sol.soc_b[t]);
        worse(r.soc_bounds, sol.soc_b[t] - ess.capacity_kwh);
        const double expected = prev - ess.self_discharge * prev + ess.eta_charge * (rbe + bp) * dt -
                                discharge_coefficient(ess) * bm * dt;
        worse(r.soc_recursion, std::abs(sol.soc_b[t] - expected));
        prev = sol.soc_b[t];
        cost += (sc.buy_eur_kwh[t] * g - sc.sell_eur_kwh[t] * s) * dt;
    }
    if (ess.terminal_soc_at_least_initial) worse(r.soc_bounds, ess.soc_init_kwh - sol.soc_b.back());
    r.cost = std::abs(cost - sol.cost_eur);
    return r;
}

void write_dispatch_csv(std::ostream& out, const EmsSolution& sol) {
    out << "step,p_g,p_s,p_bplus,p_bminus,p_rbe,soc_b,u_g,u_b\n";
    for (std::size_t t = 0; t < sol.p_g.size(); ++t) {
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", t, sol.p_g[t], sol.p_s[t],
                           sol.p_bplus[t], sol.p_bminus[t], sol.p_rbe[t], sol.soc_b[t], sol.u_g[t], sol.u_b[t]);
    }
}

}  // namespace railyard::ems
