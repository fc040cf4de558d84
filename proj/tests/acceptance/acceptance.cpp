// Acceptance run: one PASS/FAIL line per criterion. Arguments select a
// subset of criteria by number; the default is all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "../oracles.hpp"
#include "railyard/ems/optimizer.hpp"
#include "railyard/ev/policy.hpp"
#include "railyard/pipeline/artifacts.hpp"
#include "railyard/pipeline/experiment.hpp"
#include "railyard/scenario/generator.hpp"
#include "railyard/solver/branch_and_bound.hpp"
#include "railyard/solver/simplex.hpp"

using namespace railyard;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kScenarios = 150;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Verdict& v) {
    if (!v.pass) ++failures;
    std::cout << fmt::format("criterion {} {}: {}: {}", id, v.pass ? "PASS" : "FAIL", title, v.detail) << std::endl;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict solver_oracles() {
    const auto start = Clock::now();
    std::mt19937_64 rng(20240601);
    double worst_lp = 0.0, worst_milp = 0.0;
    std::size_t lp_bad = 0, milp_bad = 0, lp_infeasible = 0, milp_infeasible = 0;

    for (int k = 0; k < 200; ++k) {
        const std::size_t nv = 1 + rng() % 4;
        const std::size_t nr = 1 + rng() % 6;
        const solver::LinearModel m = testing::random_lp(rng, nv, nr);
        const auto oracle = testing::enumerate_vertices(m);
        const solver::LpSolution s = solver::solve_lp(m);
        if (!oracle) {
            ++lp_infeasible;
            if (s.status != solver::LpStatus::Infeasible) ++lp_bad;
            continue;
        }
        if (s.status != solver::LpStatus::Optimal) {
            ++lp_bad;
            continue;
        }
        const double err = std::abs(s.objective - *oracle);
        worst_lp = std::max(worst_lp, err);
        if (err > 1e-7) ++lp_bad;
    }

    for (int k = 0; k < 100; ++k) {
        const std::size_t nbin = 1 + rng() % 12;
        const std::size_t ncont = rng() % 3;
        const std::size_t nr = 1 + rng() % 6;
        const solver::LinearModel m = testing::random_milp(rng, nbin, ncont, nr);
        const auto oracle = testing::brute_force_milp(m);
        const solver::MilpSolution s = solver::solve_milp(m);
        if (!oracle) {
            ++milp_infeasible;
            if (s.status != solver::MilpStatus::Infeasible) ++milp_bad;
            continue;
        }
        if (s.status != solver::MilpStatus::Optimal) {
            ++milp_bad;
            continue;
        }
        const double err = std::abs(s.objective - *oracle);
        worst_milp = std::max(worst_milp, err);
        if (err > 1e-6) ++milp_bad;
    }

    const double elapsed = seconds_since(start);
    Verdict v;
    v.pass = lp_bad == 0 && milp_bad == 0 && elapsed < 60.0;
    v.detail = fmt::format(
        "200 LPs ({} infeasible) worst error {:.2e}, {} mismatches; 100 MILPs ({} infeasible) worst error {:.2e}, "
        "{} mismatches; {:.1f} s",
        lp_infeasible, worst_lp, lp_bad, milp_infeasible, worst_milp, milp_bad, elapsed);
    return v;
}

// Per-scenario data shared by the sweep criteria.
struct Sweep {
    bool ran = false;
    double ev_seconds = 0.0;
    std::size_t peak_violations = 0;
    double peak_saving_sum = 0.0;
    double worst_peak_excess = -1e300;
    std::size_t satisfaction_violations = 0;
    double worst_shortfall = -1e300;
    std::size_t sessions = 0;
    double worst_linear = 0.0, worst_product = 0.0, worst_cost = 0.0;
    std::size_t ordering_violations = 0;
    double case1_total = 0.0, case2_total = 0.0;
    std::size_t line_violations = 0;
    double worst_line_excess = -1e300;
    std::size_t tight_line_reported = 0, tight_line_other = 0;
    std::string error;
};

Sweep run_sweep(bool with_ems, bool with_line) {
    Sweep w;
    const pipeline::ExperimentConfig cfg;
    const scenario::ScenarioConfig sc_cfg = pipeline::resolve_scenario_config(cfg);
    try {
        for (std::size_t i = 0; i < kScenarios; ++i) {
            const scenario::Scenario sc = scenario::generate_scenario(sc_cfg, cfg.seed, i, kScenarios);
            const auto ev_start = Clock::now();
            const ev::ChargingProfile opt = ev::simulate_day(sc, ev::ChargingMode::Optimized);
            const ev::ChargingProfile unc = ev::simulate_day(sc, ev::ChargingMode::Uncoordinated);
            w.ev_seconds += seconds_since(ev_start);

            // Peaks.
            w.worst_peak_excess = std::max(w.worst_peak_excess, opt.day_peak_kw - unc.day_peak_kw);
            if (opt.day_peak_kw > unc.day_peak_kw + 1e-6) ++w.peak_violations;
            w.peak_saving_sum += pipeline::saving_pct(opt.day_peak_kw, unc.day_peak_kw).value_or(0.0);

            // Satisfaction at departure.
            for (std::size_t v = 0; v < sc.sessions.size(); ++v) {
                const scenario::EvSession& s = sc.sessions[v];
                const double need = std::min(ev::satisfaction_threshold(s, s.departure, sc.grid.dt()), s.energy_kwh);
                const double shortfall = need - opt.delivered_kwh[v];
                w.worst_shortfall = std::max(w.worst_shortfall, shortfall);
                if (shortfall > 1e-6) ++w.satisfaction_violations;
                ++w.sessions;
            }

            if (with_ems) {
                const ems::EmsSolution sol = ems::solve_ems(sc, opt.p_ev_kw, cfg.ems, cfg.solver);
                const ems::ReplayResiduals r = ems::replay(sc, opt.p_ev_kw, cfg.ems, sol);
                w.worst_linear = std::max(w.worst_linear, r.worst_linear());
                w.worst_product = std::max({w.worst_product, r.exchange_exclusive, r.storage_exclusive});
                w.worst_cost = std::max(w.worst_cost, r.cost);
                const double base = ems::baseline_cost(sc, opt.p_ev_kw);
                if (sol.cost_eur > base) ++w.ordering_violations;
                w.case1_total += sol.cost_eur * sc.probability;
                w.case2_total += base * sc.probability;
            }

            if (with_line) {
                double combined = 0.0, demand_max = 0.0;
                for (std::size_t t = 0; t < sc.grid.steps(); ++t) {
                    combined = std::max(combined, sc.demand_kw[t] + unc.p_ev_kw[t]);
                    demand_max = std::max(demand_max, sc.demand_kw[t]);
                }
                ev::PolicyOptions lim;
                lim.line_limit_kw = 1.1 * combined;
                const ev::ChargingProfile limited = ev::simulate_day(sc, ev::ChargingMode::Optimized, lim);
                for (std::size_t t = 0; t < sc.grid.steps(); ++t) {
                    const double excess = limited.p_ev_kw[t] + sc.demand_kw[t] - *lim.line_limit_kw;
                    w.worst_line_excess = std::max(w.worst_line_excess, excess);
                    if (excess > 1e-6) ++w.line_violations;
                }
                lim.line_limit_kw = 0.99 * demand_max;
                try {
                    ev::simulate_day(sc, ev::ChargingMode::Optimized, lim);
                    ++w.tight_line_other;
                } catch (const ev::ChargingInfeasible& e) {
                    if (e.constraint_class() == ev::InfeasibleClass::LineLimit) {
                        ++w.tight_line_reported;
                    } else {
                        ++w.tight_line_other;
                    }
                }
            }
        }
        w.ran = true;
    } catch (const std::exception& e) {
        w.error = e.what();
    }
    return w;
}

Verdict peak_dominance(const Sweep& w) {
    if (!w.ran) return {false, "sweep aborted: " + w.error};
    const double mean = w.peak_saving_sum / kScenarios;
    Verdict v;
    v.pass = w.peak_violations == 0 && mean > 0.0 && w.ev_seconds < 600.0;
    v.detail = fmt::format("{} scenarios, {} with optimized > uncoordinated, largest excess {:.2e} kW, mean peak "
                           "saving {:.2f}%, charging simulation {:.1f} s",
                           kScenarios, w.peak_violations, w.worst_peak_excess, mean, w.ev_seconds);
    return v;
}

Verdict satisfaction(const Sweep& w) {
    if (!w.ran) return {false, "sweep aborted: " + w.error};
    Verdict v;
    v.pass = w.satisfaction_violations == 0;
    v.detail = fmt::format("{} sessions, {} short at departure, largest shortfall {:.2e} kWh", w.sessions,
                           w.satisfaction_violations, w.worst_shortfall);
    return v;
}

Verdict replay_check(const Sweep& w) {
    if (!w.ran) return {false, "sweep aborted: " + w.error};
    Verdict v;
    v.pass = w.worst_linear <= 1e-6 && w.worst_product <= 1e-6 && w.worst_cost <= 1e-6;
    v.detail = fmt::format("{} dispatches, worst linear residual {:.2e}, worst exclusivity product {:.2e}, "
                           "worst cost residual {:.2e}",
                           kScenarios, w.worst_linear, w.worst_product, w.worst_cost);
    return v;
}

Verdict case_ordering(const Sweep& w) {
    if (!w.ran) return {false, "sweep aborted: " + w.error};
    const auto saving = pipeline::saving_pct(w.case1_total, w.case2_total);
    Verdict v;
    v.pass = w.ordering_violations == 0 && saving && *saving > 0.0;
    v.detail = fmt::format("{} scenarios with case 1 > case 2; expected costs {:.2f} vs {:.2f} EUR, saving {}",
                           w.ordering_violations, w.case1_total, w.case2_total,
                           saving ? fmt::format("{:.2f}%", *saving) : "n/a");
    return v;
}

Verdict line_limit(const Sweep& w) {
    if (!w.ran) return {false, "sweep aborted: " + w.error};
    Verdict v;
    v.pass = w.line_violations == 0 && w.tight_line_reported == kScenarios && w.tight_line_other == 0;
    v.detail = fmt::format("P_max = 1.1 x max(P_D + uncoordinated P_EV): {} step violations, largest excess "
                           "{:.2e} kW; P_max = 0.99 x max P_D: line-limit error on {}/{} scenarios",
                           w.line_violations, w.worst_line_excess, w.tight_line_reported, kScenarios);
    return v;
}

Verdict pv_conformance() {
    const scenario::PvParams pv;
    struct Case {
        double radiation, expected;
    };
    // Hand-evaluated with rated 1000 kW, r_c = 150, r_std = 1000.
    const Case cases[] = {{0.0, 0.0},       {100.0, 200.0 / 3.0}, {150.0, 150.0},
                          {500.0, 500.0},   {1000.0, 1000.0},     {1200.0, 1000.0}};
    double worst = 0.0;
    for (const Case& c : cases) {
        worst = std::max(worst, std::abs(scenario::pv_power_from_radiation(c.radiation, pv) - c.expected));
    }
    // Continuity: the left branch, linearly extrapolated to the breakpoint,
    // must meet the value there.
    const auto jump = [&pv](double at) {
        const double eps = 1e-6;
        const double l1 = scenario::pv_power_from_radiation(at - eps, pv);
        const double l2 = scenario::pv_power_from_radiation(at - 2.0 * eps, pv);
        return std::abs(2.0 * l1 - l2 - scenario::pv_power_from_radiation(at, pv));
    };
    const double j_c = jump(pv.r_c), j_std = jump(pv.r_std);
    Verdict v;
    v.pass = worst <= 1e-9 && j_c <= 1e-6 && j_std <= 1e-6;
    v.detail = fmt::format("worst value error {:.2e} kW over 6 radiation levels; jump at r_c {:.2e}, at r_std {:.2e}",
                           worst, j_c, j_std);
    return v;
}

struct FullRun {
    bool ok = false;
    double seconds = 0.0;
    pipeline::Report report;
    std::string error;
};

FullRun full_run(const fs::path& out) {
    FullRun r;
    fs::remove_all(out);
    pipeline::ExperimentConfig cfg;
    cfg.workers = 1;
    cfg.out_dir = out.string();
    const auto start = Clock::now();
    try {
        r.report = pipeline::run_experiment(cfg);
        r.ok = true;
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.seconds = seconds_since(start);
    return r;
}

Verdict scale(const FullRun& run) {
    if (!run.ok) return {false, "run failed: " + run.error};
    std::size_t reported = 0, within = 0;
    double worst = 0.0;
    for (const auto& row : run.report.scenarios) {
        if (!row.case1_gap) continue;
        ++reported;
        worst = std::max(worst, *row.case1_gap);
        if (*row.case1_gap <= run.report.config.solver.gap_limit + 1e-12) ++within;
    }
    Verdict v;
    v.pass = run.seconds < 1800.0 && reported == kScenarios && within == kScenarios;
    v.detail = fmt::format("{} scenarios x {} steps in {:.1f} s single worker; gap reported on {}, within 0.5% on {}, "
                           "worst {:.3f}%",
                           run.report.scenarios.size(), run.report.config.scenario.grid.steps(), run.seconds,
                           reported, within, worst * 100.0);
    return v;
}

Verdict determinism(const fs::path& first, const fs::path& second) {
    std::vector<std::string> files = {"report.json", "peaks.csv"};
    for (std::size_t i = 0; i < kScenarios; ++i) files.push_back(pipeline::scenario_dir_name(i) + "/dispatch.csv");
    std::size_t differ = 0, missing = 0;
    std::string first_diff;
    for (const std::string& f : files) {
        if (!fs::exists(first / f) || !fs::exists(second / f)) {
            ++missing;
            continue;
        }
        if (slurp(first / f) != slurp(second / f)) {
            ++differ;
            if (first_diff.empty()) first_diff = f;
        }
    }
    Verdict v;
    v.pass = differ == 0 && missing == 0;
    v.detail = fmt::format("{} files compared byte for byte, {} differ{}, {} missing", files.size(), differ,
                           first_diff.empty() ? "" : " (first: " + first_diff + ")", missing);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const auto wanted = [&only](int id) { return only.empty() || only.count(id) > 0; };

    const char* env_dir = std::getenv("RAILYARD_ACCEPTANCE_DIR");
    const fs::path work = env_dir ? fs::path(env_dir) : fs::temp_directory_path() / "railyard_acceptance";
    fs::create_directories(work);

    if (wanted(1)) report(1, "solver oracle suite", solver_oracles());

    const bool need_ems = wanted(4) || wanted(5);
    const bool need_line = wanted(6);
    if (wanted(2) || wanted(3) || need_ems || need_line) {
        const Sweep w = run_sweep(need_ems, need_line);
        if (wanted(2)) report(2, "peak dominance", peak_dominance(w));
        if (wanted(3)) report(3, "satisfaction", satisfaction(w));
        if (wanted(4)) report(4, "feasibility replay", replay_check(w));
        if (wanted(5)) report(5, "case ordering", case_ordering(w));
        if (wanted(6)) report(6, "line limit", line_limit(w));
    }

    if (wanted(7)) report(7, "PV model conformance", pv_conformance());

    if (wanted(8) || wanted(9)) {
        // Both runs write to the same directory so the configs, which echo
        // it, are identical; the first tree is moved aside in between.
        const fs::path out = work / "run";
        const fs::path kept = work / "first_run";
        const FullRun first = full_run(out);
        if (wanted(8)) {
            fs::remove_all(kept);
            if (fs::exists(out)) fs::rename(out, kept);
            const FullRun second = full_run(out);
            if (!first.ok || !second.ok) {
                report(8, "determinism", {false, "run failed: " + (first.ok ? second.error : first.error)});
            } else {
                report(8, "determinism", determinism(kept, out));
            }
        }
        if (wanted(9)) report(9, "scale", scale(first));
    }

    std::cout << fmt::format("{} criteria failed", failures) << std::endl;
    return failures == 0 ? 0 : 1;
}
