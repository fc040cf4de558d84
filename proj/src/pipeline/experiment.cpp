#include "railyard/pipeline/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "railyard/pipeline/artifacts.hpp"
#include "railyard/scenario/csv.hpp"

namespace railyard::pipeline {

using scenario::InputError;

const char* to_string(PolicySelection p) {
    switch (p) {
        case PolicySelection::Optimized: return "optimized";
        case PolicySelection::Uncoordinated: return "uncoordinated";
        case PolicySelection::Both: return "both";
    }
    return "unknown";
}

const char* to_string(CaseSelection c) {
    switch (c) {
        case CaseSelection::Case1: return "1";
        case CaseSelection::Case2: return "2";
        case CaseSelection::Both: return "both";
    }
    return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw InputError(fmt::format("{}: {}", key, what));
}

void require(bool ok, const char* key, const char* what) {
    if (!ok) fail(key, what);
}

bool runs_optimized(PolicySelection p) { return p != PolicySelection::Uncoordinated; }
bool runs_uncoordinated(PolicySelection p) { return p != PolicySelection::Optimized; }
bool runs_case1(CaseSelection c) { return c != CaseSelection::Case2; }
bool runs_case2(CaseSelection c) { return c != CaseSelection::Case1; }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct StageError {
    std::string stage;
    std::string message;
};

// Everything one scenario produces; the artifacts are written by the
// worker that computed them.
ScenarioResult run_scenario(const ExperimentConfig& cfg, const scenario::ScenarioConfig& sc_cfg, std::size_t index,
                            std::string& stage) {
    ScenarioResult row;
    row.scenario = index;

    stage = "scenario";
    const scenario::Scenario sc = scenario::generate_scenario(sc_cfg, cfg.seed, index, cfg.scenarios);
    row.probability = sc.probability;
    row.sessions = sc.sessions.size();

    ev::PolicyOptions popts;
    popts.line_limit_kw = cfg.line_limit_kw;
    popts.scope = cfg.line_limit_scope;

    const auto ev_start = Clock::now();
    std::optional<ev::ChargingProfile> opt, unc;
    if (runs_optimized(cfg.policy)) {
        stage = "ev-optimized";
        opt = ev::simulate_day(sc, ev::ChargingMode::Optimized, popts);
        row.optimized_peak_kw = opt->day_peak_kw;
        row.rh_solves = opt->rh_solves;
    }
    if (runs_uncoordinated(cfg.policy)) {
        stage = "ev-uncoordinated";
        unc = ev::simulate_day(sc, ev::ChargingMode::Uncoordinated, popts);
        row.uncoordinated_peak_kw = unc->day_peak_kw;
    }
    if (opt && unc) row.peak_saving_pct = saving_pct(opt->day_peak_kw, unc->day_peak_kw);
    row.ev_seconds = seconds_since(ev_start);

    const ev::ChargingProfile& fed = (cfg.ems_uses_uncoordinated || !opt) ? *unc : *opt;

    const auto ems_start = Clock::now();
    std::optional<ems::EmsSolution> dispatch;
    if (runs_case1(cfg.cases)) {
        stage = "ems-case1";
        dispatch = ems::solve_ems(sc, fed.p_ev_kw, cfg.ems, cfg.solver);
        row.case1_cost_eur = dispatch->cost_eur;
        row.case1_bound_eur = dispatch->bound_eur;
        row.case1_gap = dispatch->gap;
        row.case1_nodes = dispatch->nodes;
        row.case1_status = solver::to_string(dispatch->status);
    }
    if (runs_case2(cfg.cases)) {
        stage = "ems-case2";
        row.case2_cost_eur = ems::baseline_cost(sc, fed.p_ev_kw);
    }
    if (row.case1_cost_eur && row.case2_cost_eur) row.saving_pct = saving_pct(*row.case1_cost_eur, *row.case2_cost_eur);
    row.ems_seconds = seconds_since(ems_start);

    if (!cfg.out_dir.empty()) {
        stage = "write";
        const std::filesystem::path dir = std::filesystem::path(cfg.out_dir) / scenario_dir_name(index);
        std::filesystem::create_directories(dir);
        std::ostringstream buf;
        write_sessions_csv(buf, sc, opt ? &*opt : nullptr, unc ? &*unc : nullptr);
        write_text_file(dir / "sessions.csv", buf.str());
        for (const auto* prof : {opt ? &*opt : nullptr, unc ? &*unc : nullptr}) {
            if (prof == nullptr) continue;
            buf.str("");
            write_charging_csv(buf, *prof);
            write_text_file(dir / fmt::format("charging_{}.csv", ev::to_string(prof->mode)), buf.str());
        }
        if (dispatch) {
            buf.str("");
            ems::write_dispatch_csv(buf, *dispatch);
            write_text_file(dir / "dispatch.csv", buf.str());
        }
    }
    return row;
}

}  // namespace

void validate(const ExperimentConfig& c) {
    require(c.scenarios >= 1, "scenarios", "must be at least 1");
    require(c.workers >= 1, "workers", "must be at least 1");

    const scenario::TimeGrid& g = c.scenario.grid;
    require(g.dt() > 0.0, "time.dt_hours", "must be positive");
    require(g.steps() >= 1, "time.steps", "must be at least 1");
    require(std::abs(g.dt() * static_cast<double>(g.steps()) - 24.0) <= 1e-9, "time.steps",
            "steps times dt_hours must cover 24 h");
    require(g.open_hour() >= 0.0 && g.open_hour() < g.close_hour() && g.close_hour() <= 24.0, "time.open_hour",
            "require 0 <= open_hour < close_hour <= 24");

    const scenario::PvParams& pv = c.scenario.pv;
    require(pv.rated_kw >= 0.0, "pv.rated", "must be non-negative");
    require(pv.r_c > 0.0, "pv.r_c", "must be positive");
    require(pv.r_std > pv.r_c, "pv.r_std", "must exceed r_c");

    const scenario::CarConfig& car = c.scenario.cars;
    require(car.arrival_rate_per_hour >= 0.0, "cars.arrival_rate", "must be non-negative");
    require(car.energy_max_kwh >= 0.0, "cars.energy_max", "must be non-negative");
    require(car.p_nominal_kw > 0.0, "cars.p_nominal", "must be positive");
    require(car.p_max_kw >= car.p_nominal_kw, "cars.p_max", "must be at least p_nominal");
    require(car.efficiency > 0.0 && car.efficiency <= 1.0, "cars.efficiency", "must lie in (0, 1]");
    require(car.departure_window_hours >= 0.0, "cars.departure_window_hours", "must be non-negative");

    const scenario::BusConfig& bus = c.scenario.buses;
    require(bus.energy_max_kwh >= 0.0, "buses.energy_max", "must be non-negative");
    require(bus.p_nominal_kw > 0.0, "buses.p_nominal", "must be positive");
    require(bus.p_max_kw >= bus.p_nominal_kw, "buses.p_max", "must be at least p_nominal");
    require(bus.efficiency > 0.0 && bus.efficiency <= 1.0, "buses.efficiency", "must lie in (0, 1]");
    require(bus.lead_min_minutes >= 0.0, "buses.lead_min", "must be non-negative");
    require(bus.lead_max_minutes >= bus.lead_min_minutes, "buses.lead_max", "must be at least lead_min");
    for (double d : bus.departures_min) {
        require(d >= 0.0 && d < 24.0 * 60.0, "buses.departures", "times must lie within the day");
    }

    const scenario::SyntheticConfig& s = c.scenario.synthetic;
    require(s.demand_peak_kw >= 0.0, "synthetic.demand_peak", "must be non-negative");
    require(s.demand_scale_min >= 0.0 && s.demand_scale_min <= s.demand_scale_max, "synthetic.demand_scale_min",
            "require 0 <= demand_scale_min <= demand_scale_max");
    require(s.demand_noise >= 0.0, "synthetic.demand_noise", "must be non-negative");
    require(s.rbe_ratio >= 0.0, "synthetic.rbe_ratio", "must be non-negative");
    require(s.rbe_noise >= 0.0, "synthetic.rbe_noise", "must be non-negative");
    require(s.radiation_peak_w_m2 >= 0.0, "synthetic.radiation_peak", "must be non-negative");
    require(s.radiation_noise >= 0.0, "synthetic.radiation_noise", "must be non-negative");
    require(s.solar_noon_hour > 0.0 && s.solar_noon_hour < 24.0, "synthetic.solar_noon_hour", "must lie in (0, 24)");
    require(s.price_base_eur_kwh >= 0.0, "synthetic.price_base", "must be non-negative");
    require(s.price_scale_min >= 0.0 && s.price_scale_min <= s.price_scale_max, "synthetic.price_scale_min",
            "require 0 <= price_scale_min <= price_scale_max");
    require(s.price_noise >= 0.0, "synthetic.price_noise", "must be non-negative");

    ems::validate(c.ems);
    if (c.line_limit_kw) require(*c.line_limit_kw > 0.0, "line_limit", "must be positive");

    require(c.solver.gap_limit >= 0.0, "solver.gap", "must be non-negative");
    require(c.solver.node_limit >= 1, "solver.node_limit", "must be at least 1");
    require(c.solver.time_limit_seconds > 0.0, "solver.time_limit_seconds", "must be positive");

    if (c.ems_uses_uncoordinated && !runs_uncoordinated(c.policy)) {
        fail("ems_profile", "the uncoordinated profile needs policy 'uncoordinated' or 'both'");
    }
}

scenario::ScenarioConfig resolve_scenario_config(const ExperimentConfig& config) {
    scenario::ScenarioConfig out = config.scenario;
    const InputFiles& in = config.inputs;
    const auto& grid = out.grid;
    if (!in.demand_csv.empty()) out.demand_kw = scenario::load_series_csv(in.demand_csv, "demand_kw", grid, in.resample);
    if (!in.rbe_csv.empty()) out.rbe_kw = scenario::load_series_csv(in.rbe_csv, "rbe_kw", grid, in.resample);
    if (!in.radiation_csv.empty()) {
        out.radiation_w_m2 = scenario::load_series_csv(in.radiation_csv, "radiation_w_m2", grid, in.resample);
    }
    if (!in.prices_csv.empty()) {
        // Prices may be negative on day-ahead markets.
        out.buy_eur_kwh = scenario::load_series_csv(in.prices_csv, "buy_eur_kwh", grid, in.resample, true);
        out.sell_eur_kwh = scenario::load_series_csv(in.prices_csv, "sell_eur_kwh", grid, in.resample, true);
    }
    if (!in.bus_schedule_csv.empty()) out.buses.departures_min = scenario::load_bus_schedule_csv(in.bus_schedule_csv);
    return out;
}

std::optional<double> saving_pct(double improved, double reference) {
    if (!(reference > 0.0)) return std::nullopt;
    return (reference - improved) / reference * 100.0;
}

Aggregates aggregate(const std::vector<ScenarioResult>& rows) {
    Aggregates a;
    if (rows.empty()) return a;
    const auto expected = [&rows](auto field) -> std::optional<double> {
        double sum = 0.0;
        for (const ScenarioResult& r : rows) {
            const std::optional<double>& v = r.*field;
            if (!v) return std::nullopt;
            sum += r.probability * *v;
        }
        return sum;
    };
    a.expected_case1_eur = expected(&ScenarioResult::case1_cost_eur);
    a.expected_case2_eur = expected(&ScenarioResult::case2_cost_eur);
    if (a.expected_case1_eur && a.expected_case2_eur) {
        a.total_saving_pct = saving_pct(*a.expected_case1_eur, *a.expected_case2_eur);
    }

    double sum = 0.0;
    std::size_t n = 0;
    for (const ScenarioResult& r : rows) {
        if (r.peak_saving_pct) {
            sum += *r.peak_saving_pct;
            ++n;
            a.max_peak_saving_pct = std::max(a.max_peak_saving_pct.value_or(*r.peak_saving_pct), *r.peak_saving_pct);
        }
        if (r.case1_gap) a.max_gap = std::max(a.max_gap.value_or(*r.case1_gap), *r.case1_gap);
    }
    if (n > 0) a.mean_peak_saving_pct = sum / static_cast<double>(n);
    return a;
}

ExperimentError::ExperimentError(std::size_t scenario, std::string stage, const std::string& detail)
    : std::runtime_error(fmt::format("scenario {} failed in stage {}: {}", scenario, stage, detail)),
      scenario_(scenario),
      stage_(std::move(stage)),
      detail_(detail) {}

Report run_experiment(const ExperimentConfig& config, std::ostream* progress) {
    validate(config);
    const scenario::ScenarioConfig sc_cfg = resolve_scenario_config(config);
    if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

    const std::size_t n = config.scenarios;
    std::vector<std::optional<ScenarioResult>> rows(n);
    std::vector<std::optional<StageError>> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex log_mutex;

    const auto work = [&] {
        for (;;) {
            if (abort.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            std::string stage;
            try {
                rows[i] = run_scenario(config, sc_cfg, i, stage);
            } catch (const std::exception& e) {
                errors[i] = StageError{stage, e.what()};
                abort.store(true);
                return;
            }
            if (progress != nullptr) {
                const ScenarioResult& r = *rows[i];
                std::lock_guard<std::mutex> lock(log_mutex);
                *progress << fmt::format("scenario {}/{}: peak {:.2f} kW, case 1 {:.2f} EUR, {:.2f} s\n", i + 1, n,
                                         r.optimized_peak_kw.value_or(r.uncoordinated_peak_kw.value_or(0.0)),
                                         r.case1_cost_eur.value_or(0.0), r.ev_seconds + r.ems_seconds);
                progress->flush();
            }
        }
    };

    const std::size_t workers = std::min(config.workers, n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    Report report;
    report.config = config;
    for (auto& r : rows) {
        if (r) report.scenarios.push_back(std::move(*r));
    }
    report.aggregates = aggregate(report.scenarios);

    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        const RunFailure failure{i, errors[i]->stage, errors[i]->message};
        if (!config.out_dir.empty()) write_report_files(config.out_dir, report, failure);
        throw ExperimentError(i, errors[i]->stage, errors[i]->message);
    }
    if (!config.out_dir.empty()) write_report_files(config.out_dir, report);
    return report;
}

namespace {

std::string money(const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : "n/a"; }

}  // namespace

std::string summarize(const Report& report) {
    const Aggregates& a = report.aggregates;
    std::optional<double> saving;
    if (a.expected_case1_eur && a.expected_case2_eur) saving = saving_pct(*a.expected_case1_eur, *a.expected_case2_eur);

    std::string out;
    out += fmt::format("{:<6} | {:<3} | {:<3} | {:>28} | {:>16}\n", "Case", "ESS", "PV", "Total Operating Costs (EUR)",
                       "Cost Savings (%)");
    out += fmt::format("{:-<6}-+-{:-<3}-+-{:-<3}-+-{:->28}-+-{:->16}\n", "", "", "", "", "");
    out += fmt::format("{:<6} | {:<3} | {:<3} | {:>28} | {:>16}\n", "1", "x", "x", money(a.expected_case1_eur),
                       money(saving));
    out += fmt::format("{:<6} | {:<3} | {:<3} | {:>28} | {:>16}\n", "2", "", "", money(a.expected_case2_eur), "-");
    out += "\n";
    out += fmt::format("scenarios: {}\n", report.scenarios.size());
    out += fmt::format("mean peak saving (%): {}\n", money(a.mean_peak_saving_pct));
    out += fmt::format("max peak saving (%): {}\n", money(a.max_peak_saving_pct));
    out += fmt::format("max MILP gap (%): {}\n", a.max_gap ? fmt::format("{:.3f}", *a.max_gap * 100.0) : "n/a");
    return out;
}

}  // namespace railyard::pipeline
