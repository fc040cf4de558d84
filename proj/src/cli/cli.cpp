#include "railyard/cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "railyard/ems/optimizer.hpp"
#include "railyard/ev/policy.hpp"
#include "railyard/pipeline/artifacts.hpp"
#include "railyard/pipeline/config_json.hpp"
#include "railyard/scenario/csv.hpp"

namespace railyard::cli {

using pipeline::ExperimentConfig;
using scenario::InputError;
namespace fs = std::filesystem;

const char* to_string(Subcommand s) {
    switch (s) {
        case Subcommand::Run: return "run";
        case Subcommand::SimulateEv: return "simulate-ev";
        case Subcommand::SolveEms: return "solve-ems";
        case Subcommand::GenScenarios: return "gen-scenarios";
    }
    return "unknown";
}

ExperimentConfig parse_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("{}: cannot open config file", path.string()));
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(fmt::format("{}: malformed JSON: {}", path.string(), e.what()));
    }
    try {
        return pipeline::config_from_json(doc);
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

ExperimentConfig resolve_config(const CliInvocation& inv) {
    ExperimentConfig c = inv.config_path.empty() ? ExperimentConfig{} : parse_config(inv.config_path);
    const Overrides& o = inv.overrides;
    if (o.seed) c.seed = *o.seed;
    if (o.scenarios) c.scenarios = *o.scenarios;
    if (o.policy) c.policy = *o.policy;
    if (o.cases) c.cases = *o.cases;
    if (o.ems_uses_uncoordinated) c.ems_uses_uncoordinated = *o.ems_uses_uncoordinated;
    if (o.gap) c.solver.gap_limit = *o.gap;
    if (o.workers) c.workers = *o.workers;
    if (o.out_dir) {
        c.out_dir = *o.out_dir;
    } else if (c.out_dir.empty()) {
        const char* env = std::getenv("RAILYARD_OUT");
        c.out_dir = (env != nullptr && *env != '\0') ? env : "out";
    }
    pipeline::validate(c);
    return c;
}

namespace {

struct Failure {
    int code;
    std::string module;
    std::string stage;
    std::string message;
    std::optional<std::size_t> scenario;
    std::optional<std::size_t> step;
};

void report_failure(std::ostream& err, const Failure& f) {
    nlohmann::json e = {{"module", f.module}, {"stage", f.stage}, {"message", f.message}};
    if (f.scenario) e["scenario"] = *f.scenario;
    if (f.step) e["step"] = *f.step;
    err << nlohmann::json{{"error", e}}.dump() << '\n';
}

fs::path scenario_dir(const ExperimentConfig& c, std::size_t index) {
    const fs::path dir = fs::path(c.out_dir) / pipeline::scenario_dir_name(index);
    fs::create_directories(dir);
    return dir;
}

template <typename Writer>
void write_csv(const fs::path& path, Writer&& writer) {
    std::ostringstream buf;
    writer(buf);
    pipeline::write_text_file(path, buf.str());
}

void cmd_run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
    const pipeline::Report report = pipeline::run_experiment(c, &err);
    out << pipeline::summarize(report);
    out << fmt::format("outputs: {}\n", c.out_dir);
}

void cmd_simulate_ev(const ExperimentConfig& c, std::ostream& out) {
    const scenario::ScenarioConfig sc_cfg = pipeline::resolve_scenario_config(c);
    ev::PolicyOptions popts;
    popts.line_limit_kw = c.line_limit_kw;
    popts.scope = c.line_limit_scope;
    const bool want_opt = c.policy != pipeline::PolicySelection::Uncoordinated;
    const bool want_unc = c.policy != pipeline::PolicySelection::Optimized;

    pipeline::Report peaks;
    peaks.config = c;
    for (std::size_t i = 0; i < c.scenarios; ++i) {
        const scenario::Scenario sc = scenario::generate_scenario(sc_cfg, c.seed, i, c.scenarios);
        std::optional<ev::ChargingProfile> opt, unc;
        if (want_opt) opt = ev::simulate_day(sc, ev::ChargingMode::Optimized, popts);
        if (want_unc) unc = ev::simulate_day(sc, ev::ChargingMode::Uncoordinated, popts);

        const fs::path dir = scenario_dir(c, i);
        write_csv(dir / "sessions.csv", [&](std::ostream& o) {
            pipeline::write_sessions_csv(o, sc, opt ? &*opt : nullptr, unc ? &*unc : nullptr);
        });
        pipeline::ScenarioResult row;
        row.scenario = i;
        if (opt) {
            write_csv(dir / "charging_optimized.csv", [&](std::ostream& o) { pipeline::write_charging_csv(o, *opt); });
            row.optimized_peak_kw = opt->day_peak_kw;
        }
        if (unc) {
            write_csv(dir / "charging_uncoordinated.csv",
                      [&](std::ostream& o) { pipeline::write_charging_csv(o, *unc); });
            row.uncoordinated_peak_kw = unc->day_peak_kw;
        }
        if (opt && unc) row.peak_saving_pct = pipeline::saving_pct(opt->day_peak_kw, unc->day_peak_kw);
        peaks.scenarios.push_back(row);
        out << fmt::format("scenario {}: {} sessions, optimized peak {}, uncoordinated peak {}\n", i,
                           sc.sessions.size(), opt ? fmt::format("{:.3f} kW", opt->day_peak_kw) : "n/a",
                           unc ? fmt::format("{:.3f} kW", unc->day_peak_kw) : "n/a");
    }
    write_csv(fs::path(c.out_dir) / "peaks.csv", [&](std::ostream& o) { pipeline::write_peaks_csv(o, peaks); });
}

std::vector<double> read_profile(const std::string& path) {
    const scenario::CsvTable t = scenario::read_csv(path);
    const std::size_t col = t.column("p_ev_kw");
    std::vector<double> p;
    for (std::size_t r = 0; r < t.rows.size(); ++r) p.push_back(t.number(r, col));
    return p;
}

void cmd_solve_ems(const ExperimentConfig& c, const CliInvocation& inv, std::ostream& out) {
    if (inv.profile_path.empty()) throw InputError("solve-ems: --profile is required");
    if (inv.scenario >= c.scenarios) {
        throw InputError(fmt::format("scenario: index {} outside 0..{}", inv.scenario, c.scenarios - 1));
    }
    const scenario::Scenario sc =
        scenario::generate_scenario(pipeline::resolve_scenario_config(c), c.seed, inv.scenario, c.scenarios);
    const std::vector<double> profile = read_profile(inv.profile_path);
    if (profile.size() != sc.grid.steps()) {
        throw InputError(fmt::format("{}: EV profile length mismatch: {} values for {} steps", inv.profile_path,
                                     profile.size(), sc.grid.steps()));
    }

    nlohmann::json result = {{"scenario", inv.scenario}};
    if (c.cases != pipeline::CaseSelection::Case2) {
        const ems::EmsSolution sol = ems::solve_ems(sc, profile, c.ems, c.solver);
        write_csv(scenario_dir(c, inv.scenario) / "dispatch.csv",
                  [&](std::ostream& o) { ems::write_dispatch_csv(o, sol); });
        result["case1_cost_eur"] = sol.cost_eur;
        result["case1_gap"] = sol.gap;
        result["case1_status"] = solver::to_string(sol.status);
    }
    if (c.cases != pipeline::CaseSelection::Case1) result["case2_cost_eur"] = ems::baseline_cost(sc, profile);
    out << result.dump() << '\n';
}

void cmd_gen_scenarios(const ExperimentConfig& c, std::ostream& out) {
    const scenario::ScenarioConfig sc_cfg = pipeline::resolve_scenario_config(c);
    for (std::size_t i = 0; i < c.scenarios; ++i) {
        const scenario::Scenario sc = scenario::generate_scenario(sc_cfg, c.seed, i, c.scenarios);
        const fs::path dir = scenario_dir(c, i);
        write_csv(dir / "series.csv", [&](std::ostream& o) { pipeline::write_series_csv(o, sc); });
        write_csv(dir / "sessions.csv",
                  [&](std::ostream& o) { pipeline::write_sessions_csv(o, sc, nullptr, nullptr); });
        out << fmt::format("scenario {}: {} sessions\n", i, sc.sessions.size());
    }
}

}  // namespace

int run_cli(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const std::string stage = to_string(inv.subcommand);
    try {
        const ExperimentConfig c = resolve_config(inv);
        fs::create_directories(c.out_dir);
        switch (inv.subcommand) {
            case Subcommand::Run: cmd_run(c, out, err); break;
            case Subcommand::SimulateEv: cmd_simulate_ev(c, out); break;
            case Subcommand::SolveEms: cmd_solve_ems(c, inv, out); break;
            case Subcommand::GenScenarios: cmd_gen_scenarios(c, out); break;
        }
        return 0;
    } catch (const pipeline::ExperimentError& e) {
        report_failure(err, {4, "pipeline", e.stage(), e.detail(), e.scenario(), std::nullopt});
        return 4;
    } catch (const InputError& e) {
        report_failure(err, {3, "cli_io", stage, e.what(), std::nullopt, std::nullopt});
        return 3;
    } catch (const ev::ChargingInfeasible& e) {
        report_failure(err, {4, "ev_policy", stage, e.what(), std::nullopt, e.step()});
        return 4;
    } catch (const ems::EmsInfeasible& e) {
        report_failure(err, {4, "ems_optimizer", stage, e.what(), std::nullopt, e.step()});
        return 4;
    } catch (const std::exception& e) {
        report_failure(err, {4, "railyard", stage, e.what(), std::nullopt, std::nullopt});
        return 4;
    }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app("Railway station EV charging and energy management experiments", "railyard");
    app.require_subcommand(1, 1);
    app.fallthrough();

    CliInvocation inv;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> scenarios, workers;
    std::optional<std::string> out_dir, policy, cases, ems_profile;
    std::optional<double> gap;

    app.add_option("--config", inv.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--scenarios", scenarios, "Number of scenarios")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Output directory (default $RAILYARD_OUT, then ./out)");
    app.add_option("--policy", policy, "Charging policies to simulate")
        ->check(CLI::IsMember({"optimized", "uncoordinated", "both"}));
    app.add_option("--case", cases, "Cost cases to evaluate")->check(CLI::IsMember({"1", "2", "both"}));
    app.add_option("--ems-profile", ems_profile, "Charging profile fed to the cost cases")
        ->check(CLI::IsMember({"optimized", "uncoordinated"}));
    app.add_option("--gap", gap, "Relative MILP gap limit")->check(CLI::Range(0.0, 1.0));
    app.add_option("--workers", workers, "Parallel scenario workers")->check(CLI::PositiveNumber);

    auto* run = app.add_subcommand("run", "Full experiment: charging policies, EMS and reports");
    auto* sim = app.add_subcommand("simulate-ev", "Charging policies only");
    auto* solve = app.add_subcommand("solve-ems", "EMS for one scenario on a given EV profile");
    auto* gen = app.add_subcommand("gen-scenarios", "Write scenario series and sessions");
    solve->add_option("--profile", inv.profile_path, "CSV with a p_ev_kw column")->required();
    solve->add_option("--scenario", inv.scenario, "Scenario index the profile belongs to");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        report_failure(err, {2, "cli_io", "arguments", e.what(), std::nullopt, std::nullopt});
        return 2;
    }

    if (*run) inv.subcommand = Subcommand::Run;
    if (*sim) inv.subcommand = Subcommand::SimulateEv;
    if (*solve) inv.subcommand = Subcommand::SolveEms;
    if (*gen) inv.subcommand = Subcommand::GenScenarios;

    Overrides& o = inv.overrides;
    o.seed = seed;
    o.scenarios = scenarios;
    o.workers = workers;
    o.out_dir = out_dir;
    o.gap = gap;
    if (policy) {
        static const std::map<std::string, pipeline::PolicySelection> names = {
            {"optimized", pipeline::PolicySelection::Optimized},
            {"uncoordinated", pipeline::PolicySelection::Uncoordinated},
            {"both", pipeline::PolicySelection::Both}};
        o.policy = names.at(*policy);
    }
    if (cases) {
        static const std::map<std::string, pipeline::CaseSelection> names = {
            {"1", pipeline::CaseSelection::Case1}, {"2", pipeline::CaseSelection::Case2},
            {"both", pipeline::CaseSelection::Both}};
        o.cases = names.at(*cases);
    }
    if (ems_profile) o.ems_uses_uncoordinated = *ems_profile == "uncoordinated";
    return run_cli(inv, out, err);
}

}  // namespace railyard::cli
