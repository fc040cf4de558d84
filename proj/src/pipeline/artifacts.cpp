#include "railyard/pipeline/artifacts.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "railyard/pipeline/config_json.hpp"

namespace railyard::pipeline {

namespace {

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : ""; }

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_series_csv(std::ostream& out, const scenario::Scenario& sc) {
    out << "step,hour,demand_kw,rbe_kw,radiation_w_m2,pv_kw,buy_eur_kwh,sell_eur_kwh\n";
    for (std::size_t t = 0; t < sc.grid.steps(); ++t) {
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", t, sc.grid.hour_of(t),
                           sc.demand_kw[t], sc.rbe_available_kw[t], sc.radiation_w_m2[t], sc.pv_kw[t],
                           sc.buy_eur_kwh[t], sc.sell_eur_kwh[t]);
    }
}

void write_sessions_csv(std::ostream& out, const scenario::Scenario& sc, const ev::ChargingProfile* optimized,
                        const ev::ChargingProfile* uncoordinated) {
    out << "vehicle,kind,arrival,departure,energy_kwh,p_nominal_kw,p_max_kw,efficiency,"
           "delivered_optimized_kwh,delivered_uncoordinated_kwh\n";
    for (std::size_t v = 0; v < sc.sessions.size(); ++v) {
        const scenario::EvSession& s = sc.sessions[v];
        const std::string opt = optimized ? fmt::format("{:.6f}", optimized->delivered_kwh[v]) : "";
        const std::string unc = uncoordinated ? fmt::format("{:.6f}", uncoordinated->delivered_kwh[v]) : "";
        out << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", v, scenario::to_string(s.kind),
                           s.arrival, s.departure, s.energy_kwh, s.p_nominal_kw, s.p_max_kw, s.efficiency, opt, unc);
    }
}

void write_charging_csv(std::ostream& out, const ev::ChargingProfile& profile) {
    out << "step,p_ev_kw,running_peak_kw\n";
    for (std::size_t t = 0; t < profile.p_ev_kw.size(); ++t) {
        out << fmt::format("{},{:.6f},{:.6f}\n", t, profile.p_ev_kw[t], profile.running_peak_kw[t]);
    }
}

void write_peaks_csv(std::ostream& out, const Report& report) {
    out << "scenario,uncoordinated_kw,optimized_kw,saving_pct\n";
    for (const ScenarioResult& r : report.scenarios) {
        out << fmt::format("{},{},{},{}\n", r.scenario, cell(r.uncoordinated_peak_kw), cell(r.optimized_peak_kw),
                           cell(r.peak_saving_pct));
    }
}

void write_timings_csv(std::ostream& out, const Report& report) {
    out << "scenario,ev_seconds,ems_seconds\n";
    for (const ScenarioResult& r : report.scenarios) {
        out << fmt::format("{},{:.3f},{:.3f}\n", r.scenario, r.ev_seconds, r.ems_seconds);
    }
}

nlohmann::json report_to_json(const Report& report, const std::optional<RunFailure>& failure) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ScenarioResult& r : report.scenarios) {
        rows.push_back({
            {"scenario", r.scenario},
            {"probability", r.probability},
            {"sessions", r.sessions},
            {"optimized_peak_kw", optional_json(r.optimized_peak_kw)},
            {"uncoordinated_peak_kw", optional_json(r.uncoordinated_peak_kw)},
            {"peak_saving_pct", optional_json(r.peak_saving_pct)},
            {"rh_solves", r.rh_solves},
            {"case1_cost_eur", optional_json(r.case1_cost_eur)},
            {"case2_cost_eur", optional_json(r.case2_cost_eur)},
            {"saving_pct", optional_json(r.saving_pct)},
            {"case1_bound_eur", optional_json(r.case1_bound_eur)},
            {"case1_gap", optional_json(r.case1_gap)},
            {"case1_nodes", r.case1_nodes},
            {"case1_status", r.case1_status.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.case1_status)},
        });
    }
    const Aggregates& a = report.aggregates;
    nlohmann::json doc = {
        {"format", "railyard-report/1"},
        {"complete", !failure.has_value()},
        {"config", config_to_json(report.config)},
        {"scenarios", std::move(rows)},
        {"aggregates",
         {
             {"expected_case1_eur", optional_json(a.expected_case1_eur)},
             {"expected_case2_eur", optional_json(a.expected_case2_eur)},
             {"total_saving_pct", optional_json(a.total_saving_pct)},
             {"mean_peak_saving_pct", optional_json(a.mean_peak_saving_pct)},
             {"max_peak_saving_pct", optional_json(a.max_peak_saving_pct)},
             {"max_gap", optional_json(a.max_gap)},
         }},
    };
    if (failure) {
        doc["error"] = {{"scenario", failure->scenario}, {"stage", failure->stage}, {"message", failure->message}};
    } else {
        doc["error"] = nullptr;
    }
    return doc;
}

std::string scenario_dir_name(std::size_t scenario) { return fmt::format("{:03}", scenario); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
    out << text;
    out.close();
    if (!out) throw std::runtime_error(fmt::format("{}: write failed", path.string()));
}

void write_report_files(const std::filesystem::path& dir, const Report& report,
                        const std::optional<RunFailure>& failure) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "report.json", report_to_json(report, failure).dump(2) + "\n");
    write_text_file(dir / "summary.txt", summarize(report));
    std::ostringstream peaks, timings;
    write_peaks_csv(peaks, report);
    write_text_file(dir / "peaks.csv", peaks.str());
    write_timings_csv(timings, report);
    write_text_file(dir / "timings.csv", timings.str());
}

}  // namespace railyard::pipeline
