#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"
#include "railyard/ev/policy.hpp"
#include "railyard/pipeline/experiment.hpp"

namespace railyard::pipeline {

// `step,hour,demand_kw,rbe_kw,radiation_w_m2,pv_kw,buy_eur_kwh,sell_eur_kwh`
void write_series_csv(std::ostream& out, const scenario::Scenario& sc);

// One row per session; delivered energy columns are left empty for a
// policy that was not simulated.
void write_sessions_csv(std::ostream& out, const scenario::Scenario& sc, const ev::ChargingProfile* optimized,
                        const ev::ChargingProfile* uncoordinated);

// `step,p_ev_kw,running_peak_kw`
void write_charging_csv(std::ostream& out, const ev::ChargingProfile& profile);

// `scenario,uncoordinated_kw,optimized_kw,saving_pct`
void write_peaks_csv(std::ostream& out, const Report& report);

// `scenario,ev_seconds,ems_seconds`
void write_timings_csv(std::ostream& out, const Report& report);

struct RunFailure {
    std::size_t scenario = 0;
    std::string stage;
    std::string message;
};

nlohmann::json report_to_json(const Report& report, const std::optional<RunFailure>& failure = std::nullopt);

// report.json, summary.txt, peaks.csv and timings.csv under `dir`.
void write_report_files(const std::filesystem::path& dir, const Report& report,
                        const std::optional<RunFailure>& failure = std::nullopt);

// Per-scenario directory name under the output root.
std::string scenario_dir_name(std::size_t scenario);

// Whole file write that reports the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace railyard::pipeline
