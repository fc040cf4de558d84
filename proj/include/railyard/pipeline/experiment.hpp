#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "railyard/ems/optimizer.hpp"
#include "railyard/ev/policy.hpp"
#include "railyard/scenario/generator.hpp"

namespace railyard::pipeline {

enum class PolicySelection { Optimized, Uncoordinated, Both };
enum class CaseSelection { Case1, Case2, Both };

const char* to_string(PolicySelection p);
const char* to_string(CaseSelection c);

// Measured series that replace the synthetic ones. Empty paths keep the
// synthetic generator.
struct InputFiles {
    std::string demand_csv;      // column `demand_kw`
    std::string rbe_csv;         // column `rbe_kw`
    std::string radiation_csv;   // column `radiation_w_m2`
    std::string prices_csv;      // columns `buy_eur_kwh`, `sell_eur_kwh`
    std::string bus_schedule_csv;
    bool resample = false;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::size_t scenarios = 150;
    std::size_t workers = 1;
    // Empty means nothing is written to disk.
    std::string out_dir;

    scenario::ScenarioConfig scenario;
    InputFiles inputs;
    ems::EmsParams ems;
    std::optional<double> line_limit_kw;
    ev::LineLimitScope line_limit_scope = ev::LineLimitScope::Horizon;

    PolicySelection policy = PolicySelection::Both;
    CaseSelection cases = CaseSelection::Both;
    // Feed the uncoordinated profile to the EMS instead of the optimized one.
    bool ems_uses_uncoordinated = false;
    ems::EmsOptions solver;
};

// Throws scenario::InputError naming the offending key path.
void validate(const ExperimentConfig& config);

// Scenario settings with the measured series loaded from `inputs`.
scenario::ScenarioConfig resolve_scenario_config(const ExperimentConfig& config);

struct ScenarioResult {
    std::size_t scenario = 0;
    double probability = 0.0;
    std::size_t sessions = 0;

    std::optional<double> optimized_peak_kw;
    std::optional<double> uncoordinated_peak_kw;
    std::optional<double> peak_saving_pct;
    std::size_t rh_solves = 0;

    std::optional<double> case1_cost_eur;
    std::optional<double> case2_cost_eur;
    std::optional<double> saving_pct;
    std::optional<double> case1_bound_eur;
    std::optional<double> case1_gap;
    std::size_t case1_nodes = 0;
    std::string case1_status;

    // Wall-clock seconds; kept out of report.json so it stays reproducible.
    double ev_seconds = 0.0;
    double ems_seconds = 0.0;
};

struct Aggregates {
    std::optional<double> expected_case1_eur;
    std::optional<double> expected_case2_eur;
    std::optional<double> total_saving_pct;
    std::optional<double> mean_peak_saving_pct;
    std::optional<double> max_peak_saving_pct;
    std::optional<double> max_gap;
};

struct Report {
    ExperimentConfig config;
    std::vector<ScenarioResult> scenarios;
    Aggregates aggregates;
};

// (reference - improved) / reference in percent; empty when the
// reference is not positive.
std::optional<double> saving_pct(double improved, double reference);

Aggregates aggregate(const std::vector<ScenarioResult>& rows);

// Raised when a scenario fails; completed rows are flushed before it is
// thrown.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(std::size_t scenario, std::string stage, const std::string& detail);
    std::size_t scenario() const { return scenario_; }
    const std::string& stage() const { return stage_; }
    const std::string& detail() const { return detail_; }

private:
    std::size_t scenario_;
    std::string stage_;
    std::string detail_;
};

// Runs every scenario: both charging policies, the Case 1 MILP and the
// Case 2 grid-only baseline. Rows come back in scenario order whatever the
// worker count. `progress`, when given, receives one line per scenario.
Report run_experiment(const ExperimentConfig& config, std::ostream* progress = nullptr);

// Two-row cost table with a savings column, followed by the peak summary.
std::string summarize(const Report& report);

}  // namespace railyard::pipeline
