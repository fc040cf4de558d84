#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "railyard/scenario/scenario.hpp"
#include "railyard/solver/simplex.hpp"

namespace railyard::ev {

using scenario::EvSession;
using scenario::Scenario;

enum class ChargingMode { Optimized, Uncoordinated };
enum class LineLimitScope { Horizon, FirstStep };

const char* to_string(ChargingMode mode);
const char* to_string(LineLimitScope scope);

// Constraint family blamed for an infeasible receding-horizon problem.
enum class InfeasibleClass { LineLimit, RunningPeak, Satisfaction };

const char* to_string(InfeasibleClass c);

class ChargingInfeasible : public std::runtime_error {
public:
    ChargingInfeasible(std::size_t step, InfeasibleClass cls, const std::string& detail);
    std::size_t step() const { return step_; }
    InfeasibleClass constraint_class() const { return class_; }

private:
    std::size_t step_;
    InfeasibleClass class_;
};

// Indices into `sessions` of vehicles parked at step t that still need energy.
std::vector<std::size_t> plugged_in_set(const std::vector<EvSession>& sessions, const std::vector<double>& soc,
                                        std::size_t t);

// Power to finish every vehicle in `set` at a constant rate, each capped
// at its maximum rate.
double required_power(const std::vector<EvSession>& sessions, const std::vector<double>& soc,
                      const std::vector<std::size_t>& set, double dt);

// Energy a vehicle must hold at step t: nominal-rate charging since arrival,
// capped at the demanded energy.
double satisfaction_threshold(const EvSession& s, std::size_t t, double dt);

// Last step of the optimization horizon, never earlier than t + 1.
std::size_t horizon_end(const std::vector<EvSession>& sessions, const std::vector<std::size_t>& set,
                        std::size_t t, double dt);

// Maximum-rate charging for each member of `set`, in set order.
std::vector<double> uncoordinated_step(const std::vector<EvSession>& sessions, const std::vector<double>& soc,
                                       const std::vector<std::size_t>& set, double dt);

struct RhProblem {
    std::size_t step = 0;
    std::size_t horizon_end = 0;
    double dt = 1.0 / 6.0;
    const std::vector<EvSession>* sessions = nullptr;
    std::vector<std::size_t> vehicles;  // plugged-in set
    std::vector<double> soc;            // per vehicle in `vehicles`
    double min_first_step_kw = 0.0;     // running peak so far
    // Day demand series, read cyclically for horizon steps past midnight.
    const std::vector<double>* demand_kw = nullptr;
    std::optional<double> line_limit_kw;
    LineLimitScope scope = LineLimitScope::Horizon;
};

struct RhSchedule {
    // power_kw[i][k - step] for vehicle vehicles[i].
    std::vector<std::vector<double>> power_kw;
    double peak_kw = 0.0;
    std::size_t lp_iterations = 0;

    double first_step_total() const;
};

// Builds and solves the peak-minimizing horizon LP. Throws
// ChargingInfeasible naming the step and the constraint family at fault.
RhSchedule optimize_charging(const RhProblem& problem, const solver::SimplexOptions& lp = {});

struct PolicyOptions {
    std::optional<double> line_limit_kw;
    LineLimitScope scope = LineLimitScope::Horizon;
    solver::SimplexOptions lp;
};

struct VehiclePower {
    std::size_t vehicle = 0;
    double p_kw = 0.0;
};

struct ChargingProfile {
    ChargingMode mode = ChargingMode::Uncoordinated;
    double dt = 1.0 / 6.0;
    // Plugged-in vehicles and their power, per step.
    std::vector<std::vector<VehiclePower>> per_step;
    std::vector<double> p_ev_kw;
    std::vector<double> running_peak_kw;  // after each step
    double day_peak_kw = 0.0;
    std::vector<double> delivered_kwh;    // per session, at departure
    std::size_t rh_solves = 0;
};

// Runs the day step by step. In optimized mode the horizon LP is solved
// whenever the required power exceeds the running peak (or would breach the
// line limit), and only its first step is applied.
ChargingProfile simulate_day(const Scenario& sc, ChargingMode mode, const PolicyOptions& opts = {});

}  // namespace railyard::ev
