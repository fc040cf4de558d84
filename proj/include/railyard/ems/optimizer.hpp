#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "railyard/scenario/scenario.hpp"
#include "railyard/solver/branch_and_bound.hpp"
#include "railyard/solver/linear_model.hpp"

namespace railyard::ems {

using scenario::Scenario;

// `MultiplyEta` multiplies discharge power by the discharge efficiency in the
// storage recursion; `DivideEta` divides by it.
enum class DischargeForm { MultiplyEta, DivideEta };

const char* to_string(DischargeForm form);

struct EssParams {
    double capacity_kwh = 1000.0;
    double soc_min_kwh = 100.0;
    double soc_init_kwh = 500.0;
    double p_charge_max_kw = 1000.0;
    double p_discharge_max_kw = 1000.0;
    double self_discharge = 0.0;  // fraction of stored energy lost per step
    double eta_charge = 0.95;
    double eta_discharge = 0.95;
    DischargeForm discharge_form = DischargeForm::MultiplyEta;
    bool terminal_soc_at_least_initial = false;
};

struct EmsParams {
    double p_buy_max_kw = 10000.0;
    double p_sell_max_kw = 10000.0;
    EssParams ess;
};

// Throws scenario::InputError naming the offending key, e.g. `ess.soc_min`.
void validate(const EmsParams& params);

class EmsInfeasible : public std::runtime_error {
public:
    EmsInfeasible(std::size_t step, const std::string& detail);
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

struct EmsModel {
    solver::LinearModel model;
    std::vector<solver::VarId> p_g, p_s, p_bplus, p_bminus, p_rbe, soc_b, p_ev, u_g, u_b;
};

// One cost-minimizing day with the EV load fixed to `p_ev_kw`.
EmsModel build_ems_model(const Scenario& sc, const std::vector<double>& p_ev_kw, const EmsParams& params);

struct EmsOptions {
    double gap_limit = 0.005;
    std::size_t node_limit = 20000;
    double time_limit_seconds = solver::kInfinity;
    bool rounding_hint = true;
    std::size_t rins_node_limit = 500;
    std::size_t rins_frequency = 200;
};

struct EmsSolution {
    std::vector<double> p_g, p_s, p_bplus, p_bminus, p_rbe, soc_b;
    std::vector<int> u_g, u_b;
    double cost_eur = 0.0;
    solver::MilpStatus status = solver::MilpStatus::Infeasible;
    double bound_eur = 0.0;
    double gap = 0.0;
    std::size_t nodes = 0;
};

// Throws EmsInfeasible when a step cannot be balanced within the exchange
// and storage limits, or when the solver proves the day infeasible.
EmsSolution solve_ems(const Scenario& sc, const std::vector<double>& p_ev_kw, const EmsParams& params,
                      const EmsOptions& options = {});

// Grid-only day: every kW of train and EV load is bought.
double baseline_cost(const Scenario& sc, const std::vector<double>& p_ev_kw);

// Probability-weighted cost; probabilities must sum to one.
double expected_cost(const std::vector<double>& costs, const std::vector<double>& probabilities);

// Largest residuals found when replaying a dispatch against every
// constraint family, in kW, kWh or EUR as appropriate.
struct ReplayResiduals {
    double balance = 0.0;
    double exchange_exclusive = 0.0;  // max P_G * P_S
    double storage_exclusive = 0.0;   // max (P_RBE + P_B+) * P_B-
    double limits = 0.0;              // rate caps, RBE availability, non-negativity
    double soc_bounds = 0.0;
    double soc_recursion = 0.0;
    double cost = 0.0;

    double worst_linear() const;
};

ReplayResiduals replay(const Scenario& sc, const std::vector<double>& p_ev_kw, const EmsParams& params,
                       const EmsSolution& sol);

// `step,p_g,p_s,p_bplus,p_bminus,p_rbe,soc_b,u_g,u_b`
void write_dispatch_csv(std::ostream& out, const EmsSolution& sol);

}  // namespace railyard::ems
