#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace railyard::scenario {

// Invalid input data: malformed files, out-of-range values, length mismatches.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed sampling grid for one day. Times are expressed as step indices;
// hours are converted through dt exactly once.
class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(double dt_hours, std::size_t steps, double open_hour, double close_hour);

    double dt() const { return dt_; }
    std::size_t steps() const { return steps_; }
    double open_hour() const { return open_hour_; }
    double close_hour() const { return close_hour_; }
    std::size_t open_step() const;
    std::size_t close_step() const;
    // Start of step t, in hours after midnight.
    double hour_of(std::size_t t) const { return static_cast<double>(t) * dt_; }

private:
    double dt_ = 1.0 / 6.0;
    std::size_t steps_ = 144;
    double open_hour_ = 6.0;
    double close_hour_ = 22.0;
};

struct PvParams {
    double rated_kw = 1000.0;
    double r_c = 150.0;    // W/m2, end of the quadratic region
    double r_std = 1000.0; // W/m2, saturation
};

void validate(const PvParams& pv);

// Solar output for a measured radiation (W/m2): quadratic below r_c,
// linear up to r_std, flat at the rated power above.
double pv_power_from_radiation(double radiation, const PvParams& pv);

enum class VehicleKind { Car, Bus };

const char* to_string(VehicleKind kind);

// One charging session. State of charge is tracked as energy delivered
// since arrival, so the demanded level equals the requested energy.
struct EvSession {
    VehicleKind kind = VehicleKind::Car;
    std::size_t arrival = 0;    // first plugged-in step
    std::size_t departure = 0;  // first step after unplugging
    double energy_kwh = 0.0;
    double p_nominal_kw = 11.0;
    double p_max_kw = 22.0;
    double efficiency = 1.0;
};

void validate(const EvSession& s, std::size_t steps);

// Step at which a session would be complete charging at its nominal rate
// from arrival, rounded up.
std::size_t fulfillment_time(const EvSession& s, double dt);

// Per-step exogenous series for one day.
struct SeriesBundle {
    std::vector<double> demand_kw;
    std::vector<double> rbe_available_kw;
    std::vector<double> radiation_w_m2;
    std::vector<double> buy_eur_kwh;
    std::vector<double> sell_eur_kwh;
};

struct Scenario {
    std::size_t id = 0;
    double probability = 1.0;
    TimeGrid grid;
    std::vector<double> demand_kw;
    std::vector<double> rbe_available_kw;
    std::vector<double> radiation_w_m2;
    std::vector<double> pv_kw;
    std::vector<double> buy_eur_kwh;
    std::vector<double> sell_eur_kwh;
    std::vector<EvSession> sessions;
};

Scenario build_scenario(std::size_t id, double probability, const TimeGrid& grid,
                        SeriesBundle series, std::vector<EvSession> sessions,
                        const PvParams& pv);

}  // namespace railyard::scenario
