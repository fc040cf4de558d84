#pragma once

#include <string_view>
#include <vector>

#include "railyard/scenario/random.hpp"
#include "railyard/scenario/scenario.hpp"

namespace railyard::scenario {

struct CarConfig {
    double arrival_rate_per_hour = 4.0;
    double energy_max_kwh = 50.0;
    double p_nominal_kw = 11.0;
    double p_max_kw = 22.0;
    double efficiency = 1.0;
    // Departure is drawn from a symmetric triangular law on
    // [fulfillment, fulfillment + window].
    double departure_window_hours = 2.0;
};

struct BusConfig {
    double energy_max_kwh = 300.0;
    double p_nominal_kw = 300.0;
    double p_max_kw = 300.0;
    double efficiency = 1.0;
    double lead_min_minutes = 10.0;
    double lead_max_minutes = 30.0;
    // Departures in minutes after midnight.
    std::vector<double> departures_min;
};

// Parses "HHMM" or "HH:MM" into minutes after midnight; rejects times
// outside [00:00, 24:00).
double parse_hhmm(std::string_view text);

// One departure every 30 minutes from 06:00 through 22:00.
std::vector<double> default_bus_schedule();

std::vector<EvSession> generate_car_sessions(RandomStream& rng, const TimeGrid& grid, const CarConfig& cfg);
std::vector<EvSession> generate_bus_sessions(RandomStream& rng, const TimeGrid& grid, const BusConfig& cfg);

}  // namespace railyard::scenario
