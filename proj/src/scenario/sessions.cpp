#include "railyard/scenario/sessions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <fmt/format.h>

namespace railyard::scenario {

double parse_hhmm(std::string_view text) {
    std::string digits;
    for (char c : text) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
        } else if (c != ':' && !std::isspace(static_cast<unsigned char>(c))) {
            throw InputError(fmt::format("bus schedule: malformed time '{}'", text));
        }
    }
    if (digits.size() < 3 || digits.size() > 4) {
        throw InputError(fmt::format("bus schedule: malformed time '{}'", text));
    }
    const int value = std::stoi(digits);
    const int hours = value / 100;
    const int minutes = value % 100;
    if (minutes >= 60 || hours >= 24) {
        throw InputError(fmt::format("bus schedule: time '{}' is outside the day", text));
    }
    return hours * 60.0 + minutes;
}

std::vector<double> default_bus_schedule() {
    std::vector<double> out;
    for (int m = 6 * 60; m <= 22 * 60; m += 30) out.push_back(m);
    return out;
}

std::vector<EvSession> generate_car_sessions(RandomStream& rng, const TimeGrid& grid, const CarConfig& cfg) {
    std::vector<EvSession> out;
    if (!(cfg.arrival_rate_per_hour > 0.0)) return out;
    const double dt = grid.dt();
    double clock = grid.open_hour();
    while (true) {
        clock += rng.exponential(cfg.arrival_rate_per_hour);
        if (clock >= grid.close_hour()) break;

        EvSession s;
        s.kind = VehicleKind::Car;
        s.arrival = std::min(static_cast<std::size_t>(std::floor(clock / dt)), grid.close_step() - 1);
        s.energy_kwh = rng.uniform(0.0, cfg.energy_max_kwh);
        s.p_nominal_kw = cfg.p_nominal_kw;
        s.p_max_kw = cfg.p_max_kw;
        s.efficiency = cfg.efficiency;

        const double window = cfg.departure_window_hours;
        const double stay = rng.triangular(0.0, window, 0.5 * window);
        const double leave_hour = static_cast<double>(fulfillment_time(s, dt)) * dt + stay;
        auto departure = static_cast<std::size_t>(std::floor(leave_hour / dt + 1e-9));
        departure = std::max(departure, s.arrival + 1);
        s.departure = std::min(departure, grid.steps());
        out.push_back(s);
    }
    return out;
}

std::vector<EvSession> generate_bus_sessions(RandomStream& rng, const TimeGrid& grid, const BusConfig& cfg) {
    std::vector<EvSession> out;
    const double step_min = grid.dt() * 60.0;
    for (double dep : cfg.departures_min) {
        if (!(dep >= 0.0 && dep < 24.0 * 60.0)) {
            throw InputError(fmt::format("bus schedule: departure at minute {} is outside the day", dep));
        }
        const double lead = rng.triangular(cfg.lead_min_minutes, cfg.lead_max_minutes,
                                           0.5 * (cfg.lead_min_minutes + cfg.lead_max_minutes));
        const double arrival_min = std::max(0.0, dep - lead);

        EvSession s;
        s.kind = VehicleKind::Bus;
        s.arrival = static_cast<std::size_t>(std::floor(arrival_min / step_min + 1e-9));
        s.departure = static_cast<std::size_t>(std::floor(dep / step_min + 1e-9));
        s.departure = std::min(std::max(s.departure, s.arrival + 1), grid.steps());
        s.energy_kwh = rng.uniform(0.0, cfg.energy_max_kwh);
        s.p_nominal_kw = cfg.p_nominal_kw;
        s.p_max_kw = cfg.p_max_kw;
        s.efficiency = cfg.efficiency;
        out.push_back(s);
    }
    return out;
}

}  // namespace railyard::scenario
