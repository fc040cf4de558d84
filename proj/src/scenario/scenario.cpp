#include "railyard/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace railyard::scenario {

TimeGrid::TimeGrid(double dt_hours, std::size_t steps, double open_hour, double close_hour)
    : dt_(dt_hours), steps_(steps), open_hour_(open_hour), close_hour_(close_hour) {
    if (!(dt_hours > 0.0)) throw InputError("grid: step size must be positive");
    if (std::abs(static_cast<double>(steps) * dt_hours - 24.0) > 1e-9) {
        throw InputError(fmt::format("grid: {} steps of {} h do not cover 24 h", steps, dt_hours));
    }
    if (!(open_hour >= 0.0 && open_hour < close_hour && close_hour <= 24.0)) {
        throw InputError("grid: opening window must satisfy 0 <= open < close <= 24");
    }
}

std::size_t TimeGrid::open_step() const {
    return static_cast<std::size_t>(std::floor(open_hour_ / dt_ + 1e-9));
}

std::size_t TimeGrid::close_step() const {
    return static_cast<std::size_t>(std::ceil(close_hour_ / dt_ - 1e-9));
}

void validate(const PvParams& pv) {
    if (!(pv.rated_kw >= 0.0)) throw InputError("pv: rated power must be non-negative");
    if (!(pv.r_c > 0.0 && pv.r_c < pv.r_std)) throw InputError("pv: require 0 < r_c < r_std");
}

double pv_power_from_radiation(double radiation, const PvParams& pv) {
    if (!(radiation >= 0.0)) {
        throw InputError(fmt::format("pv: negative radiation {}", radiation));
    }
    if (radiation < pv.r_c) return radiation * radiation * pv.rated_kw / (pv.r_c * pv.r_std);
    if (radiation < pv.r_std) return radiation * pv.rated_kw / pv.r_std;
    return pv.rated_kw;
}

const char* to_string(VehicleKind kind) { return kind == VehicleKind::Car ? "car" : "bus"; }

void validate(const EvSession& s, std::size_t steps) {
    if (s.arrival >= s.departure) throw InputError("session: arrival must precede departure");
    if (s.departure > steps) throw InputError("session: departure beyond the end of the day");
    if (!(s.energy_kwh >= 0.0)) throw InputError("session: demanded energy must be non-negative");
    if (!(s.p_nominal_kw > 0.0 && s.p_nominal_kw <= s.p_max_kw)) {
        throw InputError("session: require 0 < nominal rate <= maximum rate");
    }
    if (!(s.efficiency > 0.0 && s.efficiency <= 1.0)) {
        throw InputError("session: efficiency must lie in (0, 1]");
    }
}

std::size_t fulfillment_time(const EvSession& s, double dt) {
    const double steps = s.energy_kwh / (s.efficiency * s.p_nominal_kw * dt);
    // Guard against 12.000000000000002 rounding up to 13.
    const double whole = std::ceil(steps - 1e-9);
    return s.arrival + static_cast<std::size_t>(std::max(0.0, whole));
}

namespace {

void check_series(const std::vector<double>& v, std::size_t steps, const char* name, bool non_negative) {
    if (v.size() != steps) {
        throw InputError(fmt::format("scenario: series '{}' has length {}, expected {}", name, v.size(), steps));
    }
    for (std::size_t t = 0; t < v.size(); ++t) {
        if (!std::isfinite(v[t])) throw InputError(fmt::format("scenario: series '{}' step {} is not finite", name, t));
        if (non_negative && v[t] < 0.0) {
            throw InputError(fmt::format("scenario: series '{}' step {} is negative", name, t));
        }
    }
}

}  // namespace

Scenario build_scenario(std::size_t id, double probability, const TimeGrid& grid,
                        SeriesBundle series, std::vector<EvSession> sessions,
                        const PvParams& pv) {
    if (!(probability > 0.0 && probability <= 1.0)) {
        throw InputError(fmt::format("scenario {}: probability {} outside (0, 1]", id, probability));
    }
    validate(pv);
    const std::size_t n = grid.steps();
    check_series(series.demand_kw, n, "demand", true);
    check_series(series.rbe_available_kw, n, "rbe", true);
    check_series(series.radiation_w_m2, n, "radiation", true);
    check_series(series.buy_eur_kwh, n, "buy price", false);
    check_series(series.sell_eur_kwh, n, "sell price", false);
    for (const EvSession& s : sessions) validate(s, n);

    Scenario sc;
    sc.id = id;
    sc.probability = probability;
    sc.grid = grid;
    sc.pv_kw.resize(n);
    for (std::size_t t = 0; t < n; ++t) sc.pv_kw[t] = pv_power_from_radiation(series.radiation_w_m2[t], pv);
    sc.demand_kw = std::move(series.demand_kw);
    sc.rbe_available_kw = std::move(series.rbe_available_kw);
    sc.radiation_w_m2 = std::move(series.radiation_w_m2);
    sc.buy_eur_kwh = std::move(series.buy_eur_kwh);
    sc.sell_eur_kwh = std::move(series.sell_eur_kwh);
    sc.sessions = std::move(sessions);
    return sc;
}

}  // namespace railyard::scenario
