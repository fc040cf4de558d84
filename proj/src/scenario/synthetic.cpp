#include "railyard/scenario/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "railyard/scenario/random.hpp"

namespace railyard::scenario {

namespace {

double bump(double h, double centre, double width) {
    const double z = (h - centre) / width;
    return std::exp(-0.5 * z * z);
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Service level: trains run from about 05:00 to 23:30.
double demand_shape(double h) {
    const double service = logistic(3.0 * (h - 5.0)) * logistic(-3.0 * (h - 23.5));
    return 0.12 + 0.33 * service + 0.55 * bump(h, 7.5, 1.2) + 0.5 * bump(h, 17.75, 1.5);
}

double price_shape(double h) {
    return 1.0 + 0.35 * bump(h, 8.0, 1.5) + 0.5 * bump(h, 19.0, 2.0) - 0.25 * bump(h, 13.5, 2.5) -
           0.25 * bump(h, 3.0, 2.5);
}

}  // namespace

std::vector<double> synthetic_demand(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                     const SyntheticConfig& cfg) {
    RandomStream rng = RandomStream::derive(seed, scenario, StreamTag::Demand);
    const std::size_t n = grid.steps();
    std::vector<double> shape(n);
    double peak = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        shape[t] = demand_shape(grid.hour_of(t) + 0.5 * grid.dt());
        peak = std::max(peak, shape[t]);
    }
    const double scale = rng.uniform(cfg.demand_scale_min, cfg.demand_scale_max);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double noise = 1.0 + cfg.demand_noise * rng.uniform(-1.0, 1.0);
        out[t] = std::max(0.0, cfg.demand_peak_kw * scale * noise * shape[t] / peak);
    }
    return out;
}

std::vector<double> synthetic_rbe(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                  const std::vector<double>& demand, const SyntheticConfig& cfg) {
    RandomStream rng = RandomStream::derive(seed, scenario, StreamTag::Rbe);
    const std::size_t n = grid.steps();
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t src = (t + n - cfg.rbe_shift_steps % n) % n;
        const double noise = 1.0 + cfg.rbe_noise * rng.uniform(-1.0, 1.0);
        out[t] = std::max(0.0, cfg.rbe_ratio * demand[src] * noise);
    }
    return out;
}

std::vector<double> synthetic_radiation(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                        const SyntheticConfig& cfg) {
    RandomStream rng = RandomStream::derive(seed, scenario, StreamTag::Radiation);
    const double day_of_year = rng.uniform(0.0, 365.0);
    const double season = std::cos(2.0 * std::numbers::pi * (day_of_year - 172.0) / 365.0);
    const double daylight = 12.0 + 4.0 * season;
    const double sunrise = cfg.solar_noon_hour - 0.5 * daylight;
    const double clearness = rng.uniform(0.3, 1.0);
    const double peak = cfg.radiation_peak_w_m2 * (0.55 + 0.45 * season) * clearness;

    const std::size_t n = grid.steps();
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double h = grid.hour_of(t) + 0.5 * grid.dt();
        const double cloud = 1.0 - cfg.radiation_noise * rng.uniform01();
        const double phase = (h - sunrise) / daylight;
        if (phase > 0.0 && phase < 1.0) out[t] = peak * std::sin(std::numbers::pi * phase) * cloud;
    }
    return out;
}

std::vector<double> synthetic_prices(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                     const SyntheticConfig& cfg) {
    RandomStream rng = RandomStream::derive(seed, scenario, StreamTag::Prices);
    const double scale = rng.uniform(cfg.price_scale_min, cfg.price_scale_max);
    double hourly[24];
    for (int hour = 0; hour < 24; ++hour) {
        const double noise = 1.0 + cfg.price_noise * rng.uniform(-1.0, 1.0);
        hourly[hour] = std::max(0.001, cfg.price_base_eur_kwh * scale * noise * price_shape(hour + 0.5));
    }
    std::vector<double> out(grid.steps());
    for (std::size_t t = 0; t < out.size(); ++t) {
        const auto hour = std::min<std::size_t>(23, static_cast<std::size_t>(std::floor(grid.hour_of(t) + 1e-9)));
        out[t] = hourly[hour];
    }
    return out;
}

}  // namespace railyard::scenario
