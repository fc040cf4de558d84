#pragma once

#include <cstdint>
#include <vector>

#include "railyard/scenario/scenario.hpp"

namespace railyard::scenario {

// Shape parameters for the synthetic day. These stand in for measured
// station data and carry no claim of realism beyond their rough shape.
struct SyntheticConfig {
    // Train demand: commuter double peak, normalised to this peak.
    double demand_peak_kw = 5000.0;
    double demand_scale_min = 0.85;
    double demand_scale_max = 1.0;
    double demand_noise = 0.05;
    // Regenerative braking availability: scaled, delayed copy of demand.
    double rbe_ratio = 0.2;
    std::size_t rbe_shift_steps = 1;
    double rbe_noise = 0.2;
    // Clear-sky half sine with a seasonal day length and cloud factor.
    double radiation_peak_w_m2 = 1050.0;
    double radiation_noise = 0.15;
    double solar_noon_hour = 12.5;
    // Hourly day-ahead price with morning and evening peaks.
    double price_base_eur_kwh = 0.09;
    double price_scale_min = 0.7;
    double price_scale_max = 1.3;
    double price_noise = 0.05;
};

std::vector<double> synthetic_demand(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                     const SyntheticConfig& cfg);
std::vector<double> synthetic_rbe(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                  const std::vector<double>& demand, const SyntheticConfig& cfg);
std::vector<double> synthetic_radiation(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                        const SyntheticConfig& cfg);
std::vector<double> synthetic_prices(std::uint64_t seed, std::size_t scenario, const TimeGrid& grid,
                                     const SyntheticConfig& cfg);

}  // namespace railyard::scenario
