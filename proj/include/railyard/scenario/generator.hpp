#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "railyard/scenario/scenario.hpp"
#include "railyard/scenario/sessions.hpp"
#include "railyard/scenario/synthetic.hpp"

namespace railyard::scenario {

struct ScenarioConfig {
    TimeGrid grid;
    PvParams pv;
    CarConfig cars;
    BusConfig buses{.departures_min = default_bus_schedule()};
    SyntheticConfig synthetic;
    bool equal_prices = true;

    // Measured series replace the synthetic ones when present; they are
    // shared by every scenario while the EV population stays random.
    std::optional<std::vector<double>> demand_kw;
    std::optional<std::vector<double>> rbe_kw;
    std::optional<std::vector<double>> radiation_w_m2;
    std::optional<std::vector<double>> buy_eur_kwh;
    std::optional<std::vector<double>> sell_eur_kwh;
};

// Scenario `index` of `count` equally likely days. Pure in
// (config, seed, index): it can be produced in any order or concurrently.
Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::size_t index,
                           std::size_t count);

}  // namespace railyard::scenario
