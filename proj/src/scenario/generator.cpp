#include "railyard/scenario/generator.hpp"

#include "railyard/scenario/random.hpp"

namespace railyard::scenario {

Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed, std::size_t index,
                           std::size_t count) {
    if (count == 0) throw InputError("scenario count must be at least 1");
    SeriesBundle b;
    b.demand_kw = cfg.demand_kw ? *cfg.demand_kw : synthetic_demand(seed, index, cfg.grid, cfg.synthetic);
    b.rbe_available_kw = cfg.rbe_kw ? *cfg.rbe_kw : synthetic_rbe(seed, index, cfg.grid, b.demand_kw, cfg.synthetic);
    b.radiation_w_m2 =
        cfg.radiation_w_m2 ? *cfg.radiation_w_m2 : synthetic_radiation(seed, index, cfg.grid, cfg.synthetic);
    b.buy_eur_kwh = cfg.buy_eur_kwh ? *cfg.buy_eur_kwh : synthetic_prices(seed, index, cfg.grid, cfg.synthetic);
    if (cfg.equal_prices || !cfg.sell_eur_kwh) {
        b.sell_eur_kwh = b.buy_eur_kwh;
    } else {
        b.sell_eur_kwh = *cfg.sell_eur_kwh;
    }

    RandomStream cars = RandomStream::derive(seed, index, StreamTag::Cars);
    RandomStream buses = RandomStream::derive(seed, index, StreamTag::Buses);
    std::vector<EvSession> sessions = generate_car_sessions(cars, cfg.grid, cfg.cars);
    std::vector<EvSession> bus_sessions = generate_bus_sessions(buses, cfg.grid, cfg.buses);
    sessions.insert(sessions.end(), bus_sessions.begin(), bus_sessions.end());

    return build_scenario(index, 1.0 / static_cast<double>(count), cfg.grid, std::move(b), std::move(sessions),
                          cfg.pv);
}

}  // namespace railyard::scenario
