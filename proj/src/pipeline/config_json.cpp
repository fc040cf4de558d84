#include "railyard/pipeline/config_json.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <fmt/format.h>

#include "railyard/scenario/sessions.hpp"

namespace railyard::pipeline {

using nlohmann::json;
using scenario::InputError;

namespace {

// Walks one JSON object, remembering which keys were consumed so that
// anything left over can be rejected.
class Section {
public:
    Section(const json* obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (obj_ != nullptr && !obj_->is_object()) fail_at(path_.empty() ? "config" : path_, "must be an object");
    }

    std::string key_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const char* key) {
        if (obj_ == nullptr) return nullptr;
        const auto it = obj_->find(key);
        if (it == obj_->end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void number(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail_at(key_path(key), "must be a number");
            out = v->get<double>();
            if (!std::isfinite(out)) fail_at(key_path(key), "must be finite");
        }
    }

    void optional_number(const char* key, std::optional<double>& out) {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            if (!v->is_number()) fail_at(key_path(key), "must be a number or null");
            out = v->get<double>();
        }
    }

    template <typename Int>
    void integer(const char* key, Int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<long long>() < 0)) {
                fail_at(key_path(key), "must be a non-negative integer");
            }
            const auto u = v->get<std::uint64_t>();
            if (u > std::numeric_limits<Int>::max()) fail_at(key_path(key), "is too large");
            out = static_cast<Int>(u);
        }
    }

    void boolean(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail_at(key_path(key), "must be true or false");
            out = v->get<bool>();
        }
    }

    void text(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail_at(key_path(key), "must be a string");
            out = v->get<std::string>();
        }
    }

    // A string from a fixed vocabulary.
    template <typename Enum>
    void choice(const char* key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> options) {
        const json* v = find(key);
        if (v == nullptr) return;
        std::string word;
        if (v->is_string()) {
            word = v->get<std::string>();
        } else if (v->is_number_integer()) {
            word = std::to_string(v->get<long long>());
        }
        std::string allowed;
        for (const auto& [name, value] : options) {
            if (word == name) {
                out = value;
                return;
            }
            allowed += allowed.empty() ? name : std::string(", ") + name;
        }
        fail_at(key_path(key), fmt::format("must be one of: {}", allowed));
    }

    Section child(const char* key) {
        const json* v = find(key);
        return Section(v, key_path(key));
    }

    void finish() const {
        if (obj_ == nullptr) return;
        for (const auto& [key, value] : obj_->items()) {
            if (!seen_.count(key)) fail_at(path_.empty() ? key : path_ + "." + key, "unknown key");
        }
    }

    [[noreturn]] static void fail_at(const std::string& key, const std::string& what) {
        throw InputError(fmt::format("config: {}: {}", key, what));
    }

private:
    const json* obj_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string hhmm(double minutes) {
    const auto m = static_cast<long>(minutes);
    return fmt::format("{:02}:{:02}", m / 60, m % 60);
}

json departures_json(const std::vector<double>& minutes) {
    json out = json::array();
    for (double m : minutes) {
        if (m == std::floor(m)) {
            out.push_back(hhmm(m));
        } else {
            out.push_back(m);
        }
    }
    return out;
}

std::vector<double> departures_from(const json& v, const std::string& path) {
    if (!v.is_array()) Section::fail_at(path, "must be a list of HH:MM times");
    std::vector<double> out;
    for (const json& e : v) {
        if (e.is_string()) {
            try {
                out.push_back(scenario::parse_hhmm(e.get<std::string>()));
            } catch (const InputError& err) {
                Section::fail_at(path, err.what());
            }
        } else if (e.is_number()) {
            out.push_back(e.get<double>());
        } else {
            Section::fail_at(path, "must be a list of HH:MM times");
        }
    }
    return out;
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json config_to_json(const ExperimentConfig& c) {
    const auto& sc = c.scenario;
    const auto& g = sc.grid;
    const auto& car = sc.cars;
    const auto& bus = sc.buses;
    const auto& syn = sc.synthetic;
    const auto& ess = c.ems.ess;
    return {
        {"seed", c.seed},
        {"scenarios", c.scenarios},
        {"workers", c.workers},
        {"out_dir", c.out_dir},
        {"policy", to_string(c.policy)},
        {"case", to_string(c.cases)},
        {"ems_profile", c.ems_uses_uncoordinated ? "uncoordinated" : "optimized"},
        {"line_limit", nullable(c.line_limit_kw)},
        {"line_limit_scope", ev::to_string(c.line_limit_scope)},
        {"time",
         {{"dt_hours", g.dt()}, {"steps", g.steps()}, {"open_hour", g.open_hour()}, {"close_hour", g.close_hour()}}},
        {"pv", {{"rated", sc.pv.rated_kw}, {"r_c", sc.pv.r_c}, {"r_std", sc.pv.r_std}}},
        {"cars",
         {{"arrival_rate", car.arrival_rate_per_hour},
          {"energy_max", car.energy_max_kwh},
          {"p_nominal", car.p_nominal_kw},
          {"p_max", car.p_max_kw},
          {"efficiency", car.efficiency},
          {"departure_window_hours", car.departure_window_hours}}},
        {"buses",
         {{"energy_max", bus.energy_max_kwh},
          {"p_nominal", bus.p_nominal_kw},
          {"p_max", bus.p_max_kw},
          {"efficiency", bus.efficiency},
          {"lead_min", bus.lead_min_minutes},
          {"lead_max", bus.lead_max_minutes},
          {"departures", departures_json(bus.departures_min)}}},
        {"synthetic",
         {{"demand_peak", syn.demand_peak_kw},
          {"demand_scale_min", syn.demand_scale_min},
          {"demand_scale_max", syn.demand_scale_max},
          {"demand_noise", syn.demand_noise},
          {"rbe_ratio", syn.rbe_ratio},
          {"rbe_shift_steps", syn.rbe_shift_steps},
          {"rbe_noise", syn.rbe_noise},
          {"radiation_peak", syn.radiation_peak_w_m2},
          {"radiation_noise", syn.radiation_noise},
          {"solar_noon_hour", syn.solar_noon_hour},
          {"price_base", syn.price_base_eur_kwh},
          {"price_scale_min", syn.price_scale_min},
          {"price_scale_max", syn.price_scale_max},
          {"price_noise", syn.price_noise},
          {"equal_prices", sc.equal_prices}}},
        {"inputs",
         {{"demand_csv", c.inputs.demand_csv},
          {"rbe_csv", c.inputs.rbe_csv},
          {"radiation_csv", c.inputs.radiation_csv},
          {"prices_csv", c.inputs.prices_csv},
          {"bus_schedule_csv", c.inputs.bus_schedule_csv},
          {"resample", c.inputs.resample}}},
        {"ess",
         {{"capacity", ess.capacity_kwh},
          {"soc_min", ess.soc_min_kwh},
          {"soc_init", ess.soc_init_kwh},
          {"p_charge_max", ess.p_charge_max_kw},
          {"p_discharge_max", ess.p_discharge_max_kw},
          {"self_discharge", ess.self_discharge},
          {"eta_charge", ess.eta_charge},
          {"eta_discharge", ess.eta_discharge},
          {"discharge_form", ems::to_string(ess.discharge_form)},
          {"terminal_soc_at_least_initial", ess.terminal_soc_at_least_initial}}},
        {"exchange", {{"p_buy_max", c.ems.p_buy_max_kw}, {"p_sell_max", c.ems.p_sell_max_kw}}},
        {"solver",
         {{"gap", c.solver.gap_limit},
          {"node_limit", c.solver.node_limit},
          {"time_limit_seconds",
           std::isfinite(c.solver.time_limit_seconds) ? json(c.solver.time_limit_seconds) : json(nullptr)},
          {"rounding_hint", c.solver.rounding_hint},
          {"rins_node_limit", c.solver.rins_node_limit},
          {"rins_frequency", c.solver.rins_frequency}}},
    };
}

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig c;
    if (doc.is_null()) {
        validate(c);
        return c;
    }
    Section root(&doc, "");
    root.integer("seed", c.seed);
    root.integer("scenarios", c.scenarios);
    root.integer("workers", c.workers);
    root.text("out_dir", c.out_dir);
    root.choice("policy", c.policy,
                {{"optimized", PolicySelection::Optimized},
                 {"uncoordinated", PolicySelection::Uncoordinated},
                 {"both", PolicySelection::Both}});
    root.choice("case", c.cases, {{"1", CaseSelection::Case1}, {"2", CaseSelection::Case2}, {"both", CaseSelection::Both}});
    root.choice("ems_profile", c.ems_uses_uncoordinated, {{"optimized", false}, {"uncoordinated", true}});
    root.optional_number("line_limit", c.line_limit_kw);
    root.choice("line_limit_scope", c.line_limit_scope,
                {{"horizon", ev::LineLimitScope::Horizon}, {"first_step", ev::LineLimitScope::FirstStep}});

    auto& sc = c.scenario;
    {
        Section s = root.child("time");
        double dt = sc.grid.dt(), open = sc.grid.open_hour(), close = sc.grid.close_hour();
        std::size_t steps = sc.grid.steps();
        s.number("dt_hours", dt);
        s.integer("steps", steps);
        s.number("open_hour", open);
        s.number("close_hour", close);
        s.finish();
        if (!(dt > 0.0)) Section::fail_at("time.dt_hours", "must be positive");
        if (steps == 0 || std::abs(dt * static_cast<double>(steps) - 24.0) > 1e-9) {
            Section::fail_at("time.steps", "steps times dt_hours must cover 24 h");
        }
        if (!(open >= 0.0 && open < close && close <= 24.0)) {
            Section::fail_at("time.open_hour", "require 0 <= open_hour < close_hour <= 24");
        }
        sc.grid = scenario::TimeGrid(dt, steps, open, close);
    }
    {
        Section s = root.child("pv");
        s.number("rated", sc.pv.rated_kw);
        s.number("r_c", sc.pv.r_c);
        s.number("r_std", sc.pv.r_std);
        s.finish();
    }
    {
        Section s = root.child("cars");
        auto& car = sc.cars;
        s.number("arrival_rate", car.arrival_rate_per_hour);
        s.number("energy_max", car.energy_max_kwh);
        s.number("p_nominal", car.p_nominal_kw);
        s.number("p_max", car.p_max_kw);
        s.number("efficiency", car.efficiency);
        s.number("departure_window_hours", car.departure_window_hours);
        s.finish();
    }
    {
        Section s = root.child("buses");
        auto& bus = sc.buses;
        s.number("energy_max", bus.energy_max_kwh);
        s.number("p_nominal", bus.p_nominal_kw);
        s.number("p_max", bus.p_max_kw);
        s.number("efficiency", bus.efficiency);
        s.number("lead_min", bus.lead_min_minutes);
        s.number("lead_max", bus.lead_max_minutes);
        if (const json* v = s.find("departures")) bus.departures_min = departures_from(*v, "buses.departures");
        s.finish();
    }
    {
        Section s = root.child("synthetic");
        auto& syn = sc.synthetic;
        s.number("demand_peak", syn.demand_peak_kw);
        s.number("demand_scale_min", syn.demand_scale_min);
        s.number("demand_scale_max", syn.demand_scale_max);
        s.number("demand_noise", syn.demand_noise);
        s.number("rbe_ratio", syn.rbe_ratio);
        s.integer("rbe_shift_steps", syn.rbe_shift_steps);
        s.number("rbe_noise", syn.rbe_noise);
        s.number("radiation_peak", syn.radiation_peak_w_m2);
        s.number("radiation_noise", syn.radiation_noise);
        s.number("solar_noon_hour", syn.solar_noon_hour);
        s.number("price_base", syn.price_base_eur_kwh);
        s.number("price_scale_min", syn.price_scale_min);
        s.number("price_scale_max", syn.price_scale_max);
        s.number("price_noise", syn.price_noise);
        s.boolean("equal_prices", sc.equal_prices);
        s.finish();
    }
    {
        Section s = root.child("inputs");
        s.text("demand_csv", c.inputs.demand_csv);
        s.text("rbe_csv", c.inputs.rbe_csv);
        s.text("radiation_csv", c.inputs.radiation_csv);
        s.text("prices_csv", c.inputs.prices_csv);
        s.text("bus_schedule_csv", c.inputs.bus_schedule_csv);
        s.boolean("resample", c.inputs.resample);
        s.finish();
    }
    {
        Section s = root.child("ess");
        auto& ess = c.ems.ess;
        s.number("capacity", ess.capacity_kwh);
        s.number("soc_min", ess.soc_min_kwh);
        s.number("soc_init", ess.soc_init_kwh);
        s.number("p_charge_max", ess.p_charge_max_kw);
        s.number("p_discharge_max", ess.p_discharge_max_kw);
        s.number("self_discharge", ess.self_discharge);
        s.number("eta_charge", ess.eta_charge);
        s.number("eta_discharge", ess.eta_discharge);
        s.choice("discharge_form", ess.discharge_form,
                 {{"multiply", ems::DischargeForm::MultiplyEta}, {"divide", ems::DischargeForm::DivideEta}});
        s.boolean("terminal_soc_at_least_initial", ess.terminal_soc_at_least_initial);
        s.finish();
    }
    {
        Section s = root.child("exchange");
        s.number("p_buy_max", c.ems.p_buy_max_kw);
        s.number("p_sell_max", c.ems.p_sell_max_kw);
        s.finish();
    }
    {
        Section s = root.child("solver");
        s.number("gap", c.solver.gap_limit);
        s.integer("node_limit", c.solver.node_limit);
        std::optional<double> limit;
        if (std::isfinite(c.solver.time_limit_seconds)) limit = c.solver.time_limit_seconds;
        s.optional_number("time_limit_seconds", limit);
        c.solver.time_limit_seconds = limit ? *limit : solver::kInfinity;
        s.boolean("rounding_hint", c.solver.rounding_hint);
        s.integer("rins_node_limit", c.solver.rins_node_limit);
        s.integer("rins_frequency", c.solver.rins_frequency);
        s.finish();
    }
    root.finish();
    validate(c);
    return c;
}

}  // namespace railyard::pipeline
