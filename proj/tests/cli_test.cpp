#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "railyard/cli/cli.hpp"

using namespace railyard;
using namespace railyard::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("railyard_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "timings.csv") continue;
        out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
    return out;
}

struct Outcome {
    int code;
    std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "railyard");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// A day with no vehicles at all.
std::string sessionless_config(const fs::path& dir) {
    const fs::path p = dir / "sessionless.json";
    write(p, R"({"scenarios": 2, "cars": {"arrival_rate": 0}, "buses": {"departures": []}})");
    return p.string();
}

}  // namespace

TEST_CASE("parse_config reads files and reports bad ones") {
    const fs::path dir = fresh_dir("config");
    write(dir / "empty.json", "{}");
    CHECK(parse_config(dir / "empty.json").scenarios == 150);

    write(dir / "five.json", R"({"scenarios": 5})");
    CHECK(parse_config(dir / "five.json").scenarios == 5);

    write(dir / "bad.json", R"({"ess": {"capacity": 100, "soc_min": 200}})");
    CHECK_THROWS_WITH_AS(parse_config(dir / "bad.json"), doctest::Contains("ess.soc_min"), scenario::InputError);

    write(dir / "broken.json", R"({"scenarios": )");
    CHECK_THROWS_WITH_AS(parse_config(dir / "broken.json"), doctest::Contains("malformed JSON"), scenario::InputError);
    CHECK_THROWS_AS(parse_config(dir / "missing.json"), scenario::InputError);
}

TEST_CASE("overrides beat the config file and the output directory falls back") {
    const fs::path dir = fresh_dir("overrides");
    write(dir / "c.json", R"({"seed": 3, "scenarios": 4, "out_dir": "from_config"})");
    CliInvocation inv;
    inv.config_path = (dir / "c.json").string();
    inv.overrides.scenarios = 9;
    inv.overrides.gap = 0.01;
    auto c = resolve_config(inv);
    CHECK(c.seed == 3);
    CHECK(c.scenarios == 9);
    CHECK(c.solver.gap_limit == 0.01);
    CHECK(c.out_dir == "from_config");

    inv.config_path.clear();
    ::setenv("RAILYARD_OUT", "from_env", 1);
    CHECK(resolve_config(inv).out_dir == "from_env");
    inv.overrides.out_dir = "from_flag";
    CHECK(resolve_config(inv).out_dir == "from_flag");
    ::unsetenv("RAILYARD_OUT");
    inv.overrides.out_dir.reset();
    CHECK(resolve_config(inv).out_dir == "out");
}

TEST_CASE("run twice with the same seed gives identical output trees") {
    const fs::path a = fresh_dir("run_a");
    const fs::path b = fresh_dir("run_b");
    const Outcome ra = invoke({"run", "--seed", "7", "--scenarios", "3", "--out", a.string()});
    const Outcome rb = invoke({"run", "--seed", "7", "--scenarios", "3", "--out", b.string()});
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out.find("Total Operating Costs") != std::string::npos);

    auto ta = tree(a);
    auto tb = tree(b);
    // The output directory is echoed in the config section.
    auto ja = nlohmann::json::parse(ta.at("report.json"));
    auto jb = nlohmann::json::parse(tb.at("report.json"));
    CHECK(ja["config"]["out_dir"] == a.string());
    jb["config"]["out_dir"] = a.string();
    CHECK(ja == jb);
    ta.erase("report.json");
    tb.erase("report.json");
    CHECK(ta == tb);
    CHECK(ta.count("001/dispatch.csv") == 1);
    CHECK(ja["config"]["seed"] == 7);
    CHECK(ja["scenarios"][0]["case1_gap"].get<double>() <= 0.005);
}

TEST_CASE("simulate-ev on a sessionless day writes zero profiles") {
    const fs::path dir = fresh_dir("simulate");
    const Outcome r = invoke({"simulate-ev", "--config", sessionless_config(dir), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    for (const char* name : {"000/charging_optimized.csv", "001/charging_uncoordinated.csv"}) {
        std::istringstream in(slurp(dir / "out" / name));
        std::string line;
        std::getline(in, line);
        CHECK(line == "step,p_ev_kw,running_peak_kw");
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            CHECK(line.substr(line.find(',')) == ",0.000000,0.000000");
            ++rows;
        }
        CHECK(rows == 144);
    }
    CHECK(fs::exists(dir / "out" / "peaks.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / "000" / "dispatch.csv"));
}

TEST_CASE("solve-ems rejects a misaligned profile and accepts an aligned one") {
    const fs::path dir = fresh_dir("solve");
    write(dir / "short.csv", "p_ev_kw\n1\n2\n3\n");
    Outcome r = invoke({"solve-ems", "--profile", (dir / "short.csv").string(), "--out", dir.string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("length mismatch") != std::string::npos);
    const auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"]["module"] == "cli_io");

    std::string flat = "p_ev_kw\n";
    for (int t = 0; t < 144; ++t) flat += "20\n";
    write(dir / "flat.csv", flat);
    r = invoke({"solve-ems", "--profile", (dir / "flat.csv").string(), "--scenario", "1", "--scenarios", "3",
                "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto res = nlohmann::json::parse(r.out);
    CHECK(res["scenario"] == 1);
    CHECK(res["case1_cost_eur"].get<double>() <= res["case2_cost_eur"].get<double>());
    CHECK(fs::exists(dir / "001" / "dispatch.csv"));
}

TEST_CASE("gen-scenarios writes series and sessions") {
    const fs::path dir = fresh_dir("gen");
    const Outcome r = invoke({"gen-scenarios", "--scenarios", "2", "--seed", "5", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const std::string series = slurp(dir / "001" / "series.csv");
    CHECK(series.rfind("step,hour,demand_kw,rbe_kw,radiation_w_m2,pv_kw,buy_eur_kwh,sell_eur_kwh\n", 0) == 0);
    CHECK(std::count(series.begin(), series.end(), '\n') == 145);
    CHECK(fs::exists(dir / "000" / "sessions.csv"));
}

TEST_CASE("bad arguments and inputs exit nonzero with a JSON error") {
    Outcome r = invoke({"run", "--bogus"});
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"]["stage"] == "arguments");

    r = invoke({"run", "--policy", "smart"});
    CHECK(r.code == 2);

    r = invoke({});
    CHECK(r.code == 2);

    r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("simulate-ev") != std::string::npos);

    const fs::path dir = fresh_dir("bad_input");
    write(dir / "c.json", R"({"ess": {"soc_min": 5000}})");
    r = invoke({"run", "--config", (dir / "c.json").string(), "--out", dir.string()});
    CHECK(r.code == 3);
    CHECK(nlohmann::json::parse(r.err)["error"]["message"].get<std::string>().find("ess.soc_min") !=
          std::string::npos);

    write(dir / "tight.json", R"({"scenarios": 1, "line_limit": 100})");
    r = invoke({"run", "--config", (dir / "tight.json").string(), "--out", (dir / "tight").string()});
    CHECK(r.code == 4);
    const auto e = nlohmann::json::parse(r.err.substr(r.err.find("{\"error\"")));
    CHECK(e["error"]["module"] == "pipeline");
    CHECK(e["error"]["stage"] == "ev-optimized");
    CHECK(e["error"]["scenario"] == 0);
    CHECK(fs::exists(dir / "tight" / "report.json"));
}
