#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "railyard/pipeline/experiment.hpp"

namespace railyard::cli {

enum class Subcommand { Run, SimulateEv, SolveEms, GenScenarios };

const char* to_string(Subcommand s);

// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> scenarios;
    std::optional<std::string> out_dir;
    std::optional<pipeline::PolicySelection> policy;
    std::optional<pipeline::CaseSelection> cases;
    std::optional<bool> ems_uses_uncoordinated;
    std::optional<double> gap;
    std::optional<std::size_t> workers;
};

struct CliInvocation {
    Subcommand subcommand = Subcommand::Run;
    std::string config_path;
    Overrides overrides;
    // solve-ems only: EV profile CSV with a `p_ev_kw` column and the
    // scenario it belongs to.
    std::string profile_path;
    std::size_t scenario = 0;
};

// Reads a JSON config file. Missing keys take their defaults; unknown keys
// and invalid values fail with the key path.
pipeline::ExperimentConfig parse_config(const std::filesystem::path& path);

// Config file (or defaults) with overrides applied. The output directory
// falls back to $RAILYARD_OUT, then `out`.
pipeline::ExperimentConfig resolve_config(const CliInvocation& inv);

// Exit codes: 0 success, 2 bad arguments, 3 invalid input, 4 run failure.
// Errors go to `err` as one JSON object per line.
int run_cli(const CliInvocation& inv, std::ostream& out, std::ostream& err);

// Parses argv and runs it; `--help` prints usage and returns 0.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace railyard::cli
