#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "railyard/solver/linear_model.hpp"
#include "railyard/solver/simplex.hpp"

namespace railyard::solver {

enum class MilpStatus {
    Optimal,          // incumbent proven within the gap limit
    FeasibleGap,      // a node or time limit stopped the search with an incumbent
    Infeasible,
    Unbounded,        // the root relaxation is unbounded
    NoSolutionFound,  // a limit was hit before any incumbent existed
};

const char* to_string(MilpStatus status);

// Given an LP relaxation point, propose values for the binary variables
// (entries for continuous variables are ignored). The solver fixes the
// binaries to the rounded proposal and re-solves the remaining LP.
using RoundingHint = std::function<std::optional<std::vector<double>>(const std::vector<double>&)>;

struct MilpOptions {
    double gap_limit = 0.0;
    std::size_t node_limit = 100000;
    double time_limit_seconds = kInfinity;
    double integrality_tolerance = 1e-6;
    SimplexOptions lp;
    RoundingHint rounding_hint;
    // The hint runs at the root and then every this many nodes.
    std::size_t hint_frequency = 25;
    // Fractional diving for incumbents: at the root and, when non-zero,
    // every `dive_frequency` nodes.
    bool diving = true;
    std::size_t dive_frequency = 0;
    // Neighbourhood search around the incumbent at the root and every
    // `rins_frequency` nodes; a zero node limit disables it.
    std::size_t rins_node_limit = 0;
    std::size_t rins_frequency = 0;
};

struct MilpSolution {
    MilpStatus status = MilpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> values;
    double bound = 0.0;
    double gap = 0.0;
    std::size_t nodes = 0;
    std::size_t lp_iterations = 0;
    // Best bound after every processed node, in the model's objective sense.
    std::vector<double> bound_trace;
};

// Best-bound branch-and-bound over the binary variables with an LP
// relaxation at each node. Branching picks the most fractional binary,
// lowest index on ties, so identical inputs give identical trees.
// gap = |objective - bound| / max(1, |objective|).
MilpSolution solve_milp(const LinearModel& model, const MilpOptions& options = {});

}  // namespace railyard::solver
