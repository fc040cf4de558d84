#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "railyard/solver/linear_model.hpp"

namespace railyard::solver {

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

// Raised when the simplex loses track of a consistent basis or exceeds its
// iteration budget. A wrong "optimal" is never reported instead.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimplexOptions {
    double primal_tolerance = 1e-9;
    double dual_tolerance = 1e-9;
    double pivot_tolerance = 1e-9;
    // 0 selects a budget proportional to the model size.
    std::size_t max_iterations = 0;
    std::size_t refactor_interval = 64;
    // Consecutive degenerate pivots tolerated before switching to Bland's rule.
    std::size_t degenerate_threshold = 50;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> values;
    std::size_t iterations = 0;
};

enum class BasisStatus : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

// Columns [0, n) are structural variables, [n, n + m) are row logicals.
struct Basis {
    std::vector<std::size_t> head;
    std::vector<BasisStatus> status;
};

// Bounded-variable revised primal simplex. Each row i is written as
// a_i x - r_i = 0 with the logical r_i carrying the row bounds, so any basis
// is a valid starting point: infeasible basics are driven out by a composite
// phase 1 that minimises the sum of bound violations. This is what lets
// branch-and-bound restart children from the parent basis.
class SimplexEngine {
public:
    explicit SimplexEngine(const LinearModel& model, SimplexOptions options = {});
    ~SimplexEngine();
    SimplexEngine(SimplexEngine&&) noexcept;
    SimplexEngine& operator=(SimplexEngine&&) noexcept;

    void set_bounds(VarId var, double lower, double upper);
    void restore_model_bounds();

    void load_slack_basis();
    void load_basis(const Basis& basis);
    const Basis& basis() const;

    LpStatus solve();

    std::vector<double> values() const;
    // Objective in the model's own sense.
    double objective() const;
    std::size_t iterations() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Solves the LP relaxation of `model` (integrality flags are ignored). The
// reported point is verified against the model; rows must hold to 1e-6.
LpSolution solve_lp(const LinearModel& model, const SimplexOptions& options = {});

}  // namespace railyard::solver
