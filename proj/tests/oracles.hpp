#pragma once

// Test-only reference solvers. They share nothing with the simplex code:
// LPs are solved by enumerating every basic point of the bounded polytope,
// MILPs by enumerating binary assignments on top of that.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "railyard/solver/linear_model.hpp"

namespace railyard::testing {

using solver::LinearModel;

// Gaussian elimination with partial pivoting; false when singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        if (std::abs(a[piv][c]) < 1e-10) return false;
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

// Optimum of the LP relaxation by vertex enumeration. Every variable must
// have finite bounds. Returns nullopt when infeasible.
inline std::optional<double> enumerate_vertices(const LinearModel& model,
                                                std::vector<double>* argbest = nullptr) {
    const auto& vars = model.variables();
    std::vector<std::size_t> free_vars;
    std::vector<double> base(vars.size(), 0.0);
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].lower == vars[j].upper) {
            base[j] = vars[j].lower;
        } else {
            free_vars.push_back(j);
        }
    }
    const std::size_t n = free_vars.size();

    // Candidate hyperplanes over the free variables: rows and bound planes.
    struct Plane {
        std::vector<double> a;
        double b;
    };
    std::vector<Plane> planes;
    for (const auto& c : model.constraints()) {
        Plane p{std::vector<double>(n, 0.0), c.rhs};
        for (const auto& t : c.terms) {
            const std::size_t j = t.var.index;
            if (vars[j].lower == vars[j].upper) {
                p.b -= t.coef * base[j];
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (free_vars[k] == j) p.a[k] += t.coef;
            }
        }
        planes.push_back(std::move(p));
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (double bound : {vars[free_vars[k]].lower, vars[free_vars[k]].upper}) {
            Plane p{std::vector<double>(n, 0.0), bound};
            p.a[k] = 1.0;
            planes.push_back(std::move(p));
        }
    }

    const double sign = model.objective_sense() == solver::ObjectiveSense::Minimize ? 1.0 : -1.0;
    std::optional<double> best;
    std::vector<double> point = base;

    auto consider = [&](const std::vector<double>& sub) {
        for (std::size_t k = 0; k < n; ++k) point[free_vars[k]] = sub[k];
        if (model.max_row_violation(point) > 1e-7) return;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& v = vars[free_vars[k]];
            if (sub[k] < v.lower - 1e-7 || sub[k] > v.upper + 1e-7) return;
        }
        const double z = model.objective_value(point);
        if (!best || sign * z < sign * *best) {
            best = z;
            if (argbest) *argbest = point;
        }
    };

    if (n == 0) {
        consider({});
        return best;
    }

    std::vector<std::size_t> pick(n);
    for (std::size_t i = 0; i < n; ++i) pick[i] = i;
    const std::size_t total = planes.size();
    while (true) {
        std::vector<std::vector<double>> a(n);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = planes[pick[i]].a;
            b[i] = planes[pick[i]].b;
        }
        std::vector<double> sub;
        if (solve_dense(a, b, sub)) consider(sub);

        std::size_t i = n;
        while (i > 0 && pick[i - 1] == total - n + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
    }
    return best;
}

// MILP optimum by enumerating every binary assignment and solving the
// remaining LP by vertex enumeration.
inline std::optional<double> brute_force_milp(const LinearModel& model) {
    std::vector<std::size_t> bins;
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        if (model.variables()[j].integrality == solver::Integrality::Binary) bins.push_back(j);
    }
    const double sign = model.objective_sense() == solver::ObjectiveSense::Minimize ? 1.0 : -1.0;
    std::optional<double> best;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bins.size()); ++mask) {
        LinearModel fixed = model;
        bool ok = true;
        for (std::size_t k = 0; k < bins.size(); ++k) {
            const double v = static_cast<double>((mask >> k) & 1U);
            const auto& var = model.variables()[bins[k]];
            if (v < var.lower || v > var.upper) {
                ok = false;
                break;
            }
            fixed.set_bounds(solver::VarId{bins[k]}, v, v);
        }
        if (!ok) continue;
        if (auto z = enumerate_vertices(fixed)) {
            if (!best || sign * *z < sign * *best) best = z;
        }
    }
    return best;
}

// Random bounded LP with a guaranteed interior-ish feasible point.
inline LinearModel random_lp(std::mt19937_64& rng, std::size_t nvars, std::size_t nrows) {
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    std::uniform_real_distribution<double> box(0.0, 10.0);
    std::uniform_real_distribution<double> slack(0.0, 3.0);
    LinearModel m;
    std::vector<double> x0(nvars);
    for (std::size_t j = 0; j < nvars; ++j) {
        const double ub = 2.0 + box(rng);
        m.add_variable("x" + std::to_string(j), 0.0, ub);
        x0[j] = std::uniform_real_distribution<double>(0.0, ub)(rng);
    }
    for (std::size_t i = 0; i < nrows; ++i) {
        std::vector<solver::Term> row;
        double act = 0.0;
        for (std::size_t j = 0; j < nvars; ++j) {
            const double a = std::round(coef(rng) * 4.0) / 4.0;
            row.push_back({solver::VarId{j}, a});
            act += a * x0[j];
        }
        if (rng() % 2 == 0) {
            m.add_constraint(row, solver::RowSense::LessEqual, act + slack(rng));
        } else {
            m.add_constraint(row, solver::RowSense::GreaterEqual, act - slack(rng));
        }
    }
    std::vector<solver::Term> obj;
    for (std::size_t j = 0; j < nvars; ++j) obj.push_back({solver::VarId{j}, coef(rng)});
    m.set_objective(obj, rng() % 2 == 0 ? solver::ObjectiveSense::Minimize
                                        : solver::ObjectiveSense::Maximize);
    return m;
}

// Random MILP: `nbin` binaries plus up to two bounded continuous variables.
// Rows are generated around a random binary point so most instances are
// feasible; some are not, which exercises the infeasible path.
inline LinearModel random_milp(std::mt19937_64& rng, std::size_t nbin, std::size_t ncont,
                               std::size_t nrows) {
    std::uniform_real_distribution<double> coef(-6.0, 6.0);
    std::uniform_real_distribution<double> slack(0.0, 4.0);
    LinearModel m;
    std::vector<double> x0;
    for (std::size_t j = 0; j < nbin; ++j) {
        m.add_variable("b" + std::to_string(j), 0.0, 1.0, solver::Integrality::Binary);
        x0.push_back(static_cast<double>(rng() % 2));
    }
    for (std::size_t j = 0; j < ncont; ++j) {
        m.add_variable("y" + std::to_string(j), 0.0, 5.0);
        x0.push_back(std::uniform_real_distribution<double>(0.0, 5.0)(rng));
    }
    const std::size_t nv = nbin + ncont;
    for (std::size_t i = 0; i < nrows; ++i) {
        std::vector<solver::Term> row;
        double act = 0.0;
        for (std::size_t j = 0; j < nv; ++j) {
            if (rng() % 3 == 0) continue;
            const double a = std::round(coef(rng));
            row.push_back({solver::VarId{j}, a});
            act += a * x0[j];
        }
        m.add_constraint(row, solver::RowSense::LessEqual, act + slack(rng) - 1.0);
    }
    std::vector<solver::Term> obj;
    for (std::size_t j = 0; j < nv; ++j) obj.push_back({solver::VarId{j}, std::round(coef(rng) * 2.0) / 2.0});
    m.set_objective(obj, rng() % 2 == 0 ? solver::ObjectiveSense::Minimize
                                        : solver::ObjectiveSense::Maximize);
    return m;
}

}  // namespace railyard::testing
