#include "railyard/solver/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace railyard::solver {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

constexpr double kDegenerateStep = 1e-12;
constexpr double kDropTolerance = 1e-14;

// Product-form update: B_new = B_old * E, where E is the identity with
// column r replaced by the entering column's FTRAN image.
struct Eta {
    std::size_t row = 0;
    double pivot = 1.0;
    std::vector<std::pair<std::size_t, double>> entries;  // excludes `row`
};

}  // namespace

struct SimplexEngine::Impl {
    SimplexOptions opt;
    std::size_t m = 0;
    std::size_t n = 0;

    // Structural columns in compressed-column form.
    std::vector<std::size_t> col_start;
    std::vector<std::size_t> row_index;
    std::vector<double> value;
    std::vector<double> col_weight;  // 1 + squared column norm

    std::vector<double> model_lower;
    std::vector<double> model_upper;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> cost;
    double sense = 1.0;

    Basis basis;
    std::vector<std::ptrdiff_t> position;
    std::vector<double> x;
    bool has_basis = false;

    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    std::vector<Eta> etas;
    std::size_t iterations = 0;

    std::size_t total() const { return n + m; }

    template <typename F>
    void for_column(std::size_t j, F&& f) const {
        if (j < n) {
            for (std::size_t k = col_start[j]; k < col_start[j + 1]; ++k) f(row_index[k], value[k]);
        } else {
            f(j - n, -1.0);
        }
    }

    double dot_column(std::size_t j, const std::vector<double>& y) const {
        double s = 0.0;
        for_column(j, [&](std::size_t i, double a) { s += y[i] * a; });
        return s;
    }

    void place_nonbasic(std::size_t j, BasisStatus preferred) {
        const bool has_lo = std::isfinite(lower[j]);
        const bool has_up = std::isfinite(upper[j]);
        BasisStatus s = preferred;
        if (s == BasisStatus::Basic) s = BasisStatus::AtLower;
        if (s == BasisStatus::AtLower && !has_lo) s = has_up ? BasisStatus::AtUpper : BasisStatus::AtZero;
        if (s == BasisStatus::AtUpper && !has_up) s = has_lo ? BasisStatus::AtLower : BasisStatus::AtZero;
        if (s == BasisStatus::AtZero && (has_lo || has_up)) s = has_lo ? BasisStatus::AtLower : BasisStatus::AtUpper;
        basis.status[j] = s;
        x[j] = s == BasisStatus::AtLower ? lower[j] : s == BasisStatus::AtUpper ? upper[j] : 0.0;
    }

    void slack_basis() {
        basis.head.resize(m);
        basis.status.assign(total(), BasisStatus::AtLower);
        position.assign(total(), -1);
        x.assign(total(), 0.0);
        for (std::size_t j = 0; j < n; ++j) place_nonbasic(j, BasisStatus::AtLower);
        for (std::size_t i = 0; i < m; ++i) {
            basis.head[i] = n + i;
            basis.status[n + i] = BasisStatus::Basic;
            position[n + i] = static_cast<std::ptrdiff_t>(i);
        }
        has_basis = true;
    }

    void install_basis(const Basis& b) {
        if (b.head.size() != m || b.status.size() != total()) {
            throw std::invalid_argument("basis dimensions do not match the model");
        }
        basis = b;
        position.assign(total(), -1);
        x.assign(total(), 0.0);
        for (std::size_t p = 0; p < m; ++p) {
            const std::size_t j = b.head[p];
            if (j >= total() || position[j] != -1) throw std::invalid_argument("malformed basis head");
            position[j] = static_cast<std::ptrdiff_t>(p);
            basis.status[j] = BasisStatus::Basic;
        }
        for (std::size_t j = 0; j < total(); ++j) {
            if (position[j] == -1) place_nonbasic(j, b.status[j]);
        }
        has_basis = true;
    }

    void refactor() {
        etas.clear();
        if (m == 0) return;
        std::vector<Eigen::Triplet<double, int>> trips;
        trips.reserve(3 * m);
        for (std::size_t p = 0; p < m; ++p) {
            for_column(basis.head[p], [&](std::size_t i, double a) {
                trips.emplace_back(static_cast<int>(i), static_cast<int>(p), a);
            });
        }
        SpMat bmat(static_cast<int>(m), static_cast<int>(m));
        bmat.setFromTriplets(trips.begin(), trips.end());
        bmat.makeCompressed();
        lu.analyzePattern(bmat);
        lu.factorize(bmat);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("simplex: basis matrix is singular");
        }
        recompute_basics();
    }

    void recompute_basics() {
        std::vector<double> rhs(m, 0.0);
        for (std::size_t j = 0; j < total(); ++j) {
            if (position[j] != -1 || x[j] == 0.0) continue;
            const double xj = x[j];
            for_column(j, [&](std::size_t i, double a) { rhs[i] -= a * xj; });
        }
        ftran(rhs);
        for (std::size_t p = 0; p < m; ++p) x[basis.head[p]] = rhs[p];
    }

    void ftran(std::vector<double>& v) const {
        if (m == 0) return;
        Eigen::Map<Eigen::VectorXd> vm(v.data(), static_cast<Eigen::Index>(m));
        Eigen::VectorXd w = lu.solve(vm);
        vm = w;
        for (const Eta& e : etas) {
            const double p = v[e.row] / e.pivot;
            if (p != 0.0) {
                for (const auto& [i, a] : e.entries) v[i] -= a * p;
            }
            v[e.row] = p;
        }
    }

    void btran(std::vector<double>& v) const {
        if (m == 0) return;
        for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
            double s = v[it->row];
            for (const auto& [i, a] : it->entries) s -= a * v[i];
            v[it->row] = s / it->pivot;
        }
        Eigen::Map<Eigen::VectorXd> vm(v.data(), static_cast<Eigen::Index>(m));
        Eigen::VectorXd w = lu.transpose().solve(vm);
        vm = w;
    }

    LpStatus run();
};

SimplexEngine::SimplexEngine(const LinearModel& model, SimplexOptions options)
    : impl_(std::make_unique<Impl>()) {
    Impl& s = *impl_;
    s.opt = options;
    s.n = model.num_variables();
    s.m = model.num_constraints();
    s.sense = model.objective_sense() == ObjectiveSense::Minimize ? 1.0 : -1.0;

    std::vector<std::size_t> counts(s.n, 0);
    for (const Constraint& c : model.constraints()) {
        for (const Term& t : c.terms) ++counts[t.var.index];
    }
    s.col_start.assign(s.n + 1, 0);
    for (std::size_t j = 0; j < s.n; ++j) s.col_start[j + 1] = s.col_start[j] + counts[j];
    s.row_index.resize(s.col_start[s.n]);
    s.value.resize(s.col_start[s.n]);
    std::vector<std::size_t> fill(s.col_start.begin(), s.col_start.end() - 1);
    for (std::size_t i = 0; i < s.m; ++i) {
        for (const Term& t : model.constraints()[i].terms) {
            const std::size_t k = fill[t.var.index]++;
            s.row_index[k] = i;
            s.value[k] = t.coef;
        }
    }

    const std::size_t total = s.total();
    s.col_weight.assign(total, 2.0);
    for (std::size_t j = 0; j < s.n; ++j) {
        double w = 1.0;
        for (std::size_t k = s.col_start[j]; k < s.col_start[j + 1]; ++k) w += s.value[k] * s.value[k];
        s.col_weight[j] = w;
    }

    s.lower.assign(total, 0.0);
    s.upper.assign(total, 0.0);
    s.cost.assign(total, 0.0);
    for (std::size_t j = 0; j < s.n; ++j) {
        const Variable& v = model.variables()[j];
        s.lower[j] = v.lower;
        s.upper[j] = v.upper;
        s.cost[j] = s.sense * model.objective()[j];
    }
    for (std::size_t i = 0; i < s.m; ++i) {
        const Constraint& c = model.constraints()[i];
        s.lower[s.n + i] = c.sense == RowSense::LessEqual ? -kInfinity : c.rhs;
        s.upper[s.n + i] = c.sense == RowSense::GreaterEqual ? kInfinity : c.rhs;
    }
    s.model_lower.assign(s.lower.begin(), s.lower.begin() + static_cast<std::ptrdiff_t>(s.n));
    s.model_upper.assign(s.upper.begin(), s.upper.begin() + static_cast<std::ptrdiff_t>(s.n));
}

SimplexEngine::~SimplexEngine() = default;
SimplexEngine::SimplexEngine(SimplexEngine&&) noexcept = default;
SimplexEngine& SimplexEngine::operator=(SimplexEngine&&) noexcept = default;

void SimplexEngine::set_bounds(VarId var, double lower, double upper) {
    Impl& s = *impl_;
    if (var.index >= s.n) throw std::out_of_range("set_bounds: unknown variable");
    if (lower > upper) throw std::invalid_argument("set_bounds: lower bound exceeds upper bound");
    s.lower[var.index] = lower;
    s.upper[var.index] = upper;
    if (s.has_basis && s.position[var.index] == -1) s.place_nonbasic(var.index, s.basis.status[var.index]);
}

void SimplexEngine::restore_model_bounds() {
    Impl& s = *impl_;
    for (std::size_t j = 0; j < s.n; ++j) {
        s.lower[j] = s.model_lower[j];
        s.upper[j] = s.model_upper[j];
        if (s.has_basis && s.position[j] == -1) s.place_nonbasic(j, s.basis.status[j]);
    }
}

void SimplexEngine::load_slack_basis() { impl_->slack_basis(); }
void SimplexEngine::load_basis(const Basis& basis) { impl_->install_basis(basis); }
const Basis& SimplexEngine::basis() const { return impl_->basis; }
std::size_t SimplexEngine::iterations() const { return impl_->iterations; }

std::vector<double> SimplexEngine::values() const {
    const Impl& s = *impl_;
    std::vector<double> out(s.n);
    for (std::size_t j = 0; j < s.n; ++j) out[j] = std::clamp(s.x[j], s.lower[j], s.upper[j]);
    return out;
}

double SimplexEngine::objective() const {
    const Impl& s = *impl_;
    double sum = 0.0;
    for (std::size_t j = 0; j < s.n; ++j) sum += s.cost[j] * std::clamp(s.x[j], s.lower[j], s.upper[j]);
    return s.sense * sum;
}

LpStatus SimplexEngine::solve() {
    Impl& s = *impl_;
    if (!s.has_basis) s.slack_basis();
    for (std::size_t j = 0; j < s.total(); ++j) {
        if (s.position[j] == -1) s.place_nonbasic(j, s.basis.status[j]);
    }
    return s.run();
}

LpStatus SimplexEngine::Impl::run() {
    const double ptol = opt.primal_tolerance;
    const double dtol = opt.dual_tolerance;
    const std::size_t budget =
        opt.max_iterations != 0 ? opt.max_iterations : std::max<std::size_t>(200000, 50 * (m + n));

    refactor();
    bool fresh = true;
    bool bland = false;
    std::size_t degenerate_run = 0;
    std::size_t local_iterations = 0;

    std::vector<double> cb(m);
    std::vector<double> y(m);
    std::vector<double> alpha(m);

    while (true) {
        if (local_iterations > budget) {
            throw NumericalError(fmt::format("simplex: iteration limit {} exceeded", budget));
        }

        bool phase1 = false;
        for (std::size_t p = 0; p < m && !phase1; ++p) {
            const std::size_t j = basis.head[p];
            phase1 = x[j] < lower[j] - ptol || x[j] > upper[j] + ptol;
        }
        for (std::size_t p = 0; p < m; ++p) {
            const std::size_t j = basis.head[p];
            if (phase1) {
                cb[p] = x[j] < lower[j] - ptol ? -1.0 : x[j] > upper[j] + ptol ? 1.0 : 0.0;
            } else {
                cb[p] = cost[j];
            }
        }
        y = cb;
        btran(y);

        // Pricing: normalised Dantzig, or lowest index under Bland's rule.
        std::ptrdiff_t entering = -1;
        double direction = 0.0;
        double best_score = 0.0;
        for (std::size_t j = 0; j < total(); ++j) {
            if (position[j] != -1) continue;
            if (lower[j] == upper[j]) continue;
            const double cj = phase1 ? 0.0 : cost[j];
            const double d = cj - dot_column(j, y);
            double dir = 0.0;
            switch (basis.status[j]) {
                case BasisStatus::AtLower: if (d < -dtol) dir = 1.0; break;
                case BasisStatus::AtUpper: if (d > dtol) dir = -1.0; break;
                case BasisStatus::AtZero: if (d < -dtol) dir = 1.0; else if (d > dtol) dir = -1.0; break;
                case BasisStatus::Basic: break;
            }
            if (dir == 0.0) continue;
            if (bland) {
                entering = static_cast<std::ptrdiff_t>(j);
                direction = dir;
                break;
            }
            const double score = d * d / col_weight[j];
            if (score > best_score) {
                best_score = score;
                entering = static_cast<std::ptrdiff_t>(j);
                direction = dir;
            }
        }

        if (entering < 0) {
            if (!fresh) {
                refactor();
                fresh = true;
                continue;
            }
            return phase1 ? LpStatus::Infeasible : LpStatus::Optimal;
        }

        const auto q = static_cast<std::size_t>(entering);
        std::fill(alpha.begin(), alpha.end(), 0.0);
        for_column(q, [&](std::size_t i, double a) { alpha[i] = a; });
        ftran(alpha);

        // Harris two-pass ratio test. Basic j moves at rate delta = -dir * alpha.
        auto limit_of = [&](std::size_t p, double slack) -> double {
            const double a = alpha[p];
            if (std::abs(a) <= opt.pivot_tolerance) return kInfinity;
            const double delta = -direction * a;
            const std::size_t j = basis.head[p];
            if (delta < 0.0) {
                if (x[j] > upper[j] + ptol) return (x[j] - upper[j] + slack) / -delta;
                if (x[j] < lower[j] - ptol || !std::isfinite(lower[j])) return kInfinity;
                return (std::max(0.0, x[j] - lower[j]) + slack) / -delta;
            }
            if (x[j] < lower[j] - ptol) return (lower[j] - x[j] + slack) / delta;
            if (x[j] > upper[j] + ptol || !std::isfinite(upper[j])) return kInfinity;
            return (std::max(0.0, upper[j] - x[j]) + slack) / delta;
        };

        const double flip = (std::isfinite(lower[q]) && std::isfinite(upper[q])) ? upper[q] - lower[q] : kInfinity;
        double theta_max = kInfinity;
        for (std::size_t p = 0; p < m; ++p) theta_max = std::min(theta_max, limit_of(p, bland ? 0.0 : ptol));

        if (!std::isfinite(theta_max) && !std::isfinite(flip)) {
            if (phase1) throw NumericalError("simplex: phase 1 direction without a breakpoint");
            if (!fresh) {
                refactor();
                fresh = true;
                continue;
            }
            return LpStatus::Unbounded;
        }

        ++iterations;
        ++local_iterations;
        fresh = false;

        if (flip <= theta_max) {
            for (std::size_t p = 0; p < m; ++p) {
                if (alpha[p] != 0.0) x[basis.head[p]] += -direction * alpha[p] * flip;
            }
            if (basis.status[q] == BasisStatus::AtLower) {
                basis.status[q] = BasisStatus::AtUpper;
                x[q] = upper[q];
            } else {
                basis.status[q] = BasisStatus::AtLower;
                x[q] = lower[q];
            }
            degenerate_run = 0;
            bland = false;
            continue;
        }

        std::ptrdiff_t leave = -1;
        double leave_ratio = kInfinity;
        double leave_pivot = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            const double r = limit_of(p, 0.0);
            if (!std::isfinite(r)) continue;
            if (bland) {
                const bool better = r < leave_ratio - kDegenerateStep ||
                                    (r <= leave_ratio + kDegenerateStep && leave >= 0 &&
                                     basis.head[p] < basis.head[static_cast<std::size_t>(leave)]);
                if (leave < 0 || better) {
                    leave = static_cast<std::ptrdiff_t>(p);
                    leave_ratio = r;
                }
            } else if (r <= theta_max && std::abs(alpha[p]) > leave_pivot) {
                leave = static_cast<std::ptrdiff_t>(p);
                leave_ratio = r;
                leave_pivot = std::abs(alpha[p]);
            }
        }
        if (leave < 0) throw NumericalError("simplex: ratio test found no leaving variable");

        const auto r = static_cast<std::size_t>(leave);
        const std::size_t out = basis.head[r];
        const double theta = std::max(0.0, leave_ratio);
        const double delta_r = -direction * alpha[r];

        double target = 0.0;
        BasisStatus out_status = BasisStatus::AtLower;
        if (delta_r < 0.0) {
            if (x[out] > upper[out] + ptol) {
                target = upper[out];
                out_status = BasisStatus::AtUpper;
            } else {
                target = lower[out];
                out_status = BasisStatus::AtLower;
            }
        } else {
            if (x[out] < lower[out] - ptol) {
                target = lower[out];
                out_status = BasisStatus::AtLower;
            } else {
                target = upper[out];
                out_status = BasisStatus::AtUpper;
            }
        }

        for (std::size_t p = 0; p < m; ++p) {
            if (alpha[p] != 0.0) x[basis.head[p]] += -direction * alpha[p] * theta;
        }
        x[q] += direction * theta;
        x[out] = target;

        basis.head[r] = q;
        position[q] = static_cast<std::ptrdiff_t>(r);
        basis.status[q] = BasisStatus::Basic;
        position[out] = -1;
        basis.status[out] = (lower[out] == upper[out]) ? BasisStatus::AtLower : out_status;

        Eta eta;
        eta.row = r;
        eta.pivot = alpha[r];
        for (std::size_t p = 0; p < m; ++p) {
            if (p != r && std::abs(alpha[p]) > kDropTolerance) eta.entries.emplace_back(p, alpha[p]);
        }
        etas.push_back(std::move(eta));

        if (theta <= kDegenerateStep) {
            if (++degenerate_run > opt.degenerate_threshold) bland = true;
        } else {
            degenerate_run = 0;
            bland = false;
        }

        if (etas.size() >= opt.refactor_interval) refactor();
    }
}

LpSolution solve_lp(const LinearModel& model, const SimplexOptions& options) {
    SimplexEngine engine(model, options);
    LpSolution sol;
    sol.status = engine.solve();
    sol.iterations = engine.iterations();
    if (sol.status == LpStatus::Optimal) {
        sol.values = engine.values();
        sol.objective = model.objective_value(sol.values);
        const double viol = model.max_row_violation(sol.values);
        if (viol > 1e-6) {
            throw NumericalError(
                fmt::format("simplex: optimal basis violates a row by {:.3g}", viol));
        }
    }
    return sol;
}

}  // namespace railyard::solver
