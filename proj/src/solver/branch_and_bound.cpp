#include "railyard/solver/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <utility>

namespace railyard::solver {

const char* to_string(MilpStatus status) {
    switch (status) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::FeasibleGap: return "feasible-gap";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::Unbounded: return "unbounded";
        case MilpStatus::NoSolutionFound: return "no-solution-found";
    }
    return "unknown";
}

namespace {

struct Node {
    double bound = -kInfinity;  // minimisation form
    std::size_t depth = 0;
    std::size_t id = 0;
    std::vector<std::pair<std::size_t, double>> fixes;
    std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id > b.id;
    }
};

double relative_gap(double incumbent, double bound) {
    return std::abs(incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

// Gaps below this are floating-point noise, so a zero limit still terminates.
constexpr double kGapFloor = 1e-9;

class BranchAndBound {
public:
    BranchAndBound(const LinearModel& model, const MilpOptions& options)
        : model_(model),
          opt_(options),
          sign_(model.objective_sense() == ObjectiveSense::Minimize ? 1.0 : -1.0),
          engine_(model, options.lp),
          aux_(model, options.lp) {
        for (std::size_t j = 0; j < model.num_variables(); ++j) {
            if (model.variables()[j].integrality == Integrality::Binary) binaries_.push_back(j);
        }
    }

    MilpSolution run();

private:
    void apply_fixes(SimplexEngine& engine, const std::vector<std::pair<std::size_t, double>>& fixes) {
        engine.restore_model_bounds();
        for (const auto& [j, v] : fixes) engine.set_bounds(VarId{j}, v, v);
    }

    // Fixes every binary to round(values[j]) and solves the remaining LP.
    void try_assignment(const std::vector<double>& values, const Basis& warm) {
        std::vector<std::pair<std::size_t, double>> fixes;
        fixes.reserve(binaries_.size());
        for (std::size_t j : binaries_) {
            const Variable& v = model_.variables()[j];
            const double r = std::clamp(std::round(values[j]), v.lower, v.upper);
            fixes.emplace_back(j, r);
        }
        apply_fixes(aux_, fixes);
        aux_.load_basis(warm);
        LpStatus st = LpStatus::Infeasible;
        try {
            st = aux_.solve();
        } catch (const NumericalError&) {
            aux_.load_slack_basis();
            st = aux_.solve();
        }
        iterations_ += aux_.iterations() - aux_iter_seen_;
        aux_iter_seen_ = aux_.iterations();
        if (st != LpStatus::Optimal) return;
        std::vector<double> x = aux_.values();
        for (const auto& [j, v] : fixes) x[j] = v;
        if (model_.max_row_violation(x) > 1e-6) return;
        const double z = sign_ * model_.objective_value(x);
        if (z < incumbent_) {
            incumbent_ = z;
            best_x_ = std::move(x);
        }
    }

    // Fractional diving: repeatedly round the least fractional binary and
    // re-solve, letting the LP repair the remaining variables, until the
    // point is integral. A failed rounding is flipped once before giving up.
    void dive(const std::vector<std::pair<std::size_t, double>>& base, std::vector<double> x, const Basis& warm) {
        std::vector<std::pair<std::size_t, double>> fixes = base;
        std::vector<char> fixed(model_.num_variables(), 0);
        for (const auto& [j, v] : fixes) fixed[j] = 1;
        apply_fixes(aux_, fixes);
        aux_.load_basis(warm);
        for (std::size_t round = 0; round < binaries_.size(); ++round) {
            std::ptrdiff_t pick = -1;
            double least = 1.0;
            for (std::size_t j : binaries_) {
                if (fixed[j]) continue;
                const double frac = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
                if (frac > opt_.integrality_tolerance && frac < least) {
                    least = frac;
                    pick = static_cast<std::ptrdiff_t>(j);
                }
            }
            if (pick < 0) {
                const Basis current = aux_.basis();
                try_assignment(x, current);
                return;
            }
            const auto j = static_cast<std::size_t>(pick);
            fixed[j] = 1;
            double v = std::round(x[j]);
            LpStatus st = LpStatus::Infeasible;
            for (int attempt = 0; attempt < 2 && st != LpStatus::Optimal; ++attempt) {
                if (attempt == 1) v = 1.0 - v;
                aux_.set_bounds(VarId{j}, v, v);
                const std::size_t before = aux_.iterations();
                try {
                    st = aux_.solve();
                } catch (const NumericalError&) {
                    st = LpStatus::Infeasible;
                }
                iterations_ += aux_.iterations() - before;
            }
            aux_iter_seen_ = aux_.iterations();
            if (st != LpStatus::Optimal) return;
            x = aux_.values();
            if (sign_ * aux_.objective() >= incumbent_) return;
        }
    }

    // Relaxation-induced neighbourhood search: binaries on which the node
    // relaxation and the incumbent agree are fixed, and the smaller MILP
    // that remains is searched with a node budget.
    void rins(const std::vector<double>& x) {
        if (!std::isfinite(incumbent_) || opt_.rins_node_limit == 0) return;
        LinearModel sub = model_;
        std::size_t agree = 0;
        for (std::size_t j : binaries_) {
            if (std::abs(x[j] - best_x_[j]) <= opt_.integrality_tolerance) {
                sub.set_bounds(VarId{j}, best_x_[j], best_x_[j]);
                ++agree;
            }
        }
        if (agree == binaries_.size() || 2 * agree < binaries_.size()) return;
        MilpOptions so = opt_;
        so.rins_node_limit = 0;
        so.dive_frequency = 0;
        so.node_limit = opt_.rins_node_limit;
        so.gap_limit = 0.0;
        const MilpSolution r = solve_milp(sub, so);
        iterations_ += r.lp_iterations;
        if (r.values.empty()) return;
        const double z = sign_ * model_.objective_value(r.values);
        if (z < incumbent_ && model_.max_row_violation(r.values) <= 1e-6) {
            incumbent_ = z;
            best_x_ = r.values;
        }
    }

    // Records the bound of a node discarded within the gap tolerance so the
    // reported bound stays valid.
    bool prune(double z) {
        if (!prunable(z)) return false;
        pruned_bound_ = std::min(pruned_bound_, z);
        return true;
    }

    bool prunable(double z) const {
        if (!std::isfinite(incumbent_)) return false;
        const double scale = std::max(1.0, std::abs(incumbent_));
        return (incumbent_ - z) / scale <= std::max(opt_.gap_limit, kGapFloor);
    }

    const LinearModel& model_;
    const MilpOptions& opt_;
    double sign_;
    SimplexEngine engine_;
    SimplexEngine aux_;
    std::vector<std::size_t> binaries_;

    double incumbent_ = kInfinity;
    double pruned_bound_ = kInfinity;
    std::vector<double> best_x_;
    std::size_t iterations_ = 0;
    std::size_t aux_iter_seen_ = 0;
};

MilpSolution BranchAndBound::run() {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();

    MilpSolution out;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    open.push(Node{});
    std::size_t next_id = 1;
    double best_bound = -kInfinity;
    bool limit_hit = false;

    while (!open.empty()) {
        const double frontier = std::min({open.top().bound, incumbent_, pruned_bound_});
        best_bound = std::max(best_bound, frontier);
        if (out.nodes > 0) out.bound_trace.push_back(sign_ * best_bound);
        if (std::isfinite(incumbent_) && relative_gap(incumbent_, best_bound) <= std::max(opt_.gap_limit, kGapFloor)) break;
        const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
        if (out.nodes >= opt_.node_limit || elapsed > opt_.time_limit_seconds) {
            limit_hit = true;
            break;
        }

        Node node = open.top();
        open.pop();
        if (prune(node.bound)) continue;

        apply_fixes(engine_, node.fixes);
        if (node.basis) {
            engine_.load_basis(*node.basis);
        } else {
            engine_.load_slack_basis();
        }
        const std::size_t before = engine_.iterations();
        LpStatus st = engine_.solve();
        iterations_ += engine_.iterations() - before;
        ++out.nodes;

        if (st == LpStatus::Unbounded) {
            if (node.depth == 0) {
                out.status = MilpStatus::Unbounded;
                out.lp_iterations = iterations_;
                return out;
            }
            continue;
        }
        if (st != LpStatus::Optimal) continue;

        const double z = sign_ * engine_.objective();
        if (prune(z)) continue;
        const std::vector<double> x = engine_.values();
        auto basis = std::make_shared<const Basis>(engine_.basis());

        std::ptrdiff_t branch = -1;
        double best_frac = opt_.integrality_tolerance;
        for (std::size_t j : binaries_) {
            const double frac = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
            if (frac > best_frac + 1e-12) {
                best_frac = frac;
                branch = static_cast<std::ptrdiff_t>(j);
            }
        }

        if (branch < 0) {
            // Integral within tolerance: re-solve with the binaries fixed
            // exactly so the reported point satisfies every row.
            try_assignment(x, *basis);
            continue;
        }

        if (node.depth == 0) try_assignment(x, *basis);
        if (opt_.diving && (node.depth == 0 || (opt_.dive_frequency > 0 && out.nodes % opt_.dive_frequency == 0))) {
            dive(node.fixes, x, *basis);
        }
        if (opt_.rounding_hint && (node.depth == 0 || out.nodes % opt_.hint_frequency == 0)) {
            if (auto proposal = opt_.rounding_hint(x)) {
                if (proposal->size() == x.size()) try_assignment(*proposal, *basis);
            }
        }
        if (node.depth == 0 || (opt_.rins_frequency > 0 && out.nodes % opt_.rins_frequency == 0)) rins(x);
        if (prune(z)) continue;

        const auto j = static_cast<std::size_t>(branch);
        const double up_first = x[j] >= 0.5 ? 1.0 : 0.0;
        for (double v : {up_first, 1.0 - up_first}) {
            Node child;
            child.bound = z;
            child.depth = node.depth + 1;
            child.id = next_id++;
            child.fixes = node.fixes;
            child.fixes.emplace_back(j, v);
            child.basis = basis;
            open.push(std::move(child));
        }
    }

    out.lp_iterations = iterations_;
    if (!std::isfinite(incumbent_)) {
        out.status = limit_hit ? MilpStatus::NoSolutionFound : MilpStatus::Infeasible;
        return out;
    }
    if (open.empty()) best_bound = std::min(incumbent_, pruned_bound_);
    out.values = best_x_;
    out.objective = model_.objective_value(best_x_);
    out.bound = sign_ * best_bound;
    out.gap = relative_gap(incumbent_, best_bound);
    out.status = limit_hit && out.gap > std::max(opt_.gap_limit, kGapFloor) ? MilpStatus::FeasibleGap : MilpStatus::Optimal;
    out.bound_trace.push_back(out.bound);
    return out;
}

}  // namespace

MilpSolution solve_milp(const LinearModel& model, const MilpOptions& options) {
    BranchAndBound bb(model, options);
    return bb.run();
}

}  // namespace railyard::solver
