#include "railyard/solver/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace railyard::solver {

namespace {

std::vector<Term> normalize(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.var.index < b.var.index; });
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const Term& t : terms) {
        if (!merged.empty() && merged.back().var == t.var) {
            merged.back().coef += t.coef;
        } else {
            merged.push_back(t);
        }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
    return merged;
}

void check_bounds(const std::string& name, double lower, double upper, Integrality kind) {
    if (std::isnan(lower) || std::isnan(upper)) {
        throw std::invalid_argument(fmt::format("variable '{}': NaN bound", name));
    }
    if (lower > upper) {
        throw std::invalid_argument(
            fmt::format("variable '{}': lower bound {} exceeds upper bound {}", name, lower, upper));
    }
    if (lower == kInfinity || upper == -kInfinity) {
        throw std::invalid_argument(fmt::format("variable '{}': empty bound range", name));
    }
    if (kind == Integrality::Binary && (lower < 0.0 || upper > 1.0)) {
        throw std::invalid_argument(
            fmt::format("variable '{}': binary bounds must lie within [0, 1]", name));
    }
}

}  // namespace

VarId LinearModel::add_variable(std::string name, double lower, double upper,
                                Integrality integrality) {
    check_bounds(name, lower, upper, integrality);
    variables_.push_back({std::move(name), lower, upper, integrality});
    objective_.push_back(0.0);
    return VarId{variables_.size() - 1};
}

RowId LinearModel::add_constraint(std::vector<Term> terms, RowSense sense, double rhs,
                                  std::string name) {
    for (const Term& t : terms) {
        check_var(t.var);
        if (!std::isfinite(t.coef)) {
            throw std::invalid_argument(fmt::format("constraint '{}': non-finite coefficient", name));
        }
    }
    if (!std::isfinite(rhs)) {
        throw std::invalid_argument(fmt::format("constraint '{}': non-finite rhs", name));
    }
    constraints_.push_back({std::move(name), normalize(std::move(terms)), sense, rhs});
    return RowId{constraints_.size() - 1};
}

void LinearModel::set_objective(std::vector<Term> terms, ObjectiveSense sense) {
    std::fill(objective_.begin(), objective_.end(), 0.0);
    for (const Term& t : terms) {
        check_var(t.var);
        objective_[t.var.index] += t.coef;
    }
    objective_sense_ = sense;
}

void LinearModel::set_objective_coefficient(VarId var, double coef) {
    check_var(var);
    objective_[var.index] = coef;
}

void LinearModel::set_bounds(VarId var, double lower, double upper) {
    check_var(var);
    Variable& v = variables_[var.index];
    check_bounds(v.name, lower, upper, v.integrality);
    v.lower = lower;
    v.upper = upper;
}

std::size_t LinearModel::num_binaries() const {
    return static_cast<std::size_t>(std::count_if(
        variables_.begin(), variables_.end(),
        [](const Variable& v) { return v.integrality == Integrality::Binary; }));
}

double LinearModel::objective_value(const std::vector<double>& x) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < objective_.size(); ++j) sum += objective_[j] * x.at(j);
    return sum;
}

double LinearModel::row_activity(RowId row, const std::vector<double>& x) const {
    double sum = 0.0;
    for (const Term& t : constraints_.at(row.index).terms) sum += t.coef * x.at(t.var.index);
    return sum;
}

double LinearModel::max_row_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
        const Constraint& c = constraints_[i];
        const double act = row_activity(RowId{i}, x);
        double v = 0.0;
        switch (c.sense) {
            case RowSense::LessEqual: v = act - c.rhs; break;
            case RowSense::GreaterEqual: v = c.rhs - act; break;
            case RowSense::Equal: v = std::abs(act - c.rhs); break;
        }
        worst = std::max(worst, v);
    }
    return worst;
}

double LinearModel::max_bound_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < variables_.size(); ++j) {
        worst = std::max({worst, variables_[j].lower - x.at(j), x.at(j) - variables_[j].upper});
    }
    return worst;
}

void LinearModel::check_var(VarId var) const {
    if (var.index >= variables_.size()) {
        throw std::out_of_range(fmt::format("unknown variable index {} (model has {} variables)",
                                            var.index, variables_.size()));
    }
}

void write_lp_text(const LinearModel& model, std::ostream& out) {
    auto name_of = [&](std::size_t j) {
        const std::string& n = model.variables()[j].name;
        return n.empty() ? fmt::format("x{}", j) : n;
    };
    fmt::print(out, "\\ railyard-lp v1\n");
    fmt::print(out, "{}\n",
               model.objective_sense() == ObjectiveSense::Minimize ? "Minimize" : "Maximize");
    fmt::print(out, " obj:");
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        if (model.objective()[j] != 0.0) fmt::print(out, " {:+.17g} {}", model.objective()[j], name_of(j));
    }
    fmt::print(out, "\nSubject To\n");
    for (std::size_t i = 0; i < model.num_constraints(); ++i) {
        const Constraint& c = model.constraints()[i];
        fmt::print(out, " {}:", c.name.empty() ? fmt::format("c{}", i) : c.name);
        for (const Term& t : c.terms) fmt::print(out, " {:+.17g} {}", t.coef, name_of(t.var.index));
        const char* op = c.sense == RowSense::LessEqual ? "<=" : c.sense == RowSense::Equal ? "=" : ">=";
        fmt::print(out, " {} {:.17g}\n", op, c.rhs);
    }
    fmt::print(out, "Bounds\n");
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        const Variable& v = model.variables()[j];
        fmt::print(out, " {:.17g} <= {} <= {:.17g}\n", v.lower, name_of(j), v.upper);
    }
    fmt::print(out, "Binaries\n");
    for (std::size_t j = 0; j < model.num_variables(); ++j) {
        if (model.variables()[j].integrality == Integrality::Binary) fmt::print(out, " {}\n", name_of(j));
    }
    fmt::print(out, "End\n");
}

}  // namespace railyard::solver
