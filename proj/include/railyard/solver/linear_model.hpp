#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace railyard::solver {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Integrality { Continuous, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class ObjectiveSense { Minimize, Maximize };

struct VarId {
    std::size_t index = 0;
    friend bool operator==(VarId, VarId) = default;
};

struct RowId {
    std::size_t index = 0;
    friend bool operator==(RowId, RowId) = default;
};

struct Term {
    VarId var;
    double coef = 0.0;
};

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInfinity;
    Integrality integrality = Integrality::Continuous;
};

// Coefficients are merged per variable and kept sorted by variable index.
struct Constraint {
    std::string name;
    std::vector<Term> terms;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
};

// Sparse LP/MILP container. Variables and rows are append-only so handles
// stay valid while a model is being built.
class LinearModel {
public:
    VarId add_variable(std::string name, double lower, double upper,
                       Integrality integrality = Integrality::Continuous);
    RowId add_constraint(std::vector<Term> terms, RowSense sense, double rhs,
                         std::string name = {});

    void set_objective(std::vector<Term> terms, ObjectiveSense sense);
    void set_objective_coefficient(VarId var, double coef);
    void set_objective_sense(ObjectiveSense sense) { objective_sense_ = sense; }
    void set_bounds(VarId var, double lower, double upper);

    std::size_t num_variables() const { return variables_.size(); }
    std::size_t num_constraints() const { return constraints_.size(); }
    std::size_t num_binaries() const;

    const Variable& variable(VarId var) const { return variables_.at(var.index); }
    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<double>& objective() const { return objective_; }
    ObjectiveSense objective_sense() const { return objective_sense_; }

    double objective_value(const std::vector<double>& x) const;
    double row_activity(RowId row, const std::vector<double>& x) const;

    // Largest violation of any row (absolute) and of any variable bound.
    double max_row_violation(const std::vector<double>& x) const;
    double max_bound_violation(const std::vector<double>& x) const;

private:
    void check_var(VarId var) const;

    std::vector<Variable> variables_;
    std::vector<Constraint> constraints_;
    std::vector<double> objective_;
    ObjectiveSense objective_sense_ = ObjectiveSense::Minimize;
};

// Plain-text listing of a model for debugging. The first line is a version
// header; the remaining layout is stable for a given header.
void write_lp_text(const LinearModel& model, std::ostream& out);

}  // namespace railyard::solver
