#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hubmod::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Integer, Binary };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };
enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit };

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInfinity;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<Term> terms;
  Relation rel = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;
};

class Model {
 public:
  int add_variable(std::string name, VarKind kind, double lower, double upper);
  int add_continuous(std::string name, double lower = 0.0, double upper = kInfinity);
  int add_integer(std::string name, double lower, double upper);
  int add_binary(std::string name);

  void add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name = "");

  void set_sense(Sense s) { sense_ = s; }
  void set_objective_coef(int var, double coef) { objective_[var] = coef; }
  void add_objective_coef(int var, double coef) { objective_[var] += coef; }
  void set_objective_constant(double c) { objective_constant_ = c; }

  Sense sense() const { return sense_; }
  double objective_constant() const { return objective_constant_; }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  std::size_t var_count() const { return variables_.size(); }

  bool has_integers() const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<double> objective_;
  double objective_constant_ = 0.0;
  Sense sense_ = Sense::Minimize;
};

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  // Best dual bound: equals objective for proven-optimal solves.
  double bound = 0.0;
  // LP only, filled when LpOptions::want_duals: objective of the dual
  // solution reconstructed from the final basis.
  double dual_objective = 0.0;
  long iterations = 0;
  long nodes = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct LpOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;
  long max_iterations = 2000000;
  bool want_duals = false;
};

struct MilpOptions {
  LpOptions lp;
  double rel_gap = 1e-6;
  double int_tol = 1e-6;
  long max_nodes = 2000000;
  // Warm-start hint: integer variables to pin for one root dive; a
  // feasible completion becomes the initial incumbent.
  std::vector<std::pair<int, double>> integer_hint;
};

// Two-phase dense-tableau simplex. Integer/binary variables are treated
// as continuous (relaxed). Throws only on malformed models.
Solution solve_lp(const Model& model, const LpOptions& opt = {});

// Branch and bound on LP relaxations: most-fractional branching,
// best-bound node selection. Integer variables must be bounded.
Solution solve_milp(const Model& model, const MilpOptions& opt = {});

// CPLEX-style LP text export with 17 significant digits, for
// cross-checking against external solvers.
std::string write_lp_text(const Model& model);

// Seam for swapping in an external MILP engine: callers route through
// solve(), which dispatches to the registered backend (the built-in
// branch and bound by default). An empty backend restores the default.
using SolverBackend = std::function<Solution(const Model&, const MilpOptions&)>;
void set_solver_backend(SolverBackend backend);
Solution solve(const Model& model, const MilpOptions& opt = {});

}  // namespace hubmod::milp
