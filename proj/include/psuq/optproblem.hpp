#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace psuq::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Integer, Binary };
enum class Rel { Le, Eq, Ge };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  VarKind kind = VarKind::Continuous;
};

struct RowEntry {
  int var = -1;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  Rel rel = Rel::Le;
  double rhs = 0.0;
  std::vector<RowEntry> terms;
};

// Sparse minimization problem:  min c'x + c0  s.t.  rows, bounds, integrality.
// Named variables/rows form the audit trail: LP export, adapter round-trips
// and tests all key off the names.
class OptProblem {
public:
  int add_var(std::string name, double lb, double ub, VarKind kind = VarKind::Continuous);
  void add_obj(int var, double coef);  // accumulates
  void set_obj_constant(double c0) { obj_const_ = c0; }
  int add_row(std::string name, Rel rel, double rhs, std::vector<RowEntry> terms);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Variable& var(int j) const { return vars_[static_cast<std::size_t>(j)]; }
  Variable& var(int j) { return vars_[static_cast<std::size_t>(j)]; }
  const Constraint& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<Constraint>& rows() const { return rows_; }
  double obj_coef(int j) const { return obj_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& obj() const { return obj_; }
  double obj_constant() const { return obj_const_; }

  bool has_integers() const;
  std::size_t nonzero_count() const;

  // Find a variable id by exact name; -1 if absent. Linear scan — audit use.
  int find_var(const std::string& name) const;

  // Structural sanity: finite coefficients, lb <= ub, valid var ids, finite rhs.
  void check() const;

private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> obj_;
  double obj_const_ = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit };

const char* status_name(SolveStatus s);

struct SolverStats {
  std::int64_t iterations = 0;     // simplex pivots (grand total for MILP)
  std::int64_t nodes = 0;          // branch & bound nodes explored (root = 1)
  std::int64_t factorizations = 0; // basis refactorizations
};

// Final simplex basis of a solved LP, reusable as a starting point for a
// problem with identical rows/costs and (possibly) different bounds — the
// branch & bound case. Extended variable ids: [0, num_vars) structurals,
// then one slack per row.
struct Basis {
  std::vector<int> basic;           // row position -> extended var id
  std::vector<unsigned char> stat;  // extended var -> 0 basic, 1 lower, 2 upper, 3 free
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;      // primal values, sized num_vars when present
  std::vector<double> duals;  // row duals y (LP solves only; d_j = c_j - a_j'y)
  bool proven = true;         // false when a limit stopped the search early
  std::shared_ptr<const Basis> basis;  // only when LpOptions::collect_basis
  SolverStats stats;
};

struct LpOptions {
  double feas_tol = 1e-7;        // relative primal feasibility tolerance
  double opt_tol = 1e-9;         // reduced-cost tolerance (relative to cost scale)
  std::int64_t max_iters = -1;   // -1: auto from problem size
  int refactor_every = 100;      // pivots between basis refactorizations
  const Basis* warm_start = nullptr;  // not owned; ignored when unusable
  bool collect_basis = false;    // fill SolveResult::basis on optimal
};

struct MilpOptions {
  LpOptions lp;
  double int_tol = 1e-6;        // integrality tolerance on relaxation values
  double mip_gap = 1e-9;        // relative optimality gap at termination
  std::int64_t node_limit = 20000;
};

// Bounded-variable revised simplex (sparse LU basis + product-form updates).
SolveResult solve_lp(const OptProblem& p, const LpOptions& opts = {});

// Best-first branch & bound over solve_lp; most-fractional branching,
// deterministic tie-breaks. Integer variables in the result are exact.
SolveResult solve_milp(const OptProblem& p, const MilpOptions& opts = {});

// Dispatches on has_integers().
SolveResult solve_auto(const OptProblem& p, const MilpOptions& opts = {});

}  // namespace psuq::opt
