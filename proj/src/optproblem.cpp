#include "psuq/optproblem.hpp"

#include <cmath>

#include "psuq/errors.hpp"

namespace psuq::opt {

int OptProblem::add_var(std::string name, double lb, double ub, VarKind kind) {
  if (std::isnan(lb) || std::isnan(ub) || lb > ub)
    throw SpecError("variable " + name + " has bad bounds [" + std::to_string(lb) + ", " +
                    std::to_string(ub) + "]");
  vars_.push_back({std::move(name), lb, ub, kind});
  obj_.push_back(0.0);
  return static_cast<int>(vars_.size()) - 1;
}

void OptProblem::add_obj(int var, double coef) {
  if (var < 0 || var >= num_vars()) throw SpecError("objective references unknown variable");
  obj_[static_cast<std::size_t>(var)] += coef;
}

int OptProblem::add_row(std::string name, Rel rel, double rhs, std::vector<RowEntry> terms) {
  for (const auto& t : terms)
    if (t.var < 0 || t.var >= num_vars())
      throw SpecError("row " + name + " references unknown variable");
  rows_.push_back({std::move(name), rel, rhs, std::move(terms)});
  return static_cast<int>(rows_.size()) - 1;
}

bool OptProblem::has_integers() const {
  for (const auto& v : vars_)
    if (v.kind != VarKind::Continuous) return true;
  return false;
}

std::size_t OptProblem::nonzero_count() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.terms.size();
  return n;
}

int OptProblem::find_var(const std::string& name) const {
  for (int j = 0; j < num_vars(); ++j)
    if (vars_[static_cast<std::size_t>(j)].name == name) return j;
  return -1;
}

void OptProblem::check() const {
  for (const auto& v : vars_) {
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
      throw SpecError("variable " + v.name + " has bad bounds");
    if (v.kind == VarKind::Binary && (v.lb < 0.0 || v.ub > 1.0))
      throw SpecError("binary variable " + v.name + " has bounds outside [0,1]");
  }
  for (double c : obj_)
    if (!std::isfinite(c)) throw SpecError("non-finite objective coefficient");
  for (const auto& r : rows_) {
    if (!std::isfinite(r.rhs)) throw SpecError("row " + r.name + " has non-finite rhs");
    for (const auto& t : r.terms) {
      if (t.var < 0 || t.var >= num_vars())
        throw SpecError("row " + r.name + " references unknown variable");
      if (!std::isfinite(t.coef))
        throw SpecError("row " + r.name + " has non-finite coefficient");
    }
  }
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NodeLimit: return "node_limit";
  }
  return "?";
}

SolveResult solve_auto(const OptProblem& p, const MilpOptions& opts) {
  return p.has_integers() ? solve_milp(p, opts) : solve_lp(p, opts.lp);
}

}  // namespace psuq::opt
