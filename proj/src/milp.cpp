#include <cmath>
#include <memory>
#include <queue>
#include <vector>

#include "psuq/errors.hpp"
#include "psuq/optproblem.hpp"

// Best-first branch & bound over the LP relaxation. Each node's LP is solved
// exactly once (eagerly, at creation); the queue stores the relaxation
// solution so branching never re-solves. Branching variable: most-fractional,
// ties to the lowest id. Node order: lowest relaxation bound, ties FIFO —
// fully deterministic. The final incumbent is polished by fixing every
// integer to its rounded value and re-solving the LP, so the integer part of
// the reported solution is exact.

namespace psuq::opt {

namespace {

struct BoundDelta {
  std::shared_ptr<const BoundDelta> parent;
  int var;
  double lb, ub;
};

struct Node {
  double bound;
  std::int64_t seq;
  std::shared_ptr<const BoundDelta> chain;
  std::shared_ptr<const std::vector<double>> x;  // relaxation solution
  std::shared_ptr<const Basis> basis;            // warm start for the children
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.seq > b.seq;                              // then FIFO
  }
};

}  // namespace

SolveResult solve_milp(const OptProblem& p0, const MilpOptions& opts) {
  p0.check();
  if (!p0.has_integers()) return solve_lp(p0, opts.lp);

  OptProblem p = p0;  // bounds get mutated per node; rows/costs stay put

  std::vector<int> int_vars;
  for (int j = 0; j < p.num_vars(); ++j)
    if (p.var(j).kind != VarKind::Continuous) int_vars.push_back(j);

  // Integer bounds must start integral or rounding could cut the optimum.
  std::vector<double> base_lb(int_vars.size()), base_ub(int_vars.size());
  for (std::size_t k = 0; k < int_vars.size(); ++k) {
    const auto& v = p0.var(int_vars[k]);
    base_lb[k] = std::isfinite(v.lb) ? std::ceil(v.lb - opts.int_tol) : v.lb;
    base_ub[k] = std::isfinite(v.ub) ? std::floor(v.ub + opts.int_tol) : v.ub;
  }

  auto apply_node = [&](const BoundDelta* chain) {
    for (std::size_t k = 0; k < int_vars.size(); ++k) {
      p.var(int_vars[k]).lb = base_lb[k];
      p.var(int_vars[k]).ub = base_ub[k];
    }
    // Leaf-most delta is the tightest for its variable: first hit wins.
    std::vector<bool> seen(static_cast<std::size_t>(p.num_vars()), false);
    for (const auto* d = chain; d; d = d->parent.get()) {
      if (seen[static_cast<std::size_t>(d->var)]) continue;
      seen[static_cast<std::size_t>(d->var)] = true;
      p.var(d->var).lb = d->lb;
      p.var(d->var).ub = d->ub;
    }
  };

  auto effective_bounds = [&](const BoundDelta* chain, int var, double& lb, double& ub) {
    for (const auto* d = chain; d; d = d->parent.get()) {
      if (d->var == var) {
        lb = d->lb;
        ub = d->ub;
        return;
      }
    }
    for (std::size_t k = 0; k < int_vars.size(); ++k) {
      if (int_vars[k] == var) {
        lb = base_lb[k];
        ub = base_ub[k];
        return;
      }
    }
  };

  SolveResult out;
  out.stats = SolverStats{};

  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
  std::int64_t seq = 0;

  bool have_incumbent = false;
  double inc_obj = kInf;
  std::vector<double> inc_x;
  std::shared_ptr<const BoundDelta> inc_chain;
  std::shared_ptr<const Basis> inc_basis;

  const auto gap_ok = [&](double bound) {
    return have_incumbent && bound >= inc_obj - opts.mip_gap * std::max(1.0, std::abs(inc_obj));
  };

  // Which integer is most fractional in x? -1 when integral.
  auto pick_branch = [&](const std::vector<double>& x, double& val) {
    int best = -1;
    double best_frac = 0.0;
    for (int j : int_vars) {
      const double v = x[static_cast<std::size_t>(j)];
      if (std::abs(v - std::round(v)) <= opts.int_tol) continue;
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best_frac) {
        best_frac = frac;
        best = j;
        val = v;
      }
    }
    return best;
  };

  // Solve a node's relaxation — warm-started from the parent's final basis —
  // and either record an incumbent or queue it for branching.
  bool hit_limit = false;
  auto evaluate = [&](std::shared_ptr<const BoundDelta> chain,
                      const std::shared_ptr<const Basis>& warm) {
    if (out.stats.nodes >= opts.node_limit) {
      hit_limit = true;
      return;
    }
    apply_node(chain.get());
    LpOptions lp = opts.lp;
    lp.warm_start = warm.get();
    lp.collect_basis = true;
    SolveResult r = solve_lp(p, lp);
    out.stats.iterations += r.stats.iterations;
    out.stats.factorizations += r.stats.factorizations;
    ++out.stats.nodes;

    if (r.status == SolveStatus::Infeasible) return;
    if (r.status == SolveStatus::Unbounded) {
      if (out.stats.nodes == 1) throw SolverError("relaxation is unbounded");
      return;  // cannot happen once the root was bounded; defensive
    }
    if (r.status != SolveStatus::Optimal)
      throw SolverError("node relaxation stopped early: " + std::string(status_name(r.status)));
    if (gap_ok(r.objective)) return;

    double frac_val = 0.0;
    if (pick_branch(r.x, frac_val) < 0) {
      if (r.objective < inc_obj) {
        inc_obj = r.objective;
        inc_x = std::move(r.x);
        inc_chain = std::move(chain);
        inc_basis = r.basis;
        have_incumbent = true;
      }
      return;
    }
    Node node;
    node.bound = r.objective;
    node.seq = seq++;
    node.chain = std::move(chain);
    node.x = std::make_shared<const std::vector<double>>(std::move(r.x));
    node.basis = std::move(r.basis);
    queue.push(std::move(node));
  };

  evaluate(nullptr, nullptr);  // root; throws on unbounded relaxation

  if (out.stats.nodes == 1 && !have_incumbent && queue.empty() && !hit_limit) {
    out.status = SolveStatus::Infeasible;  // root relaxation infeasible
    return out;
  }

  while (!queue.empty() && !hit_limit) {
    Node node = queue.top();
    queue.pop();
    if (gap_ok(node.bound)) break;  // best-first: nothing left can improve

    double frac_val = 0.0;
    const int branch_var = pick_branch(*node.x, frac_val);
    if (branch_var < 0) continue;  // defensive; integral nodes never queued

    double lb = -kInf, ub = kInf;
    effective_bounds(node.chain.get(), branch_var, lb, ub);
    const double fl = std::floor(frac_val);
    const double ce = std::ceil(frac_val);
    if (fl >= lb) {
      auto d = std::make_shared<BoundDelta>();
      d->parent = node.chain;
      d->var = branch_var;
      d->lb = lb;
      d->ub = std::min(ub, fl);
      if (d->lb <= d->ub) evaluate(std::move(d), node.basis);
    }
    if (ce <= ub && !hit_limit) {
      auto d = std::make_shared<BoundDelta>();
      d->parent = node.chain;
      d->var = branch_var;
      d->lb = std::max(lb, ce);
      d->ub = ub;
      if (d->lb <= d->ub) evaluate(std::move(d), node.basis);
    }
  }

  if (hit_limit) {
    out.status = SolveStatus::NodeLimit;
    out.proven = false;
    if (have_incumbent) {
      out.objective = inc_obj;
      out.x = inc_x;
      for (int j : int_vars)
        out.x[static_cast<std::size_t>(j)] = std::round(out.x[static_cast<std::size_t>(j)]);
    }
    return out;
  }

  if (!have_incumbent) {
    out.status = SolveStatus::Infeasible;
    return out;
  }

  // Polish: fix integers to their rounded incumbent values and re-solve, so
  // reported integers are exact and the continuous part is consistent.
  apply_node(inc_chain.get());
  for (int j : int_vars) {
    const double v = std::round(inc_x[static_cast<std::size_t>(j)]);
    p.var(j).lb = v;
    p.var(j).ub = v;
  }
  LpOptions polish_lp = opts.lp;
  polish_lp.warm_start = inc_basis.get();
  SolveResult polished = solve_lp(p, polish_lp);
  out.stats.iterations += polished.stats.iterations;
  out.stats.factorizations += polished.stats.factorizations;

  out.status = SolveStatus::Optimal;
  out.proven = true;
  if (polished.status == SolveStatus::Optimal) {
    out.objective = polished.objective;
    out.x = std::move(polished.x);
  } else {
    out.objective = inc_obj;
    out.x = inc_x;
  }
  for (int j : int_vars)
    out.x[static_cast<std::size_t>(j)] = std::round(out.x[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace psuq::opt
