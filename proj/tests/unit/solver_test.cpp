#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "psuq/errors.hpp"
#include "psuq/optproblem.hpp"
#include "psuq/rng.hpp"

using namespace psuq;
using namespace psuq::opt;

namespace {

// Largest relative violation of bounds and rows; independent re-check of the
// solver's own bookkeeping.
double violation(const OptProblem& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) {
    const auto& v = p.var(j);
    const double s = std::max(1.0, std::abs(x[(std::size_t)j]));
    if (std::isfinite(v.lb)) worst = std::max(worst, (v.lb - x[(std::size_t)j]) / s);
    if (std::isfinite(v.ub)) worst = std::max(worst, (x[(std::size_t)j] - v.ub) / s);
  }
  for (const auto& r : p.rows()) {
    double act = 0.0, mag = std::abs(r.rhs);
    for (const auto& t : r.terms) {
      act += t.coef * x[(std::size_t)t.var];
      mag = std::max(mag, std::abs(t.coef * x[(std::size_t)t.var]));
    }
    const double s = std::max(1.0, mag);
    if (r.rel == Rel::Le) worst = std::max(worst, (act - r.rhs) / s);
    if (r.rel == Rel::Ge) worst = std::max(worst, (r.rhs - act) / s);
    if (r.rel == Rel::Eq) worst = std::max(worst, std::abs(act - r.rhs) / s);
  }
  return worst;
}

// Lagrangian dual bound for the given row duals. Finite whenever the duals
// are (approximately) dual feasible; equals the optimum at an optimal basis.
double dual_bound(const OptProblem& p, const std::vector<double>& y) {
  double bound = p.obj_constant();

  // reduced costs of structurals
  std::vector<double> d(p.obj().begin(), p.obj().end());
  for (int i = 0; i < p.num_rows(); ++i)
    for (const auto& t : p.row(i).terms) d[(std::size_t)t.var] -= y[(std::size_t)i] * t.coef;

  for (int j = 0; j < p.num_vars(); ++j) {
    const auto& v = p.var(j);
    const double dj = d[(std::size_t)j];
    if (dj > 1e-7) {
      if (!std::isfinite(v.lb)) return -kInf;
      bound += dj * v.lb;
    } else if (dj < -1e-7) {
      if (!std::isfinite(v.ub)) return -kInf;
      bound += dj * v.ub;
    }
    // |dj| <= tol contributes ~0 regardless of the bound it sits at
  }
  for (int i = 0; i < p.num_rows(); ++i) {
    const auto& r = p.row(i);
    bound += y[(std::size_t)i] * r.rhs;
    // slack s in [0,inf) for Le (y must be <= 0), (-inf,0] for Ge (y >= 0)
    if (r.rel == Rel::Le && y[(std::size_t)i] > 1e-7) return -kInf;
    if (r.rel == Rel::Ge && y[(std::size_t)i] < -1e-7) return -kInf;
  }
  return bound;
}

}  // namespace

TEST_CASE("one variable, one constraint") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, kInf);
  p.add_obj(x, 1.0);
  p.add_row("c", Rel::Ge, 3.0, {{x, 1.0}});
  const auto r = solve_lp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("unbounded below is reported") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, kInf);
  p.add_obj(x, -1.0);
  p.add_row("c", Rel::Ge, 3.0, {{x, 1.0}});
  CHECK(solve_lp(p).status == SolveStatus::Unbounded);
}

TEST_CASE("infeasible rows are reported") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, 1.0);
  p.add_obj(x, 1.0);
  p.add_row("hi", Rel::Ge, 5.0, {{x, 1.0}});
  CHECK(solve_lp(p).status == SolveStatus::Infeasible);
}

TEST_CASE("free and fixed variables") {
  OptProblem p;
  const int x = p.add_var("x", -kInf, kInf);
  const int y = p.add_var("y", 0.0, 4.0);
  const int z = p.add_var("z", 2.0, 2.0);  // fixed
  p.add_obj(x, 1.0);
  p.add_obj(y, -1.0);
  p.add_row("sum", Rel::Eq, 10.0, {{x, 1.0}, {y, 1.0}, {z, 1.0}});
  const auto r = solve_lp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x[(std::size_t)y] == doctest::Approx(4.0));
  CHECK(r.x[(std::size_t)z] == doctest::Approx(2.0));
  CHECK(r.x[(std::size_t)x] == doctest::Approx(4.0));
  CHECK(r.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("no-row problems sit at the cost-preferred bounds") {
  OptProblem p;
  const int a = p.add_var("a", -1.0, 5.0);
  const int b = p.add_var("b", -2.0, 7.0);
  p.add_obj(a, 3.0);
  p.add_obj(b, -1.0);
  const auto r = solve_lp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x[(std::size_t)a] == -1.0);
  CHECK(r.x[(std::size_t)b] == 7.0);
  CHECK(r.objective == doctest::Approx(-10.0));
}

TEST_CASE("objective constant is carried through") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, kInf);
  p.add_obj(x, 2.0);
  p.set_obj_constant(100.0);
  p.add_row("c", Rel::Ge, 1.0, {{x, 1.0}});
  CHECK(solve_lp(p).objective == doctest::Approx(102.0));
}

TEST_CASE("random box LPs: feasibility and strong duality") {
  Rng rng(20240815);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + (int)rng.bounded(8);
    const int n = 2 + (int)rng.bounded(11);
    OptProblem p;
    std::vector<double> x0;
    for (int j = 0; j < n; ++j) {
      const double lo = -50.0 + 40.0 * rng.uniform01();
      const double hi = lo + 1.0 + 60.0 * rng.uniform01();
      p.add_var("x" + std::to_string(j), lo, hi);
      p.add_obj(j, -5.0 + 10.0 * rng.uniform01());
      x0.push_back(lo + (hi - lo) * rng.uniform01());
    }
    for (int i = 0; i < m; ++i) {
      std::vector<RowEntry> terms;
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        if (rng.uniform01() < 0.4) continue;
        const double c = -3.0 + 6.0 * rng.uniform01();
        if (c == 0.0) continue;
        terms.push_back({j, c});
        act += c * x0[(std::size_t)j];
      }
      if (terms.empty()) terms.push_back({0, 1.0}), act = x0[0];
      const double k = rng.uniform01();
      if (k < 0.4)
        p.add_row("r" + std::to_string(i), Rel::Le, act + 5.0 * rng.uniform01(), terms);
      else if (k < 0.8)
        p.add_row("r" + std::to_string(i), Rel::Ge, act - 5.0 * rng.uniform01(), terms);
      else
        p.add_row("r" + std::to_string(i), Rel::Eq, act, terms);
    }

    const auto r = solve_lp(p);
    REQUIRE(r.status == SolveStatus::Optimal);  // box bounds + feasible point
    CHECK(violation(p, r.x) < 1e-6);
    const double lb = dual_bound(p, r.duals);
    REQUIRE(std::isfinite(lb));
    CHECK(lb == doctest::Approx(r.objective).epsilon(1e-6).scale(std::max(1.0, std::abs(r.objective))));
    ++solved;
  }
  CHECK(solved == 200);
}

TEST_CASE("LP solves are bit-reproducible") {
  Rng rng(7);
  OptProblem p;
  for (int j = 0; j < 30; ++j) {
    p.add_var("x" + std::to_string(j), 0.0, 10.0 + j);
    p.add_obj(j, -1.0 + 2.0 * rng.uniform01());
  }
  for (int i = 0; i < 25; ++i) {
    std::vector<RowEntry> terms;
    for (int j = 0; j < 30; ++j)
      if (rng.uniform01() < 0.3) terms.push_back({j, -2.0 + 4.0 * rng.uniform01()});
    if (terms.empty()) terms.push_back({i % 30, 1.0});
    p.add_row("r" + std::to_string(i), Rel::Le, 20.0 + i, terms);
  }
  const auto a = solve_lp(p);
  const auto b = solve_lp(p);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.stats.iterations == b.stats.iterations);
  CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  CHECK(a.objective == b.objective);  // exact, not approx
}

TEST_CASE("integer rounding up: min x, x >= 2.3, x integer") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, kInf, VarKind::Integer);
  p.add_obj(x, 1.0);
  p.add_row("c", Rel::Ge, 2.3, {{x, 1.0}});
  const auto r = solve_milp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0));
  CHECK(r.x[0] == 3.0);  // integers come back exact
}

TEST_CASE("already-integral relaxation explores a single node") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, 10.0, VarKind::Integer);
  p.add_obj(x, 1.0);
  p.add_row("c", Rel::Ge, 4.0, {{x, 1.0}});  // LP optimum x=4, integral
  const auto r = solve_milp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x[0] == 4.0);
  CHECK(r.stats.nodes == 1);
}

TEST_CASE("integrally-infeasible model is detected") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, 1.0, VarKind::Integer);
  p.add_obj(x, 1.0);
  p.add_row("c", Rel::Eq, 1.0, {{x, 2.0}});  // x = 0.5 only
  CHECK(solve_milp(p).status == SolveStatus::Infeasible);
}

TEST_CASE("random small MILPs agree with brute-force enumeration") {
  Rng rng(991);
  for (int trial = 0; trial < 60; ++trial) {
    const int ni = 1 + (int)rng.bounded(3);  // integer vars, bounds [0,4]
    const int nc = 1 + (int)rng.bounded(2);  // continuous vars, bounds [0,10]
    const int n = ni + nc;
    const int m = 1 + (int)rng.bounded(3);

    OptProblem p;
    std::vector<double> x0;
    for (int j = 0; j < ni; ++j) {
      p.add_var("k" + std::to_string(j), 0.0, 4.0, VarKind::Integer);
      p.add_obj(j, -5.0 + 10.0 * rng.uniform01());
      x0.push_back((double)rng.bounded(5));
    }
    for (int j = 0; j < nc; ++j) {
      p.add_var("x" + std::to_string(j), 0.0, 10.0);
      p.add_obj(ni + j, -5.0 + 10.0 * rng.uniform01());
      x0.push_back(10.0 * rng.uniform01());
    }
    for (int i = 0; i < m; ++i) {
      std::vector<RowEntry> terms;
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        if (rng.uniform01() < 0.35) continue;
        const double c = -3.0 + 6.0 * rng.uniform01();
        terms.push_back({j, c});
        act += c * x0[(std::size_t)j];
      }
      if (terms.empty()) terms.push_back({0, 1.0}), act = x0[0];
      if (rng.uniform01() < 0.5)
        p.add_row("r" + std::to_string(i), Rel::Le, act + 3.0 * rng.uniform01(), terms);
      else
        p.add_row("r" + std::to_string(i), Rel::Ge, act - 3.0 * rng.uniform01(), terms);
    }

    const auto r = solve_milp(p);
    REQUIRE(r.status == SolveStatus::Optimal);  // x0 is integral-feasible

    // Brute force: fix every integer combination, solve the continuous rest.
    double best = kInf;
    std::vector<int> grid((std::size_t)ni, 0);
    while (true) {
      OptProblem q = p;
      for (int j = 0; j < ni; ++j) {
        q.var(j).lb = grid[(std::size_t)j];
        q.var(j).ub = grid[(std::size_t)j];
        q.var(j).kind = VarKind::Continuous;
      }
      const auto sub = solve_lp(q);
      if (sub.status == SolveStatus::Optimal) best = std::min(best, sub.objective);
      int c = 0;
      while (c < ni && ++grid[(std::size_t)c] > 4) grid[(std::size_t)c++] = 0;
      if (c == ni) break;
    }
    REQUIRE(std::isfinite(best));
    CHECK(r.objective ==
          doctest::Approx(best).epsilon(1e-7).scale(std::max(1.0, std::abs(best))));
    // relaxation lower-bounds the integer optimum
    const auto relax = solve_lp(p);
    CHECK(relax.objective <= r.objective + 1e-7 * std::max(1.0, std::abs(r.objective)));
  }
}

TEST_CASE("warm-started re-solves agree with cold solves") {
  // The branch & bound pattern: solve once, perturb bounds, solve again from
  // the final basis. Results must match a from-scratch solve.
  Rng rng(5150);
  for (int trial = 0; trial < 80; ++trial) {
    const int m = 2 + (int)rng.bounded(6);
    const int n = 3 + (int)rng.bounded(8);
    OptProblem p;
    std::vector<double> x0;
    for (int j = 0; j < n; ++j) {
      const double lo = -20.0 + 15.0 * rng.uniform01();
      const double hi = lo + 1.0 + 30.0 * rng.uniform01();
      p.add_var("x" + std::to_string(j), lo, hi);
      p.add_obj(j, -4.0 + 8.0 * rng.uniform01());
      x0.push_back(lo + (hi - lo) * rng.uniform01());
    }
    for (int i = 0; i < m; ++i) {
      std::vector<RowEntry> terms;
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        if (rng.uniform01() < 0.4) continue;
        const double c = -3.0 + 6.0 * rng.uniform01();
        if (c == 0.0) continue;
        terms.push_back({j, c});
        act += c * x0[(std::size_t)j];
      }
      if (terms.empty()) terms.push_back({0, 1.0}), act = x0[0];
      if (rng.uniform01() < 0.5)
        p.add_row("r" + std::to_string(i), Rel::Le, act + 4.0 * rng.uniform01(), terms);
      else
        p.add_row("r" + std::to_string(i), Rel::Ge, act - 4.0 * rng.uniform01(), terms);
    }

    LpOptions collect;
    collect.collect_basis = true;
    const auto first = solve_lp(p, collect);
    REQUIRE(first.status == SolveStatus::Optimal);
    REQUIRE(first.basis != nullptr);

    // Perturb: tighten or loosen a few variable bounds (the MILP move).
    for (int round = 0; round < 3; ++round) {
      const int j = (int)rng.bounded((std::uint64_t)n);
      auto& v = p.var(j);
      if (rng.uniform01() < 0.5)
        v.ub = v.lb + (v.ub - v.lb) * rng.uniform01();
      else
        v.lb -= 5.0 * rng.uniform01();
    }

    const auto cold = solve_lp(p);
    LpOptions warm;
    warm.warm_start = first.basis.get();
    const auto reused = solve_lp(p, warm);
    REQUIRE(reused.status == cold.status);
    if (cold.status == SolveStatus::Optimal) {
      CHECK(violation(p, reused.x) < 1e-6);
      CHECK(reused.objective ==
            doctest::Approx(cold.objective).epsilon(1e-7).scale(std::max(1.0, std::abs(cold.objective))));
    }
  }
}

TEST_CASE("a foreign or malformed basis is ignored, not trusted") {
  OptProblem p;
  const int x = p.add_var("x", 0.0, kInf);
  const int y = p.add_var("y", 0.0, 5.0);
  p.add_obj(x, 1.0);
  p.add_obj(y, 2.0);
  p.add_row("c", Rel::Ge, 3.0, {{x, 1.0}, {y, 1.0}});

  Basis junk;
  junk.basic = {7};                       // out of range for n+m = 3
  junk.stat = {0, 1, 1};
  LpOptions opts;
  opts.warm_start = &junk;
  auto r = solve_lp(p, opts);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0));

  Basis wrong_shape;                      // sized for some other problem
  wrong_shape.basic = {0, 1};
  wrong_shape.stat = {0, 0, 1, 1, 2};
  opts.warm_start = &wrong_shape;
  r = solve_lp(p, opts);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0));
}

TEST_CASE("collected bases describe the full variable set") {
  Rng rng(77);
  OptProblem p;
  const int n = 12, m = 8;
  for (int j = 0; j < n; ++j) {
    p.add_var("x" + std::to_string(j), 0.0, 4.0 + j);
    p.add_obj(j, -1.0 + 2.0 * rng.uniform01());
  }
  for (int i = 0; i < m; ++i) {
    std::vector<RowEntry> terms;
    for (int j = 0; j < n; ++j)
      if (rng.uniform01() < 0.5) terms.push_back({j, -1.0 + 2.0 * rng.uniform01()});
    if (terms.empty()) terms.push_back({i % n, 1.0});
    p.add_row("r" + std::to_string(i), Rel::Le, 5.0 + i, terms);
  }
  LpOptions opts;
  opts.collect_basis = true;
  const auto r = solve_lp(p, opts);
  REQUIRE(r.status == SolveStatus::Optimal);
  REQUIRE(r.basis != nullptr);
  CHECK(r.basis->basic.size() == (std::size_t)m);
  CHECK(r.basis->stat.size() == (std::size_t)(n + m));
  std::size_t basics = 0;
  for (unsigned char s : r.basis->stat) {
    CHECK(s <= 3);
    basics += s == 0;
  }
  CHECK(basics == (std::size_t)m);
  for (int j : r.basis->basic) {
    REQUIRE(j >= 0);
    REQUIRE(j < n + m);
    CHECK(r.basis->stat[(std::size_t)j] == 0);
  }
}

TEST_CASE("MILP solves are repeatable") {
  Rng rng(31337);
  OptProblem p;
  for (int j = 0; j < 6; ++j) {
    p.add_var("k" + std::to_string(j), 0.0, 7.0, VarKind::Integer);
    p.add_obj(j, -3.0 + 6.0 * rng.uniform01());
  }
  for (int i = 0; i < 5; ++i) {
    std::vector<RowEntry> terms;
    for (int j = 0; j < 6; ++j) terms.push_back({j, -2.0 + 4.0 * rng.uniform01()});
    p.add_row("r" + std::to_string(i), Rel::Le, 3.0 + i, terms);
  }
  const auto a = solve_milp(p);
  const auto b = solve_milp(p);
  REQUIRE(a.status == b.status);
  if (a.status == SolveStatus::Optimal) {
    CHECK(a.objective == b.objective);
    CHECK(a.x == b.x);
    CHECK(a.stats.nodes == b.stats.nodes);
  }
}

TEST_CASE("degenerate ties do not cycle") {
  // Many identical rows through the origin force degenerate pivots.
  OptProblem p;
  const int n = 6;
  for (int j = 0; j < n; ++j) {
    p.add_var("x" + std::to_string(j), 0.0, kInf);
    p.add_obj(j, 1.0);
  }
  for (int i = 0; i < 10; ++i) {
    std::vector<RowEntry> terms;
    for (int j = 0; j < n; ++j) terms.push_back({j, 1.0 + (double)((i + j) % 3)});
    p.add_row("r" + std::to_string(i), Rel::Ge, 1.0, terms);
  }
  const auto r = solve_lp(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(violation(p, r.x) < 1e-7);
}
