#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <vector>

#include "psuq/errors.hpp"
#include "psuq/optproblem.hpp"

// Bounded-variable revised simplex.
//
// Layout: extended variables are [structural | slack | artificial]. Every row
// is an equality  a'x + s = b  with the relation encoded in the slack bounds.
// The basis B is factorized with Eigen's sparse LU (COLAMD ordering) and kept
// current between refactorizations with product-form eta updates:
//   B_{k+1} = B_k E_k,  E_k = identity with column p replaced by w = B_k^{-1} a_q
//   FTRAN: LU solve, then etas oldest->newest
//   BTRAN: etas newest->oldest, then transposed LU solve
// Rows and costs are equilibrated by powers of two so scaling is exact and
// unscaling loses nothing. Pricing is rotating-block Dantzig with a Bland
// fallback after a long degenerate streak; all tie-breaks are index-ordered,
// so solves are bit-reproducible.

namespace psuq::opt {

namespace {

enum class VStat : unsigned char { Basic, AtLower, AtUpper, Free };

struct Eta {
  int pos;
  double pivot;
  std::vector<std::pair<int, double>> other;  // entries != pos
};

double pow2_round(double v) {
  if (v <= 0.0 || !std::isfinite(v)) return 1.0;
  int e;
  std::frexp(v, &e);  // v = f * 2^e, f in [0.5, 1)
  return std::ldexp(1.0, e - 1);
}

class Simplex {
public:
  Simplex(const OptProblem& p, const LpOptions& opts) : p_(p), opts_(opts) {
    if (opts_.max_iters < 0) {
      opts_.max_iters =
          std::max<std::int64_t>(20000, 60LL * (p.num_rows() + p.num_vars()));
    }
    build_core();
    if (!(opts_.warm_start != nullptr && apply_warm_start(*opts_.warm_start))) crash_basis();
  }

  SolveResult run() {
    SolveResult res;
    try {
      factorize();
    } catch (const NumericalError&) {
      if (!warm_ok_) throw;
      // The inherited basis went singular against this problem: start cold.
      warm_ok_ = false;
      init_nonbasic_point();
      crash_basis();
      factorize();
    }

    // A warm basis can leave basics outside their (new) bounds. Each gets its
    // violated bound relaxed plus a phase-1 unit cost pulling it back; bounds
    // snap back the moment the variable is feasible again (settle_relaxed).
    relax_violated();
    phase_ = (any_artificial_active() || !relaxed_.empty()) ? 1 : 2;
    set_phase_costs();

    while (true) {
      if (iters_ >= opts_.max_iters) {
        res.status = SolveStatus::IterationLimit;
        finish_stats(res);
        return res;
      }
      if (phase_ == 1 && settle_relaxed()) confirmed_ = false;

      int enter = -1, dir = 0;
      double dcost = 0.0;
      if (!price(enter, dir, dcost)) {
        // No eligible candidate under the current (possibly stale) basis
        // representation: refactorize and rescan before trusting it.
        if (!confirmed_) {
          factorize();
          compute_duals();
          confirmed_ = true;
          continue;
        }
        if (phase_ == 1) {
          if (!phase1_feasible()) {
            // A cold start's phase-1 optimum proves infeasibility; a warm one
            // doesn't (the inherited basis may just be poor), so hand the
            // caller back to the cold path instead.
            if (warm_ok_)
              throw NumericalError("warm start stalled before feasibility");
            res.status = SolveStatus::Infeasible;
            finish_stats(res);
            return res;
          }
          enter_phase2();
          continue;
        }
        res.status = SolveStatus::Optimal;
        extract(res);
        finish_stats(res);
        return res;
      }
      confirmed_ = false;

      const bool ok = pivot(enter, dir, dcost);
      if (!ok) {
        if (phase_ == 1) throw NumericalError("phase-1 ray; inconsistent basis");
        res.status = SolveStatus::Unbounded;
        finish_stats(res);
        return res;
      }

      if (phase_ == 1 && infeasibility() <= 1e-12 * static_cast<double>(m_)) {
        enter_phase2();
      }
    }
  }

  // Primal feasibility of `x` against the original (unscaled) problem; used
  // for the post-solve verification with a relative tolerance.
  static double max_violation(const OptProblem& p, const std::vector<double>& x) {
    double worst = 0.0;
    for (int j = 0; j < p.num_vars(); ++j) {
      const auto& v = p.var(j);
      const double s = std::max(1.0, std::abs(x[static_cast<std::size_t>(j)]));
      if (std::isfinite(v.lb)) worst = std::max(worst, (v.lb - x[static_cast<std::size_t>(j)]) / s);
      if (std::isfinite(v.ub)) worst = std::max(worst, (x[static_cast<std::size_t>(j)] - v.ub) / s);
    }
    for (const auto& r : p.rows()) {
      double act = 0.0, mag = std::abs(r.rhs);
      for (const auto& t : r.terms) {
        act += t.coef * x[static_cast<std::size_t>(t.var)];
        mag = std::max(mag, std::abs(t.coef * x[static_cast<std::size_t>(t.var)]));
      }
      const double s = std::max(1.0, mag);
      switch (r.rel) {
        case Rel::Le: worst = std::max(worst, (act - r.rhs) / s); break;
        case Rel::Ge: worst = std::max(worst, (r.rhs - act) / s); break;
        case Rel::Eq: worst = std::max(worst, std::abs(act - r.rhs) / s); break;
      }
    }
    return worst;
  }

private:
  const OptProblem& p_;
  LpOptions opts_;

  int m_ = 0, n_ = 0, next_ = 0;  // rows, structurals, total extended vars
  // structural columns, scaled, CSC
  std::vector<int> colptr_, rowidx_;
  std::vector<double> colval_;
  std::vector<double> rscale_;
  double cscale_ = 1.0;
  std::vector<double> b_;              // scaled rhs
  std::vector<double> lb_, ub_, cost_; // extended; cost_ is scaled phase-2 cost
  std::vector<double> pcost_;          // active phase costs
  std::vector<VStat> stat_;
  std::vector<double> xval_;
  std::vector<int> basis_;   // position -> var
  std::vector<int> art_;     // artificial var ids

  // Bounds temporarily widened so a warm-started basic may sit out of range.
  struct Relaxed {
    int var;
    double lb, ub;  // real bounds, restored by settle_relaxed()
    bool above;     // which side was violated
  };
  std::vector<Relaxed> relaxed_;
  bool warm_ok_ = false;

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool lu_ready_ = false;
  std::vector<Eta> etas_;
  std::size_t eta_nnz_ = 0;

  Eigen::VectorXd w_, y_, tmp_;
  std::int64_t iters_ = 0, nfact_ = 0;
  int phase_ = 1;
  bool bland_ = false;
  bool confirmed_ = false;
  int degen_streak_ = 0;
  int cursor_ = 0;
  double dual_tol_ = 1e-9;

  void build_core() {
    m_ = p_.num_rows();
    n_ = p_.num_vars();

    // Power-of-two equilibration: rows by their largest |coefficient|,
    // costs by the largest |c_j|. Exact in floating point.
    rscale_.assign(static_cast<std::size_t>(m_), 1.0);
    for (int i = 0; i < m_; ++i) {
      double mx = 0.0;
      for (const auto& t : p_.row(i).terms) mx = std::max(mx, std::abs(t.coef));
      rscale_[static_cast<std::size_t>(i)] = mx > 0.0 ? 1.0 / pow2_round(mx) : 1.0;
    }
    double cmax = 0.0;
    for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(p_.obj_coef(j)));
    cscale_ = cmax > 0.0 ? 1.0 / pow2_round(cmax) : 1.0;

    // CSC of scaled structural columns.
    std::vector<int> count(static_cast<std::size_t>(n_), 0);
    for (int i = 0; i < m_; ++i)
      for (const auto& t : p_.row(i).terms)
        if (t.coef != 0.0) ++count[static_cast<std::size_t>(t.var)];
    colptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int j = 0; j < n_; ++j)
      colptr_[static_cast<std::size_t>(j) + 1] =
          colptr_[static_cast<std::size_t>(j)] + count[static_cast<std::size_t>(j)];
    rowidx_.resize(static_cast<std::size_t>(colptr_[static_cast<std::size_t>(n_)]));
    colval_.resize(rowidx_.size());
    {
      std::vector<int> fill(colptr_.begin(), colptr_.end() - 1);
      for (int i = 0; i < m_; ++i) {
        const double rs = rscale_[static_cast<std::size_t>(i)];
        for (const auto& t : p_.row(i).terms) {
          if (t.coef == 0.0) continue;
          const auto k = static_cast<std::size_t>(fill[static_cast<std::size_t>(t.var)]++);
          rowidx_[k] = i;
          colval_[k] = t.coef * rs;
        }
      }
    }

    b_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i)
      b_[static_cast<std::size_t>(i)] = p_.row(i).rhs * rscale_[static_cast<std::size_t>(i)];

    // Extended bounds/costs: structurals, then one slack per row.
    const int nslack = m_;
    lb_.resize(static_cast<std::size_t>(n_ + nslack));
    ub_.resize(lb_.size());
    cost_.assign(lb_.size(), 0.0);
    stat_.assign(lb_.size(), VStat::AtLower);
    xval_.assign(lb_.size(), 0.0);
    for (int j = 0; j < n_; ++j) {
      lb_[static_cast<std::size_t>(j)] = p_.var(j).lb;
      ub_[static_cast<std::size_t>(j)] = p_.var(j).ub;
      cost_[static_cast<std::size_t>(j)] = p_.obj_coef(j) * cscale_;
    }
    for (int i = 0; i < m_; ++i) {
      const auto j = static_cast<std::size_t>(n_ + i);
      switch (p_.row(i).rel) {
        case Rel::Le: lb_[j] = 0.0; ub_[j] = kInf; break;
        case Rel::Ge: lb_[j] = -kInf; ub_[j] = 0.0; break;
        case Rel::Eq: lb_[j] = 0.0; ub_[j] = 0.0; break;
      }
    }
    next_ = n_ + nslack;

    w_.resize(m_);
    y_.resize(m_);
    tmp_.resize(m_);

    double pmax = 1.0;
    for (int j = 0; j < n_; ++j) pmax = std::max(pmax, std::abs(cost_[static_cast<std::size_t>(j)]));
    dual_tol_ = opts_.opt_tol * pmax;

    init_nonbasic_point();
  }

  // Rest every structural at its nearest finite bound (free at zero).
  void init_nonbasic_point() {
    for (int j = 0; j < n_; ++j) {
      const auto js = static_cast<std::size_t>(j);
      if (std::isfinite(lb_[js])) {
        stat_[js] = VStat::AtLower;
        xval_[js] = lb_[js];
      } else if (std::isfinite(ub_[js])) {
        stat_[js] = VStat::AtUpper;
        xval_[js] = ub_[js];
      } else {
        stat_[js] = VStat::Free;
        xval_[js] = 0.0;
      }
    }
  }

  void crash_basis() {
    // Drop any leftover artificial tail so the crash starts from a clean
    // [structural|slack] layout (matters when falling back from a warm basis).
    const auto base = static_cast<std::size_t>(n_ + m_);
    lb_.resize(base);
    ub_.resize(base);
    cost_.resize(base);
    stat_.resize(base);
    xval_.resize(base);
    art_.clear();
    art_rows_.clear();
    next_ = n_ + m_;

    // Row residuals at the initial point.
    std::vector<double> res(b_);
    for (int j = 0; j < n_; ++j) {
      const double v = xval_[static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      for (int k = colptr_[static_cast<std::size_t>(j)]; k < colptr_[static_cast<std::size_t>(j) + 1];
           ++k)
        res[static_cast<std::size_t>(rowidx_[static_cast<std::size_t>(k)])] -=
            colval_[static_cast<std::size_t>(k)] * v;
    }

    // Crash basis. Default: slack basic holding the residual. If the residual
    // violates the slack's bounds, try a singleton structural column in that
    // row whose bounds can absorb it (for the shipped power-system models the
    // unmet-demand columns always qualify, so artificials are rare); only
    // otherwise add an artificial.
    basis_.assign(static_cast<std::size_t>(m_), -1);

    // singleton candidates per row: structural vars with exactly one nonzero
    std::vector<int> singleton(static_cast<std::size_t>(m_), -1);
    for (int j = 0; j < n_; ++j) {
      if (colptr_[static_cast<std::size_t>(j) + 1] - colptr_[static_cast<std::size_t>(j)] != 1)
        continue;
      const auto k = static_cast<std::size_t>(colptr_[static_cast<std::size_t>(j)]);
      const int i = rowidx_[k];
      if (singleton[static_cast<std::size_t>(i)] == -1) singleton[static_cast<std::size_t>(i)] = j;
    }

    for (int i = 0; i < m_; ++i) {
      const auto is = static_cast<std::size_t>(i);
      const auto sj = static_cast<std::size_t>(n_ + i);
      const double r = res[is];
      if (r >= lb_[sj] - 1e-11 && r <= ub_[sj] + 1e-11) {
        basis_[is] = n_ + i;
        stat_[sj] = VStat::Basic;
        xval_[sj] = r;
        continue;
      }
      // nearest feasible slack value
      const double sv = std::min(std::max(r, lb_[sj]), ub_[sj]);
      const int j = singleton[is];
      if (j >= 0 && stat_[static_cast<std::size_t>(j)] != VStat::Basic) {
        const auto k = static_cast<std::size_t>(colptr_[static_cast<std::size_t>(j)]);
        const double a = colval_[k];
        const auto js = static_cast<std::size_t>(j);
        const double target = xval_[js] + (r - sv) / a;
        if (target >= lb_[js] - 1e-11 && target <= ub_[js] + 1e-11) {
          basis_[is] = j;
          stat_[js] = VStat::Basic;
          xval_[js] = std::min(std::max(target, lb_[js]), ub_[js]);
          stat_[sj] = std::isfinite(lb_[sj]) && sv == lb_[sj] ? VStat::AtLower : VStat::AtUpper;
          xval_[sj] = sv;
          continue;
        }
      }
      // artificial: column +e_i, bounds admitting only the residual's sign
      const double t = r - sv;
      lb_.push_back(t >= 0.0 ? 0.0 : -kInf);
      ub_.push_back(t >= 0.0 ? kInf : 0.0);
      cost_.push_back(0.0);
      stat_.push_back(VStat::Basic);
      xval_.push_back(t);
      basis_[is] = next_;
      art_.push_back(next_);
      art_rows_.push_back(i);
      ++next_;
      stat_[sj] = std::isfinite(lb_[sj]) && sv == lb_[sj] ? VStat::AtLower : VStat::AtUpper;
      xval_[sj] = sv;
    }
  }

  // Adopt a caller-supplied basis (same rows/objective, bounds may differ).
  // Returns false — leaving the crash path to run — when the shape is wrong
  // or the listed basics are inconsistent.
  bool apply_warm_start(const Basis& ws) {
    const auto ext = static_cast<std::size_t>(n_ + m_);
    if (ws.stat.size() != ext || ws.basic.size() != static_cast<std::size_t>(m_)) return false;
    for (int j : ws.basic)
      if (j < 0 || j >= n_ + m_ || ws.stat[static_cast<std::size_t>(j)] != 0) return false;
    std::size_t basics = 0;
    for (unsigned char s : ws.stat) {
      if (s > 3) return false;
      basics += s == 0;
    }
    if (basics != static_cast<std::size_t>(m_)) return false;

    for (std::size_t j = 0; j < ext; ++j) {
      switch (ws.stat[j]) {
        case 0:
          stat_[j] = VStat::Basic;
          break;  // value set by recompute_basics
        case 2:
          if (std::isfinite(ub_[j])) {
            stat_[j] = VStat::AtUpper;
            xval_[j] = ub_[j];
            continue;
          }
          [[fallthrough]];
        default:
          // lower / free, or a bound that vanished: nearest finite bound wins
          if (std::isfinite(lb_[j])) {
            stat_[j] = VStat::AtLower;
            xval_[j] = lb_[j];
          } else if (std::isfinite(ub_[j])) {
            stat_[j] = VStat::AtUpper;
            xval_[j] = ub_[j];
          } else {
            stat_[j] = VStat::Free;
            xval_[j] = 0.0;
          }
      }
    }
    basis_.assign(ws.basic.begin(), ws.basic.end());
    warm_ok_ = true;
    return true;
  }

  // Out-of-bounds basics after a warm start: relax the violated bound and
  // charge a unit phase-1 cost in the infeasible direction.
  void relax_violated() {
    if (!warm_ok_) return;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      const auto js = static_cast<std::size_t>(j);
      const double v = xval_[js];
      const double tol = 10.0 * opts_.feas_tol * std::max(1.0, std::abs(v));
      if (v > ub_[js] + tol) {
        relaxed_.push_back({j, lb_[js], ub_[js], true});
        ub_[js] = kInf;
      } else if (v < lb_[js] - tol) {
        relaxed_.push_back({j, lb_[js], ub_[js], false});
        lb_[js] = -kInf;
      }
    }
  }

  // Restore bounds (and drop the phase-1 charge) for relaxed variables that
  // are back inside their real range. Returns true when anything changed.
  bool settle_relaxed() {
    bool changed = false;
    for (std::size_t k = relaxed_.size(); k-- > 0;) {
      const Relaxed& r = relaxed_[k];
      const auto js = static_cast<std::size_t>(r.var);
      const double v = xval_[js];
      double ref = 1.0;
      if (std::isfinite(r.lb)) ref = std::max(ref, std::abs(r.lb));
      if (std::isfinite(r.ub)) ref = std::max(ref, std::abs(r.ub));
      const double tol = opts_.feas_tol * ref;
      if (v < r.lb - tol || v > r.ub + tol) continue;
      lb_[js] = r.lb;
      ub_[js] = r.ub;
      if (js < pcost_.size()) pcost_[js] = 0.0;
      relaxed_[k] = relaxed_.back();
      relaxed_.pop_back();
      changed = true;
    }
    return changed;
  }

  bool any_artificial_active() const {
    for (int a : art_)
      if (std::abs(xval_[static_cast<std::size_t>(a)]) > 1e-12) return true;
    return false;
  }

  double infeasibility() const {
    double s = 0.0;
    for (int a : art_) s += std::abs(xval_[static_cast<std::size_t>(a)]);
    for (const Relaxed& r : relaxed_) {
      const double v = xval_[static_cast<std::size_t>(r.var)];
      s += r.above ? std::max(0.0, v - r.ub) : std::max(0.0, r.lb - v);
    }
    return s;
  }

  bool phase1_feasible() {
    // Per-row acceptance: the artificial stuck in row i must be negligible
    // against that row's scaled rhs.
    for (int a : art_) {
      const double v = std::abs(xval_[static_cast<std::size_t>(a)]);
      if (v > opts_.feas_tol * std::max(1.0, norm_b_)) return false;
    }
    for (const Relaxed& r : relaxed_) {
      const double v = xval_[static_cast<std::size_t>(r.var)];
      const double bound = r.above ? r.ub : r.lb;
      const double over = r.above ? v - r.ub : r.lb - v;
      if (over > opts_.feas_tol * std::max(1.0, std::abs(bound))) return false;
    }
    return true;
  }

  void set_phase_costs() {
    pcost_.assign(static_cast<std::size_t>(next_), 0.0);
    if (phase_ == 1) {
      for (int a : art_) {
        const auto as = static_cast<std::size_t>(a);
        pcost_[as] = std::isfinite(lb_[as]) && lb_[as] == 0.0 ? 1.0 : -1.0;
      }
      for (const Relaxed& r : relaxed_)
        pcost_[static_cast<std::size_t>(r.var)] = r.above ? 1.0 : -1.0;
      dual_tol_ = opts_.opt_tol;
    } else {
      for (int j = 0; j < n_; ++j) pcost_[static_cast<std::size_t>(j)] = cost_[static_cast<std::size_t>(j)];
      double pmax = 1.0;
      for (int j = 0; j < n_; ++j)
        pmax = std::max(pmax, std::abs(cost_[static_cast<std::size_t>(j)]));
      dual_tol_ = opts_.opt_tol * pmax;
    }
    compute_duals();
  }

  void enter_phase2() {
    phase_ = 2;
    // Any still-relaxed bound is within phase-1 tolerance of real: restore it.
    for (const Relaxed& r : relaxed_) {
      lb_[static_cast<std::size_t>(r.var)] = r.lb;
      ub_[static_cast<std::size_t>(r.var)] = r.ub;
    }
    relaxed_.clear();
    // Artificials can never re-enter: pin them at zero.
    for (int a : art_) {
      const auto as = static_cast<std::size_t>(a);
      lb_[as] = 0.0;
      ub_[as] = 0.0;
      if (stat_[as] != VStat::Basic) {
        stat_[as] = VStat::AtLower;
        xval_[as] = 0.0;
      }
    }
    set_phase_costs();
    confirmed_ = false;
    bland_ = false;
    degen_streak_ = 0;
  }

  // ---- factorization ----

  double norm_b_ = 1.0;

  void factorize() {
    Eigen::SparseMatrix<double> B(m_, m_);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m_) * 4);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) {
        for (int k = colptr_[static_cast<std::size_t>(j)];
             k < colptr_[static_cast<std::size_t>(j) + 1]; ++k)
          trips.emplace_back(rowidx_[static_cast<std::size_t>(k)], i,
                             colval_[static_cast<std::size_t>(k)]);
      } else if (j < n_ + m_) {
        trips.emplace_back(j - n_, i, 1.0);
      } else {
        // artificial: unit column in its own row
        trips.emplace_back(art_row(j), i, 1.0);
      }
    }
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();
    lu_.compute(B);
    if (lu_.info() != Eigen::Success) throw NumericalError("basis factorization failed");
    lu_ready_ = true;
    etas_.clear();
    eta_nnz_ = 0;
    ++nfact_;

    norm_b_ = 1.0;
    for (double v : b_) norm_b_ = std::max(norm_b_, std::abs(v));

    recompute_basics();
  }

  int art_row(int j) const {
    // artificial columns are unit; find its row from the basis build — we
    // stored them in order, one per crash row, so recover by search over
    // art_: each artificial was created basic in a specific row. We keep the
    // mapping implicitly: artificial id -> row recorded at creation time.
    return art_rows_[static_cast<std::size_t>(j - n_ - m_)];
  }

  std::vector<int> art_rows_;

  void recompute_basics() {
    // x_B = B^{-1} (b - N x_N), via the fresh LU only (no etas).
    tmp_ = Eigen::Map<const Eigen::VectorXd>(b_.data(), m_);
    for (int j = 0; j < next_; ++j) {
      const auto js = static_cast<std::size_t>(j);
      if (stat_[js] == VStat::Basic) continue;
      const double v = xval_[js];
      if (v == 0.0) continue;
      add_column_times(j, -v, tmp_);
    }
    w_ = lu_.solve(tmp_);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[static_cast<std::size_t>(i)];
      xval_[static_cast<std::size_t>(j)] = w_[i];
    }
  }

  void add_column_times(int j, double scale, Eigen::VectorXd& out) const {
    if (j < n_) {
      for (int k = colptr_[static_cast<std::size_t>(j)]; k < colptr_[static_cast<std::size_t>(j) + 1];
           ++k)
        out[rowidx_[static_cast<std::size_t>(k)]] += scale * colval_[static_cast<std::size_t>(k)];
    } else if (j < n_ + m_) {
      out[j - n_] += scale;
    } else {
      out[art_row(j)] += scale;
    }
  }

  void ftran(Eigen::VectorXd& v) {
    tmp_ = lu_.solve(v);
    v.swap(tmp_);
    for (const auto& e : etas_) {
      const double t = v[e.pos] / e.pivot;
      if (t != 0.0) {
        for (const auto& [i, a] : e.other) v[i] -= a * t;
      }
      v[e.pos] = t;
    }
  }

  void btran(Eigen::VectorXd& v) {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = 0.0;
      for (const auto& [i, a] : it->other) s += v[i] * a;
      v[it->pos] = (v[it->pos] - s) / it->pivot;
    }
    tmp_ = lu_.transpose().solve(v);
    v.swap(tmp_);
  }

  void compute_duals() {
    for (int i = 0; i < m_; ++i)
      y_[i] = pcost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
    btran(y_);
  }

  double reduced_cost(int j) const {
    const auto js = static_cast<std::size_t>(j);
    double d = pcost_[js];
    if (j < n_) {
      for (int k = colptr_[js]; k < colptr_[js + 1]; ++k)
        d -= y_[rowidx_[static_cast<std::size_t>(k)]] * colval_[static_cast<std::size_t>(k)];
    } else if (j < n_ + m_) {
      d -= y_[j - n_];
    } else {
      d -= y_[art_row(j)];
    }
    return d;
  }

  // Candidate eligibility; fills dir (+1 increase, -1 decrease) on success.
  bool eligible(int j, int& dir, double& viol) const {
    const auto js = static_cast<std::size_t>(j);
    if (stat_[js] == VStat::Basic) return false;
    if (lb_[js] == ub_[js]) return false;  // fixed
    const double d = reduced_cost(j);
    switch (stat_[js]) {
      case VStat::AtLower:
        if (d < -dual_tol_) { dir = +1; viol = -d; return true; }
        return false;
      case VStat::AtUpper:
        if (d > dual_tol_) { dir = -1; viol = d; return true; }
        return false;
      case VStat::Free:
        if (std::abs(d) > dual_tol_) { dir = d < 0.0 ? +1 : -1; viol = std::abs(d); return true; }
        return false;
      default:
        return false;
    }
  }

  // Rotating-block Dantzig pricing; Bland (first eligible from 0) when the
  // degenerate streak tripped. Returns false when a full sweep finds nothing.
  bool price(int& enter, int& dir, double& dcost) {
    compute_duals();
    if (bland_) {
      for (int j = 0; j < next_; ++j) {
        int dd;
        double v;
        if (eligible(j, dd, v)) {
          enter = j;
          dir = dd;
          dcost = v;
          return true;
        }
      }
      return false;
    }
    const int block = std::max(256, next_ / 16);
    int scanned = 0;
    int best = -1, bestdir = 0;
    double bestv = 0.0;
    int j = cursor_;
    while (scanned < next_) {
      int dd;
      double v;
      if (eligible(j, dd, v) && v > bestv) {
        best = j;
        bestdir = dd;
        bestv = v;
      }
      ++scanned;
      if (++j >= next_) j = 0;
      if (best >= 0 && scanned >= block) break;
    }
    cursor_ = j;
    if (best < 0) return false;
    enter = best;
    dir = bestdir;
    dcost = bestv;
    return true;
  }

  // One simplex step with entering variable `enter` moving in `dir`.
  // Returns false on an unbounded ray.
  bool pivot(int enter, int dir, double /*dcost*/) {
    const auto ej = static_cast<std::size_t>(enter);

    // w = B^{-1} a_enter
    w_.setZero();
    add_column_times(enter, 1.0, w_);
    ftran(w_);

    // Ratio test: entering moves by theta*dir >= 0; basic i changes at rate
    // -dir*w_i. Ties prefer the largest |pivot| then the lowest position.
    const double own_range =
        (std::isfinite(lb_[ej]) && std::isfinite(ub_[ej])) ? ub_[ej] - lb_[ej] : kInf;
    double theta = own_range;
    int leave_pos = -1;       // -1 with finite theta: bound flip
    double leave_to = 0.0;    // bound the leaving variable hits
    bool leave_at_lower = true;
    const double pivtol = 1e-9;

    for (int i = 0; i < m_; ++i) {
      const double wi = w_[i];
      const double rate = dir * wi;
      if (std::abs(rate) <= pivtol) continue;
      const int bj = basis_[static_cast<std::size_t>(i)];
      const auto bjs = static_cast<std::size_t>(bj);
      const double xb = xval_[bjs];
      double cand;
      bool to_lower;
      if (rate > 0.0) {
        if (!std::isfinite(lb_[bjs])) continue;
        cand = (xb - lb_[bjs]) / rate;
        to_lower = true;
      } else {
        if (!std::isfinite(ub_[bjs])) continue;
        cand = (xb - ub_[bjs]) / rate;
        to_lower = false;
      }
      if (cand < 0.0) cand = 0.0;  // tolerance overshoot: degenerate step
      // theta is +inf until the first blocker when the entering range is
      // unbounded; the tie window must stay finite or inf-inf poisons the
      // comparison below.
      const double tie =
          std::isfinite(theta) ? 1e-10 * (1.0 + std::abs(theta)) : 0.0;
      bool take = false;
      if (cand < theta - tie) {
        take = true;
      } else if (cand <= theta + tie && leave_pos >= 0) {
        // tie between basic candidates: stability first, then lowest position
        const double wl = std::abs(w_[leave_pos]);
        take = std::abs(wi) > wl + 1e-12;
      }
      if (take) {
        theta = std::min(cand, theta);
        leave_pos = i;
        leave_to = to_lower ? lb_[bjs] : ub_[bjs];
        leave_at_lower = to_lower;
      }
    }

    if (!std::isfinite(theta)) return false;  // unbounded ray

    if (leave_pos >= 0 && std::abs(w_[leave_pos]) < 1e-8) {
      // Untrustworthy pivot: rebuild the basis and retry the iteration
      // before any state was touched.
      factorize();
      compute_duals();
      confirmed_ = false;
      return true;
    }

    ++iters_;
    degen_streak_ = theta <= 1e-10 ? degen_streak_ + 1 : 0;
    if (degen_streak_ > 1000 && !bland_) bland_ = true;
    if (degen_streak_ == 0 && bland_) bland_ = false;

    // Move the basic values.
    if (theta != 0.0) {
      const double step = dir * theta;
      for (int i = 0; i < m_; ++i) {
        const double wi = w_[i];
        if (wi != 0.0)
          xval_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= step * wi;
      }
    }

    if (leave_pos < 0) {
      // Bound flip: entering hops to its opposite bound; basis unchanged.
      xval_[ej] = dir > 0 ? ub_[ej] : lb_[ej];
      stat_[ej] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
      return true;
    }

    const double piv = w_[leave_pos];
    const int leave = basis_[static_cast<std::size_t>(leave_pos)];
    const auto ls = static_cast<std::size_t>(leave);
    xval_[ls] = leave_to;
    stat_[ls] = leave_at_lower ? VStat::AtLower : VStat::AtUpper;

    xval_[ej] += dir * theta;
    stat_[ej] = VStat::Basic;
    basis_[static_cast<std::size_t>(leave_pos)] = enter;

    // Record the eta for this pivot.
    Eta e;
    e.pos = leave_pos;
    e.pivot = piv;
    e.other.reserve(16);
    for (int i = 0; i < m_; ++i) {
      if (i == leave_pos) continue;
      const double wi = w_[i];
      if (std::abs(wi) > 1e-12) e.other.emplace_back(i, wi);
    }
    eta_nnz_ += e.other.size() + 1;
    etas_.push_back(std::move(e));

    if (static_cast<int>(etas_.size()) >= opts_.refactor_every ||
        eta_nnz_ > std::max<std::size_t>(20000, 24 * static_cast<std::size_t>(m_))) {
      factorize();
    }
    return true;
  }

  void extract(SolveResult& res) {
    // Refresh basics from a clean factorization before reporting.
    factorize();

    res.x.assign(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) res.x[static_cast<std::size_t>(j)] = xval_[static_cast<std::size_t>(j)];

    double obj = p_.obj_constant();
    for (int j = 0; j < n_; ++j) obj += p_.obj_coef(j) * res.x[static_cast<std::size_t>(j)];
    res.objective = obj;

    // duals, unscaled: y_orig_i = y_scaled_i * rscale_i / cscale
    compute_duals();
    res.duals.assign(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i)
      res.duals[static_cast<std::size_t>(i)] = y_[i] * rscale_[static_cast<std::size_t>(i)] / cscale_;

    if (opts_.collect_basis) {
      bool clean = true;
      for (int j : basis_) clean = clean && j < n_ + m_;
      if (clean) {
        auto bs = std::make_shared<Basis>();
        bs->basic = basis_;
        bs->stat.assign(static_cast<std::size_t>(n_ + m_), 1);
        for (int j = 0; j < n_ + m_; ++j) {
          const auto js = static_cast<std::size_t>(j);
          switch (stat_[js]) {
            case VStat::Basic: bs->stat[js] = 0; break;
            case VStat::AtLower: bs->stat[js] = 1; break;
            case VStat::AtUpper: bs->stat[js] = 2; break;
            case VStat::Free: bs->stat[js] = 3; break;
          }
        }
        res.basis = std::move(bs);
      }
    }
  }

  void finish_stats(SolveResult& res) {
    res.stats.iterations = iters_;
    res.stats.factorizations = nfact_;
    res.proven = res.status == SolveStatus::Optimal || res.status == SolveStatus::Infeasible ||
                 res.status == SolveStatus::Unbounded;
  }
};

}  // namespace

SolveResult solve_lp(const OptProblem& p, const LpOptions& opts) {
  p.check();

  // No rows: each variable sits at whichever bound its cost prefers.
  if (p.num_rows() == 0) {
    SolveResult res;
    res.x.assign(static_cast<std::size_t>(p.num_vars()), 0.0);
    double obj = p.obj_constant();
    for (int j = 0; j < p.num_vars(); ++j) {
      const auto& v = p.var(j);
      const double c = p.obj_coef(j);
      double x;
      if (c > 0.0) {
        if (!std::isfinite(v.lb)) { res.status = SolveStatus::Unbounded; return res; }
        x = v.lb;
      } else if (c < 0.0) {
        if (!std::isfinite(v.ub)) { res.status = SolveStatus::Unbounded; return res; }
        x = v.ub;
      } else {
        x = std::isfinite(v.lb) ? v.lb : (std::isfinite(v.ub) ? v.ub : 0.0);
      }
      res.x[static_cast<std::size_t>(j)] = x;
      obj += c * x;
    }
    res.status = SolveStatus::Optimal;
    res.objective = obj;
    return res;
  }

  SolveResult res;
  if (opts.warm_start != nullptr) {
    try {
      res = Simplex(p, opts).run();
    } catch (const NumericalError&) {
      LpOptions cold = opts;
      cold.warm_start = nullptr;
      res = Simplex(p, cold).run();
    }
  } else {
    res = Simplex(p, opts).run();
  }

  if (res.status == SolveStatus::Optimal) {
    const double viol = Simplex::max_violation(p, res.x);
    if (viol > 50.0 * opts.feas_tol) {
      // One careful retry with a shorter eta cadence before giving up.
      LpOptions strict = opts;
      strict.refactor_every = std::max(10, opts.refactor_every / 4);
      strict.warm_start = nullptr;  // retry from scratch
      res = Simplex(p, strict).run();
      if (res.status == SolveStatus::Optimal) {
        const double v2 = Simplex::max_violation(p, res.x);
        if (v2 > 50.0 * opts.feas_tol)
          throw NumericalError("solution violates constraints by " + std::to_string(v2));
      }
    }
  }
  return res;
}

}  // namespace psuq::opt
