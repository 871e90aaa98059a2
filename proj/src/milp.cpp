#include "hubmod/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace hubmod::milp {

int Model::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (kind == VarKind::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (lower > upper) throw std::invalid_argument("variable '" + name + "' has lower > upper");
  variables_.push_back({std::move(name), kind, lower, upper});
  objective_.push_back(0.0);
  return static_cast<int>(variables_.size()) - 1;
}

int Model::add_continuous(std::string name, double lower, double upper) {
  return add_variable(std::move(name), VarKind::Continuous, lower, upper);
}

int Model::add_integer(std::string name, double lower, double upper) {
  return add_variable(std::move(name), VarKind::Integer, lower, upper);
}

int Model::add_binary(std::string name) {
  return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0);
}

void Model::add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name) {
  for (const Term& t : terms)
    if (t.var < 0 || t.var >= static_cast<int>(variables_.size()))
      throw std::invalid_argument("constraint references undeclared variable");
  constraints_.push_back({std::move(terms), rel, rhs, std::move(name)});
}

bool Model::has_integers() const {
  for (const auto& v : variables_)
    if (v.kind != VarKind::Continuous) return true;
  return false;
}

namespace {

constexpr double kPivotTol = 1e-9;

// min c.x' with A x' = b, x' >= 0, b >= 0, after variable substitution.
struct CanonicalLp {
  std::size_t rows = 0;
  std::size_t cols = 0;  // structural + slack columns
  std::vector<double> a;  // rows x cols
  std::vector<double> b;
  std::vector<double> c;
  double offset = 0.0;  // objective constant absorbed by substitutions

  struct VarMap {
    int plus = -1;   // column of the nonnegative part, -1 if fixed
    int minus = -1;  // column of the negative part for free variables
    double shift = 0.0;
    double sign = 1.0;
  };
  std::vector<VarMap> vmap;
  std::vector<double> row_sign;  // +-1 applied to reach b >= 0
  bool trivially_infeasible = false;
};

CanonicalLp canonicalize(const Model& model, const std::vector<double>& lower,
                         const std::vector<double>& upper) {
  const std::size_t nvars = model.var_count();
  const double sense = model.sense() == Sense::Minimize ? 1.0 : -1.0;

  CanonicalLp lp;
  lp.vmap.resize(nvars);
  lp.offset = sense * model.objective_constant();

  struct PendingRow {
    std::vector<Term> terms;  // over canonical columns
    Relation rel;
    double rhs;
  };
  std::vector<PendingRow> rows;

  // Variable substitutions to nonnegative columns.
  std::size_t col = 0;
  for (std::size_t j = 0; j < nvars; ++j) {
    const double l = lower[j], u = upper[j];
    if (l > u) {
      lp.trivially_infeasible = true;
      return lp;
    }
    auto& m = lp.vmap[j];
    if (l == u) {
      m.shift = l;  // fixed, no column
    } else if (std::isfinite(l)) {
      m.plus = static_cast<int>(col++);
      m.shift = l;
      m.sign = 1.0;
      if (std::isfinite(u))
        rows.push_back({{{m.plus, 1.0}}, Relation::LessEqual, u - l});
    } else if (std::isfinite(u)) {
      m.plus = static_cast<int>(col++);
      m.shift = u;
      m.sign = -1.0;
    } else {
      m.plus = static_cast<int>(col++);
      m.minus = static_cast<int>(col++);
    }
  }

  // Objective over canonical columns.
  lp.c.assign(col, 0.0);
  const auto& obj = model.objective();
  for (std::size_t j = 0; j < nvars; ++j) {
    const double cj = sense * obj[j];
    if (cj == 0.0) continue;
    const auto& m = lp.vmap[j];
    lp.offset += cj * m.shift;
    if (m.plus >= 0) lp.c[m.plus] += cj * m.sign;
    if (m.minus >= 0) lp.c[m.minus] -= cj;
  }

  // Constraint rows over canonical columns.
  for (const auto& con : model.constraints()) {
    PendingRow row;
    row.rel = con.rel;
    row.rhs = con.rhs;
    for (const Term& t : con.terms) {
      if (t.coef == 0.0) continue;
      const auto& m = lp.vmap[t.var];
      row.rhs -= t.coef * m.shift;
      if (m.plus >= 0) row.terms.push_back({m.plus, t.coef * m.sign});
      if (m.minus >= 0) row.terms.push_back({m.minus, -t.coef});
    }
    rows.push_back(std::move(row));
  }

  // Slack columns and sign normalization.
  std::size_t nslack = 0;
  for (const auto& r : rows)
    if (r.rel != Relation::Equal) ++nslack;

  lp.rows = rows.size();
  lp.cols = col + nslack;
  lp.a.assign(lp.rows * lp.cols, 0.0);
  lp.b.assign(lp.rows, 0.0);
  lp.c.resize(lp.cols, 0.0);
  lp.row_sign.assign(lp.rows, 1.0);

  std::size_t slack = col;
  for (std::size_t i = 0; i < lp.rows; ++i) {
    const auto& r = rows[i];
    const double s = r.rhs < 0.0 ? -1.0 : 1.0;
    lp.row_sign[i] = s;
    lp.b[i] = s * r.rhs;
    for (const Term& t : r.terms) lp.a[i * lp.cols + t.var] += s * t.coef;
    if (r.rel != Relation::Equal) {
      const double coef = r.rel == Relation::LessEqual ? 1.0 : -1.0;
      lp.a[i * lp.cols + slack] = s * coef;
      ++slack;
    }
  }
  return lp;
}

// Dense full-tableau simplex over the canonical LP.
class SimplexSolver {
 public:
  SimplexSolver(const CanonicalLp& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {}

  SolveStatus run() {
    const std::size_t m = lp_.rows;
    ncols_ = lp_.cols;

    // Initial basis: unit columns (slacks mostly) where usable,
    // artificials elsewhere.
    basis_.assign(m, -1);
    std::vector<int> col_count(lp_.cols, 0);
    std::vector<std::size_t> col_row(lp_.cols, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < lp_.cols; ++j)
        if (lp_.a[i * lp_.cols + j] != 0.0) {
          ++col_count[j];
          col_row[j] = i;
        }
    for (std::size_t j = 0; j < lp_.cols; ++j) {
      if (col_count[j] != 1) continue;
      const std::size_t i = col_row[j];
      if (basis_[i] < 0 && lp_.a[i * lp_.cols + j] == 1.0) basis_[i] = static_cast<int>(j);
    }
    std::vector<std::size_t> needs_artificial;
    for (std::size_t i = 0; i < m; ++i)
      if (basis_[i] < 0) needs_artificial.push_back(i);

    first_artificial_ = ncols_;
    ncols_ += needs_artificial.size();
    art_row_ = needs_artificial;
    t_.assign(m * (ncols_ + 1), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < lp_.cols; ++j) t_[i * (ncols_ + 1) + j] = lp_.a[i * lp_.cols + j];
      t_[i * (ncols_ + 1) + ncols_] = lp_.b[i];
    }
    for (std::size_t k = 0; k < needs_artificial.size(); ++k) {
      const std::size_t i = needs_artificial[k];
      t_[i * (ncols_ + 1) + first_artificial_ + k] = 1.0;
      basis_[i] = static_cast<int>(first_artificial_ + k);
    }

    if (first_artificial_ < ncols_) {
      std::vector<double> phase1(ncols_, 0.0);
      for (std::size_t j = first_artificial_; j < ncols_; ++j) phase1[j] = 1.0;
      const SolveStatus st = optimize(phase1, /*allow_artificials=*/true);
      if (st != SolveStatus::Optimal) return st;
      if (objective_value(phase1) > opt_.feas_tol) return SolveStatus::Infeasible;
      purge_artificials();
    }

    std::vector<double> cost(ncols_, 0.0);
    for (std::size_t j = 0; j < lp_.cols; ++j) cost[j] = lp_.c[j];
    return optimize(cost, /*allow_artificials=*/false);
  }

  double objective_value(const std::vector<double>& cost) const {
    double z = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) z += cost[basis_[i]] * rhs(i);
    return z;
  }

  std::vector<double> column_values() const {
    std::vector<double> x(lp_.cols, 0.0);
    for (std::size_t i = 0; i < rows(); ++i)
      if (basis_[i] < static_cast<int>(lp_.cols)) x[basis_[i]] = rhs(i);
    return x;
  }

  // y solves B^T y = c_B against the pristine matrix, giving the dual
  // multipliers of the surviving rows.
  std::vector<double> row_duals() const {
    const std::size_t m = rows();
    std::vector<double> bt(m * m, 0.0), cb(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const int j = basis_[i];
      cb[i] = j < static_cast<int>(lp_.cols) ? lp_.c[j] : 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t orig = row_origin_[r];
        bt[i * m + r] = j < static_cast<int>(lp_.cols) ? lp_.a[orig * lp_.cols + j] : 0.0;
      }
    }
    // Gaussian elimination with partial pivoting on B^T y = c_B.
    std::vector<double> y = cb;
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < m; ++i)
        if (std::abs(bt[i * m + k]) > std::abs(bt[piv * m + k])) piv = i;
      if (std::abs(bt[piv * m + k]) < 1e-12) continue;
      if (piv != k) {
        for (std::size_t j = 0; j < m; ++j) std::swap(bt[k * m + j], bt[piv * m + j]);
        std::swap(y[k], y[piv]);
      }
      for (std::size_t i = k + 1; i < m; ++i) {
        const double f = bt[i * m + k] / bt[k * m + k];
        if (f == 0.0) continue;
        for (std::size_t j = k; j < m; ++j) bt[i * m + j] -= f * bt[k * m + j];
        y[i] -= f * y[k];
      }
    }
    for (std::size_t k = m; k-- > 0;) {
      for (std::size_t j = k + 1; j < m; ++j) y[k] -= bt[k * m + j] * y[j];
      y[k] = std::abs(bt[k * m + k]) < 1e-12 ? 0.0 : y[k] / bt[k * m + k];
    }
    std::vector<double> duals(lp_.rows, 0.0);
    for (std::size_t r = 0; r < m; ++r) duals[row_origin_[r]] = y[r];
    return duals;
  }

  long iterations() const { return iterations_; }

 private:
  std::size_t rows() const { return basis_.size(); }
  double rhs(std::size_t i) const { return t_[i * (ncols_ + 1) + ncols_]; }
  double& at(std::size_t i, std::size_t j) { return t_[i * (ncols_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * (ncols_ + 1) + j]; }

  void compute_reduced(const std::vector<double>& cost, std::vector<double>& red) const {
    // Reduced costs r_j = c_j - c_B . T(:,j).
    const std::size_t m = rows();
    red.assign(ncols_, 0.0);
    for (std::size_t j = 0; j < ncols_; ++j) {
      double v = cost[j];
      for (std::size_t i = 0; i < m; ++i) {
        const double cb = cost[basis_[i]];
        if (cb != 0.0) v -= cb * at(i, j);
      }
      red[j] = v;
    }
  }

  // Rebuilds the tableau from the pristine data under the current basis,
  // clearing accumulated pivot roundoff. Tableau rows may be permuted,
  // carrying their origin along.
  bool refactorize() {
    const std::size_t m = rows();
    const std::size_t w = ncols_ + 1;
    std::vector<double> fresh(m * w, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t orig = row_origin_[r];
      for (std::size_t j = 0; j < lp_.cols; ++j) fresh[r * w + j] = lp_.a[orig * lp_.cols + j];
      for (std::size_t k = 0; k < art_row_.size(); ++k)
        if (art_row_[k] == orig) fresh[r * w + first_artificial_ + k] = 1.0;
      fresh[r * w + ncols_] = lp_.b[orig];
    }
    std::vector<std::size_t> origin = row_origin_;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t col = static_cast<std::size_t>(basis_[i]);
      std::size_t piv = i;
      for (std::size_t r = i + 1; r < m; ++r)
        if (std::abs(fresh[r * w + col]) > std::abs(fresh[piv * w + col])) piv = r;
      if (std::abs(fresh[piv * w + col]) < 1e-11) return false;  // keep the old tableau
      if (piv != i) {
        for (std::size_t j = 0; j < w; ++j) std::swap(fresh[i * w + j], fresh[piv * w + j]);
        std::swap(origin[i], origin[piv]);
      }
      const double inv = 1.0 / fresh[i * w + col];
      for (std::size_t j = 0; j < w; ++j) fresh[i * w + j] *= inv;
      fresh[i * w + col] = 1.0;
      for (std::size_t r = 0; r < m; ++r) {
        if (r == i) continue;
        const double f = fresh[r * w + col];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < w; ++j) fresh[r * w + j] -= f * fresh[i * w + j];
        fresh[r * w + col] = 0.0;
      }
    }
    t_ = std::move(fresh);
    row_origin_ = std::move(origin);
    return true;
  }

  SolveStatus optimize(const std::vector<double>& cost, bool allow_artificials) {
    const std::size_t m = rows();
    std::vector<double> red;
    compute_reduced(cost, red);

    bool bland = false;
    long stalled = 0;
    long since_refactor = 0;
    for (;;) {
      if (++iterations_ > opt_.max_iterations)
        throw std::runtime_error("simplex iteration limit exceeded");

      int enter = -1;
      if (bland) {
        for (std::size_t j = 0; j < ncols_; ++j) {
          if (!allow_artificials && j >= first_artificial_) break;
          if (red[j] < -opt_.opt_tol) {
            enter = static_cast<int>(j);
            break;
          }
        }
      } else {
        double best = -opt_.opt_tol;
        for (std::size_t j = 0; j < ncols_; ++j) {
          if (!allow_artificials && j >= first_artificial_) break;
          if (red[j] < best) {
            best = red[j];
            enter = static_cast<int>(j);
          }
        }
      }
      if (enter < 0) return SolveStatus::Optimal;

      // Ratio test.
      int leave = -1;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs(i) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12) {
          leave = static_cast<int>(i);
          best_ratio = ratio;
        } else if (ratio < best_ratio + 1e-12) {
          if (bland) {
            if (basis_[i] < basis_[leave]) leave = static_cast<int>(i);
          } else if (a > at(leave, enter)) {
            leave = static_cast<int>(i);
          }
        }
      }
      if (leave < 0) return SolveStatus::Unbounded;

      if (best_ratio <= 1e-12) {
        if (++stalled > 400 + static_cast<long>(4 * m)) bland = true;
      } else {
        stalled = 0;
      }

      pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter), red);

      if (++since_refactor >= 3000) {
        since_refactor = 0;
        if (refactorize()) compute_reduced(cost, red);
      }
    }
  }

  void pivot(std::size_t p, std::size_t e, std::vector<double>& red) {
    const std::size_t w = ncols_ + 1;
    double* prow = &t_[p * w];
    const double inv = 1.0 / prow[e];
    for (std::size_t j = 0; j < w; ++j) prow[j] *= inv;
    prow[e] = 1.0;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (i == p) continue;
      double* row = &t_[i * w];
      const double f = row[e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) row[j] -= f * prow[j];
      row[e] = 0.0;
    }
    const double f = red[e];
    if (f != 0.0) {
      for (std::size_t j = 0; j < ncols_; ++j) red[j] -= f * prow[j];
      red[e] = 0.0;
    }
    basis_[p] = static_cast<int>(e);
  }

  // After phase 1: pivot basic artificials out; rows that cannot release
  // one are redundant and get dropped.
  void purge_artificials() {
    const std::size_t w = ncols_ + 1;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (basis_[i] < static_cast<int>(first_artificial_)) {
        keep.push_back(i);
        continue;
      }
      int col = -1;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (std::abs(at(i, j)) > 1e-7) {
          col = static_cast<int>(j);
          break;
        }
      }
      if (col >= 0) {
        std::vector<double> dummy(ncols_, 0.0);
        pivot(i, static_cast<std::size_t>(col), dummy);
        keep.push_back(i);
      }
    }
    if (keep.size() != rows()) {
      std::vector<double> nt(keep.size() * w);
      std::vector<int> nb(keep.size());
      std::vector<std::size_t> norigin(keep.size());
      for (std::size_t k = 0; k < keep.size(); ++k) {
        std::copy_n(&t_[keep[k] * w], w, &nt[k * w]);
        nb[k] = basis_[keep[k]];
        norigin[k] = row_origin_[keep[k]];
      }
      t_ = std::move(nt);
      basis_ = std::move(nb);
      row_origin_ = std::move(norigin);
    }
  }

 public:
  void init_row_origin() {
    row_origin_.resize(lp_.rows);
    for (std::size_t i = 0; i < lp_.rows; ++i) row_origin_[i] = i;
  }

 private:
  const CanonicalLp& lp_;
  const LpOptions& opt_;
  std::size_t ncols_ = 0;
  std::size_t first_artificial_ = 0;
  std::vector<double> t_;
  std::vector<int> basis_;
  std::vector<std::size_t> row_origin_;
  std::vector<std::size_t> art_row_;
  long iterations_ = 0;
};

Solution solve_lp_bounds(const Model& model, const std::vector<double>& lower,
                         const std::vector<double>& upper, const LpOptions& opt) {
  CanonicalLp lp = canonicalize(model, lower, upper);
  Solution sol;
  if (lp.trivially_infeasible) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  SimplexSolver simplex(lp, opt);
  simplex.init_row_origin();
  const SolveStatus st = simplex.run();
  sol.status = st;
  sol.iterations = simplex.iterations();
  if (st != SolveStatus::Optimal) return sol;

  const std::vector<double> xcol = simplex.column_values();
  sol.values.assign(model.var_count(), 0.0);
  for (std::size_t j = 0; j < model.var_count(); ++j) {
    const auto& m = lp.vmap[j];
    double v = m.shift;
    if (m.plus >= 0) v += m.sign * xcol[m.plus];
    if (m.minus >= 0) v -= xcol[m.minus];
    sol.values[j] = v;
  }

  double obj = model.objective_constant();
  const auto& coefs = model.objective();
  for (std::size_t j = 0; j < model.var_count(); ++j) obj += coefs[j] * sol.values[j];
  sol.objective = obj;
  sol.bound = obj;

  if (opt.want_duals) {
    const std::vector<double> y = simplex.row_duals();
    double dual = lp.offset;
    for (std::size_t i = 0; i < lp.rows; ++i) dual += y[i] * lp.b[i];
    const double sense = model.sense() == Sense::Minimize ? 1.0 : -1.0;
    sol.dual_objective = sense * dual;
  }
  return sol;
}

}  // namespace

Solution solve_lp(const Model& model, const LpOptions& opt) {
  std::vector<double> lower(model.var_count()), upper(model.var_count());
  for (std::size_t j = 0; j < model.var_count(); ++j) {
    lower[j] = model.variables()[j].lower;
    upper[j] = model.variables()[j].upper;
  }
  return solve_lp_bounds(model, lower, upper, opt);
}

namespace {

struct BbNode {
  double bound;
  long id;
  std::vector<double> lower, upper;
};

struct BbNodeOrder {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

// Interval bound propagation over the rows: tightens variable bounds to
// their implied ranges (valid for the relaxation too) and reports
// detected infeasibility. Fixed variables then drop out of the node LPs.
bool propagate_bounds(const Model& model, const std::vector<char>& is_int,
                      std::vector<double>& lower, std::vector<double>& upper) {
  constexpr double kTol = 1e-9;
  for (int pass = 0; pass < 4; ++pass) {
    bool changed = false;
    for (const auto& con : model.constraints()) {
      double min_sum = 0.0, max_sum = 0.0;
      int min_inf = 0, max_inf = 0;
      for (const Term& t : con.terms) {
        const double lo = t.coef > 0 ? lower[t.var] : upper[t.var];
        const double hi = t.coef > 0 ? upper[t.var] : lower[t.var];
        if (std::isfinite(lo)) min_sum += t.coef * lo; else ++min_inf;
        if (std::isfinite(hi)) max_sum += t.coef * hi; else ++max_inf;
      }
      const bool need_upper = con.rel != Relation::GreaterEqual;  // sum <= rhs
      const bool need_lower = con.rel != Relation::LessEqual;     // sum >= rhs
      if (need_upper && min_inf == 0 && min_sum > con.rhs + kTol * (1 + std::abs(con.rhs)))
        return false;
      if (need_lower && max_inf == 0 && max_sum < con.rhs - kTol * (1 + std::abs(con.rhs)))
        return false;

      for (const Term& t : con.terms) {
        if (t.coef == 0.0) continue;
        const double own_lo = t.coef > 0 ? lower[t.var] : upper[t.var];
        const double own_hi = t.coef > 0 ? upper[t.var] : lower[t.var];
        // residual activity of the other terms
        const bool rest_min_finite = min_inf == (std::isfinite(own_lo) ? 0 : 1);
        const bool rest_max_finite = max_inf == (std::isfinite(own_hi) ? 0 : 1);
        if (need_upper && rest_min_finite) {
          const double rest = min_sum - (std::isfinite(own_lo) ? t.coef * own_lo : 0.0);
          const double limit = (con.rhs - rest) / t.coef;
          if (t.coef > 0) {
            double nb = is_int[t.var] ? std::floor(limit + 1e-7) : limit;
            if (nb < upper[t.var] - kTol * (1 + std::abs(nb))) {
              upper[t.var] = nb;
              changed = true;
            }
          } else {
            double nb = is_int[t.var] ? std::ceil(limit - 1e-7) : limit;
            if (nb > lower[t.var] + kTol * (1 + std::abs(nb))) {
              lower[t.var] = nb;
              changed = true;
            }
          }
          if (lower[t.var] > upper[t.var] + kTol) return false;
        }
        if (need_lower && rest_max_finite) {
          const double rest = max_sum - (std::isfinite(own_hi) ? t.coef * own_hi : 0.0);
          const double limit = (con.rhs - rest) / t.coef;
          if (t.coef > 0) {
            double nb = is_int[t.var] ? std::ceil(limit - 1e-7) : limit;
            if (nb > lower[t.var] + kTol * (1 + std::abs(nb))) {
              lower[t.var] = nb;
              changed = true;
            }
          } else {
            double nb = is_int[t.var] ? std::floor(limit + 1e-7) : limit;
            if (nb < upper[t.var] - kTol * (1 + std::abs(nb))) {
              upper[t.var] = nb;
              changed = true;
            }
          }
          if (lower[t.var] > upper[t.var] + kTol) return false;
        }
      }
    }
    if (!changed) break;
  }
  return true;
}

}  // namespace

Solution solve_milp(const Model& model, const MilpOptions& opt) {
  const std::size_t n = model.var_count();
  std::vector<int> int_vars;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = model.variables()[j];
    if (v.kind == VarKind::Continuous) continue;
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
      throw std::invalid_argument("integer variable '" + v.name + "' must be bounded");
    int_vars.push_back(static_cast<int>(j));
  }
  if (int_vars.empty()) return solve_lp(model, opt.lp);

  const bool minimize = model.sense() == Sense::Minimize;
  const double dir = minimize ? 1.0 : -1.0;  // compare dir*objective

  std::vector<char> is_int(n, 0);
  for (int j : int_vars) is_int[j] = 1;

  std::vector<double> root_lower(n), root_upper(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = model.variables()[j];
    // Integer bounds tighten to the enclosed integers.
    root_lower[j] = v.kind == VarKind::Continuous ? v.lower : std::ceil(v.lower - opt.int_tol);
    root_upper[j] = v.kind == VarKind::Continuous ? v.upper : std::floor(v.upper + opt.int_tol);
  }

  std::priority_queue<BbNode, std::vector<BbNode>, BbNodeOrder> open;
  long next_id = 0;

  Solution result;
  result.status = SolveStatus::Infeasible;
  if (!propagate_bounds(model, is_int, root_lower, root_upper)) return result;

  Solution root = solve_lp_bounds(model, root_lower, root_upper, opt.lp);
  if (root.status == SolveStatus::Unbounded) {
    result.status = SolveStatus::Unbounded;
    return result;
  }
  if (root.status != SolveStatus::Optimal) return result;

  bool have_incumbent = false;
  double incumbent = kInfinity;  // dir * objective of best integral solution
  std::vector<double> incumbent_values;
  long nodes = 0;
  long lp_iterations = root.iterations;

  const auto scored_objective = [&](const std::vector<double>& vals) {
    double obj = model.objective_constant();
    for (std::size_t j = 0; j < n; ++j) obj += model.objective()[j] * vals[j];
    return dir * obj;
  };
  const auto offer_incumbent = [&](std::vector<double> vals) {
    for (int j : int_vars) vals[j] = std::round(vals[j]);
    const double scored = scored_objective(vals);
    if (!have_incumbent || scored < incumbent) {
      have_incumbent = true;
      incumbent = scored;
      incumbent_values = std::move(vals);
    }
  };

  // Round-and-fix dive: snap the integer variables of an LP solution and
  // re-solve for the continuous part; any feasible completion becomes an
  // incumbent for pruning.
  const auto dive = [&](const std::vector<double>& values, const std::vector<double>& lo,
                        const std::vector<double>& hi) {
    std::vector<double> dl = lo, du = hi;
    for (int j : int_vars) {
      const double v = std::clamp(std::round(values[j]), lo[j], hi[j]);
      dl[j] = du[j] = v;
    }
    Solution fixed = solve_lp_bounds(model, dl, du, opt.lp);
    lp_iterations += fixed.iterations;
    if (fixed.status == SolveStatus::Optimal) offer_incumbent(fixed.values);
  };
  dive(root.values, root_lower, root_upper);

  if (!opt.integer_hint.empty()) {
    std::vector<double> hl = root_lower, hu = root_upper;
    for (const auto& [j, v] : opt.integer_hint) {
      const double pinned = std::clamp(std::round(v), root_lower[j], root_upper[j]);
      hl[j] = hu[j] = pinned;
    }
    Solution hinted = solve_lp_bounds(model, hl, hu, opt.lp);
    lp_iterations += hinted.iterations;
    if (hinted.status == SolveStatus::Optimal) dive(hinted.values, hl, hu);
  }

  open.push({dir * root.objective, next_id++, root_lower, root_upper});
  double best_open_bound = dir * root.objective;

  const auto gap_of = [&](double inc, double bnd) {
    return (inc - bnd) / std::max(1.0, std::abs(inc));
  };
  const auto cutoff = [&] {
    return incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
  };

  bool node_limit_hit = false;
  while (!open.empty()) {
    if (have_incumbent && gap_of(incumbent, open.top().bound) <= opt.rel_gap) break;
    if (nodes >= opt.max_nodes) {
      node_limit_hit = true;
      break;
    }

    BbNode node = open.top();
    open.pop();
    best_open_bound = node.bound;
    if (have_incumbent && node.bound >= cutoff()) continue;

    ++nodes;
    if (!propagate_bounds(model, is_int, node.lower, node.upper)) continue;
    Solution rel = solve_lp_bounds(model, node.lower, node.upper, opt.lp);
    lp_iterations += rel.iterations;
    if (rel.status != SolveStatus::Optimal) continue;  // infeasible subtree
    const double bound = dir * rel.objective;
    if (have_incumbent && bound >= cutoff()) continue;

    // Most fractional integer variable; ties keep the lowest index.
    int branch_var = -1;
    double branch_frac = opt.int_tol;
    for (int j : int_vars) {
      const double v = rel.values[j];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > branch_frac) {
        branch_frac = frac;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      offer_incumbent(rel.values);
      continue;
    }

    if (nodes % 512 == 0) dive(rel.values, node.lower, node.upper);

    const double v = rel.values[branch_var];
    BbNode down{bound, next_id++, node.lower, node.upper};
    down.upper[branch_var] = std::floor(v);
    if (down.lower[branch_var] <= down.upper[branch_var] &&
        (!have_incumbent || bound < cutoff()))
      open.push(std::move(down));
    BbNode up{bound, next_id++, node.lower, node.upper};
    up.lower[branch_var] = std::ceil(v);
    if (up.lower[branch_var] <= up.upper[branch_var] && (!have_incumbent || bound < cutoff()))
      open.push(std::move(up));
  }

  // Drain nodes that can no longer improve on the incumbent.
  while (!open.empty() && have_incumbent && open.top().bound >= cutoff()) open.pop();

  const double final_bound = open.empty() ? (have_incumbent ? incumbent : best_open_bound)
                                          : open.top().bound;
  result.nodes = nodes;
  result.iterations = lp_iterations;
  if (!have_incumbent) {
    result.status = node_limit_hit ? SolveStatus::GapLimit : SolveStatus::Infeasible;
    result.bound = dir * final_bound;
    return result;
  }
  result.values = incumbent_values;
  result.objective = dir * incumbent;
  result.bound = dir * std::min(incumbent, final_bound);
  result.status = node_limit_hit && gap_of(incumbent, final_bound) > opt.rel_gap
                      ? SolveStatus::GapLimit
                      : SolveStatus::Optimal;
  return result;
}

namespace {
SolverBackend g_backend;  // empty = built-in
}  // namespace

void set_solver_backend(SolverBackend backend) { g_backend = std::move(backend); }

Solution solve(const Model& model, const MilpOptions& opt) {
  if (g_backend) return g_backend(model, opt);
  return solve_milp(model, opt);
}

std::string write_lp_text(const Model& model) {
  std::ostringstream os;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const auto var_name = [&](int j) {
    const std::string& n = model.variables()[j].name;
    return n.empty() ? "x" + std::to_string(j) : n;
  };

  os << (model.sense() == Sense::Minimize ? "Minimize" : "Maximize") << "\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < model.var_count(); ++j) {
    const double c = model.objective()[j];
    if (c == 0.0) continue;
    os << (first ? " " : (c < 0 ? " " : " + ")) << (c < 0 ? "- " : "");
    os << num(std::abs(c)) << " " << var_name(static_cast<int>(j));
    first = false;
  }
  if (model.objective_constant() != 0.0)
    os << (model.objective_constant() < 0 ? " - " : " + ") << num(std::abs(model.objective_constant()));
  if (first && model.objective_constant() == 0.0) os << " 0 " << var_name(0);
  os << "\nSubject To\n";
  int ci = 0;
  for (const auto& con : model.constraints()) {
    os << " " << (con.name.empty() ? "c" + std::to_string(ci) : con.name) << ":";
    bool f = true;
    for (const Term& t : con.terms) {
      if (t.coef == 0.0) continue;
      os << (f ? " " : (t.coef < 0 ? " " : " + ")) << (t.coef < 0 ? "- " : "");
      os << num(std::abs(t.coef)) << " " << var_name(t.var);
      f = false;
    }
    if (f) os << " 0 " << var_name(0);
    os << (con.rel == Relation::LessEqual ? " <= " : con.rel == Relation::Equal ? " = " : " >= ")
       << num(con.rhs) << "\n";
    ++ci;
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < model.var_count(); ++j) {
    const auto& v = model.variables()[j];
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
      os << " " << var_name(static_cast<int>(j)) << " free\n";
    } else {
      os << " " << (std::isfinite(v.lower) ? num(v.lower) : "-inf") << " <= "
         << var_name(static_cast<int>(j)) << " <= "
         << (std::isfinite(v.upper) ? num(v.upper) : "+inf") << "\n";
    }
  }
  bool any_general = false, any_binary = false;
  for (const auto& v : model.variables()) {
    any_general |= v.kind == VarKind::Integer;
    any_binary |= v.kind == VarKind::Binary;
  }
  if (any_general) {
    os << "General\n";
    for (std::size_t j = 0; j < model.var_count(); ++j)
      if (model.variables()[j].kind == VarKind::Integer)
        os << " " << var_name(static_cast<int>(j)) << "\n";
  }
  if (any_binary) {
    os << "Binary\n";
    for (std::size_t j = 0; j < model.var_count(); ++j)
      if (model.variables()[j].kind == VarKind::Binary) os << " " << var_name(static_cast<int>(j)) << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace hubmod::milp
