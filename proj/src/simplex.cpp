#include <cmath>
#include <limits>
#include <vector>

#include "slsf/error.hpp"
#include "slsf/solver.hpp"

namespace slsf::solver {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kCostTol = 1e-10;
constexpr int kMaxPivots = 200000;

// Dense tableau over the standard form  M y = r, y >= 0, r >= 0.
// Row `rows_` holds reduced costs; column `cols_` holds the right-hand side.
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& M, const Eigen::VectorXd& r, std::vector<int> basis)
      : rows_(static_cast<int>(M.rows())),
        cols_(static_cast<int>(M.cols())),
        T_(Eigen::MatrixXd::Zero(M.rows() + 1, M.cols() + 1)),
        basis_(std::move(basis)),
        row_alive_(rows_, true) {
    T_.topLeftCorner(rows_, cols_) = M;
    T_.col(cols_).head(rows_) = r;
  }

  void set_cost(const Eigen::VectorXd& cost) {
    T_.row(rows_).setZero();
    T_.row(rows_).head(cols_) = cost.transpose();
    for (int i = 0; i < rows_; ++i) {
      if (!row_alive_[i]) continue;
      const double cb = cost(basis_[i]);
      if (cb != 0.0) T_.row(rows_) -= cb * T_.row(i);
    }
  }

  // Returns false when the objective is unbounded below.
  bool optimize(const std::vector<bool>& allowed) {
    int stall = 0;
    double last_obj = objective();
    for (int it = 0; it < kMaxPivots; ++it) {
      const bool bland = stall > 50;
      int enter = -1;
      double best = -kCostTol;
      for (int j = 0; j < cols_; ++j) {
        if (!allowed[j]) continue;
        const double rc = T_(rows_, j);
        if (rc < best) {
          enter = j;
          best = rc;
          if (bland) break;
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        if (!row_alive_[i]) continue;
        const double a = T_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = T_(i, cols_) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && leave >= 0 && basis_[i] < basis_[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);

      const double obj = objective();
      stall = (obj < last_obj - 1e-12) ? 0 : stall + 1;
      last_obj = obj;
    }
    throw Error(ErrorCode::kSolverFailure, "simplex pivot limit reached");
  }

  void pivot(int r, int c) {
    T_.row(r) /= T_(r, c);
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = T_(i, c);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
      // Roundoff can push a basic value slightly negative.
      if (i < rows_ && T_(i, cols_) < 0.0 && T_(i, cols_) > -1e-11) T_(i, cols_) = 0.0;
    }
    basis_[r] = c;
  }

  // Objective value of the current basic solution.
  double objective() const { return -T_(rows_, cols_); }

  // Pivots artificial columns (index >= first_artificial) out of the basis.
  void expel_artificials(int first_artificial) {
    for (int i = 0; i < rows_; ++i) {
      if (!row_alive_[i] || basis_[i] < first_artificial) continue;
      int col = -1;
      double best = kPivotTol * 1e3;
      for (int j = 0; j < first_artificial; ++j) {
        if (std::abs(T_(i, j)) > best) {
          best = std::abs(T_(i, j));
          col = j;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        row_alive_[i] = false;  // linearly dependent row
      }
    }
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(cols_);
    for (int i = 0; i < rows_; ++i) {
      if (row_alive_[i]) y(basis_[i]) = T_(i, cols_);
    }
    return y;
  }

 private:
  int rows_;
  int cols_;
  Eigen::MatrixXd T_;
  std::vector<int> basis_;
  std::vector<bool> row_alive_;
};

}  // namespace

LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A_ub,
                  const Eigen::VectorXd& b_ub, const Eigen::MatrixXd& A_eq,
                  const Eigen::VectorXd& b_eq) {
  const int n = static_cast<int>(c.size());
  const int m_ub = static_cast<int>(A_ub.rows());
  const int m_eq = static_cast<int>(A_eq.rows());
  SLSF_THROW_UNLESS(m_ub == 0 || A_ub.cols() == n, ErrorCode::kDimensionMismatch,
                    "solve_lp: A_ub column count");
  SLSF_THROW_UNLESS(m_eq == 0 || A_eq.cols() == n, ErrorCode::kDimensionMismatch,
                    "solve_lp: A_eq column count");
  SLSF_THROW_UNLESS(b_ub.size() == m_ub && b_eq.size() == m_eq,
                    ErrorCode::kDimensionMismatch, "solve_lp: rhs size");

  const int m = m_ub + m_eq;
  // Columns: [p (n) | q (n) | slack (m_ub) | artificial (k)].
  Eigen::MatrixXd M_core = Eigen::MatrixXd::Zero(m, 2 * n + m_ub);
  Eigen::VectorXd r(m);
  std::vector<int> needs_artificial;
  std::vector<int> basis(m, -1);

  for (int i = 0; i < m; ++i) {
    Eigen::RowVectorXd a = (i < m_ub) ? Eigen::RowVectorXd(A_ub.row(i))
                                      : Eigen::RowVectorXd(A_eq.row(i - m_ub));
    double rhs = (i < m_ub) ? b_ub(i) : b_eq(i - m_ub);
    const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
    if (scale > 0.0) {
      a /= scale;
      rhs /= scale;
    }
    double sign = 1.0;
    if (rhs < 0.0) sign = -1.0;
    M_core.block(i, 0, 1, n) = sign * a;
    M_core.block(i, n, 1, n) = -sign * a;
    // Scaled slack keeps a unit coefficient.
    if (i < m_ub) M_core(i, 2 * n + i) = sign;
    r(i) = sign * rhs;
    if (i < m_ub && sign > 0.0) {
      basis[i] = 2 * n + i;
    } else {
      needs_artificial.push_back(i);
    }
  }

  const int core_cols = 2 * n + m_ub;
  const int k = static_cast<int>(needs_artificial.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, core_cols + k);
  M.leftCols(core_cols) = M_core;
  for (int a = 0; a < k; ++a) {
    M(needs_artificial[a], core_cols + a) = 1.0;
    basis[needs_artificial[a]] = core_cols + a;
  }

  Tableau tab(M, r, basis);
  std::vector<bool> allowed(core_cols + k, true);

  LpResult result;
  if (k > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(core_cols + k);
    phase1.tail(k).setOnes();
    tab.set_cost(phase1);
    tab.optimize(allowed);
    const double infeas = tab.objective();
    const double scale = 1.0 + r.cwiseAbs().maxCoeff();
    if (infeas > 1e-9 * scale) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    tab.expel_artificials(core_cols);
    for (int a = 0; a < k; ++a) allowed[core_cols + a] = false;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(core_cols + k);
  cost.head(n) = c;
  cost.segment(n, n) = -c;
  tab.set_cost(cost);
  if (!tab.optimize(allowed)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  const Eigen::VectorXd y = tab.primal();
  result.x = y.head(n) - y.segment(n, n);
  result.objective = c.dot(result.x);
  result.status = LpStatus::kOptimal;
  return result;
}

}  // namespace slsf::solver
