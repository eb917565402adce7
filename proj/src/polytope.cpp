#include "slsf/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "slsf/error.hpp"
#include "slsf/solver.hpp"

namespace slsf::poly {

using solver::LpStatus;
using solver::solve_lp;

namespace {

constexpr double kZeroRow = 1e-12;

// Drops exact duplicate rows, keeping the smallest right-hand side.
Polytope dedupe_rows(const Polytope& P) {
  const int m = P.num_rows();
  std::vector<bool> keep(m, true);
  VectorXd b = P.b();
  for (int i = 0; i < m; ++i) {
    if (!keep[i]) continue;
    for (int k = i + 1; k < m; ++k) {
      if (!keep[k]) continue;
      if ((P.A().row(i) - P.A().row(k)).cwiseAbs().maxCoeff() < 1e-12) {
        b(i) = std::min(b(i), b(k));
        keep[k] = false;
      }
    }
  }
  const int count = static_cast<int>(std::count(keep.begin(), keep.end(), true));
  MatrixXd A(count, P.dim());
  VectorXd bb(count);
  for (int i = 0, r = 0; i < m; ++i) {
    if (!keep[i]) continue;
    A.row(r) = P.A().row(i);
    bb(r++) = b(i);
  }
  return Polytope(A, bb);
}

}  // namespace

// ---------------------------------------------------------------------------
// Box

Box::Box(VectorXd c, VectorXd h) : center(std::move(c)), half_widths(std::move(h)) {
  SLSF_THROW_UNLESS(center.size() == half_widths.size(), ErrorCode::kDimensionMismatch,
                    "box center/half-width size");
  SLSF_THROW_UNLESS((half_widths.array() >= 0.0).all(), ErrorCode::kInvalidArgument,
                    "negative box half-width");
}

Box Box::unit(int n, double radius) {
  return Box(VectorXd::Zero(n), VectorXd::Constant(n, radius));
}

Polytope Box::to_polytope() const {
  const int n = dim();
  MatrixXd A(2 * n, n);
  A << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  VectorXd b(2 * n);
  b << center + half_widths, -(center - half_widths);
  return Polytope(A, b);
}

bool Box::contains(const VectorXd& x, double tol) const {
  return ((x - center).cwiseAbs() - half_widths).maxCoeff() <= tol;
}

double Box::support(const VectorXd& a) const {
  return a.dot(center) + a.cwiseAbs().dot(half_widths);
}

std::vector<VectorXd> Box::vertices() const {
  const int n = dim();
  SLSF_THROW_UNLESS(n <= 20, ErrorCode::kDimensionTooLarge, "box vertex count");
  std::vector<VectorXd> out;
  for (long mask = 0; mask < (1L << n); ++mask) {
    VectorXd v = center;
    for (int j = 0; j < n; ++j) v(j) += ((mask >> j) & 1) ? half_widths(j) : -half_widths(j);
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polytope

Polytope::Polytope(const MatrixXd& A, const VectorXd& b) : dim_(static_cast<int>(A.cols())) {
  SLSF_THROW_UNLESS(A.rows() == b.size(), ErrorCode::kDimensionMismatch, "polytope A/b rows");
  SLSF_THROW_UNLESS(!b.hasNaN() && A.allFinite(), ErrorCode::kInvalidArgument,
                    "non-finite polytope data");
  std::vector<int> keep;
  bool empty = false;
  VectorXd norms(A.rows());
  for (int i = 0; i < A.rows(); ++i) {
    norms(i) = A.row(i).norm();
    if (b(i) == std::numeric_limits<double>::infinity()) continue;
    if (norms(i) < kZeroRow) {
      if (b(i) < -kZeroRow) empty = true;
      continue;
    }
    if (b(i) == -std::numeric_limits<double>::infinity()) empty = true;
    keep.push_back(i);
  }
  if (empty) {
    *this = empty_set(dim_);
    return;
  }
  A_.resize(keep.size(), dim_);
  b_.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    A_.row(r) = A.row(keep[r]) / norms(keep[r]);
    b_(r) = b(keep[r]) / norms(keep[r]);
  }
}

Polytope Polytope::empty_set(int dim) {
  SLSF_THROW_UNLESS(dim >= 1, ErrorCode::kInvalidArgument, "empty set needs dim >= 1");
  Polytope p;
  p.dim_ = dim;
  p.A_ = MatrixXd::Zero(2, dim);
  p.A_(0, 0) = 1.0;
  p.A_(1, 0) = -1.0;
  p.b_ = VectorXd::Constant(2, -1.0);
  return p;
}

Polytope Polytope::point(const VectorXd& p) {
  return Box(p, VectorXd::Zero(p.size())).to_polytope();
}

bool Polytope::contains(const VectorXd& x, double tol) const {
  SLSF_THROW_UNLESS(x.size() == dim_, ErrorCode::kDimensionMismatch, "point dimension");
  if (b_.size() == 0) return true;
  return (A_ * x - b_).maxCoeff() <= tol;
}

bool Polytope::is_empty() const {
  if (b_.size() == 0) return false;
  return solve_lp(VectorXd::Zero(dim_), A_, b_).status == LpStatus::kInfeasible;
}

bool Polytope::is_bounded() const {
  if (is_empty()) return true;
  for (int j = 0; j < dim_; ++j) {
    for (double s : {1.0, -1.0}) {
      VectorXd c = VectorXd::Zero(dim_);
      c(j) = -s;
      if (solve_lp(c, A_, b_).status == LpStatus::kUnbounded) return false;
    }
  }
  return true;
}

Polytope Polytope::scaled(double s) const {
  SLSF_THROW_UNLESS(s > 0.0, ErrorCode::kInvalidArgument, "scale must be positive");
  return Polytope(A_, s * b_);
}

Polytope Polytope::translated(const VectorXd& t) const {
  SLSF_THROW_UNLESS(t.size() == dim_, ErrorCode::kDimensionMismatch, "translation size");
  return Polytope(A_, b_ + A_ * t);
}

Polytope Polytope::preimage(const MatrixXd& M, const VectorXd& c) const {
  SLSF_THROW_UNLESS(M.rows() == dim_ && c.size() == dim_, ErrorCode::kDimensionMismatch,
                    "preimage map size");
  return Polytope(A_ * M, b_ - A_ * c);
}

Polytope Polytope::intersect(const Polytope& other) const {
  SLSF_THROW_UNLESS(other.dim_ == dim_, ErrorCode::kDimensionMismatch, "intersect dims");
  MatrixXd A(num_rows() + other.num_rows(), dim_);
  VectorXd b(A.rows());
  A << A_, other.A_;
  b << b_, other.b_;
  return Polytope(A, b);
}

Polytope Polytope::remove_redundant(double tol) const {
  Polytope P = dedupe_rows(*this);
  if (P.num_rows() == 0) return P;
  if (P.is_empty()) return empty_set(dim_);
  const int m = P.num_rows();
  std::vector<bool> keep(m, true);
  for (int i = 0; i < m; ++i) {
    MatrixXd A(m, dim_);
    VectorXd b(m);
    int r = 0;
    for (int k = 0; k < m; ++k) {
      if (!keep[k] && k != i) continue;
      A.row(r) = P.A_.row(k);
      b(r++) = (k == i) ? P.b_(k) + 1.0 : P.b_(k);
    }
    const auto lp = solve_lp(-P.A_.row(i).transpose(), A.topRows(r), b.head(r));
    if (lp.status == LpStatus::kOptimal && -lp.objective <= P.b_(i) + tol) keep[i] = false;
  }
  const int count = static_cast<int>(std::count(keep.begin(), keep.end(), true));
  MatrixXd A(count, dim_);
  VectorXd b(count);
  for (int i = 0, r = 0; i < m; ++i) {
    if (!keep[i]) continue;
    A.row(r) = P.A_.row(i);
    b(r++) = P.b_(i);
  }
  return Polytope(A, b);
}

std::optional<std::pair<VectorXd, double>> Polytope::chebyshev() const {
  const int m = num_rows();
  MatrixXd A(m + 1, dim_ + 1);
  VectorXd b(m + 1);
  A.topLeftCorner(m, dim_) = A_;
  A.topRightCorner(m, 1).setOnes();
  A.bottomRows(1).setZero();
  A(m, dim_) = 1.0;
  b << b_, 1e6;
  VectorXd c = VectorXd::Zero(dim_ + 1);
  c(dim_) = -1.0;
  const auto lp = solve_lp(c, A, b);
  if (lp.status != LpStatus::kOptimal || lp.x(dim_) < -1e-9) return std::nullopt;
  return std::make_pair(VectorXd(lp.x.head(dim_)), std::max(lp.x(dim_), 0.0));
}

Box Polytope::bounding_box() const {
  VectorXd lo(dim_), hi(dim_);
  for (int j = 0; j < dim_; ++j) {
    VectorXd e = VectorXd::Zero(dim_);
    e(j) = 1.0;
    hi(j) = support(*this, e);
    lo(j) = -support(*this, -e);
  }
  return Box((lo + hi) / 2.0, ((hi - lo) / 2.0).cwiseMax(0.0));
}

// ---------------------------------------------------------------------------
// Operations

double support(const Polytope& P, const VectorXd& a) {
  SLSF_THROW_UNLESS(a.size() == P.dim(), ErrorCode::kDimensionMismatch, "support direction");
  if (P.num_rows() == 0) {
    SLSF_THROW_UNLESS(a.isZero(0.0), ErrorCode::kUnbounded, "support of the whole space");
    return 0.0;
  }
  const auto lp = solve_lp(-a, P.A(), P.b());
  SLSF_THROW_UNLESS(lp.status != LpStatus::kInfeasible, ErrorCode::kInfeasible,
                    "support of an empty polytope");
  SLSF_THROW_UNLESS(lp.status != LpStatus::kUnbounded, ErrorCode::kUnbounded,
                    "support is unbounded");
  return -lp.objective;
}

Polytope box_image(const MatrixXd& B_w, const Box& W) {
  SLSF_THROW_UNLESS(B_w.cols() == W.dim(), ErrorCode::kDimensionMismatch, "B_w vs W");
  return zonotope(B_w * W.center, B_w * W.half_widths.asDiagonal());
}

Polytope minkowski_sum(const Polytope& P, const Polytope& Q) {
  SLSF_THROW_UNLESS(P.dim() == Q.dim(), ErrorCode::kDimensionMismatch, "minkowski dims");
  const int n = P.dim();
  if (P.is_empty() || Q.is_empty()) return Polytope::empty_set(n);
  if (n <= 3) {
    const auto vp = vertices(P);
    const auto vq = vertices(Q);
    std::vector<VectorXd> sums;
    sums.reserve(vp.size() * vq.size());
    for (const auto& p : vp)
      for (const auto& q : vq) sums.push_back(p + q);
    return convex_hull(sums, n);
  }
  MatrixXd dirs(P.num_rows() + Q.num_rows() + 2 * n, n);
  dirs << P.A(), Q.A(), MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  VectorXd b(dirs.rows());
  for (int i = 0; i < dirs.rows(); ++i) {
    const VectorXd d = dirs.row(i).transpose();
    b(i) = support(P, d) + support(Q, d);
  }
  return Polytope(dirs, b).remove_redundant();
}

Polytope pontryagin_diff(const Polytope& P, const Polytope& Q, const MatrixXd& M) {
  SLSF_THROW_UNLESS(M.rows() == P.dim() && M.cols() == Q.dim(), ErrorCode::kDimensionMismatch,
                    "pontryagin map size");
  VectorXd b = P.b();
  for (int i = 0; i < P.num_rows(); ++i) {
    b(i) -= support(Q, M.transpose() * P.A().row(i).transpose());
  }
  return Polytope(P.A(), b);
}

Polytope pontryagin_diff(const Polytope& P, const Polytope& Q) {
  return pontryagin_diff(P, Q, MatrixXd::Identity(P.dim(), Q.dim()));
}

Polytope pre_set(const Polytope& P, const MatrixXd& A_cl, const MatrixXd& B_w, const Box& W) {
  const int n = P.dim();
  SLSF_THROW_UNLESS(A_cl.rows() == n && A_cl.cols() == n && B_w.rows() == n &&
                        B_w.cols() == W.dim(),
                    ErrorCode::kDimensionMismatch, "pre_set sizes");
  VectorXd b = P.b();
  for (int i = 0; i < P.num_rows(); ++i) {
    b(i) -= W.support(B_w.transpose() * P.A().row(i).transpose());
  }
  return Polytope(P.A() * A_cl, b);
}

Polytope pre_set(const Polytope& P, const MatrixXd& A_cl, const Box& W) {
  return pre_set(P, A_cl, MatrixXd::Identity(P.dim(), W.dim()), W);
}

bool contains_set(const Polytope& P, const Polytope& Q, double tol) {
  SLSF_THROW_UNLESS(P.dim() == Q.dim(), ErrorCode::kDimensionMismatch, "contains_set dims");
  if (Q.is_empty()) return true;
  for (int i = 0; i < P.num_rows(); ++i) {
    const VectorXd a = P.A().row(i).transpose();
    const auto lp = solve_lp(-a, Q.A(), Q.b());
    if (lp.status == LpStatus::kUnbounded) return false;
    if (-lp.objective > P.b()(i) + tol) return false;
  }
  return true;
}

bool contains_set(const Polytope& P, const Box& Q, double tol) {
  SLSF_THROW_UNLESS(P.dim() == Q.dim(), ErrorCode::kDimensionMismatch, "contains_set dims");
  for (int i = 0; i < P.num_rows(); ++i) {
    if (Q.support(P.A().row(i).transpose()) > P.b()(i) + tol) return false;
  }
  return true;
}

bool set_equal(const Polytope& P, const Polytope& Q, double tol) {
  return contains_set(P, Q, tol) && contains_set(Q, P, tol);
}

Polytope max_rpi(const MatrixXd& A_cl, const Polytope& X_joint, const MatrixXd& B_w,
                 const Box& W, int max_iter, double tol) {
  Polytope omega = X_joint.remove_redundant();
  SLSF_THROW_UNLESS(!omega.is_empty(), ErrorCode::kEmpty, "max_rpi: empty constraint set");
  for (int it = 0; it < max_iter; ++it) {
    Polytope next = pre_set(omega, A_cl, B_w, W).intersect(X_joint).remove_redundant();
    SLSF_THROW_UNLESS(!next.is_empty(), ErrorCode::kEmpty, "max_rpi: iteration collapsed");
    if (contains_set(next, omega, tol)) return next;
    omega = std::move(next);
  }
  throw Error(ErrorCode::kNotConverged,
              "max_rpi: no fixed point after " + std::to_string(max_iter) + " iterations");
}

Polytope max_pi(const MatrixXd& A_cl, const Polytope& X_joint, int max_iter, double tol) {
  const int n = X_joint.dim();
  return max_rpi(A_cl, X_joint, MatrixXd::Zero(n, n), Box::unit(n), max_iter, tol);
}

Polytope min_rpi_approx(const MatrixXd& A_cl, const MatrixXd& B_w, const Box& W, double eps,
                        int max_s) {
  const int n = static_cast<int>(A_cl.rows());
  SLSF_THROW_UNLESS(A_cl.cols() == n && B_w.rows() == n && B_w.cols() == W.dim(),
                    ErrorCode::kDimensionMismatch, "min_rpi sizes");
  SLSF_THROW_UNLESS(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
  const double rho = A_cl.eigenvalues().cwiseAbs().maxCoeff();
  SLSF_THROW_UNLESS(rho < 1.0, ErrorCode::kNotStable, "min_rpi: A_cl not Schur stable");

  const MatrixXd G0 = B_w * W.half_widths.asDiagonal();
  const VectorXd c0 = B_w * W.center;
  const Polytope w_set = zonotope(c0, G0);
  const double alpha = eps / (1.0 + eps);

  MatrixXd power = MatrixXd::Identity(n, n);
  MatrixXd gens(n, 0);
  VectorXd center = VectorXd::Zero(n);
  for (int s = 1; s <= max_s; ++s) {
    MatrixXd grown(n, gens.cols() + G0.cols());
    grown << gens, power * G0;
    gens = grown;
    center += power * c0;
    power = A_cl * power;
    bool inside = true;
    for (int i = 0; i < w_set.num_rows() && inside; ++i) {
      const VectorXd a = w_set.A().row(i).transpose();
      const double h = a.dot(power * c0) + (a.transpose() * power * G0).cwiseAbs().sum();
      if (h > alpha * w_set.b()(i) + 1e-12) inside = false;
    }
    if (inside) {
      const Polytope out = zonotope((1.0 + eps) * center, (1.0 + eps) * gens);
      SLSF_THROW_UNLESS(contains_set(pre_set(out, A_cl, B_w, W), out, 1e-7),
                        ErrorCode::kNotConverged, "min_rpi: result failed the RPI check");
      return out;
    }
  }
  throw Error(ErrorCode::kNotConverged, "min_rpi: truncation index exceeds cap");
}

Polytope project(const Polytope& P, int n) {
  SLSF_THROW_UNLESS(n >= 1 && n <= P.dim(), ErrorCode::kInvalidArgument, "projection dim");
  MatrixXd A = P.A();
  VectorXd b = P.b();
  for (int k = P.dim() - 1; k >= n; --k) {
    std::vector<int> pos, neg, zero;
    for (int i = 0; i < A.rows(); ++i) {
      const double v = A(i, k);
      if (v > 1e-12) pos.push_back(i);
      else if (v < -1e-12) neg.push_back(i);
      else zero.push_back(i);
    }
    const int rows = static_cast<int>(zero.size() + pos.size() * neg.size());
    MatrixXd A2(rows, k);
    VectorXd b2(rows);
    int r = 0;
    for (int i : zero) {
      A2.row(r) = A.row(i).head(k);
      b2(r++) = b(i);
    }
    for (int p : pos) {
      for (int q : neg) {
        const double cp = A(p, k), cq = -A(q, k);
        A2.row(r) = A.row(p).head(k) / cp + A.row(q).head(k) / cq;
        b2(r++) = b(p) / cp + b(q) / cq;
      }
    }
    const Polytope reduced = Polytope(A2, b2).remove_redundant();
    A = reduced.A();
    b = reduced.b();
  }
  return Polytope(A, b);
}

Polytope max_rci(const MatrixXd& A, const MatrixXd& B, const Polytope& U, const Polytope& X,
                 const MatrixXd& B_w, const Box& W, int max_iter, double tol) {
  const int n = X.dim();
  const int m = static_cast<int>(B.cols());
  SLSF_THROW_UNLESS(n <= 3, ErrorCode::kDimensionTooLarge, "max_rci needs dim <= 3");
  SLSF_THROW_UNLESS(A.rows() == n && A.cols() == n && B.rows() == n && U.dim() == m,
                    ErrorCode::kDimensionMismatch, "max_rci sizes");
  Polytope omega = X.remove_redundant();
  for (int it = 0; it < max_iter; ++it) {
    // Robust one-step constraint on the successor, in (x, u).
    VectorXd bt = omega.b();
    for (int i = 0; i < omega.num_rows(); ++i)
      bt(i) -= W.support(B_w.transpose() * omega.A().row(i).transpose());
    const int r1 = omega.num_rows();
    const int r2 = U.num_rows();
    MatrixXd J = MatrixXd::Zero(r1 + r2, n + m);
    VectorXd jb(r1 + r2);
    J.topLeftCorner(r1, n) = omega.A() * A;
    J.topRightCorner(r1, m) = omega.A() * B;
    J.bottomRightCorner(r2, m) = U.A();
    jb << bt, U.b();
    const Polytope joint(J, jb);
    Polytope next =
        joint.is_empty() ? Polytope::empty_set(n)
                         : project(joint, n).intersect(omega).remove_redundant();
    SLSF_THROW_UNLESS(!next.is_empty(), ErrorCode::kEmpty, "max_rci: iteration collapsed");
    if (contains_set(next, omega, tol)) return next;
    omega = std::move(next);
  }
  throw Error(ErrorCode::kNotConverged,
              "max_rci: no fixed point after " + std::to_string(max_iter) + " iterations");
}

}  // namespace slsf::poly
