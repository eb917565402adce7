#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace slsf::poly {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Polytope;

/// Axis-aligned box {c + diag(h) w : ||w||_inf <= 1}.
struct Box {
  VectorXd center;
  VectorXd half_widths;

  Box() = default;
  Box(VectorXd c, VectorXd h);
  static Box unit(int n, double radius = 1.0);

  int dim() const { return static_cast<int>(center.size()); }
  Polytope to_polytope() const;
  bool contains(const VectorXd& x, double tol = 1e-9) const;
  /// max over the box of a.x
  double support(const VectorXd& a) const;
  /// All 2^n corners (n <= 20).
  std::vector<VectorXd> vertices() const;
};

/// {x : A x <= b}. Rows are stored normalized to unit Euclidean norm.
class Polytope {
 public:
  Polytope() = default;
  Polytope(const MatrixXd& A, const VectorXd& b);

  static Polytope empty_set(int dim);
  static Polytope point(const VectorXd& p);

  const MatrixXd& A() const { return A_; }
  const VectorXd& b() const { return b_; }
  int dim() const { return dim_; }
  int num_rows() const { return static_cast<int>(b_.size()); }

  bool contains(const VectorXd& x, double tol = 1e-9) const;
  bool is_empty() const;
  bool is_bounded() const;

  /// s * P for s > 0.
  Polytope scaled(double s) const;
  /// P + t.
  Polytope translated(const VectorXd& t) const;
  /// {x : M x + c in P}.
  Polytope preimage(const MatrixXd& M, const VectorXd& c) const;
  Polytope intersect(const Polytope& other) const;
  Polytope remove_redundant(double tol = 1e-9) const;

  /// Chebyshev ball center and radius; nullopt when empty.
  std::optional<std::pair<VectorXd, double>> chebyshev() const;
  /// Per-axis [min, max]; throws Unbounded / Infeasible.
  Box bounding_box() const;

 private:
  MatrixXd A_;
  VectorXd b_;
  int dim_ = 0;
};

/// max_{x in P} a.x. Throws Unbounded or Infeasible.
double support(const Polytope& P, const VectorXd& a);

/// Vertices of a bounded polytope, dim <= 3 (DimensionTooLarge otherwise).
std::vector<VectorXd> vertices(const Polytope& P);

/// H-representation of conv(points), dim <= 3. Lower-dimensional hulls get
/// equality pairs.
Polytope convex_hull(const std::vector<VectorXd>& points, int dim);

/// Zonotope {c + G xi : ||xi||_inf <= 1}.
Polytope zonotope(const VectorXd& c, const MatrixXd& G);
std::vector<VectorXd> zonotope_vertices(const VectorXd& c, const MatrixXd& G);

/// B_w * W as a polytope.
Polytope box_image(const MatrixXd& B_w, const Box& W);

/// P (+) Q. Exact (vertex based) for dim <= 3; otherwise the support-function
/// outer description over the facet normals of P and Q and +-e_j.
Polytope minkowski_sum(const Polytope& P, const Polytope& Q);

/// P (-) Q = {x : x + Q subset of P}, row-wise support tightening.
Polytope pontryagin_diff(const Polytope& P, const Polytope& Q);
/// P (-) M Q.
Polytope pontryagin_diff(const Polytope& P, const Polytope& Q, const MatrixXd& M);

/// {x : A_cl x + B_w w in P for all w in W}.
Polytope pre_set(const Polytope& P, const MatrixXd& A_cl, const MatrixXd& B_w, const Box& W);
Polytope pre_set(const Polytope& P, const MatrixXd& A_cl, const Box& W);

/// Maximal robust positively invariant subset of X_joint for x+ = A_cl x + B_w w.
Polytope max_rpi(const MatrixXd& A_cl, const Polytope& X_joint, const MatrixXd& B_w,
                 const Box& W, int max_iter = 500, double tol = 1e-8);

/// Maximal positively invariant subset (no disturbance).
Polytope max_pi(const MatrixXd& A_cl, const Polytope& X_joint, int max_iter = 500,
                double tol = 1e-8);

/// Outer epsilon-approximation of the minimal RPI set. The returned set
/// (1+eps) F_s is RPI where s is the first index with
/// A_cl^s B_w W subset of eps/(1+eps) B_w W.
Polytope min_rpi_approx(const MatrixXd& A_cl, const MatrixXd& B_w, const Box& W,
                        double eps = 1e-2, int max_s = 1000);

/// Maximal robust control invariant subset of X, dim <= 3.
Polytope max_rci(const MatrixXd& A, const MatrixXd& B, const Polytope& U, const Polytope& X,
                 const MatrixXd& B_w, const Box& W, int max_iter = 500, double tol = 1e-8);

/// Projection of {(x, u) : A [x; u] <= b} onto the first n coordinates.
Polytope project(const Polytope& P, int n);

/// Q subset of P (Q empty counts as contained).
bool contains_set(const Polytope& P, const Polytope& Q, double tol = 1e-8);
bool contains_set(const Polytope& P, const Box& Q, double tol = 1e-8);
bool set_equal(const Polytope& P, const Polytope& Q, double tol = 1e-8);

}  // namespace slsf::poly
