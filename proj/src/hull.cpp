#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "slsf/error.hpp"
#include "slsf/polytope.hpp"

namespace slsf::poly {
namespace {

constexpr double kPointTol = 1e-10;

double scale_of(const std::vector<VectorXd>& pts) {
  double s = 1.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return s;
}

std::vector<VectorXd> dedupe_points(const std::vector<VectorXd>& pts, double tol) {
  std::vector<VectorXd> out;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out) {
      if ((p - q).cwiseAbs().maxCoeff() <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

// Every k-subset of {0..n-1}, in lexicographic order.
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  if (k > n || k < 0) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Unit normal to the span of the given columns (n-1 of them), or empty when
// the columns are rank deficient.
VectorXd normal_of(const MatrixXd& cols) {
  const int n = static_cast<int>(cols.rows());
  if (n == 1) return VectorXd::Ones(1);
  if (n == 2) {
    VectorXd d(2);
    d << -cols(1, 0), cols(0, 0);
    const double nd = d.norm();
    return nd > 1e-12 * std::max(1.0, cols.norm()) ? VectorXd(d / nd) : VectorXd();
  }
  if (n == 3) {
    const Eigen::Vector3d a = cols.col(0);
    const Eigen::Vector3d b = cols.col(1);
    const Eigen::Vector3d d = a.cross(b);
    const double nd = d.norm();
    return nd > 1e-12 * std::max(1.0, a.norm() * b.norm()) ? VectorXd(d / nd) : VectorXd();
  }
  Eigen::FullPivLU<MatrixXd> lu(cols.transpose());
  lu.setThreshold(1e-12);
  if (lu.rank() != n - 1) return VectorXd();
  const MatrixXd ker = lu.kernel();
  return ker.col(0).normalized();
}

MatrixXd nonzero_generators(const MatrixXd& G) {
  std::vector<int> keep;
  for (int j = 0; j < G.cols(); ++j)
    if (G.col(j).norm() > 1e-14) keep.push_back(j);
  MatrixXd out(G.rows(), keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(j) = G.col(keep[j]);
  return out;
}

Polytope hull_2d(std::vector<VectorXd> pts) {
  std::sort(pts.begin(), pts.end(), [](const VectorXd& a, const VectorXd& b) {
    return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
  });
  auto cross = [](const VectorXd& o, const VectorXd& a, const VectorXd& b) {
    return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
  };
  const double tol = 1e-12 * scale_of(pts) * scale_of(pts);
  std::vector<VectorXd> h(2 * pts.size());
  int k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= tol) --k;
    h[k++] = pts[i];
  }
  for (int i = static_cast<int>(pts.size()) - 2, t = k + 1; i >= 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= tol) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  MatrixXd A(h.size(), 2);
  VectorXd b(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const VectorXd& p = h[i];
    const VectorXd& q = h[(i + 1) % h.size()];
    Eigen::Vector2d nrm(q(1) - p(1), p(0) - q(0));  // outward for CCW order
    nrm.normalize();
    A.row(i) = nrm.transpose();
    b(i) = nrm.dot(p);
  }
  return Polytope(A, b);
}

Polytope hull_3d(const std::vector<VectorXd>& pts) {
  const int p = static_cast<int>(pts.size());
  const double s = scale_of(pts);
  const double tol = 1e-10 * s;
  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  for_each_subset(p, 3, [&](const std::vector<int>& t) {
    const Eigen::Vector3d a = pts[t[0]];
    const Eigen::Vector3d b = pts[t[1]];
    const Eigen::Vector3d c = pts[t[2]];
    Eigen::Vector3d nrm = (b - a).cross(c - a);
    if (nrm.norm() <= 1e-12 * s * s) return;
    nrm.normalize();
    const double off = nrm.dot(a);
    bool le = true, ge = true;
    for (const auto& q : pts) {
      const double v = nrm.dot(Eigen::Vector3d(q)) - off;
      if (v > tol) le = false;
      if (v < -tol) ge = false;
      if (!le && !ge) return;
    }
    auto push = [&](const Eigen::Vector3d& d, double o) {
      for (std::size_t r = 0; r < rows.size(); ++r)
        if ((rows[r] - VectorXd(d)).cwiseAbs().maxCoeff() < 1e-9 && std::abs(rhs[r] - o) < 1e-9 * s)
          return;
      rows.push_back(d);
      rhs.push_back(o);
    };
    if (le) push(nrm, off);
    if (ge) push(-nrm, -off);
  });
  MatrixXd A(rows.size(), 3);
  VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A.row(r) = rows[r].transpose();
    b(r) = rhs[r];
  }
  return Polytope(A, b);
}

Polytope hull_full(const std::vector<VectorXd>& pts, int dim) {
  if (dim == 1) {
    double lo = pts[0](0), hi = pts[0](0);
    for (const auto& p : pts) {
      lo = std::min(lo, p(0));
      hi = std::max(hi, p(0));
    }
    MatrixXd A(2, 1);
    A << 1, -1;
    VectorXd b(2);
    b << hi, -lo;
    return Polytope(A, b);
  }
  if (dim == 2) return hull_2d(pts);
  return hull_3d(pts);
}

}  // namespace

std::vector<VectorXd> vertices(const Polytope& P) {
  const int n = P.dim();
  SLSF_THROW_UNLESS(n <= 3, ErrorCode::kDimensionTooLarge, "vertex enumeration needs dim <= 3");
  std::vector<VectorXd> out;
  if (P.num_rows() < n) return out;
  const MatrixXd& A = P.A();
  const VectorXd& b = P.b();
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  for_each_subset(P.num_rows(), n, [&](const std::vector<int>& idx) {
    MatrixXd As(n, n);
    VectorXd bs(n);
    for (int r = 0; r < n; ++r) {
      As.row(r) = A.row(idx[r]);
      bs(r) = b(idx[r]);
    }
    Eigen::FullPivLU<MatrixXd> lu(As);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) return;
    const VectorXd x = lu.solve(bs);
    if (((A * x - b).array() <= 1e-9 * scale).all()) out.push_back(x);
  });
  return dedupe_points(out, 1e-9 * scale);
}

Polytope convex_hull(const std::vector<VectorXd>& points, int dim) {
  SLSF_THROW_UNLESS(dim >= 1 && dim <= 3, ErrorCode::kDimensionTooLarge,
                    "convex hull needs 1 <= dim <= 3");
  if (points.empty()) return Polytope::empty_set(dim);
  for (const auto& p : points)
    SLSF_THROW_UNLESS(p.size() == dim, ErrorCode::kDimensionMismatch, "hull point size");
  const double s = scale_of(points);
  const std::vector<VectorXd> pts = dedupe_points(points, kPointTol * s);
  VectorXd c = VectorXd::Zero(dim);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  MatrixXd D(dim, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) D.col(i) = pts[i] - c;
  Eigen::JacobiSVD<MatrixXd> svd(D, Eigen::ComputeFullU);
  const VectorXd sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-9 * s) ++rank;
  if (rank == dim) return hull_full(pts, dim);

  const MatrixXd U = svd.matrixU();
  const MatrixXd Ur = U.leftCols(rank);
  const MatrixXd Nc = U.rightCols(dim - rank);
  // Equality pairs pinning the affine hull.
  MatrixXd A_eq(2 * (dim - rank), dim);
  VectorXd b_eq(2 * (dim - rank));
  A_eq << Nc.transpose(), -Nc.transpose();
  b_eq << Nc.transpose() * c, -(Nc.transpose() * c);
  if (rank == 0) return Polytope(A_eq, b_eq);

  std::vector<VectorXd> proj;
  for (const auto& p : pts) proj.push_back(Ur.transpose() * (p - c));
  const Polytope low = hull_full(dedupe_points(proj, kPointTol * s), rank);
  MatrixXd A(low.num_rows() + A_eq.rows(), dim);
  VectorXd b(A.rows());
  A << low.A() * Ur.transpose(), A_eq;
  b << low.b() + low.A() * Ur.transpose() * c, b_eq;
  return Polytope(A, b);
}

std::vector<VectorXd> zonotope_vertices(const VectorXd& c, const MatrixXd& G_in) {
  const int n = static_cast<int>(c.size());
  SLSF_THROW_UNLESS(G_in.rows() == n, ErrorCode::kDimensionMismatch, "generator rows");
  const MatrixXd G = nonzero_generators(G_in);
  const int g = static_cast<int>(G.cols());
  if (g == 0) return {c};
  std::vector<VectorXd> out;
  Eigen::FullPivLU<MatrixXd> lu(G);
  lu.setThreshold(1e-12);
  if (lu.rank() < n) {
    SLSF_THROW_UNLESS(g <= 20, ErrorCode::kDimensionTooLarge, "too many degenerate generators");
    for (long mask = 0; mask < (1L << g); ++mask) {
      VectorXd p = c;
      for (int j = 0; j < g; ++j) p += ((mask >> j) & 1) ? G.col(j) : VectorXd(-G.col(j));
      out.push_back(p);
    }
    return out;
  }
  auto add_face = [&](const VectorXd& d) {
    VectorXd base = c;
    std::vector<int> flat;
    for (int j = 0; j < g; ++j) {
      const double v = d.dot(G.col(j));
      if (std::abs(v) <= 1e-12 * G.col(j).norm()) {
        flat.push_back(j);
      } else {
        base += (v > 0 ? 1.0 : -1.0) * G.col(j);
      }
    }
    SLSF_THROW_UNLESS(flat.size() <= 20, ErrorCode::kDimensionTooLarge, "degenerate zonotope face");
    for (long mask = 0; mask < (1L << flat.size()); ++mask) {
      VectorXd p = base;
      for (std::size_t j = 0; j < flat.size(); ++j)
        p += ((mask >> j) & 1) ? G.col(flat[j]) : VectorXd(-G.col(flat[j]));
      out.push_back(p);
    }
  };
  for_each_subset(g, n - 1, [&](const std::vector<int>& idx) {
    MatrixXd cols(n, n - 1);
    for (int k = 0; k < n - 1; ++k) cols.col(k) = G.col(idx[k]);
    const VectorXd d = normal_of(cols);
    if (d.size() == 0) return;
    add_face(d);
    add_face(-d);
  });
  return dedupe_points(out, 1e-10 * scale_of(out));
}

Polytope zonotope(const VectorXd& c, const MatrixXd& G_in) {
  const int n = static_cast<int>(c.size());
  SLSF_THROW_UNLESS(G_in.rows() == n, ErrorCode::kDimensionMismatch, "generator rows");
  const MatrixXd G = nonzero_generators(G_in);
  const int g = static_cast<int>(G.cols());
  if (g == 0) return Polytope::point(c);
  Eigen::FullPivLU<MatrixXd> lu(G);
  lu.setThreshold(1e-12);
  if (lu.rank() < n) {
    SLSF_THROW_UNLESS(n <= 3, ErrorCode::kDimensionTooLarge,
                      "degenerate zonotope needs dim <= 3");
    return convex_hull(zonotope_vertices(c, G), n);
  }
  double count = 1.0;
  for (int k = 0; k < n - 1; ++k) count = count * (g - k) / (k + 1);
  SLSF_THROW_UNLESS(count <= 2e5, ErrorCode::kDimensionTooLarge, "zonotope has too many facets");

  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  for_each_subset(g, n - 1, [&](const std::vector<int>& idx) {
    MatrixXd cols(n, n - 1);
    for (int k = 0; k < n - 1; ++k) cols.col(k) = G.col(idx[k]);
    const VectorXd d = normal_of(cols);
    if (d.size() == 0) return;
    for (const auto& r : rows)
      if ((r - d).cwiseAbs().maxCoeff() < 1e-10 || (r + d).cwiseAbs().maxCoeff() < 1e-10) return;
    const double h = (d.transpose() * G).cwiseAbs().sum();
    rows.push_back(d);
    rhs.push_back(d.dot(c) + h);
    rows.push_back(-d);
    rhs.push_back(-d.dot(c) + h);
  });
  MatrixXd A(rows.size(), n);
  VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A.row(r) = rows[r].transpose();
    b(r) = rhs[r];
  }
  return Polytope(A, b);
}

}  // namespace slsf::poly
