#include "slsf/sls_core.hpp"

#include <ostream>

#include "slsf/error.hpp"

namespace slsf {

void SafetyProblem::validate(bool check_terminal) const {
  const int nn = n();
  SLSF_THROW_UNLESS(nn >= 1 && A.cols() == nn, ErrorCode::kDimensionMismatch, "A must be square");
  SLSF_THROW_UNLESS(B.rows() == nn && m() >= 1, ErrorCode::kDimensionMismatch, "B rows");
  SLSF_THROW_UNLESS(B_w.rows() == nn && n_w() >= 1, ErrorCode::kDimensionMismatch, "B_w rows");
  SLSF_THROW_UNLESS(X.dim() == nn && U.dim() == m(), ErrorCode::kDimensionMismatch,
                    "constraint set dimensions");
  SLSF_THROW_UNLESS(N >= 1, ErrorCode::kInvalidArgument, "horizon must be >= 1");
  SLSF_THROW_UNLESS(X.num_rows() > 0 && (X.b().array() > 0.0).all(), ErrorCode::kInvalidArgument,
                    "state constraints need b_x > 0");
  SLSF_THROW_UNLESS(U.num_rows() > 0 && (U.b().array() > 0.0).all(), ErrorCode::kInvalidArgument,
                    "input constraints need b_u > 0");
  SLSF_THROW_UNLESS(U.is_bounded(), ErrorCode::kInvalidArgument, "input set must be compact");
  if (!check_terminal) return;
  SLSF_THROW_UNLESS(terminal.dim() == nn && K_f.rows() == m() && K_f.cols() == nn,
                    ErrorCode::kDimensionMismatch, "terminal set / gain dimensions");
  SLSF_THROW_UNLESS(!terminal.is_empty(), ErrorCode::kInvalidArgument, "terminal set empty");
  const MatrixXd A_cl = A + B * K_f;
  constexpr double tol = 1e-7;
  SLSF_THROW_UNLESS(
      poly::contains_set(poly::pre_set(terminal, A_cl, B_w, disturbance_box()), terminal, tol),
      ErrorCode::kInvalidArgument, "terminal set is not robustly invariant");
  SLSF_THROW_UNLESS(poly::contains_set(X, terminal, tol), ErrorCode::kInvalidArgument,
                    "terminal set leaves X");
  for (int i = 0; i < U.num_rows(); ++i) {
    const double h = poly::support(terminal, K_f.transpose() * U.A().row(i).transpose());
    SLSF_THROW_UNLESS(h <= U.b()(i) + tol, ErrorCode::kInvalidArgument,
                      "terminal feedback violates U");
  }
}

// ---------------------------------------------------------------------------

BlockLowerTriangular::BlockLowerTriangular(int N, int p, int q, int q0)
    : N_(N), p_(p), q_(q), q0_(q0) {
  SLSF_THROW_UNLESS(N >= 0 && p >= 0 && q >= 0 && q0 >= 0, ErrorCode::kInvalidArgument,
                    "block sizes");
  blocks_.reserve((N + 1) * (N + 2) / 2);
  for (int k = 0; k <= N; ++k)
    for (int c = 0; c <= k; ++c) blocks_.push_back(MatrixXd::Zero(p, col_width(c)));
}

int BlockLowerTriangular::index(int k, int c) const {
  SLSF_THROW_UNLESS(k >= 0 && k <= N_ && c >= 0 && c <= k, ErrorCode::kInvalidArgument,
                    "block index outside the lower triangle");
  return k * (k + 1) / 2 + c;
}

MatrixXd& BlockLowerTriangular::block(int k, int c) { return blocks_[index(k, c)]; }
const MatrixXd& BlockLowerTriangular::block(int k, int c) const { return blocks_[index(k, c)]; }

MatrixXd BlockLowerTriangular::block_row(int k) const {
  MatrixXd row = MatrixXd::Zero(p_, cols());
  for (int c = 0; c <= k; ++c) row.middleCols(col_offset(c), col_width(c)) = block(k, c);
  return row;
}

MatrixXd BlockLowerTriangular::dense() const {
  MatrixXd M(rows(), cols());
  for (int k = 0; k <= N_; ++k) M.middleRows(k * p_, p_) = block_row(k);
  return M;
}

BlockLowerTriangular BlockLowerTriangular::from_dense(const MatrixXd& M, int N, int p, int q,
                                                      int q0) {
  BlockLowerTriangular out(N, p, q, q0);
  SLSF_THROW_UNLESS(M.rows() == out.rows() && M.cols() == out.cols(),
                    ErrorCode::kDimensionMismatch, "dense block matrix size");
  for (int k = 0; k <= N; ++k)
    for (int c = 0; c <= k; ++c)
      out.block(k, c) = M.block(k * p, out.col_offset(c), p, out.col_width(c));
  return out;
}

// ---------------------------------------------------------------------------

StackedSystem build_stacked(const SafetyProblem& problem, const MatrixXd& first_block) {
  const int n = problem.n();
  const int m = problem.m();
  const int N = problem.N;
  SLSF_THROW_UNLESS(first_block.rows() == n, ErrorCode::kDimensionMismatch,
                    "first block of E must have n rows");
  SLSF_THROW_UNLESS(problem.B.rows() == n && problem.B_w.rows() == n,
                    ErrorCode::kDimensionMismatch, "system matrices");
  StackedSystem sys;
  sys.N = N;
  sys.ZA = MatrixXd::Zero((N + 1) * n, (N + 1) * n);
  sys.ZB = MatrixXd::Zero((N + 1) * n, (N + 1) * m);
  for (int k = 0; k < N; ++k) {
    sys.ZA.block((k + 1) * n, k * n, n, n) = problem.A;
    sys.ZB.block((k + 1) * n, k * m, n, m) = problem.B;
  }
  sys.E = BlockLowerTriangular(N, n, problem.n_w(), static_cast<int>(first_block.cols()));
  sys.E.block(0, 0) = first_block;
  for (int k = 1; k <= N; ++k) sys.E.block(k, k) = problem.B_w;
  return sys;
}

double subspace_residual(const SystemResponses& resp, const StackedSystem& sys) {
  const MatrixXd Px = resp.Phi_x.dense();
  const MatrixXd Pu = resp.Phi_u.dense();
  SLSF_THROW_UNLESS(Px.rows() == sys.ZA.rows() && Pu.rows() == sys.ZB.cols() &&
                        Px.cols() == sys.E.cols() && Pu.cols() == sys.E.cols(),
                    ErrorCode::kDimensionMismatch, "responses vs stacked system");
  const MatrixXd R = Px - sys.ZA * Px - sys.ZB * Pu - sys.E.dense();
  return R.size() ? R.cwiseAbs().maxCoeff() : 0.0;
}

SystemResponses responses_from_controller(const StackedSystem& sys,
                                          const BlockLowerTriangular& K) {
  const int N = sys.N;
  const int n = sys.E.block_rows();
  const int m = static_cast<int>(sys.ZB.cols()) / (N + 1);
  SLSF_THROW_UNLESS(K.horizon() == N && K.block_rows() == m && K.block_cols() == n &&
                        K.first_cols() == n,
                    ErrorCode::kDimensionMismatch, "controller blocks");
  const MatrixXd Kd = K.dense();
  const MatrixXd I = MatrixXd::Identity(sys.ZA.rows(), sys.ZA.cols());
  // I - ZA - ZB K is unit lower triangular, so the solve is exact.
  const MatrixXd Px =
      (I - sys.ZA - sys.ZB * Kd).triangularView<Eigen::Lower>().solve(sys.E.dense());
  const MatrixXd Pu = Kd * Px;
  const int q = sys.E.block_cols();
  const int q0 = sys.E.first_cols();
  return {BlockLowerTriangular::from_dense(Px, N, n, q, q0),
          BlockLowerTriangular::from_dense(Pu, N, m, q, q0)};
}

BlockLowerTriangular controller_from_responses(const SystemResponses& resp) {
  const auto& Px = resp.Phi_x;
  const auto& Pu = resp.Phi_u;
  const int N = Px.horizon();
  const int n = Px.block_rows();
  const int m = Pu.block_rows();
  SLSF_THROW_UNLESS(Pu.horizon() == N && Pu.block_cols() == Px.block_cols() &&
                        Pu.first_cols() == Px.first_cols(),
                    ErrorCode::kDimensionMismatch, "response shapes");
  BlockLowerTriangular K(N, m, n, n);
  // Right inverses of the diagonal blocks.
  std::vector<MatrixXd> inv(N + 1);
  for (int c = 0; c <= N; ++c) {
    const MatrixXd& D = Px.block(c, c);
    if (D.cols() == 0) continue;
    SLSF_THROW_UNLESS(D.cols() >= n, ErrorCode::kSingularResponse,
                      "diagonal response block has fewer columns than rows");
    Eigen::JacobiSVD<MatrixXd> svd(D);
    const VectorXd sv = svd.singularValues();
    const double rcond = sv.size() ? sv.minCoeff() / std::max(sv.maxCoeff(), 1e-300) : 0.0;
    SLSF_THROW_UNLESS(rcond >= 1e-10, ErrorCode::kSingularResponse,
                      "diagonal response block is singular");
    inv[c] = D.transpose() * (D * D.transpose()).inverse();
  }
  for (int k = 0; k <= N; ++k) {
    for (int c = k; c >= 0; --c) {
      if (Px.block(c, c).cols() == 0) continue;  // dropped column, no equation
      MatrixXd rhs = Pu.block(k, c);
      for (int l = c + 1; l <= k; ++l) rhs -= K.block(k, l) * Px.block(l, c);
      K.block(k, c) = rhs * inv[c];
    }
  }
  return K;
}

namespace {

const BlockLowerTriangular& pick(const SystemResponses& resp, RowKind kind) {
  return kind == RowKind::kState ? resp.Phi_x : resp.Phi_u;
}

}  // namespace

double tighten_row(const VectorXd& a, const SystemResponses& resp, int k, const MatrixXd& P_init,
                   RowKind kind) {
  const auto& Phi = pick(resp, kind);
  SLSF_THROW_UNLESS(k >= 0 && k <= Phi.horizon(), ErrorCode::kInvalidArgument, "stage index");
  SLSF_THROW_UNLESS(a.size() == Phi.block_rows(), ErrorCode::kDimensionMismatch, "row size");
  double margin = 0.0;
  if (Phi.first_cols() > 0) {
    const MatrixXd& B0 = Phi.block(k, 0);
    SLSF_THROW_UNLESS(P_init.rows() == B0.cols(), ErrorCode::kDimensionMismatch,
                      "P_init rows");
    margin += (a.transpose() * B0 * P_init).cwiseAbs().sum();
  }
  for (int c = 1; c <= k; ++c) margin += (a.transpose() * Phi.block(k, c)).cwiseAbs().sum();
  return margin;
}

poly::Box reachable_box(const VectorXd& z_k, const SystemResponses& resp, int k,
                        const MatrixXd& P_init, RowKind kind) {
  const int p = static_cast<int>(z_k.size());
  VectorXd half(p);
  for (int j = 0; j < p; ++j) {
    VectorXd e = VectorXd::Zero(p);
    e(j) = 1.0;
    half(j) = tighten_row(e, resp, k, P_init, kind);
  }
  return poly::Box(z_k, half);
}

void write_csv(std::ostream& os, const MatrixXd& M) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, ",", "\n");
  os << M.format(fmt) << '\n';
}

}  // namespace slsf
