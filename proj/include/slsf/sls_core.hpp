#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "slsf/polytope.hpp"

namespace slsf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// x+ = A x + B u + B_w w,  w in the unit inf-ball of dimension n_w.
struct SafetyProblem {
  MatrixXd A;
  MatrixXd B;
  MatrixXd B_w;
  poly::Polytope X;
  poly::Polytope U;
  int N = 10;
  poly::Polytope terminal;
  MatrixXd K_f;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int n_w() const { return static_cast<int>(B_w.cols()); }
  poly::Box disturbance_box() const { return poly::Box::unit(n_w()); }

  /// Throws DimensionMismatch / InvalidArgument. The terminal pair is checked
  /// against the invariance and admissibility conditions when requested.
  void validate(bool check_terminal = true) const;
};

/// Block lower-triangular matrix with N+1 block rows (stages 0..N). Block
/// (k, c) is p x q for c >= 1 and p x q0 for the first block column, so the
/// first column may be dropped (q0 = 0) or sized differently.
class BlockLowerTriangular {
 public:
  BlockLowerTriangular() = default;
  BlockLowerTriangular(int N, int p, int q, int q0);
  BlockLowerTriangular(int N, int p, int q) : BlockLowerTriangular(N, p, q, q) {}

  int horizon() const { return N_; }
  int block_rows() const { return p_; }
  int block_cols() const { return q_; }
  int first_cols() const { return q0_; }
  int rows() const { return (N_ + 1) * p_; }
  int cols() const { return q0_ + N_ * q_; }
  int col_offset(int c) const { return c == 0 ? 0 : q0_ + (c - 1) * q_; }
  int col_width(int c) const { return c == 0 ? q0_ : q_; }

  /// Block (k, c), c <= k. Above-diagonal access throws.
  MatrixXd& block(int k, int c);
  const MatrixXd& block(int k, int c) const;
  /// Lag form: block acting on the input l steps back, i.e. (k, k - l).
  const MatrixXd& lag_block(int k, int l) const { return block(k, k - l); }

  /// k-th block row as a p x cols() matrix (zeros right of the diagonal).
  MatrixXd block_row(int k) const;
  MatrixXd dense() const;
  static BlockLowerTriangular from_dense(const MatrixXd& M, int N, int p, int q, int q0);

 private:
  int index(int k, int c) const;
  int N_ = 0;
  int p_ = 0;
  int q_ = 0;
  int q0_ = 0;
  std::vector<MatrixXd> blocks_;
};

/// Stacked error dynamics  dx = ZA dx + ZB du + E delta.
struct StackedSystem {
  int N = 0;
  MatrixXd ZA;             // (N+1)n square, A on the first block sub-diagonal
  MatrixXd ZB;             // (N+1)n x (N+1)m, B on the first block sub-diagonal
  BlockLowerTriangular E;  // diag(first_block, B_w, ..., B_w)
};

struct SystemResponses {
  BlockLowerTriangular Phi_x;  // n-row blocks
  BlockLowerTriangular Phi_u;  // m-row blocks
};

/// first_block is the n x q0 top-left block of E (identity for the raw
/// parameterization, alpha I for the explicit synthesis, n x 0 to drop the
/// initial-condition column).
StackedSystem build_stacked(const SafetyProblem& problem, const MatrixXd& first_block);

/// max-abs entry of [I - ZA, -ZB][Phi_x; Phi_u] - E.
double subspace_residual(const SystemResponses& resp, const StackedSystem& sys);

/// Phi_x = (I - ZA - ZB K)^{-1} E, Phi_u = K Phi_x.
SystemResponses responses_from_controller(const StackedSystem& sys,
                                          const BlockLowerTriangular& K);

/// K = Phi_u Phi_x^{-1} by block forward substitution. Returns (N+1) x (N+1)
/// blocks of size m x n. Blocks acting on dropped columns are zero; wide
/// diagonal blocks use the right pseudo-inverse.
BlockLowerTriangular controller_from_responses(const SystemResponses& resp);

enum class RowKind { kState, kInput };

/// ||a Phi^k_0 P_init||_1 + ||a Phi^k_w||_1 for the state or input responses.
double tighten_row(const VectorXd& a, const SystemResponses& resp, int k,
                   const MatrixXd& P_init, RowKind kind = RowKind::kState);

/// Per-axis bounds of the stage-k reachable set around z_k.
poly::Box reachable_box(const VectorXd& z_k, const SystemResponses& resp, int k,
                        const MatrixXd& P_init, RowKind kind = RowKind::kState);

/// Dense CSV dump for inspection.
void write_csv(std::ostream& os, const MatrixXd& M);

}  // namespace slsf
