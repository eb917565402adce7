#pragma once

#include <memory>

#include "slsf/filter.hpp"
#include "slsf/polytope.hpp"
#include "slsf/sls_core.hpp"
#include "slsf/solver.hpp"

namespace slsf {

/// Infinite-horizon LQR gain with sign convention u = K x, from the discrete
/// algebraic Riccati equation iterated to a fixed point. Throws
/// NotStabilizable when the iteration diverges or stalls.
MatrixXd lqr(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R,
             MatrixXd* P_out = nullptr, int max_iter = 200000, double tol = 1e-12);

/// Relative residual of the DARE at P.
double dare_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R,
                     const MatrixXd& P);

/// min ||v_0 - u_L||^2 over nominal trajectories with z_0 = x, z_k in X,
/// v_k in U, z_N in the terminal set. When the program is infeasible u_L is
/// saturated into U and backup_engaged is set.
class NominalFilter final : public SafetyFilter {
 public:
  explicit NominalFilter(const SafetyProblem& problem,
                         solver::Settings settings = solver::Settings::from_env());
  ~NominalFilter() override;
  std::string name() const override { return "nominal"; }
  FilterResult filter(const VectorXd& x, const VectorXd& u_L) override;
  bool is_feasible(const VectorXd& x) override;
  void reset() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct TubeConfig {
  MatrixXd K;
  poly::Polytope tube;      // Omega_min
  poly::Polytope X_tight;   // X (-) tube
  poly::Polytope U_tight;   // U (-) K tube
  poly::Polytope terminal;  // maximal positively invariant set under the tightened constraints

  /// Throws InvalidArgument when the tube is not RPI or the tightening is void.
  void validate(const SafetyProblem& problem) const;
};

TubeConfig make_tube_config(const SafetyProblem& problem, const MatrixXd& K, double eps = 1e-2);

/// Tube MPSF: min ||v_0 + K(x - z_0) - u_L||^2 with x - z_0 in the tube,
/// z_k in X_tight, v_k in U_tight, z_N in the terminal set. Infeasible
/// programs fall back to saturating u_L into U (backup_engaged).
class TubeFilter final : public SafetyFilter {
 public:
  TubeFilter(const SafetyProblem& problem, TubeConfig cfg,
             solver::Settings settings = solver::Settings::from_env());
  ~TubeFilter() override;
  std::string name() const override { return "tube"; }
  FilterResult filter(const VectorXd& x, const VectorXd& u_L) override;
  bool is_feasible(const VectorXd& x) override;
  void reset() override;
  const TubeConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slsf
