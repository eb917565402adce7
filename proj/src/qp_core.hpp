#pragma once

#include <chrono>
#include <memory>
#include <vector>

#include "slsf/program_builder.hpp"
#include "slsf/solver.hpp"

namespace slsf::detail {

/// A QP whose structure is fixed and whose per-call data is the right-hand
/// side and the constant c of a least-squares cost ||L y + c||^2.
class QpCore {
 public:
  QpCore() = default;

  /// cost_rows are the rows of L (constants ignored); the builder must
  /// already hold any regularization.
  void init(solver::ProgramBuilder& builder, const std::vector<solver::LinExpr>& cost_rows,
            const solver::Settings& settings) {
    for (const auto& row : cost_rows) builder.add_square(row);
    prog_ = builder.build();
    const int nv = prog_.num_variables();
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t r = 0; r < cost_rows.size(); ++r)
      for (const auto& [i, c] : cost_rows[r].terms) t.emplace_back(static_cast<int>(r), i, c);
    L_.resize(static_cast<int>(cost_rows.size()), nv);
    L_.setFromTriplets(t.begin(), t.end());
    Lt_ = L_.transpose();
    f_base_ = prog_.f;
    settings_ = settings;
    solver_ = std::make_unique<solver::AdmmSolver>(prog_, settings);
  }

  const solver::ConicProgram& program() const { return prog_; }
  solver::ConicProgram& mutable_program() { return prog_; }

  /// Updates the program data for the next solve.
  void set_data(const Eigen::VectorXd& b_eq, const Eigen::VectorXd& b_in,
                const Eigen::VectorXd& c) {
    prog_.b_eq = b_eq;
    prog_.b_in = b_in;
    prog_.f = f_base_ + 2.0 * (Lt_ * c);
    solver_->update_rhs(b_eq, b_in);
    solver_->update_linear_cost(prog_.f);
  }

  solver::Solution solve() { return solver_->solve(); }

  void reset() { solver_->cold_start(); }

 private:
  solver::ConicProgram prog_;
  solver::SpMat L_;
  solver::SpMat Lt_;
  Eigen::VectorXd f_base_;
  solver::Settings settings_;
  std::unique_ptr<solver::AdmmSolver> solver_;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace slsf::detail
