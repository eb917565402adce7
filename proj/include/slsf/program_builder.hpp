#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slsf/solver.hpp"

namespace slsf::solver {

/// Affine expression  sum_i c_i x_{v_i} + constant.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT(runtime/explicit)

  static LinExpr var(int index, double coeff = 1.0) {
    LinExpr e;
    e.terms.emplace_back(index, coeff);
    return e;
  }

  bool is_constant() const;

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double s);

  /// Evaluates at a point.
  double eval(const Eigen::VectorXd& x) const;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);
LinExpr operator-(LinExpr a);

/// Incrementally builds a ConicProgram from affine expressions.
class ProgramBuilder {
 public:
  /// Returns the index of the first new variable.
  int add_variables(int count);
  int num_variables() const { return num_vars_; }

  /// e == 0. Returns the equality row index.
  int add_eq(const LinExpr& e);
  /// e <= 0. Returns the inequality row index.
  int add_le(const LinExpr& e);

  /// Adds weight * e^2 to the objective.
  void add_square(const LinExpr& e, double weight = 1.0);
  /// Adds e to the objective.
  void add_linear(const LinExpr& e);

  int num_eq() const { return static_cast<int>(b_eq_.size()); }
  int num_in() const { return static_cast<int>(b_in_.size()); }

  ConicProgram build() const;

 private:
  using Triplet = Eigen::Triplet<double>;
  int num_vars_ = 0;
  std::vector<Triplet> h_;
  std::vector<std::pair<int, double>> f_;
  std::vector<Triplet> a_eq_;
  std::vector<double> b_eq_;
  std::vector<Triplet> a_in_;
  std::vector<double> b_in_;
};

/// Encodes  sum_i |entries_i| <= budget  with one slack per non-constant entry
/// (s_i >= +-entry_i, sum s_i + sum |const entries| <= budget).
/// Returns the index of the first slack (or -1 when no slack was needed).
int encode_l1_row(ProgramBuilder& builder, std::span<const LinExpr> entries,
                  const LinExpr& budget);

}  // namespace slsf::solver
