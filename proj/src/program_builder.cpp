#include "slsf/program_builder.hpp"

#include <cmath>

#include "slsf/error.hpp"

namespace slsf::solver {

bool LinExpr::is_constant() const {
  for (const auto& [i, c] : terms)
    if (c != 0.0) return false;
  return true;
}

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  for (const auto& [i, c] : other.terms) terms.emplace_back(i, -c);
  constant -= other.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

double LinExpr::eval(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x(i);
  return v;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }
LinExpr operator-(LinExpr a) { return a *= -1.0; }

int ProgramBuilder::add_variables(int count) {
  SLSF_THROW_UNLESS(count >= 0, ErrorCode::kInvalidArgument, "negative variable count");
  const int first = num_vars_;
  num_vars_ += count;
  return first;
}

int ProgramBuilder::add_eq(const LinExpr& e) {
  const int row = num_eq();
  for (const auto& [i, c] : e.terms) {
    SLSF_THROW_UNLESS(i >= 0 && i < num_vars_, ErrorCode::kInvalidArgument, "bad variable");
    if (c != 0.0) a_eq_.emplace_back(row, i, c);
  }
  b_eq_.push_back(-e.constant);
  return row;
}

int ProgramBuilder::add_le(const LinExpr& e) {
  const int row = num_in();
  for (const auto& [i, c] : e.terms) {
    SLSF_THROW_UNLESS(i >= 0 && i < num_vars_, ErrorCode::kInvalidArgument, "bad variable");
    if (c != 0.0) a_in_.emplace_back(row, i, c);
  }
  b_in_.push_back(-e.constant);
  return row;
}

void ProgramBuilder::add_square(const LinExpr& e, double weight) {
  // weight (a'x + c)^2 = 1/2 x'(2 w a a')x + 2 w c a'x + const
  for (const auto& [i, ci] : e.terms) {
    for (const auto& [j, cj] : e.terms) h_.emplace_back(i, j, 2.0 * weight * ci * cj);
    f_.emplace_back(i, 2.0 * weight * e.constant * ci);
  }
}

void ProgramBuilder::add_linear(const LinExpr& e) {
  for (const auto& t : e.terms) f_.push_back(t);
}

ConicProgram ProgramBuilder::build() const {
  const int n = num_vars_;
  ConicProgram p;
  p.H.resize(n, n);
  p.H.setFromTriplets(h_.begin(), h_.end());
  p.H.prune(0.0);
  p.f = Eigen::VectorXd::Zero(n);
  for (const auto& [i, c] : f_) p.f(i) += c;
  p.A_eq.resize(num_eq(), n);
  p.A_eq.setFromTriplets(a_eq_.begin(), a_eq_.end());
  p.b_eq = Eigen::Map<const Eigen::VectorXd>(b_eq_.data(), num_eq());
  p.A_in.resize(num_in(), n);
  p.A_in.setFromTriplets(a_in_.begin(), a_in_.end());
  p.b_in = Eigen::Map<const Eigen::VectorXd>(b_in_.data(), num_in());
  return p;
}

int encode_l1_row(ProgramBuilder& builder, std::span<const LinExpr> entries,
                  const LinExpr& budget) {
  LinExpr row = -budget;
  std::vector<const LinExpr*> vars;
  for (const LinExpr& e : entries) {
    if (e.is_constant()) {
      row.constant += std::abs(e.constant);
    } else {
      vars.push_back(&e);
    }
  }
  if (vars.empty()) {
    builder.add_le(row);
    return -1;
  }
  const int first = builder.add_variables(static_cast<int>(vars.size()));
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const int s = first + static_cast<int>(i);
    builder.add_le(*vars[i] - LinExpr::var(s));
    builder.add_le(-*vars[i] - LinExpr::var(s));
    row += LinExpr::var(s);
  }
  builder.add_le(row);
  return first;
}

}  // namespace slsf::solver
