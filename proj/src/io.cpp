#include "slsf/io.hpp"

#include <fstream>

#include "slsf/error.hpp"

namespace slsf::io {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::kConfig, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Json to_json(const MatrixXd& M) {
  Json rows = Json::array();
  for (int r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kConfig, "matrix must be an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(j[0].size());
  MatrixXd M(rows, cols);
  try {
    for (int r = 0; r < rows; ++r) {
      if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
        throw Error(ErrorCode::kConfig, "matrix rows have different lengths");
      for (int c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad matrix: ") + e.what());
  }
  return M;
}

Json vector_to_json(const VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kConfig, "vector must be an array");
  VectorXd v(static_cast<int>(j.size()));
  try {
    for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad vector: ") + e.what());
  }
  return v;
}

Json to_json(const poly::Polytope& P) {
  return {{"A", to_json(P.A())}, {"b", vector_to_json(P.b())}, {"dim", P.dim()}};
}

poly::Polytope polytope_from_json(const Json& j) {
  const MatrixXd A = matrix_from_json(field(j, "A"));
  const VectorXd b = vector_from_json(field(j, "b"));
  if (A.rows() != b.size()) throw Error(ErrorCode::kConfig, "polytope A and b sizes differ");
  if (A.rows() == 0) {
    if (!j.contains("dim")) throw Error(ErrorCode::kConfig, "polytope without rows needs dim");
    return poly::Polytope::empty_set(j.at("dim").get<int>());
  }
  return poly::Polytope(A, b);
}

Json to_json(const poly::Box& B) {
  return {{"center", vector_to_json(B.center)}, {"half_widths", vector_to_json(B.half_widths)}};
}

poly::Box box_from_json(const Json& j) {
  return {vector_from_json(field(j, "center")), vector_from_json(field(j, "half_widths"))};
}

Json to_json(const BlockLowerTriangular& M) {
  return {{"N", M.horizon()},
          {"p", M.block_rows()},
          {"q", M.block_cols()},
          {"q0", M.first_cols()},
          {"dense", to_json(M.dense())}};
}

BlockLowerTriangular blt_from_json(const Json& j) {
  return BlockLowerTriangular::from_dense(matrix_from_json(field(j, "dense")),
                                          field(j, "N").get<int>(), field(j, "p").get<int>(),
                                          field(j, "q").get<int>(), field(j, "q0").get<int>());
}

Json to_json(const ExplicitSafeSet& S) {
  return {{"alpha", S.alpha},
          {"alpha_axes", vector_to_json(S.alpha_axes)},
          {"z_star", to_json(S.z_star)},
          {"v_star", to_json(S.v_star)},
          {"K_star", to_json(S.K_star)},
          {"Phi_x", to_json(S.responses.Phi_x)},
          {"Phi_u", to_json(S.responses.Phi_u)}};
}

ExplicitSafeSet safe_set_from_json(const Json& j) {
  ExplicitSafeSet S;
  S.alpha = field(j, "alpha").get<double>();
  S.alpha_axes = vector_from_json(field(j, "alpha_axes"));
  S.z_star = matrix_from_json(field(j, "z_star"));
  S.v_star = matrix_from_json(field(j, "v_star"));
  S.K_star = blt_from_json(field(j, "K_star"));
  S.responses.Phi_x = blt_from_json(field(j, "Phi_x"));
  S.responses.Phi_u = blt_from_json(field(j, "Phi_u"));
  return S;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  out << text;
}

}  // namespace slsf::io
