#pragma once

#include <string>

#include "json.hpp"

#include "slsf/explicit_filter.hpp"
#include "slsf/polytope.hpp"
#include "slsf/sls_core.hpp"

namespace slsf::io {

using Json = nlohmann::json;

// Matrices are arrays of rows; vectors are flat arrays. Doubles round-trip
// bit-exactly.
Json to_json(const MatrixXd& M);
MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);

Json to_json(const poly::Polytope& P);
poly::Polytope polytope_from_json(const Json& j);
Json to_json(const poly::Box& B);
poly::Box box_from_json(const Json& j);

Json to_json(const BlockLowerTriangular& M);
BlockLowerTriangular blt_from_json(const Json& j);

Json to_json(const ExplicitSafeSet& S);
ExplicitSafeSet safe_set_from_json(const Json& j);

/// Throws Config on unreadable or malformed files.
Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace slsf::io
