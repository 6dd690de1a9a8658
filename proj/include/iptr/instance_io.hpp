#pragma once

#include <string>

#include <json.hpp>

#include "iptr/problems.hpp"

namespace iptr {

using Json = nlohmann::json;

/**
 * Serializes JSON with every floating-point value printed to 17 significant digits.
 * Arrays of scalars stay on one line.
 */
std::string dump_json(const Json& j, int indent = 2);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j);

/// Generated instances are stored as their recipe; others carry A, Q, c explicitly.
Json instance_to_json(const ProblemInstance& p);
ProblemInstance instance_from_json(const Json& j);

void save_instance(const ProblemInstance& p, const std::string& path);

/**
 * Loads and validates an instance. "fig1" and "fig2" name the built-ins.
 */
ProblemInstance load_instance(const std::string& path_or_builtin);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace iptr
