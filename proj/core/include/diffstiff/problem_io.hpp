#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "diffstiff/model.hpp"

namespace diffstiff {

/// Reads and validates a problem document. Stress values in the file are in
/// MPa and are converted to kN/m². Throws ParseError (with line/column),
/// ValidationError or UnitError.
Problem load_problem(const std::filesystem::path& path);
Problem parse_problem(std::string_view text);
Problem problem_from_json(const nlohmann::json& doc);

/// Inverse of problem_from_json; sections are deduplicated by value and
/// element lists are written as explicit ids.
nlohmann::json problem_to_json(const Problem& problem);

/// Replaces node positions (matched by id) from a {"nodes":[{"id","xyz"}]}
/// document, e.g. the final geometry written by a previous optimization.
Problem with_geometry(const Problem& problem, const nlohmann::json& geometry);

/// {"nodes":[{"id","xyz"}], "elements":[{"id","A",...}]} for a model state.
nlohmann::json geometry_to_json(const Model& model);

}  // namespace diffstiff
