#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffstiff/analysis.hpp"
#include "diffstiff/evaluator.hpp"
#include "diffstiff/optimize.hpp"

namespace diffstiff::cli {

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// One RFC 4180 field, quoted when it contains a comma, quote or line break.
std::string csv_field(std::string_view text);
/// Fields joined by commas and terminated by CRLF.
std::string csv_row(std::span<const std::string> fields);
/// Shortest representation that reads back to the same double.
std::string number(double v);

/// Displacements, reactions, element forces and stresses, totals and
/// constraint values for one analysed state. Stresses in MPa.
nlohmann::json analysis_json(const Evaluator& evaluator, const AnalysisCache& cache);

/// Final point, status and history of an optimization run.
nlohmann::json result_json(const Problem& problem, const OptimizationResult& result);

/// iteration, wall_time_s, objective, max_violation.
std::string history_csv(const OptimizationResult& result);

}  // namespace diffstiff::cli
