#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "diffstiff/adjoint.hpp"
#include "diffstiff/analysis.hpp"
#include "diffstiff/model.hpp"

namespace diffstiff {

double volume(const Model& model);
double compliance(const Eigen::VectorXd& u, const Eigen::VectorXd& p);
/// Sum of ECC * rho * A * L, in kgCO2e.
double embodied_carbon(const Model& model);
/// Sum of rho * A * L, in kg.
double mass(const Model& model);

Eigen::VectorXd element_forces(const AnalysisCache& cache, std::size_t element);
/// Support reactions, one per fixed DOF in DofMap::fixed order.
Eigen::VectorXd reactions(const AnalysisCache& cache);
/// Axial force, tension positive.
double axial_force(const AnalysisCache& cache, std::size_t element);
double axial_stress(double N, double A);
/// |N|/A + |M|/S.
double combined_stress(double N, double M, double A, double S);
/// Combined stress of a frame element with the larger end moment about the
/// major axis.
double frame_combined_stress(const AnalysisCache& cache, std::size_t element);

// Scalar constraint rows, all normalized so that value <= 0 is feasible.

struct DisplacementRow {
    std::size_t node = 0;
    Axis axis = Axis::Z;
    double limit = 0.0;
};
struct AxialRow {
    enum class Side { Both, Tension, Compression };
    std::size_t element = 0;
    Side side = Side::Both;
    double limit = 0.0;  // kN/m², positive
};
struct CombinedRow {
    std::size_t element = 0;
    double limit = 0.0;
};
struct OrderingRow {
    std::size_t lesser = 0;
    std::size_t greater = 0;
};
using ConstraintRow = std::variant<DisplacementRow, AxialRow, CombinedRow, OrderingRow>;

/// Expands the constraint specs into rows, in declaration order.
std::vector<ConstraintRow> constraint_catalog(const Problem& problem);
std::string describe(const ConstraintRow& row, const Model& model);

double objective_value(ObjectiveKind kind, const AnalysisCache& cache);
OutputSeeds objective_seeds(ObjectiveKind kind, const AnalysisCache& cache);

double row_value(const ConstraintRow& row, const AnalysisCache& cache);
OutputSeeds row_seeds(const ConstraintRow& row, const AnalysisCache& cache);

/// All rows of the problem's constraints at the analyzed state.
Eigen::VectorXd evaluate_constraints(const Problem& problem, const AnalysisCache& cache);

}  // namespace diffstiff
