#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "diffstiff/assembly.hpp"
#include "diffstiff/elements.hpp"
#include "diffstiff/model.hpp"
#include "diffstiff/solve.hpp"

namespace diffstiff {

/// DOF numbering and assembly plan; fixed for a given topology and supports.
struct Topology {
    DofMap dofs;
    AssemblyPlan plan;
};

std::shared_ptr<const Topology> make_topology(const Model& model);

struct TrussMatrices {
    Mat2x6 gamma;
    Mat2 kloc;
    Mat6 k;
    Vec6 u;  // element displacements, zeros at fixed DOFs
};

struct FrameMatrices {
    Mat12 gamma;
    Mat12 kloc;
    Mat12 k;
    Vec12 u;
};

struct ElementState {
    ElementKind kind = ElementKind::Truss;
    ElementGeometry geometry;
    SectionProperties section;
    double E = 0.0;
    double G = 0.0;
    std::variant<TrussMatrices, FrameMatrices> m;

    /// Local end forces: (N_start, N_end) for trusses, 12 components for frames.
    Eigen::VectorXd local_forces() const;
};

/// Everything the reverse pass needs from one forward analysis.
struct AnalysisCache {
    Model model;
    std::shared_ptr<const Topology> topology;
    std::vector<ElementState> elements;
    SparseSym K;
    Factorization factorization;
    Eigen::VectorXd p;       // free loads
    Eigen::VectorXd u;       // free displacements
    Eigen::VectorXd u_full;  // all DOFs, zeros at supports

    const DofMap& dofs() const { return topology->dofs; }
    const AssemblyPlan& plan() const { return topology->plan; }
    /// Displacement of a node along a global axis.
    double displacement(std::size_t node, Axis axis) const;
};

/// Forward analysis. `topology` must come from a model with the same nodes,
/// elements and supports; `reuse` donates its symbolic factorization.
AnalysisCache analyze(Model model, std::shared_ptr<const Topology> topology,
                      std::optional<Factorization> reuse = std::nullopt);
AnalysisCache analyze(Model model);

}  // namespace diffstiff
