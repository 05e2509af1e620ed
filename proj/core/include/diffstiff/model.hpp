#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace diffstiff {

using Vec3 = Eigen::Vector3d;

enum class Axis : int { X = 0, Y = 1, Z = 2 };

struct Node {
    int id = 0;
    Vec3 position = Vec3::Zero();
    /// Fixed translations x,y,z then rotations rx,ry,rz.
    std::array<bool, 6> fixed{};
};

/// Area bounds a material imposes on the area variables of the elements it
/// is assigned to during a material sweep.
struct AreaBounds {
    double lower = 0.0;
    double initial = 0.0;
    double upper = 0.0;
};

/// Stiffnesses and strengths in kN/m², density in kg/m³, ECC in kgCO2e/kg.
struct Material {
    std::string name;
    char code = '?';
    double E = 0.0;
    double G = 0.0;
    double rho = 0.0;
    double ecc = 0.0;
    double sigma_t = 0.0;
    double sigma_c = 0.0;  // positive magnitude
    std::optional<AreaBounds> area_bounds;
};

struct ExplicitSection {
    double A = 0.0;
    double Iy = 0.0;
    double Iz = 0.0;
    double J = 0.0;
    double S = 0.0;
};

/// Circular hollow tube: outer diameter d and inner/outer diameter ratio.
struct TubeSection {
    double d = 0.0;
    double alpha = 0.0;
};

using Section = std::variant<ExplicitSection, TubeSection>;

struct SectionProperties {
    double A = 0.0;
    double Iy = 0.0;
    double Iz = 0.0;
    double J = 0.0;
    double S = 0.0;
};

enum class ElementKind { Truss, Frame };

struct Element {
    int id = 0;
    std::size_t start = 0;  // node index
    std::size_t end = 0;    // node index
    std::size_t material = 0;
    Section section;
    ElementKind kind = ElementKind::Truss;
    double roll = 0.0;
};

struct Load {
    std::size_t node = 0;
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();
};

/// Immutable structural description. Indices (not ids) link the parts; ids are
/// kept for reporting and for resolving file references.
class Model {
public:
    Model() = default;
    Model(std::vector<Node> nodes, std::vector<Material> materials,
          std::vector<Element> elements, std::vector<Load> loads);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Material>& materials() const noexcept { return materials_; }
    const std::vector<Element>& elements() const noexcept { return elements_; }
    const std::vector<Load>& loads() const noexcept { return loads_; }

    std::size_t node_index(int id) const;
    std::size_t element_index(int id) const;
    std::size_t material_index(const std::string& name) const;
    bool has_node(int id) const { return node_lookup_.contains(id); }
    bool has_element(int id) const { return element_lookup_.contains(id); }

    /// True when any element carries rotational DOFs.
    bool has_frames() const noexcept;
    int dofs_per_node() const noexcept { return has_frames() ? 6 : 3; }

    // Mutators used by apply_variables and the sweep; they return copies.
    Model with_positions(std::vector<Vec3> positions) const;
    Model with_sections(std::vector<Section> sections) const;
    Model with_material(std::span<const std::size_t> elements, std::size_t material) const;

    friend bool operator==(const Model& a, const Model& b);

private:
    std::vector<Node> nodes_;
    std::vector<Material> materials_;
    std::vector<Element> elements_;
    std::vector<Load> loads_;
    std::unordered_map<int, std::size_t> node_lookup_;
    std::unordered_map<int, std::size_t> element_lookup_;
};

/// Node/local-DOF numbering with the free/fixed partition.
struct DofMap {
    int dofs_per_node = 3;
    std::size_t n_total = 0;
    std::vector<std::size_t> free;           // global indices of free DOFs
    std::vector<std::size_t> fixed;          // global indices of fixed DOFs
    std::vector<std::ptrdiff_t> free_index;  // global -> free slot or -1
    std::vector<std::ptrdiff_t> fixed_index; // global -> fixed slot or -1

    std::size_t n_free() const noexcept { return free.size(); }
    std::size_t global(std::size_t node, int local) const noexcept {
        return node * static_cast<std::size_t>(dofs_per_node) + static_cast<std::size_t>(local);
    }
};

/// Global DOF indices of an element's end nodes in node-major order. Truss
/// elements use only the translational DOFs even inside a frame model.
std::vector<std::size_t> element_dofs(const Element& e, const DofMap& dofs);

/// Numbering is node order x local order. Throws ValidationError when no DOF
/// is free.
DofMap build_dof_map(const Model& model);

// ---------------------------------------------------------------------------
// Design variables

struct OffsetTarget {
    std::size_t node = 0;
    Axis axis = Axis::X;
    double coefficient = 1.0;
};

/// position += sum(coefficient * x) along a global axis; +-1 coefficients
/// express mirror coupling.
struct NodeOffset {
    std::vector<OffsetTarget> targets;
};

struct ProjectedTarget {
    std::size_t node = 0;
    Vec3 direction = Vec3::UnitZ();  // unit
};

/// position += x * direction.
struct ProjectedOffset {
    std::vector<ProjectedTarget> targets;
};

struct AreaVariable {
    std::vector<std::size_t> elements;
};

struct TubeDiameterVariable {
    std::vector<std::size_t> elements;
};

struct TubeRatioVariable {
    std::vector<std::size_t> elements;
};

using VariableKind = std::variant<NodeOffset, ProjectedOffset, AreaVariable,
                                  TubeDiameterVariable, TubeRatioVariable>;

struct DesignVariable {
    std::string name;
    VariableKind kind;
    double lower = 0.0;
    double upper = 0.0;
    double initial = 0.0;
};

// ---------------------------------------------------------------------------
// Objectives, constraints, optimizer settings

enum class ObjectiveKind { Volume, Compliance, EmbodiedCarbon };

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::Volume;
};

/// |u_axis| <= limit at each listed node.
struct DisplacementLimit {
    std::vector<std::size_t> nodes;
    Axis axis = Axis::Z;
    double limit = 0.0;  // m
};

/// Symmetric |sigma| <= sigma_max when sigma_max is set; otherwise two
/// one-sided rows per element from the element material's sigma_t/sigma_c.
struct AxialStressLimit {
    std::vector<std::size_t> elements;
    std::optional<double> sigma_max;  // kN/m²
};

/// |N|/A + |M|/S <= sigma_max on frame elements.
struct CombinedStressLimit {
    std::vector<std::size_t> elements;
    double sigma_max = 0.0;  // kN/m²
};

/// d(lesser) <= d(greater) for tube sections; the first element of each list
/// is the representative.
struct DiameterOrdering {
    std::vector<std::size_t> lesser;
    std::vector<std::size_t> greater;
};

using ConstraintSpec = std::variant<DisplacementLimit, AxialStressLimit,
                                    CombinedStressLimit, DiameterOrdering>;

enum class Algorithm { MMA, LBFGS, GA };
enum class GradientMode { Adjoint, FiniteDifference };

struct OptimizerSettings {
    Algorithm algorithm = Algorithm::MMA;
    GradientMode gradient = GradientMode::Adjoint;
    double rel_tolerance = 1e-6;
    double time_limit = 120.0;  // s
    int max_iterations = 1000;
    double feasibility_tolerance = 1e-6;
    double fd_step = 1e-6;
    int threads = 1;
    bool record_iterates = false;
    // GA
    int population = 100;
    std::uint64_t seed = 1;
    // MMA
    double move_limit = 0.5;
    double asy_init = 0.5;
    double asy_decr = 0.7;
    double asy_incr = 1.2;
    double artificial_penalty = 1000.0;
    // Inner loop enforcing conservative approximations (globally convergent variant).
    bool mma_conservative = false;
    // L-BFGS
    int memory = 10;
};

struct Problem {
    Model model;  // base state; variables apply on top of it
    std::vector<DesignVariable> variables;
    ObjectiveSpec objective;
    std::vector<ConstraintSpec> constraints;
    OptimizerSettings optimizer;
    std::map<std::string, std::vector<std::size_t>> groups;

    std::vector<double> initial_point() const;
    std::vector<double> lower_bounds() const;
    std::vector<double> upper_bounds() const;
    /// Number of scalar constraint rows the catalog produces.
    std::size_t constraint_rows() const;
    /// Model at the variables' initial values.
    Model initial_model() const;
};

/// Node positions and element sections at design point x. Pure; bounds are not
/// checked. Throws DimensionError on length mismatch.
Model apply_variables(const Problem& problem, std::span<const double> x);

/// Re-checks the Problem invariants (ids resolved, bounds ordered, every
/// (element, property) written by at most one variable). Throws
/// ValidationError.
void validate(const Problem& problem);

std::string to_string(ObjectiveKind kind);
std::string to_string(Algorithm algorithm);
std::string to_string(GradientMode mode);

}  // namespace diffstiff
