#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "diffstiff/analysis.hpp"
#include "diffstiff/elements.hpp"
#include "diffstiff/model.hpp"

namespace diffstiff {

/// Direct sensitivities of one scalar output with respect to an element's
/// local quantities. force_bar is empty or sized like local_forces().
struct ElementSeed {
    Eigen::VectorXd force_bar;
    double A = 0.0;
    double Iy = 0.0;
    double Iz = 0.0;
    double J = 0.0;
    double S = 0.0;
    double L = 0.0;
    double d = 0.0;  // tube outer diameter
};

/// Seeds of one output. u_bar is empty when the output does not read u.
struct OutputSeeds {
    Eigen::VectorXd u_bar;
    std::vector<std::pair<std::size_t, ElementSeed>> elements;

    ElementSeed& element(std::size_t e);
};

struct SectionBar {
    double A = 0.0;
    double Iy = 0.0;
    double Iz = 0.0;
    double J = 0.0;
    double S = 0.0;
    double d = 0.0;
    double alpha = 0.0;
};

/// Sensitivities with respect to node positions and element sections.
struct DesignBars {
    std::vector<Vec3> position;
    std::vector<SectionBar> section;
};

/// Adjoint vector y = K^-1 u_bar and K_bar = -y u^T restricted to the
/// pattern: `lower[s]` is K_bar(r, c) and `upper[s]` is K_bar(c, r) for the
/// stored lower entry s at (r, c).
struct StiffnessBar {
    Eigen::VectorXd y;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    const Eigen::VectorXd& p_bar() const { return y; }
};

StiffnessBar adjoint_solve(const AnalysisCache& cache, const Eigen::VectorXd& u_bar);

/// k_bar of one element, gathered from K_bar; fixed DOFs read zero.
Eigen::MatrixXd adjoint_assembly(const StiffnessBar& kbar, const AssemblyPlan& plan,
                                 std::size_t element);

// Element-level rules --------------------------------------------------------

struct TransformBar {
    Eigen::MatrixXd gamma_bar;
    Eigen::MatrixXd kloc_bar;
};

/// k_bar' = G k_bar G^T and G_bar = k' G (k_bar^T + k_bar). Throws
/// DimensionError on shape mismatch.
TransformBar adjoint_transform(const Eigen::MatrixXd& k_bar, const Eigen::MatrixXd& gamma,
                               const Eigen::MatrixXd& kloc);

struct ElementForceBar {
    Eigen::MatrixXd gamma_bar;
    Eigen::MatrixXd k_bar;
    Eigen::VectorXd u_bar;
};

/// Bars of F = G k u_e.
ElementForceBar adjoint_element_force(const Eigen::VectorXd& F_bar, const Eigen::MatrixXd& gamma,
                                      const Eigen::MatrixXd& k, const Eigen::VectorXd& u);

struct StiffnessScalarBar {
    double A = 0.0;
    double Iy = 0.0;
    double Iz = 0.0;
    double J = 0.0;
    double L = 0.0;
};

/// k' -> (A, L) for (EA/L)[[1,-1],[-1,1]].
StiffnessScalarBar truss_stiffness_bar(double E, double A, double L, const Mat2& kloc_bar);
/// k' -> (A, Iy, Iz, J, L) for the Euler-Bernoulli frame matrix.
StiffnessScalarBar frame_stiffness_bar(double E, double G, const SectionProperties& s, double L,
                                       const Mat12& kloc_bar);

/// c from the truss transformation bar.
Vec3 truss_direction_bar(const Mat2x6& gamma_bar);
/// c from the frame transformation bar, through the local-axis construction.
Vec3 frame_direction_bar(const Vec3& c, double roll, const Mat12& gamma_bar);

/// Bar of delta = end - start given bars of L and c.
Vec3 delta_bar(const ElementGeometry& g, double L_bar, const Vec3& c_bar);

/// Fills d and alpha from A, Iy, Iz, J, S (plus any direct d seed already in
/// `bar`) for a tube section.
void tube_section_bar(double d, double alpha, SectionBar& bar);

/// Intermediate bars kept for inspection.
struct AdjointState {
    StiffnessBar K_bar;
    Eigen::VectorXd u_bar;  // including element-force contributions
    std::vector<Eigen::MatrixXd> k_bar;
    std::vector<Eigen::MatrixXd> kloc_bar;
    std::vector<Eigen::MatrixXd> gamma_bar;
    std::vector<double> L_bar;
    std::vector<Vec3> c_bar;
    DesignBars bars;
};

/// One reverse sweep: a single adjoint solve, then every element.
DesignBars reverse_pass(const AnalysisCache& cache, const OutputSeeds& seeds,
                        AdjointState* trace = nullptr);

/// Chains design bars to the design variables.
Eigen::VectorXd pull_back(const Problem& problem, const DesignBars& bars);

}  // namespace diffstiff
