#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "diffstiff/model.hpp"

namespace diffstiff {

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat2x6 = Eigen::Matrix<double, 2, 6>;
using Vec2 = Eigen::Vector2d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;

/// Below this length an element is rejected rather than regularized.
inline constexpr double kMinElementLength = 1e-9;

struct ElementGeometry {
    double L = 0.0;
    Vec3 c = Vec3::UnitX();  // direction cosines
    Vec3 delta = Vec3::Zero();
};

/// Throws GeometryError for coincident end points.
ElementGeometry element_geometry(const Vec3& start, const Vec3& end);

/// (EA/L) [[1,-1],[-1,1]]. Throws ValidationError for non-positive input.
Mat2 local_stiffness_truss(double E, double A, double L);

/// [[c 0],[0 c]] with c as row blocks. Throws ValidationError when |c| != 1
/// beyond 1e-9.
Mat2x6 transformation_truss(const Vec3& c);

/// Euler-Bernoulli space-frame stiffness in local axes. DOF order per node is
/// (ux, uy, uz, rx, ry, rz); Iz governs bending in the local x-y plane, Iy in
/// the local x-z plane.
Mat12 local_stiffness_frame(double E, double G, double A, double Iy, double Iz,
                            double J, double L);

/// Rows are the local x, y, z axes expressed in global coordinates.
///
/// Local y is normalize(Zg x c) and local z = c x y, so a member along global
/// X gets the identity. Near-vertical members (|c.Zg| > 1 - 1e-6) use global
/// X as the reference instead of global Z. The pair (y, z) is finally rotated
/// by `roll` about the member axis.
Mat3 frame_rotation(const Vec3& c, double roll);

/// Block-diagonal with four copies of frame_rotation(c, roll).
Mat12 transformation_frame(const Vec3& c, double roll);

/// k = G^T k' G for either element family.
Mat6 global_element_stiffness(const Mat2x6& gamma, const Mat2& kloc);
Mat12 global_element_stiffness(const Mat12& gamma, const Mat12& kloc);
/// Shape-checked dynamic variant; throws DimensionError on mismatch.
Eigen::MatrixXd global_element_stiffness(const Eigen::MatrixXd& gamma,
                                         const Eigen::MatrixXd& kloc);

/// Circular hollow section properties: A = pi d^2/4 (1-a^2),
/// I = pi d^4/64 (1-a^4), J = 2I, S = 2I/d. Throws ValidationError unless
/// d > 0 and 0 <= a < 1.
SectionProperties tube_section_properties(double d, double alpha);

SectionProperties section_properties(const Section& section);

}  // namespace diffstiff
