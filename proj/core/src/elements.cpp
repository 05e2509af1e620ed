#include "diffstiff/elements.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "diffstiff/errors.hpp"
#include "frame_patterns.hpp"

namespace diffstiff {

ElementGeometry element_geometry(const Vec3& start, const Vec3& end) {
    ElementGeometry g;
    g.delta = end - start;
    g.L = g.delta.norm();
    if (!(g.L >= kMinElementLength)) {
        throw GeometryError("zero-length element (L = " + std::to_string(g.L) + " m)");
    }
    g.c = g.delta / g.L;
    return g;
}

Mat2 local_stiffness_truss(double E, double A, double L) {
    if (!(E > 0.0 && A > 0.0 && L > 0.0)) {
        throw ValidationError("truss stiffness requires E, A, L > 0");
    }
    const double k = E * A / L;
    Mat2 m;
    m << k, -k, -k, k;
    return m;
}

Mat2x6 transformation_truss(const Vec3& c) {
    if (std::abs(c.norm() - 1.0) > 1e-9) {
        throw ValidationError("transformation requires a unit direction vector");
    }
    Mat2x6 t = Mat2x6::Zero();
    t.block<1, 3>(0, 0) = c.transpose();
    t.block<1, 3>(1, 3) = c.transpose();
    return t;
}

Mat12 local_stiffness_frame(double E, double G, double A, double Iy, double Iz,
                            double J, double L) {
    if (!(E > 0.0 && G > 0.0 && A > 0.0 && Iy > 0.0 && Iz > 0.0 && J > 0.0 && L > 0.0)) {
        throw ValidationError("frame stiffness requires E, G, A, Iy, Iz, J, L > 0");
    }
    const auto& p = detail::frame_patterns();
    const double L2 = L * L;
    const double L3 = L2 * L;
    Mat12 k = (E * A / L) * p.axial + (G * J / L) * p.torsion;
    k += (E * Iz) * (p.bend_z3 / L3 + p.bend_z2 / L2 + p.bend_z1 / L);
    k += (E * Iy) * (p.bend_y3 / L3 + p.bend_y2 / L2 + p.bend_y1 / L);
    return k;
}

Mat3 frame_rotation(const Vec3& c, double roll) {
    if (std::abs(c.norm() - 1.0) > 1e-9) {
        throw ValidationError("transformation requires a unit direction vector");
    }
    const Vec3 ref = std::abs(c.z()) > 1.0 - 1e-6 ? Vec3::UnitX() : Vec3::UnitZ();
    const Vec3 y0 = ref.cross(c).normalized();
    const Vec3 z0 = c.cross(y0);
    const double cr = std::cos(roll);
    const double sr = std::sin(roll);
    Mat3 r;
    r.row(0) = c.transpose();
    r.row(1) = (cr * y0 + sr * z0).transpose();
    r.row(2) = (-sr * y0 + cr * z0).transpose();
    return r;
}

Mat12 transformation_frame(const Vec3& c, double roll) {
    const Mat3 r = frame_rotation(c, roll);
    Mat12 t = Mat12::Zero();
    for (int b = 0; b < 4; ++b) t.block<3, 3>(3 * b, 3 * b) = r;
    return t;
}

Mat6 global_element_stiffness(const Mat2x6& gamma, const Mat2& kloc) {
    return gamma.transpose() * kloc * gamma;
}

Mat12 global_element_stiffness(const Mat12& gamma, const Mat12& kloc) {
    return gamma.transpose() * kloc * gamma;
}

Eigen::MatrixXd global_element_stiffness(const Eigen::MatrixXd& gamma,
                                         const Eigen::MatrixXd& kloc) {
    if (kloc.rows() != kloc.cols() || gamma.rows() != kloc.rows()) {
        throw DimensionError("transformation and local stiffness shapes do not match");
    }
    return gamma.transpose() * kloc * gamma;
}

SectionProperties tube_section_properties(double d, double alpha) {
    if (!(d > 0.0) || !(alpha >= 0.0) || !(alpha < 1.0)) {
        throw ValidationError("tube section requires d > 0 and 0 <= alpha < 1");
    }
    constexpr double pi = std::numbers::pi;
    const double a2 = alpha * alpha;
    SectionProperties s;
    s.A = pi * d * d / 4.0 * (1.0 - a2);
    s.Iy = pi * d * d * d * d / 64.0 * (1.0 - a2 * a2);
    s.Iz = s.Iy;
    s.J = 2.0 * s.Iy;
    s.S = 2.0 * s.Iy / d;
    return s;
}

SectionProperties section_properties(const Section& section) {
    if (const auto* t = std::get_if<TubeSection>(&section)) {
        return tube_section_properties(t->d, t->alpha);
    }
    const auto& e = std::get<ExplicitSection>(section);
    return {e.A, e.Iy, e.Iz, e.J, e.S};
}

}  // namespace diffstiff
