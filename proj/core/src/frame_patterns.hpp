#pragma once

#include "diffstiff/elements.hpp"

namespace diffstiff::detail {

/// Constant integer patterns of the 12x12 local frame stiffness. The matrix is
///   EA/L axial + GJ/L torsion
///   + EIz (bend_z3/L^3 + bend_z2/L^2 + bend_z1/L)
///   + EIy (bend_y3/L^3 + bend_y2/L^2 + bend_y1/L)
/// which makes every partial derivative a weighted sum of the same patterns.
struct FramePatterns {
    Mat12 axial;
    Mat12 torsion;
    Mat12 bend_z3, bend_z2, bend_z1;
    Mat12 bend_y3, bend_y2, bend_y1;
};

inline const FramePatterns& frame_patterns() {
    static const FramePatterns p = [] {
        FramePatterns f;
        auto sym = [](Mat12& m, int i, int j, double v) {
            m(i, j) = v;
            m(j, i) = v;
        };
        for (Mat12* m : {&f.axial, &f.torsion, &f.bend_z3, &f.bend_z2, &f.bend_z1,
                         &f.bend_y3, &f.bend_y2, &f.bend_y1}) {
            m->setZero();
        }
        sym(f.axial, 0, 0, 1.0);
        sym(f.axial, 6, 6, 1.0);
        sym(f.axial, 0, 6, -1.0);

        sym(f.torsion, 3, 3, 1.0);
        sym(f.torsion, 9, 9, 1.0);
        sym(f.torsion, 3, 9, -1.0);

        // local x-y plane: uy (1, 7), rz (5, 11)
        sym(f.bend_z3, 1, 1, 12.0);
        sym(f.bend_z3, 7, 7, 12.0);
        sym(f.bend_z3, 1, 7, -12.0);
        sym(f.bend_z2, 1, 5, 6.0);
        sym(f.bend_z2, 1, 11, 6.0);
        sym(f.bend_z2, 5, 7, -6.0);
        sym(f.bend_z2, 7, 11, -6.0);
        sym(f.bend_z1, 5, 5, 4.0);
        sym(f.bend_z1, 11, 11, 4.0);
        sym(f.bend_z1, 5, 11, 2.0);

        // local x-z plane: uz (2, 8), ry (4, 10)
        sym(f.bend_y3, 2, 2, 12.0);
        sym(f.bend_y3, 8, 8, 12.0);
        sym(f.bend_y3, 2, 8, -12.0);
        sym(f.bend_y2, 2, 4, -6.0);
        sym(f.bend_y2, 2, 10, -6.0);
        sym(f.bend_y2, 4, 8, 6.0);
        sym(f.bend_y2, 8, 10, 6.0);
        sym(f.bend_y1, 4, 4, 4.0);
        sym(f.bend_y1, 10, 10, 4.0);
        sym(f.bend_y1, 4, 10, 2.0);
        return f;
    }();
    return p;
}

}  // namespace diffstiff::detail
