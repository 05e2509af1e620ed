#include "gradient_compare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace testing_support {

Mismatch compare_rows(const Eigen::MatrixXd& a, const Eigen::MatrixXd& f, double rel, double floor) {
    Mismatch m;
    std::ostringstream os;
    for (Eigen::Index r = 0; r < f.rows(); ++r) {
        const double scale = std::max(1.0, f.row(r).cwiseAbs().maxCoeff());
        for (Eigen::Index c = 0; c < f.cols(); ++c) {
            const double err = std::abs(a(r, c) - f(r, c));
            const double ref = std::abs(f(r, c));
            const double relerr = ref > 0 ? err / ref : (err > 0 ? INFINITY : 0.0);
            if (err <= floor * scale) continue;
            m.worst_rel = std::max(m.worst_rel, relerr);
            if (err > rel * ref) {
                if (m.ok) os << "row " << r << " col " << c << ": adjoint " << a(r, c) << " fd " << f(r, c);
                m.ok = false;
            }
        }
    }
    m.detail = os.str();
    return m;
}

}  // namespace testing_support
