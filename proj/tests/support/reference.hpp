#pragma once

// Independent dense quad-precision re-implementation of the forward pipeline.
// Shares only the Problem description and the row catalog with the library.

#include <span>
#include <vector>

#include <Eigen/Core>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

#include "diffstiff/model.hpp"

namespace reference {

using real = boost::multiprecision::float128;

/// [objective, constraint rows...] at x.
std::vector<real> outputs(const diffstiff::Problem& problem, std::span<const real> x);

/// Richardson-extrapolated central differences of every output at
/// h = rel_step * max(1, |x_i|) and h/2.
Eigen::MatrixXd fd_jacobian(const diffstiff::Problem& problem, std::span<const double> x,
                            double rel_step = 1e-6);

/// Free displacements in library DOF order.
std::vector<real> displacements(const diffstiff::Problem& problem, std::span<const real> x);

}  // namespace reference
