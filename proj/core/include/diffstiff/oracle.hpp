#pragma once

#include <vector>

#include <Eigen/Core>

namespace diffstiff {

/// Explicit du/dK for u = K^-1 p: slab j is -u_j K^-1, so that
/// du_a/dK_ij = slab[j](a, i). Dense; refuses n > 12. Never used by the
/// production gradient path.
std::vector<Eigen::MatrixXd> dense_dudK_oracle(const Eigen::MatrixXd& K, const Eigen::VectorXd& p);

/// K_bar_ij = sum_a u_bar_a du_a/dK_ij.
Eigen::MatrixXd contract_dudK(const std::vector<Eigen::MatrixXd>& tensor, const Eigen::VectorXd& u_bar);

}  // namespace diffstiff
