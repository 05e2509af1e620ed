#include "diffstiff/oracle.hpp"

#include <string>

#include <Eigen/LU>

#include "diffstiff/errors.hpp"

namespace diffstiff {

std::vector<Eigen::MatrixXd> dense_dudK_oracle(const Eigen::MatrixXd& K, const Eigen::VectorXd& p) {
    const Eigen::Index n = K.rows();
    if (n > 12) throw DimensionError("dense du/dK oracle refuses n = " + std::to_string(n) + " > 12");
    if (K.cols() != n || p.size() != n) throw DimensionError("dense du/dK oracle: shape mismatch");
    const Eigen::MatrixXd Kinv = K.inverse();
    const Eigen::VectorXd u = Kinv * p;
    std::vector<Eigen::MatrixXd> slabs;
    slabs.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) slabs.push_back(-u[j] * Kinv);
    return slabs;
}

Eigen::MatrixXd contract_dudK(const std::vector<Eigen::MatrixXd>& tensor, const Eigen::VectorXd& u_bar) {
    const auto n = static_cast<Eigen::Index>(tensor.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.col(j) = tensor[static_cast<std::size_t>(j)].transpose() * u_bar;
    }
    return out;
}

}  // namespace diffstiff
