#include "diffstiff/solve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "diffstiff/errors.hpp"

namespace diffstiff {

namespace {
// Pivot threshold relative to the largest diagonal entry of K.
constexpr double kPivotTolerance = 1e-12;
}  // namespace

struct Factorization::Impl {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::Lower,
                          Eigen::AMDOrdering<int>>
        ldlt;
};

Factorization::Factorization() : impl_(std::make_unique<Impl>()) {}
Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Factorization Factorization::compute(const SparseSym& K) {
    Factorization f;
    f.n_ = static_cast<std::size_t>(K.n());
    f.outer_.assign(K.lower.outerIndexPtr(), K.lower.outerIndexPtr() + K.n() + 1);
    f.inner_.assign(K.lower.innerIndexPtr(), K.lower.innerIndexPtr() + K.nnz());
    f.impl_->ldlt.analyzePattern(K.lower);
    f.impl_->ldlt.factorize(K.lower);
    f.numeric_count_ = 1;
    f.check_pivots(K);
    return f;
}

bool Factorization::same_pattern(const SparseSym& K) const {
    if (static_cast<std::size_t>(K.n()) != n_ || static_cast<std::size_t>(K.nnz()) != inner_.size()) {
        return false;
    }
    return std::equal(outer_.begin(), outer_.end(), K.lower.outerIndexPtr()) &&
           std::equal(inner_.begin(), inner_.end(), K.lower.innerIndexPtr());
}

void Factorization::refactor(const SparseSym& K) {
    if (!same_pattern(K)) {
        throw DimensionError("refactor: sparsity pattern differs from the analyzed one");
    }
    impl_->ldlt.factorize(K.lower);
    ++numeric_count_;
    check_pivots(K);
}

void Factorization::check_pivots(const SparseSym& K) const {
    double scale = 0.0;
    for (Eigen::Index j = 0; j < K.n(); ++j) {
        // first stored entry of each column is the diagonal when present
        const int p = K.lower.outerIndexPtr()[j];
        if (p < K.lower.outerIndexPtr()[j + 1] && K.lower.innerIndexPtr()[p] == j) {
            scale = std::max(scale, std::abs(K.lower.valuePtr()[p]));
        }
    }
    const auto& ldlt = impl_->ldlt;
    const auto& pinv = ldlt.permutationPinv().indices();
    if (ldlt.info() != Eigen::Success) {
        // Eigen stops at the first zero pivot; find it for the report
        const auto d = ldlt.vectorD();
        std::size_t at = 0;
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            if (!(d[i] > kPivotTolerance * scale)) {
                at = static_cast<std::size_t>(pinv[i]);
                break;
            }
        }
        throw NotPositiveDefinite("stiffness matrix is singular at free DOF " + std::to_string(at), at);
    }
    const auto d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d[i] > kPivotTolerance * scale)) {
            const auto at = static_cast<std::size_t>(pinv[i]);
            throw NotPositiveDefinite("stiffness matrix is not positive definite at free DOF " +
                                          std::to_string(at),
                                      at);
        }
    }
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) const {
    if (static_cast<std::size_t>(b.size()) != n_) {
        throw DimensionError("right-hand side has length " + std::to_string(b.size()) +
                             ", factorization is " + std::to_string(n_));
    }
    return impl_->ldlt.solve(b);
}

Factorization factorize(const SparseSym& K, std::optional<Factorization> previous) {
    if (previous && previous->same_pattern(K)) {
        Factorization f = std::move(*previous);
        f.refactor(K);
        return f;
    }
    return Factorization::compute(K);
}

}  // namespace diffstiff
