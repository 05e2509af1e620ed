#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "diffstiff/assembly.hpp"

namespace diffstiff {

/// Sparse LDL^T of a symmetric positive-definite K with fill-reducing
/// ordering. Move-only. The symbolic analysis survives refactor() as long as
/// the pattern is unchanged. solve() is const and safe to call concurrently.
class Factorization {
public:
    Factorization();
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;
    Factorization(const Factorization&) = delete;
    Factorization& operator=(const Factorization&) = delete;

    /// Symbolic + numeric. Throws NotPositiveDefinite.
    static Factorization compute(const SparseSym& K);

    /// Numeric only; throws DimensionError when the pattern differs.
    void refactor(const SparseSym& K);

    bool same_pattern(const SparseSym& K) const;

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

    std::size_t n() const noexcept { return n_; }
    /// Number of numeric factorizations run on this symbolic analysis.
    std::size_t numeric_count() const noexcept { return numeric_count_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t n_ = 0;
    std::size_t numeric_count_ = 0;
    std::vector<int> outer_;
    std::vector<int> inner_;

    void check_pivots(const SparseSym& K) const;
};

/// Reuses `previous`'s symbolic analysis when its pattern matches K.
Factorization factorize(const SparseSym& K, std::optional<Factorization> previous = std::nullopt);

inline Eigen::VectorXd solve(const Factorization& f, const Eigen::VectorXd& b) {
    return f.solve(b);
}

}  // namespace diffstiff
