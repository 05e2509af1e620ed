#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "diffstiff/model.hpp"

namespace diffstiff {

/// Symmetric matrix over the free DOFs, lower triangle in compressed sparse
/// column form. Upper entries are implied by symmetry.
struct SparseSym {
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> lower;

    Eigen::Index n() const noexcept { return lower.rows(); }
    Eigen::Index nnz() const noexcept { return lower.nonZeros(); }
    /// Full symmetric matrix as dense; debugging and small oracles only.
    Eigen::MatrixXd dense() const;
};

/// Destination of one element-matrix entry (l, m).
///   >= 0        : index into SparseSym::lower.valuePtr() (row >= col)
///   kMirrored(i): entry lands in the upper triangle; i is the lower slot
///   kFixed      : row or column is a fixed DOF
struct ScatterCode {
    static constexpr std::ptrdiff_t kFixed = -1;
    static constexpr std::ptrdiff_t mirrored(std::ptrdiff_t slot) { return -2 - slot; }
    static constexpr bool is_mirrored(std::ptrdiff_t code) { return code <= -2; }
    static constexpr std::ptrdiff_t slot(std::ptrdiff_t code) {
        return code >= 0 ? code : -2 - code;
    }
};

struct AssemblyPlan {
    std::size_t n_free = 0;
    /// Empty lower-triangle matrix carrying the sparsity pattern.
    SparseSym pattern;
    /// Per element: global DOFs in element order and the row-major
    /// (ndof x ndof) scatter codes.
    std::vector<std::vector<std::size_t>> dofs;
    std::vector<std::vector<std::ptrdiff_t>> scatter;
};

/// Pattern and scatter indices depend only on topology and supports.
AssemblyPlan plan_assembly(const Model& model, const DofMap& dofmap);

/// Zeroed matrix with the plan's pattern.
SparseSym empty_stiffness(const AssemblyPlan& plan);

/// Adds element e's global stiffness into K (lower entries only).
void scatter_add(const AssemblyPlan& plan, std::size_t element,
                 const Eigen::Ref<const Eigen::MatrixXd>& k, SparseSym& K);

/// K = sum of scattered element stiffnesses in element order. Throws
/// DimensionError when the matrices do not match the plan.
SparseSym assemble(const AssemblyPlan& plan, std::span<const Eigen::MatrixXd> element_stiffness);

struct ReducedLoad {
    Eigen::VectorXd free;   // length n_free
    Eigen::VectorXd fixed;  // loads landing on supports, for reaction reporting
};

/// Scatters nodal forces/moments onto the free DOFs; repeated loads add up.
/// Moments on a translational-only model are ignored.
ReducedLoad reduce_load(std::span<const Load> loads, const DofMap& dofmap);

}  // namespace diffstiff
