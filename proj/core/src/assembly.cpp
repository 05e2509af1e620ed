#include "diffstiff/assembly.hpp"

#include <algorithm>
#include <string>

#include "diffstiff/errors.hpp"

namespace diffstiff {

Eigen::MatrixXd SparseSym::dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd(lower);
    d.triangularView<Eigen::StrictlyUpper>() = d.transpose().triangularView<Eigen::StrictlyUpper>();
    return d;
}

AssemblyPlan plan_assembly(const Model& model, const DofMap& dofmap) {
    AssemblyPlan plan;
    plan.n_free = dofmap.n_free();
    const auto n = static_cast<Eigen::Index>(plan.n_free);

    // Column-wise sets of lower rows.
    std::vector<std::vector<int>> rows_of(plan.n_free);
    plan.dofs.reserve(model.elements().size());
    for (const auto& e : model.elements()) {
        auto dofs = element_dofs(e, dofmap);
        for (std::size_t gl : dofs) {
            const auto i = dofmap.free_index[gl];
            if (i < 0) continue;
            for (std::size_t gm : dofs) {
                const auto j = dofmap.free_index[gm];
                if (j < 0 || i < j) continue;
                rows_of[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
            }
        }
        plan.dofs.push_back(std::move(dofs));
    }

    std::vector<int> outer(plan.n_free + 1, 0);
    std::vector<int> inner;
    for (std::size_t j = 0; j < plan.n_free; ++j) {
        auto& r = rows_of[j];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        outer[j + 1] = outer[j] + static_cast<int>(r.size());
        inner.insert(inner.end(), r.begin(), r.end());
    }
    const auto nnz = static_cast<Eigen::Index>(inner.size());
    plan.pattern.lower.resize(n, n);
    plan.pattern.lower.resizeNonZeros(nnz);
    std::copy(outer.begin(), outer.end(), plan.pattern.lower.outerIndexPtr());
    std::copy(inner.begin(), inner.end(), plan.pattern.lower.innerIndexPtr());
    std::fill_n(plan.pattern.lower.valuePtr(), nnz, 0.0);

    auto slot_of = [&](int row, int col) -> std::ptrdiff_t {
        const int* first = inner.data() + outer[static_cast<std::size_t>(col)];
        const int* last = inner.data() + outer[static_cast<std::size_t>(col) + 1];
        const int* it = std::lower_bound(first, last, row);
        return it - inner.data();
    };

    plan.scatter.reserve(plan.dofs.size());
    for (const auto& dofs : plan.dofs) {
        const std::size_t nd = dofs.size();
        std::vector<std::ptrdiff_t> codes(nd * nd, ScatterCode::kFixed);
        for (std::size_t l = 0; l < nd; ++l) {
            const auto i = dofmap.free_index[dofs[l]];
            if (i < 0) continue;
            for (std::size_t m = 0; m < nd; ++m) {
                const auto j = dofmap.free_index[dofs[m]];
                if (j < 0) continue;
                if (i >= j) {
                    codes[l * nd + m] = slot_of(static_cast<int>(i), static_cast<int>(j));
                } else {
                    codes[l * nd + m] =
                        ScatterCode::mirrored(slot_of(static_cast<int>(j), static_cast<int>(i)));
                }
            }
        }
        plan.scatter.push_back(std::move(codes));
    }
    return plan;
}

SparseSym empty_stiffness(const AssemblyPlan& plan) {
    SparseSym K = plan.pattern;
    std::fill_n(K.lower.valuePtr(), K.lower.nonZeros(), 0.0);
    return K;
}

void scatter_add(const AssemblyPlan& plan, std::size_t element,
                 const Eigen::Ref<const Eigen::MatrixXd>& k, SparseSym& K) {
    const auto& codes = plan.scatter[element];
    const auto nd = static_cast<Eigen::Index>(plan.dofs[element].size());
    if (k.rows() != nd || k.cols() != nd) {
        throw DimensionError("element " + std::to_string(element) + " stiffness is " +
                             std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                             ", plan expects " + std::to_string(nd));
    }
    double* values = K.lower.valuePtr();
    for (Eigen::Index l = 0; l < nd; ++l) {
        for (Eigen::Index m = 0; m < nd; ++m) {
            const auto code = codes[static_cast<std::size_t>(l * nd + m)];
            if (code >= 0) values[code] += k(l, m);
        }
    }
}

SparseSym assemble(const AssemblyPlan& plan, std::span<const Eigen::MatrixXd> element_stiffness) {
    if (element_stiffness.size() != plan.dofs.size()) {
        throw DimensionError("plan covers " + std::to_string(plan.dofs.size()) + " elements, got " +
                             std::to_string(element_stiffness.size()));
    }
    SparseSym K = empty_stiffness(plan);
    for (std::size_t e = 0; e < element_stiffness.size(); ++e) {
        scatter_add(plan, e, element_stiffness[e], K);
    }
    return K;
}

ReducedLoad reduce_load(std::span<const Load> loads, const DofMap& dofmap) {
    ReducedLoad r;
    r.free = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofmap.n_free()));
    r.fixed = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofmap.fixed.size()));
    for (const auto& load : loads) {
        for (int l = 0; l < dofmap.dofs_per_node; ++l) {
            const double v = l < 3 ? load.force[l] : load.moment[l - 3];
            if (v == 0.0) continue;
            const std::size_t g = dofmap.global(load.node, l);
            if (const auto i = dofmap.free_index[g]; i >= 0) {
                r.free[i] += v;
            } else {
                r.fixed[dofmap.fixed_index[g]] += v;
            }
        }
    }
    return r;
}

}  // namespace diffstiff
