#include "diffstiff/analysis.hpp"

#include <string>

#include "diffstiff/errors.hpp"

namespace diffstiff {

std::shared_ptr<const Topology> make_topology(const Model& model) {
    auto t = std::make_shared<Topology>();
    t->dofs = build_dof_map(model);
    t->plan = plan_assembly(model, t->dofs);
    return t;
}

Eigen::VectorXd ElementState::local_forces() const {
    if (const auto* t = std::get_if<TrussMatrices>(&m)) {
        return t->gamma * (t->k * t->u);
    }
    const auto& f = std::get<FrameMatrices>(m);
    return f.gamma * (f.k * f.u);
}

double AnalysisCache::displacement(std::size_t node, Axis axis) const {
    return u_full[static_cast<Eigen::Index>(dofs().global(node, static_cast<int>(axis)))];
}

namespace {

ElementState element_state(const Model& model, const Element& e) {
    ElementState s;
    s.kind = e.kind;
    const auto& mat = model.materials()[e.material];
    s.E = mat.E;
    s.G = mat.G;
    s.section = section_properties(e.section);
    try {
        s.geometry = element_geometry(model.nodes()[e.start].position, model.nodes()[e.end].position);
    } catch (const GeometryError&) {
        throw GeometryError("element " + std::to_string(e.id) + " has zero length");
    }
    const double L = s.geometry.L;
    if (e.kind == ElementKind::Truss) {
        TrussMatrices t;
        t.gamma = transformation_truss(s.geometry.c);
        t.kloc = local_stiffness_truss(s.E, s.section.A, L);
        t.k = global_element_stiffness(t.gamma, t.kloc);
        s.m = t;
    } else {
        FrameMatrices f;
        f.gamma = transformation_frame(s.geometry.c, e.roll);
        f.kloc = local_stiffness_frame(s.E, s.G, s.section.A, s.section.Iy, s.section.Iz,
                                       s.section.J, L);
        f.k = global_element_stiffness(f.gamma, f.kloc);
        s.m = f;
    }
    return s;
}

}  // namespace

AnalysisCache analyze(Model model, std::shared_ptr<const Topology> topology,
                      std::optional<Factorization> reuse) {
    AnalysisCache c;
    c.model = std::move(model);
    c.topology = std::move(topology);
    const auto& plan = c.plan();
    if (plan.dofs.size() != c.model.elements().size()) {
        throw DimensionError("topology does not match the model");
    }
    c.elements.reserve(c.model.elements().size());
    c.K = empty_stiffness(plan);
    for (std::size_t i = 0; i < c.model.elements().size(); ++i) {
        c.elements.push_back(element_state(c.model, c.model.elements()[i]));
        std::visit([&](const auto& mats) { scatter_add(plan, i, mats.k, c.K); }, c.elements.back().m);
    }
    c.p = reduce_load(c.model.loads(), c.dofs()).free;
    c.factorization = factorize(c.K, std::move(reuse));
    c.u = c.factorization.solve(c.p);

    const auto& dm = c.dofs();
    c.u_full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dm.n_total));
    for (std::size_t i = 0; i < dm.free.size(); ++i) {
        c.u_full[static_cast<Eigen::Index>(dm.free[i])] = c.u[static_cast<Eigen::Index>(i)];
    }
    for (std::size_t i = 0; i < c.elements.size(); ++i) {
        const auto& dofs = plan.dofs[i];
        std::visit(
            [&](auto& mats) {
                for (std::size_t l = 0; l < dofs.size(); ++l) {
                    mats.u[static_cast<Eigen::Index>(l)] = c.u_full[static_cast<Eigen::Index>(dofs[l])];
                }
            },
            c.elements[i].m);
    }
    return c;
}

AnalysisCache analyze(Model model) {
    auto topology = make_topology(model);
    return analyze(std::move(model), std::move(topology));
}

}  // namespace diffstiff
