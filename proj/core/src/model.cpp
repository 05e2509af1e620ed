#include "diffstiff/model.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "diffstiff/elements.hpp"
#include "diffstiff/errors.hpp"

namespace diffstiff {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Model::Model(std::vector<Node> nodes, std::vector<Material> materials,
             std::vector<Element> elements, std::vector<Load> loads)
    : nodes_(std::move(nodes)),
      materials_(std::move(materials)),
      elements_(std::move(elements)),
      loads_(std::move(loads)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!node_lookup_.emplace(nodes_[i].id, i).second) {
            throw ValidationError("duplicate node id " + std::to_string(nodes_[i].id));
        }
    }
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (!element_lookup_.emplace(elements_[i].id, i).second) {
            throw ValidationError("duplicate element id " + std::to_string(elements_[i].id));
        }
    }
}

std::size_t Model::node_index(int id) const {
    auto it = node_lookup_.find(id);
    if (it == node_lookup_.end()) throw ValidationError("unknown node id " + std::to_string(id));
    return it->second;
}

std::size_t Model::element_index(int id) const {
    auto it = element_lookup_.find(id);
    if (it == element_lookup_.end()) {
        throw ValidationError("unknown element id " + std::to_string(id));
    }
    return it->second;
}

std::size_t Model::material_index(const std::string& name) const {
    for (std::size_t i = 0; i < materials_.size(); ++i) {
        if (materials_[i].name == name) return i;
    }
    throw ValidationError("unknown material '" + name + "'");
}

bool Model::has_frames() const noexcept {
    for (const auto& e : elements_) {
        if (e.kind == ElementKind::Frame) return true;
    }
    return false;
}

Model Model::with_positions(std::vector<Vec3> positions) const {
    if (positions.size() != nodes_.size()) throw DimensionError("position count mismatch");
    Model m = *this;
    for (std::size_t i = 0; i < positions.size(); ++i) m.nodes_[i].position = positions[i];
    return m;
}

Model Model::with_sections(std::vector<Section> sections) const {
    if (sections.size() != elements_.size()) throw DimensionError("section count mismatch");
    Model m = *this;
    for (std::size_t i = 0; i < sections.size(); ++i) m.elements_[i].section = std::move(sections[i]);
    return m;
}

Model Model::with_material(std::span<const std::size_t> elements, std::size_t material) const {
    if (material >= materials_.size()) throw DimensionError("material index out of range");
    Model m = *this;
    for (std::size_t e : elements) {
        if (e >= elements_.size()) throw DimensionError("element index out of range");
        m.elements_[e].material = material;
    }
    return m;
}

namespace {

bool same_section(const Section& a, const Section& b) {
    if (a.index() != b.index()) return false;
    if (const auto* ea = std::get_if<ExplicitSection>(&a)) {
        const auto& eb = std::get<ExplicitSection>(b);
        return ea->A == eb.A && ea->Iy == eb.Iy && ea->Iz == eb.Iz && ea->J == eb.J && ea->S == eb.S;
    }
    const auto& ta = std::get<TubeSection>(a);
    const auto& tb = std::get<TubeSection>(b);
    return ta.d == tb.d && ta.alpha == tb.alpha;
}

}  // namespace

bool operator==(const Model& a, const Model& b) {
    if (a.nodes_.size() != b.nodes_.size() || a.elements_.size() != b.elements_.size() ||
        a.materials_.size() != b.materials_.size() || a.loads_.size() != b.loads_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
        const auto& na = a.nodes_[i];
        const auto& nb = b.nodes_[i];
        if (na.id != nb.id || na.position != nb.position || na.fixed != nb.fixed) return false;
    }
    for (std::size_t i = 0; i < a.elements_.size(); ++i) {
        const auto& ea = a.elements_[i];
        const auto& eb = b.elements_[i];
        if (ea.id != eb.id || ea.start != eb.start || ea.end != eb.end ||
            ea.material != eb.material || ea.kind != eb.kind || ea.roll != eb.roll ||
            !same_section(ea.section, eb.section)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.materials_.size(); ++i) {
        const auto& ma = a.materials_[i];
        const auto& mb = b.materials_[i];
        if (ma.name != mb.name || ma.E != mb.E || ma.G != mb.G || ma.rho != mb.rho ||
            ma.ecc != mb.ecc || ma.sigma_t != mb.sigma_t || ma.sigma_c != mb.sigma_c) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.loads_.size(); ++i) {
        const auto& la = a.loads_[i];
        const auto& lb = b.loads_[i];
        if (la.node != lb.node || la.force != lb.force || la.moment != lb.moment) return false;
    }
    return true;
}

std::vector<std::size_t> element_dofs(const Element& e, const DofMap& dofs) {
    const int per_end = e.kind == ElementKind::Frame ? 6 : 3;
    std::vector<std::size_t> out;
    out.reserve(2 * per_end);
    for (std::size_t node : {e.start, e.end}) {
        for (int l = 0; l < per_end; ++l) out.push_back(dofs.global(node, l));
    }
    return out;
}

DofMap build_dof_map(const Model& model) {
    DofMap m;
    m.dofs_per_node = model.dofs_per_node();
    m.n_total = model.nodes().size() * static_cast<std::size_t>(m.dofs_per_node);
    m.free_index.assign(m.n_total, -1);
    m.fixed_index.assign(m.n_total, -1);
    for (std::size_t n = 0; n < model.nodes().size(); ++n) {
        const auto& node = model.nodes()[n];
        for (int l = 0; l < m.dofs_per_node; ++l) {
            const std::size_t g = m.global(n, l);
            if (node.fixed[static_cast<std::size_t>(l)]) {
                m.fixed_index[g] = static_cast<std::ptrdiff_t>(m.fixed.size());
                m.fixed.push_back(g);
            } else {
                m.free_index[g] = static_cast<std::ptrdiff_t>(m.free.size());
                m.free.push_back(g);
            }
        }
    }
    if (m.free.empty()) throw ValidationError("model has no free degrees of freedom");
    return m;
}

// ---------------------------------------------------------------------------

std::vector<double> Problem::initial_point() const {
    std::vector<double> x;
    x.reserve(variables.size());
    for (const auto& v : variables) x.push_back(v.initial);
    return x;
}

std::vector<double> Problem::lower_bounds() const {
    std::vector<double> x;
    x.reserve(variables.size());
    for (const auto& v : variables) x.push_back(v.lower);
    return x;
}

std::vector<double> Problem::upper_bounds() const {
    std::vector<double> x;
    x.reserve(variables.size());
    for (const auto& v : variables) x.push_back(v.upper);
    return x;
}

std::size_t Problem::constraint_rows() const {
    std::size_t rows = 0;
    for (const auto& c : constraints) {
        rows += std::visit(
            overloaded{
                [](const DisplacementLimit& d) { return d.nodes.size(); },
                [](const AxialStressLimit& s) {
                    return s.sigma_max ? s.elements.size() : 2 * s.elements.size();
                },
                [](const CombinedStressLimit& s) { return s.elements.size(); },
                [](const DiameterOrdering&) { return std::size_t{1}; },
            },
            c);
    }
    return rows;
}

Model Problem::initial_model() const {
    const auto x = initial_point();
    return apply_variables(*this, x);
}

Model apply_variables(const Problem& problem, std::span<const double> x) {
    if (x.size() != problem.variables.size()) {
        throw DimensionError("design vector has " + std::to_string(x.size()) +
                             " entries, problem has " +
                             std::to_string(problem.variables.size()) + " variables");
    }
    const Model& base = problem.model;
    std::vector<Vec3> positions;
    positions.reserve(base.nodes().size());
    for (const auto& n : base.nodes()) positions.push_back(n.position);
    std::vector<Section> sections;
    sections.reserve(base.elements().size());
    for (const auto& e : base.elements()) sections.push_back(e.section);

    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        std::visit(overloaded{
                       [&](const NodeOffset& v) {
                           for (const auto& t : v.targets) {
                               positions[t.node][static_cast<int>(t.axis)] += t.coefficient * xi;
                           }
                       },
                       [&](const ProjectedOffset& v) {
                           for (const auto& t : v.targets) positions[t.node] += xi * t.direction;
                       },
                       [&](const AreaVariable& v) {
                           for (auto e : v.elements) std::get<ExplicitSection>(sections[e]).A = xi;
                       },
                       [&](const TubeDiameterVariable& v) {
                           for (auto e : v.elements) std::get<TubeSection>(sections[e]).d = xi;
                       },
                       [&](const TubeRatioVariable& v) {
                           for (auto e : v.elements) std::get<TubeSection>(sections[e]).alpha = xi;
                       },
                   },
                   problem.variables[i].kind);
    }
    return base.with_positions(std::move(positions)).with_sections(std::move(sections));
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw UnitError("non-finite value in " + what);
}

std::string element_label(const Model& m, std::size_t e) {
    return "element " + std::to_string(m.elements()[e].id);
}

}  // namespace

void validate(const Problem& problem) {
    const Model& m = problem.model;
    for (const auto& n : m.nodes()) {
        for (int k = 0; k < 3; ++k) require_finite(n.position[k], "node " + std::to_string(n.id));
    }
    for (const auto& mat : m.materials()) {
        for (double v : {mat.E, mat.G, mat.rho, mat.ecc, mat.sigma_t, mat.sigma_c}) {
            require_finite(v, "material " + mat.name);
        }
        require(mat.E > 0 && mat.G > 0, "material " + mat.name + ": E and G must be positive");
        require(mat.rho >= 0 && mat.ecc >= 0, "material " + mat.name + ": rho and ecc must be >= 0");
        require(mat.sigma_t > 0 && mat.sigma_c > 0,
                "material " + mat.name + ": stress limits must be positive");
        if (mat.area_bounds) {
            const auto& b = *mat.area_bounds;
            require(b.lower > 0 && b.lower <= b.initial && b.initial <= b.upper,
                    "material " + mat.name + ": area bounds must satisfy 0 < lower <= initial <= upper");
        }
    }
    require(!m.elements().empty(), "model has no elements");
    for (std::size_t i = 0; i < m.elements().size(); ++i) {
        const auto& e = m.elements()[i];
        require(e.start != e.end, element_label(m, i) + " connects a node to itself");
        require(e.material < m.materials().size(), element_label(m, i) + ": bad material");
        require_finite(e.roll, element_label(m, i));
        if (const auto* s = std::get_if<ExplicitSection>(&e.section)) {
            for (double v : {s->A, s->Iy, s->Iz, s->J, s->S}) require_finite(v, element_label(m, i));
            require(s->A > 0, element_label(m, i) + ": section area must be positive");
            if (e.kind == ElementKind::Frame) {
                require(s->Iy > 0 && s->Iz > 0 && s->J > 0 && s->S > 0,
                        element_label(m, i) + ": frame sections need positive Iy, Iz, J, S");
            }
        } else {
            const auto& t = std::get<TubeSection>(e.section);
            require_finite(t.d, element_label(m, i));
            require_finite(t.alpha, element_label(m, i));
            require(t.d > 0 && t.alpha >= 0 && t.alpha < 1,
                    element_label(m, i) + ": tube needs d > 0 and 0 <= alpha < 1");
        }
    }
    const bool frames = m.has_frames();
    for (const auto& l : m.loads()) {
        require(l.node < m.nodes().size(), "load on unknown node");
        for (int k = 0; k < 3; ++k) {
            require_finite(l.force[k], "load");
            require_finite(l.moment[k], "load");
        }
        require(frames || l.moment.isZero(), "moments are only allowed on frame models");
    }

    require(!problem.variables.empty(), "problem defines no design variables");
    std::set<std::pair<std::size_t, int>> written;  // (element, property)
    auto claim = [&](std::size_t e, int property, const std::string& name) {
        require(e < m.elements().size(), "variable " + name + " references a missing element");
        require(written.emplace(e, property).second,
                element_label(m, e) + " is controlled by more than one variable (" + name + ")");
    };
    for (const auto& v : problem.variables) {
        require_finite(v.lower, "variable " + v.name);
        require_finite(v.upper, "variable " + v.name);
        require_finite(v.initial, "variable " + v.name);
        require(v.lower <= v.initial && v.initial <= v.upper,
                "variable " + v.name + ": bounds must satisfy lower <= initial <= upper");
        std::visit(
            overloaded{
                [&](const NodeOffset& o) {
                    require(!o.targets.empty(), "variable " + v.name + " has no targets");
                    for (const auto& t : o.targets) {
                        require(t.node < m.nodes().size(), "variable " + v.name + ": bad node");
                        require_finite(t.coefficient, "variable " + v.name);
                    }
                },
                [&](const ProjectedOffset& o) {
                    require(!o.targets.empty(), "variable " + v.name + " has no targets");
                    for (const auto& t : o.targets) {
                        require(t.node < m.nodes().size(), "variable " + v.name + ": bad node");
                        require(std::abs(t.direction.norm() - 1.0) < 1e-9,
                                "variable " + v.name + ": direction must be a unit vector");
                    }
                },
                [&](const AreaVariable& a) {
                    require(!a.elements.empty(), "variable " + v.name + " has no elements");
                    require(v.lower > 0, "variable " + v.name + ": area lower bound must be positive");
                    for (auto e : a.elements) {
                        claim(e, 0, v.name);
                        require(std::holds_alternative<ExplicitSection>(m.elements()[e].section),
                                "variable " + v.name + ": area variables need explicit sections");
                    }
                },
                [&](const TubeDiameterVariable& a) {
                    require(!a.elements.empty(), "variable " + v.name + " has no elements");
                    require(v.lower > 0, "variable " + v.name + ": diameter lower bound must be positive");
                    for (auto e : a.elements) {
                        claim(e, 1, v.name);
                        require(std::holds_alternative<TubeSection>(m.elements()[e].section),
                                "variable " + v.name + ": diameter variables need tube sections");
                    }
                },
                [&](const TubeRatioVariable& a) {
                    require(!a.elements.empty(), "variable " + v.name + " has no elements");
                    require(v.lower >= 0 && v.upper < 1,
                            "variable " + v.name + ": ratio bounds must lie in [0, 1)");
                    for (auto e : a.elements) {
                        claim(e, 2, v.name);
                        require(std::holds_alternative<TubeSection>(m.elements()[e].section),
                                "variable " + v.name + ": ratio variables need tube sections");
                    }
                },
            },
            v.kind);
    }

    for (const auto& c : problem.constraints) {
        std::visit(
            overloaded{
                [&](const DisplacementLimit& d) {
                    require(!d.nodes.empty(), "displacement constraint selects no nodes");
                    require(std::isfinite(d.limit) && d.limit > 0, "displacement limit must be positive");
                    for (auto n : d.nodes) require(n < m.nodes().size(), "displacement constraint: bad node");
                },
                [&](const AxialStressLimit& s) {
                    require(!s.elements.empty(), "stress constraint selects no elements");
                    if (s.sigma_max) {
                        require(std::isfinite(*s.sigma_max) && *s.sigma_max > 0,
                                "stress limit must be positive");
                    }
                    for (auto e : s.elements) require(e < m.elements().size(), "stress constraint: bad element");
                },
                [&](const CombinedStressLimit& s) {
                    require(!s.elements.empty(), "stress constraint selects no elements");
                    require(std::isfinite(s.sigma_max) && s.sigma_max > 0, "stress limit must be positive");
                    for (auto e : s.elements) {
                        require(e < m.elements().size(), "stress constraint: bad element");
                        require(m.elements()[e].kind == ElementKind::Frame,
                                "combined stress needs frame elements (" + element_label(m, e) + ")");
                    }
                },
                [&](const DiameterOrdering& d) {
                    require(!d.lesser.empty() && !d.greater.empty(), "diameter ordering needs both groups");
                    for (const auto* group : {&d.lesser, &d.greater}) {
                        for (auto e : *group) {
                            require(e < m.elements().size(), "diameter ordering: bad element");
                            require(std::holds_alternative<TubeSection>(m.elements()[e].section),
                                    "diameter ordering needs tube sections");
                        }
                    }
                },
            },
            c);
    }

    const auto& o = problem.optimizer;
    require(o.rel_tolerance > 0, "optimizer rel_tolerance must be positive");
    require(o.population >= 2, "optimizer population must be at least 2");
    require(o.time_limit > 0, "optimizer time limit must be positive");
    require(o.max_iterations > 0, "optimizer max_iterations must be positive");
    require(o.memory >= 1, "optimizer memory must be at least 1");
    require(o.move_limit > 0 && o.move_limit <= 1, "optimizer move limit must lie in (0, 1]");
    require(o.fd_step > 0, "optimizer fd_step must be positive");
}

std::string to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::Volume: return "volume";
        case ObjectiveKind::Compliance: return "compliance";
        case ObjectiveKind::EmbodiedCarbon: return "embodied_carbon";
    }
    return "?";
}

std::string to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::MMA: return "mma";
        case Algorithm::LBFGS: return "lbfgs";
        case Algorithm::GA: return "ga";
    }
    return "?";
}

std::string to_string(GradientMode mode) {
    return mode == GradientMode::Adjoint ? "adjoint" : "fd";
}

}  // namespace diffstiff
