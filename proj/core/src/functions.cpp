#include "diffstiff/functions.hpp"

#include <cmath>
#include <sstream>
#include <type_traits>

#include "diffstiff/errors.hpp"

namespace diffstiff {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double element_length(const Model& m, const Element& e) {
    return (m.nodes()[e.end].position - m.nodes()[e.start].position).norm();
}

// index of the axial force and the two end moments about the major axis
constexpr int kAxial[2] = {1, 6};  // truss, frame

void major_moments(const SectionProperties& s, int& a, int& b) {
    if (s.Iy >= s.Iz) {
        a = 4;
        b = 10;
    } else {
        a = 5;
        b = 11;
    }
}

double tube_diameter(const Element& e) {
    const auto* t = std::get_if<TubeSection>(&e.section);
    if (!t) throw ValidationError("diameter ordering needs tube sections");
    return t->d;
}

}  // namespace

double volume(const Model& model) {
    double v = 0.0;
    for (const auto& e : model.elements()) v += section_properties(e.section).A * element_length(model, e);
    return v;
}

double compliance(const Eigen::VectorXd& u, const Eigen::VectorXd& p) {
    if (u.size() != p.size()) throw DimensionError("u and p lengths differ");
    return u.dot(p);
}

double embodied_carbon(const Model& model) {
    double v = 0.0;
    for (const auto& e : model.elements()) {
        const auto& m = model.materials()[e.material];
        v += m.ecc * m.rho * section_properties(e.section).A * element_length(model, e);
    }
    return v;
}

double mass(const Model& model) {
    double v = 0.0;
    for (const auto& e : model.elements()) {
        v += model.materials()[e.material].rho * section_properties(e.section).A * element_length(model, e);
    }
    return v;
}

Eigen::VectorXd element_forces(const AnalysisCache& cache, std::size_t element) {
    return cache.elements.at(element).local_forces();
}

Eigen::VectorXd reactions(const AnalysisCache& cache) {
    const auto& dofs = cache.dofs();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dofs.fixed.size()));
    for (std::size_t e = 0; e < cache.elements.size(); ++e) {
        const auto& ed = cache.plan().dofs[e];
        const Eigen::VectorXd f = std::visit([](const auto& m) { return Eigen::VectorXd(m.k * m.u); },
                                             cache.elements[e].m);
        for (std::size_t l = 0; l < ed.size(); ++l) {
            if (const auto i = dofs.fixed_index[ed[l]]; i >= 0) r[i] += f[static_cast<Eigen::Index>(l)];
        }
    }
    return r - reduce_load(cache.model.loads(), dofs).fixed;
}

double axial_force(const AnalysisCache& cache, std::size_t element) {
    const auto& st = cache.elements.at(element);
    return st.local_forces()[st.kind == ElementKind::Truss ? kAxial[0] : kAxial[1]];
}

double axial_stress(double N, double A) {
    if (!(A > 0.0)) throw ValidationError("axial stress needs A > 0");
    return N / A;
}

double combined_stress(double N, double M, double A, double S) {
    if (!(A > 0.0 && S > 0.0)) throw ValidationError("combined stress needs A, S > 0");
    return std::abs(N) / A + std::abs(M) / S;
}

double frame_combined_stress(const AnalysisCache& cache, std::size_t element) {
    const auto& st = cache.elements.at(element);
    if (st.kind != ElementKind::Frame) throw ValidationError("combined stress needs a frame element");
    const auto F = element_forces(cache, element);
    int a = 0, b = 0;
    major_moments(st.section, a, b);
    const double M = std::max(std::abs(F[a]), std::abs(F[b]));
    return combined_stress(F[6], M, st.section.A, st.section.S);
}

std::vector<ConstraintRow> constraint_catalog(const Problem& problem) {
    std::vector<ConstraintRow> rows;
    const auto& model = problem.model;
    for (const auto& spec : problem.constraints) {
        std::visit(
            [&](const auto& c) {
                using C = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<C, DisplacementLimit>) {
                    for (auto n : c.nodes) rows.emplace_back(DisplacementRow{n, c.axis, c.limit});
                } else if constexpr (std::is_same_v<C, AxialStressLimit>) {
                    for (auto e : c.elements) {
                        if (c.sigma_max) {
                            rows.emplace_back(AxialRow{e, AxialRow::Side::Both, *c.sigma_max});
                        } else {
                            const auto& mat = model.materials()[model.elements()[e].material];
                            rows.emplace_back(AxialRow{e, AxialRow::Side::Tension, mat.sigma_t});
                            rows.emplace_back(AxialRow{e, AxialRow::Side::Compression, mat.sigma_c});
                        }
                    }
                } else if constexpr (std::is_same_v<C, CombinedStressLimit>) {
                    for (auto e : c.elements) rows.emplace_back(CombinedRow{e, c.sigma_max});
                } else {
                    rows.emplace_back(OrderingRow{c.lesser.front(), c.greater.front()});
                }
            },
            spec);
    }
    return rows;
}

std::string describe(const ConstraintRow& row, const Model& model) {
    std::ostringstream os;
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, DisplacementRow>) {
                os << "disp node " << model.nodes()[r.node].id << " " << "xyz"[static_cast<int>(r.axis)];
            } else if constexpr (std::is_same_v<R, AxialRow>) {
                os << "axial elem " << model.elements()[r.element].id
                   << (r.side == AxialRow::Side::Both ? "" : (r.side == AxialRow::Side::Tension ? " t" : " c"));
            } else if constexpr (std::is_same_v<R, CombinedRow>) {
                os << "combined elem " << model.elements()[r.element].id;
            } else {
                os << "d(" << model.elements()[r.lesser].id << ") <= d(" << model.elements()[r.greater].id << ")";
            }
        },
        row);
    return os.str();
}

double objective_value(ObjectiveKind kind, const AnalysisCache& cache) {
    switch (kind) {
        case ObjectiveKind::Volume: {
            double v = 0.0;
            for (const auto& st : cache.elements) v += st.section.A * st.geometry.L;
            return v;
        }
        case ObjectiveKind::Compliance:
            return compliance(cache.u, cache.p);
        case ObjectiveKind::EmbodiedCarbon: {
            double v = 0.0;
            for (std::size_t e = 0; e < cache.elements.size(); ++e) {
                const auto& st = cache.elements[e];
                const auto& m = cache.model.materials()[cache.model.elements()[e].material];
                v += m.ecc * m.rho * st.section.A * st.geometry.L;
            }
            return v;
        }
    }
    return 0.0;
}

OutputSeeds objective_seeds(ObjectiveKind kind, const AnalysisCache& cache) {
    OutputSeeds s;
    if (kind == ObjectiveKind::Compliance) {
        s.u_bar = cache.p;
        return s;
    }
    s.elements.reserve(cache.elements.size());
    for (std::size_t e = 0; e < cache.elements.size(); ++e) {
        const auto& st = cache.elements[e];
        double w = 1.0;
        if (kind == ObjectiveKind::EmbodiedCarbon) {
            const auto& m = cache.model.materials()[cache.model.elements()[e].material];
            w = m.ecc * m.rho;
        }
        ElementSeed es;
        es.A = w * st.geometry.L;
        es.L = w * st.section.A;
        s.elements.emplace_back(e, std::move(es));
    }
    return s;
}

namespace {

struct AxialParts {
    int index;
    double N;
    double sigma;
};

AxialParts axial_parts(const AnalysisCache& cache, std::size_t e, const Eigen::VectorXd& F) {
    const auto& st = cache.elements[e];
    const int i = st.kind == ElementKind::Truss ? kAxial[0] : kAxial[1];
    return {i, F[i], F[i] / st.section.A};
}

double axial_row_scale(const AxialRow& r, double sigma) {
    switch (r.side) {
        case AxialRow::Side::Both: return sgn(sigma) / r.limit;
        case AxialRow::Side::Tension: return 1.0 / r.limit;
        case AxialRow::Side::Compression: return -1.0 / r.limit;
    }
    return 0.0;
}

}  // namespace

double row_value(const ConstraintRow& row, const AnalysisCache& cache) {
    return std::visit(
        [&](const auto& r) -> double {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, DisplacementRow>) {
                return std::abs(cache.displacement(r.node, r.axis)) / r.limit - 1.0;
            } else if constexpr (std::is_same_v<R, AxialRow>) {
                const auto F = element_forces(cache, r.element);
                const double sigma = axial_parts(cache, r.element, F).sigma;
                switch (r.side) {
                    case AxialRow::Side::Both: return std::abs(sigma) / r.limit - 1.0;
                    case AxialRow::Side::Tension: return sigma / r.limit - 1.0;
                    case AxialRow::Side::Compression: return -sigma / r.limit - 1.0;
                }
                return 0.0;
            } else if constexpr (std::is_same_v<R, CombinedRow>) {
                return frame_combined_stress(cache, r.element) / r.limit - 1.0;
            } else {
                const auto& els = cache.model.elements();
                return tube_diameter(els[r.lesser]) / tube_diameter(els[r.greater]) - 1.0;
            }
        },
        row);
}

OutputSeeds row_seeds(const ConstraintRow& row, const AnalysisCache& cache) {
    OutputSeeds s;
    std::visit(
        [&](const auto& r) {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, DisplacementRow>) {
                const auto g = cache.dofs().global(r.node, static_cast<int>(r.axis));
                s.u_bar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cache.dofs().n_free()));
                if (const auto i = cache.dofs().free_index[g]; i >= 0) {
                    s.u_bar[i] = sgn(cache.u[i]) / r.limit;
                }
            } else if constexpr (std::is_same_v<R, AxialRow>) {
                const auto& st = cache.elements[r.element];
                const auto F = element_forces(cache, r.element);
                const auto parts = axial_parts(cache, r.element, F);
                const double w = axial_row_scale(r, parts.sigma);
                auto& es = s.element(r.element);
                es.force_bar = Eigen::VectorXd::Zero(F.size());
                es.force_bar[parts.index] = w / st.section.A;
                es.A = -w * parts.N / (st.section.A * st.section.A);
            } else if constexpr (std::is_same_v<R, CombinedRow>) {
                const auto& st = cache.elements[r.element];
                const auto F = element_forces(cache, r.element);
                int a = 0, b = 0;
                major_moments(st.section, a, b);
                const int im = std::abs(F[a]) >= std::abs(F[b]) ? a : b;
                const double N = F[6];
                const double M = F[im];
                const double A = st.section.A;
                const double S = st.section.S;
                auto& es = s.element(r.element);
                es.force_bar = Eigen::VectorXd::Zero(F.size());
                es.force_bar[6] = sgn(N) / A / r.limit;
                es.force_bar[im] = sgn(M) / S / r.limit;
                es.A = -std::abs(N) / (A * A) / r.limit;
                es.S = -std::abs(M) / (S * S) / r.limit;
            } else {
                const auto& els = cache.model.elements();
                const double dl = tube_diameter(els[r.lesser]);
                const double dg = tube_diameter(els[r.greater]);
                s.element(r.lesser).d += 1.0 / dg;
                s.element(r.greater).d += -dl / (dg * dg);
            }
        },
        row);
    return s;
}

Eigen::VectorXd evaluate_constraints(const Problem& problem, const AnalysisCache& cache) {
    const auto rows = constraint_catalog(problem);
    Eigen::VectorXd g(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) g[static_cast<Eigen::Index>(i)] = row_value(rows[i], cache);
    return g;
}

}  // namespace diffstiff
