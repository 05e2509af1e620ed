#include "diffstiff/adjoint.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include "diffstiff/errors.hpp"
#include "frame_patterns.hpp"

namespace diffstiff {

ElementSeed& OutputSeeds::element(std::size_t e) {
    for (auto& [index, seed] : elements) {
        if (index == e) return seed;
    }
    elements.emplace_back(e, ElementSeed{});
    return elements.back().second;
}

StiffnessBar adjoint_solve(const AnalysisCache& cache, const Eigen::VectorXd& u_bar) {
    StiffnessBar b;
    b.y = cache.factorization.solve(u_bar);
    const auto& L = cache.K.lower;
    b.lower.resize(L.nonZeros());
    b.upper.resize(L.nonZeros());
    const auto& u = cache.u;
    const auto& y = b.y;
    for (Eigen::Index c = 0; c < L.outerSize(); ++c) {
        for (int s = L.outerIndexPtr()[c]; s < L.outerIndexPtr()[c + 1]; ++s) {
            const Eigen::Index r = L.innerIndexPtr()[s];
            b.lower[s] = -y[r] * u[c];
            b.upper[s] = -y[c] * u[r];
        }
    }
    return b;
}

namespace {

template <class M>
void gather(const StiffnessBar& kbar, const std::vector<std::ptrdiff_t>& codes, M& out) {
    const Eigen::Index nd = out.rows();
    for (Eigen::Index l = 0; l < nd; ++l) {
        for (Eigen::Index m = 0; m < nd; ++m) {
            const auto code = codes[static_cast<std::size_t>(l * nd + m)];
            if (code == ScatterCode::kFixed) {
                out(l, m) = 0.0;
            } else if (ScatterCode::is_mirrored(code)) {
                out(l, m) = kbar.upper[ScatterCode::slot(code)];
            } else {
                out(l, m) = kbar.lower[code];
            }
        }
    }
}

double frobenius(const Mat12& a, const Mat12& b) { return a.cwiseProduct(b).sum(); }

}  // namespace

Eigen::MatrixXd adjoint_assembly(const StiffnessBar& kbar, const AssemblyPlan& plan,
                                 std::size_t element) {
    const auto nd = static_cast<Eigen::Index>(plan.dofs.at(element).size());
    Eigen::MatrixXd out(nd, nd);
    gather(kbar, plan.scatter[element], out);
    return out;
}

TransformBar adjoint_transform(const Eigen::MatrixXd& k_bar, const Eigen::MatrixXd& gamma,
                               const Eigen::MatrixXd& kloc) {
    if (kloc.rows() != kloc.cols() || gamma.rows() != kloc.rows() || k_bar.rows() != gamma.cols() ||
        k_bar.cols() != gamma.cols()) {
        throw DimensionError("adjoint_transform: incompatible shapes");
    }
    return {kloc * gamma * (k_bar.transpose() + k_bar), gamma * k_bar * gamma.transpose()};
}

ElementForceBar adjoint_element_force(const Eigen::VectorXd& F_bar, const Eigen::MatrixXd& gamma,
                                      const Eigen::MatrixXd& k, const Eigen::VectorXd& u) {
    if (F_bar.size() != gamma.rows() || k.rows() != gamma.cols() || k.cols() != gamma.cols() ||
        u.size() != gamma.cols()) {
        throw DimensionError("adjoint_element_force: incompatible shapes");
    }
    return {F_bar * (k * u).transpose(), (gamma.transpose() * F_bar) * u.transpose(),
            (gamma * k).transpose() * F_bar};
}

StiffnessScalarBar truss_stiffness_bar(double E, double A, double L, const Mat2& kloc_bar) {
    const double s = kloc_bar(0, 0) - kloc_bar(0, 1) - kloc_bar(1, 0) + kloc_bar(1, 1);
    StiffnessScalarBar b;
    b.A = E / L * s;
    b.L = -E * A / (L * L) * s;
    return b;
}

StiffnessScalarBar frame_stiffness_bar(double E, double G, const SectionProperties& sp, double L,
                                       const Mat12& kb) {
    const auto& p = detail::frame_patterns();
    const double sa = frobenius(kb, p.axial);
    const double st = frobenius(kb, p.torsion);
    const double z3 = frobenius(kb, p.bend_z3);
    const double z2 = frobenius(kb, p.bend_z2);
    const double z1 = frobenius(kb, p.bend_z1);
    const double y3 = frobenius(kb, p.bend_y3);
    const double y2 = frobenius(kb, p.bend_y2);
    const double y1 = frobenius(kb, p.bend_y1);
    const double L2 = L * L;
    const double L3 = L2 * L;
    const double L4 = L3 * L;
    StiffnessScalarBar b;
    b.A = E / L * sa;
    b.J = G / L * st;
    b.Iz = E * (z3 / L3 + z2 / L2 + z1 / L);
    b.Iy = E * (y3 / L3 + y2 / L2 + y1 / L);
    b.L = -E * sp.A / L2 * sa - G * sp.J / L2 * st +
          E * sp.Iz * (-3.0 * z3 / L4 - 2.0 * z2 / L3 - z1 / L2) +
          E * sp.Iy * (-3.0 * y3 / L4 - 2.0 * y2 / L3 - y1 / L2);
    return b;
}

Vec3 truss_direction_bar(const Mat2x6& gb) {
    return gb.block<1, 3>(0, 0).transpose() + gb.block<1, 3>(1, 3).transpose();
}

Vec3 frame_direction_bar(const Vec3& c, double roll, const Mat12& gb) {
    Mat3 rb = Mat3::Zero();
    for (int b = 0; b < 4; ++b) rb += gb.block<3, 3>(3 * b, 3 * b);
    const Vec3 ref = std::abs(c.z()) > 1.0 - 1e-6 ? Vec3::UnitX() : Vec3::UnitZ();
    const Vec3 w = ref.cross(c);
    const double wn = w.norm();
    const Vec3 y0 = w / wn;
    const double cr = std::cos(roll);
    const double sr = std::sin(roll);
    const Vec3 Yb = rb.row(1).transpose();
    const Vec3 Zb = rb.row(2).transpose();
    Vec3 cb = rb.row(0).transpose();
    Vec3 y0b = cr * Yb - sr * Zb;
    const Vec3 z0b = sr * Yb + cr * Zb;
    // z0 = c x y0
    cb += y0.cross(z0b);
    y0b += z0b.cross(c);
    // y0 = w / |w|
    const Vec3 wb = (y0b - y0 * y0.dot(y0b)) / wn;
    // w = ref x c
    cb += wb.cross(ref);
    return cb;
}

Vec3 delta_bar(const ElementGeometry& g, double L_bar, const Vec3& c_bar) {
    return g.c * L_bar + (c_bar - g.c * g.c.dot(c_bar)) / g.L;
}

void tube_section_bar(double d, double alpha, SectionBar& bar) {
    constexpr double pi = std::numbers::pi;
    const double a2 = alpha * alpha;
    const double I = pi * std::pow(d, 4) / 64.0 * (1.0 - a2 * a2);
    // S = 2I/d depends on d directly and through I
    const double I_bar = bar.Iy + bar.Iz + 2.0 * bar.J + 2.0 * bar.S / d;
    double d_bar = bar.d - 2.0 * I / (d * d) * bar.S;
    d_bar += bar.A * (pi / 2.0 * d * (1.0 - a2)) + I_bar * (pi / 16.0 * d * d * d * (1.0 - a2 * a2));
    const double alpha_bar =
        bar.A * (-pi / 2.0 * d * d * alpha) + I_bar * (-pi / 16.0 * std::pow(d, 4) * a2 * alpha);
    bar.d = d_bar;
    bar.alpha = alpha_bar;
}

DesignBars reverse_pass(const AnalysisCache& cache, const OutputSeeds& seeds, AdjointState* trace) {
    const auto& plan = cache.plan();
    const auto& dm = cache.dofs();
    const std::size_t ne = cache.elements.size();
    const auto nf = static_cast<Eigen::Index>(dm.n_free());

    std::vector<const ElementSeed*> seed_of(ne, nullptr);
    for (const auto& [e, s] : seeds.elements) {
        if (e >= ne) throw DimensionError("seed for element " + std::to_string(e) + " out of range");
        seed_of[e] = &s;
    }

    Eigen::VectorXd u_bar = seeds.u_bar.size() ? seeds.u_bar : Eigen::VectorXd::Zero(nf);
    if (u_bar.size() != nf) throw DimensionError("u_bar length does not match the free DOFs");
    for (std::size_t e = 0; e < ne; ++e) {
        const ElementSeed* s = seed_of[e];
        if (!s || s->force_bar.size() == 0) continue;
        std::visit(
            [&](const auto& m) {
                if (s->force_bar.size() != m.gamma.rows()) {
                    throw DimensionError("force seed length does not match element " + std::to_string(e));
                }
                const auto ue_bar = ((m.gamma * m.k).transpose() * s->force_bar).eval();
                const auto& dofs = plan.dofs[e];
                for (std::size_t l = 0; l < dofs.size(); ++l) {
                    if (const auto i = dm.free_index[dofs[l]]; i >= 0) {
                        u_bar[i] += ue_bar[static_cast<Eigen::Index>(l)];
                    }
                }
            },
            cache.elements[e].m);
    }

    StiffnessBar kb;
    if (u_bar.isZero(0.0)) {
        kb.y = Eigen::VectorXd::Zero(nf);
        kb.lower = Eigen::VectorXd::Zero(cache.K.nnz());
        kb.upper = Eigen::VectorXd::Zero(cache.K.nnz());
    } else {
        kb = adjoint_solve(cache, u_bar);
    }

    DesignBars out;
    out.position.assign(cache.model.nodes().size(), Vec3::Zero());
    out.section.assign(ne, SectionBar{});
    if (trace) {
        trace->u_bar = u_bar;
        trace->k_bar.resize(ne);
        trace->kloc_bar.resize(ne);
        trace->gamma_bar.resize(ne);
        trace->L_bar.assign(ne, 0.0);
        trace->c_bar.assign(ne, Vec3::Zero());
    }

    for (std::size_t e = 0; e < ne; ++e) {
        const auto& st = cache.elements[e];
        const auto& el = cache.model.elements()[e];
        const ElementSeed* s = seed_of[e];
        const double L = st.geometry.L;
        StiffnessScalarBar sb;
        Vec3 c_bar;

        std::visit(
            [&](const auto& m) {
                using M = std::decay_t<decltype(m)>;
                using KMat = std::decay_t<decltype(m.k)>;
                using GMat = std::decay_t<decltype(m.gamma)>;
                KMat k_bar;
                gather(kb, plan.scatter[e], k_bar);
                GMat g_bar = GMat::Zero();
                if (s && s->force_bar.size()) {
                    g_bar += s->force_bar * (m.k * m.u).transpose();
                    k_bar += (m.gamma.transpose() * s->force_bar) * m.u.transpose();
                }
                const auto kloc_bar = (m.gamma * k_bar * m.gamma.transpose()).eval();
                g_bar += m.kloc * m.gamma * (k_bar.transpose() + k_bar);
                if constexpr (std::is_same_v<M, TrussMatrices>) {
                    sb = truss_stiffness_bar(st.E, st.section.A, L, kloc_bar);
                    c_bar = truss_direction_bar(g_bar);
                } else {
                    sb = frame_stiffness_bar(st.E, st.G, st.section, L, kloc_bar);
                    c_bar = frame_direction_bar(st.geometry.c, el.roll, g_bar);
                }
                if (trace) {
                    trace->k_bar[e] = k_bar;
                    trace->kloc_bar[e] = kloc_bar;
                    trace->gamma_bar[e] = g_bar;
                }
            },
            st.m);

        SectionBar& sec = out.section[e];
        sec.A = sb.A;
        sec.Iy = sb.Iy;
        sec.Iz = sb.Iz;
        sec.J = sb.J;
        double L_bar = sb.L;
        if (s) {
            sec.A += s->A;
            sec.Iy += s->Iy;
            sec.Iz += s->Iz;
            sec.J += s->J;
            sec.S += s->S;
            sec.d += s->d;
            L_bar += s->L;
        }
        if (const auto* tube = std::get_if<TubeSection>(&el.section)) {
            tube_section_bar(tube->d, tube->alpha, sec);
        }
        const Vec3 db = delta_bar(st.geometry, L_bar, c_bar);
        out.position[el.end] += db;
        out.position[el.start] -= db;
        if (trace) {
            trace->L_bar[e] = L_bar;
            trace->c_bar[e] = c_bar;
        }
    }
    if (trace) {
        trace->K_bar = std::move(kb);
        trace->bars = out;
    }
    return out;
}

Eigen::VectorXd pull_back(const Problem& problem, const DesignBars& bars) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.variables.size()));
    for (std::size_t v = 0; v < problem.variables.size(); ++v) {
        const auto i = static_cast<Eigen::Index>(v);
        std::visit(
            [&](const auto& kind) {
                using K = std::decay_t<decltype(kind)>;
                if constexpr (std::is_same_v<K, NodeOffset>) {
                    for (const auto& t : kind.targets) {
                        g[i] += t.coefficient * bars.position[t.node][static_cast<int>(t.axis)];
                    }
                } else if constexpr (std::is_same_v<K, ProjectedOffset>) {
                    for (const auto& t : kind.targets) g[i] += t.direction.dot(bars.position[t.node]);
                } else if constexpr (std::is_same_v<K, AreaVariable>) {
                    for (auto e : kind.elements) g[i] += bars.section[e].A;
                } else if constexpr (std::is_same_v<K, TubeDiameterVariable>) {
                    for (auto e : kind.elements) g[i] += bars.section[e].d;
                } else {
                    for (auto e : kind.elements) g[i] += bars.section[e].alpha;
                }
            },
            problem.variables[v].kind);
    }
    return g;
}

}  // namespace diffstiff
