#include "random_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "diffstiff/analysis.hpp"
#include "diffstiff/errors.hpp"

namespace testing_support {

using namespace diffstiff;

Material steel() {
    Material m;
    m.name = "steel";
    m.code = 'S';
    m.E = 200e6;
    m.G = 77e6;
    m.rho = 7800;
    m.ecc = 1.55;
    m.sigma_t = 350e3;
    m.sigma_c = 350e3;
    return m;
}

Material glulam() {
    Material m;
    m.name = "glulam";
    m.code = 'W';
    m.E = 12e6;
    m.G = 0.75e6;
    m.rho = 560;
    m.ecc = 0.512;
    m.sigma_t = 33e3;
    m.sigma_c = 20.4e3;
    return m;
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

Vec3 random_unit(Rng& rng) {
    Vec3 v(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    return v.norm() < 1e-3 ? Vec3::UnitZ() : Vec3(v.normalized());
}

ObjectiveKind objective_for(std::uint64_t seed) {
    switch (seed % 3) {
        case 0: return ObjectiveKind::Volume;
        case 1: return ObjectiveKind::Compliance;
        default: return ObjectiveKind::EmbodiedCarbon;
    }
}

// Rejects mechanisms and draws whose stiffness condition number would make
// double-precision gradients noisier than the oracle tolerance. Statically
// determinate trusses have exact-zero stress sensitivities, where adjoint
// roundoff of about 1e-15 * kappa shows up undamped, so they get a tighter cap.
bool stable(const Problem& p, double max_condition) {
    try {
        const auto c = analyze(p.initial_model());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.K.dense(), Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        return ev.minCoeff() > 0 && ev.maxCoeff() / ev.minCoeff() < max_condition;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace

Problem random_truss(std::uint64_t seed, int free_nodes) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed * 7919 + attempt);
        std::vector<Node> nodes;
        const double base[3][2] = {{0, 0}, {3, 0}, {1.5, 2.6}};
        for (int i = 0; i < 3; ++i) {
            Node n;
            n.id = i + 1;
            n.position = Vec3(base[i][0], base[i][1], 0);
            n.fixed = {true, true, true, false, false, false};
            nodes.push_back(n);
        }
        std::vector<Element> elements;
        int eid = 100;
        for (int i = 0; i < free_nodes; ++i) {
            Node n;
            n.id = static_cast<int>(nodes.size()) + 1;
            n.position = Vec3(uniform(rng, -0.5, 3.5), uniform(rng, -0.5, 3.0), 0.8 * (i + 1) + uniform(rng, -0.2, 0.2));
            // connect to the three nearest earlier nodes
            std::vector<std::size_t> order(nodes.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return (nodes[a].position - n.position).norm() < (nodes[b].position - n.position).norm();
            });
            const std::size_t self = nodes.size();
            nodes.push_back(n);
            for (int k = 0; k < 3; ++k) {
                Element e;
                e.id = eid++;
                e.start = order[static_cast<std::size_t>(k)];
                e.end = self;
                e.material = static_cast<std::size_t>(rng() % 2);
                e.section = ExplicitSection{uniform(rng, 0.002, 0.02), 0, 0, 0, 0};
                elements.push_back(e);
            }
        }
        std::vector<Load> loads;
        for (std::size_t i = 3; i < nodes.size(); ++i) {
            Load l;
            l.node = i;
            l.force = Vec3(uniform(rng, -30, 30), uniform(rng, -30, 30), uniform(rng, -80, -10));
            loads.push_back(l);
        }

        Problem p;
        p.model = Model(nodes, {steel(), glulam()}, elements, loads);
        const std::size_t nn = nodes.size();
        const std::size_t ne = elements.size();

        // mirror-coupled offset on two free nodes
        DesignVariable v;
        v.name = "coupled";
        NodeOffset off;
        off.targets.push_back({3, Axis::X, 1.0});
        off.targets.push_back({nn - 1, Axis::X, -1.0});
        off.targets.push_back({nn - 2, Axis::Z, 0.5});
        v.kind = off;
        v.lower = -0.3;
        v.upper = 0.3;
        v.initial = uniform(rng, -0.1, 0.1);
        p.variables.push_back(v);

        DesignVariable pv;
        pv.name = "projected";
        ProjectedOffset po;
        po.targets.push_back({4, random_unit(rng)});
        pv.kind = po;
        pv.lower = -0.5;
        pv.upper = 0.5;
        pv.initial = uniform(rng, -0.2, 0.2);
        p.variables.push_back(pv);

        DesignVariable ov;
        ov.name = "offset_y";
        ov.kind = NodeOffset{{{5 % nn, Axis::Y, 1.0}}};
        ov.lower = -0.5;
        ov.upper = 0.5;
        ov.initial = 0.05;
        p.variables.push_back(ov);

        // grouped area on the first two elements, single areas on a few more
        DesignVariable ga;
        ga.name = "group_area";
        ga.kind = AreaVariable{{0, 1}};
        ga.lower = 1e-4;
        ga.upper = 0.1;
        ga.initial = uniform(rng, 0.003, 0.02);
        p.variables.push_back(ga);
        for (std::size_t e = 2; e < std::min<std::size_t>(ne, 7); ++e) {
            DesignVariable a;
            a.name = "A" + std::to_string(e);
            a.kind = AreaVariable{{e}};
            a.lower = 1e-4;
            a.upper = 0.1;
            a.initial = uniform(rng, 0.003, 0.02);
            p.variables.push_back(a);
        }

        p.objective.kind = objective_for(seed);
        std::vector<std::size_t> free_list;
        for (std::size_t i = 3; i < nn; ++i) free_list.push_back(i);
        p.constraints.push_back(DisplacementLimit{free_list, Axis::Z, 0.01});
        p.constraints.push_back(DisplacementLimit{{free_list.back()}, Axis::X, 0.005});
        std::vector<std::size_t> half_a, half_b;
        for (std::size_t e = 0; e < ne; ++e) (e % 2 ? half_a : half_b).push_back(e);
        p.constraints.push_back(AxialStressLimit{half_a, 250e3});
        p.constraints.push_back(AxialStressLimit{half_b, std::nullopt});
        p.groups["first_pair"] = {0, 1};
        if (stable(p, 1e5)) return p;
    }
}

Problem random_frame(std::uint64_t seed, int free_nodes) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed * 104729 + attempt);
        std::vector<Node> nodes;
        Node n0;
        n0.id = 1;
        n0.position = Vec3::Zero();
        n0.fixed = {true, true, true, true, true, true};
        nodes.push_back(n0);
        // the first free node sits straight above the support: vertical member
        Node top;
        top.id = 2;
        top.position = Vec3(0, 0, 2.0);
        nodes.push_back(top);
        for (int i = 1; i < free_nodes; ++i) {
            Node n;
            n.id = static_cast<int>(nodes.size()) + 1;
            n.position = nodes.back().position + Vec3(uniform(rng, 0.8, 1.6), uniform(rng, -0.8, 0.8), uniform(rng, -0.6, 0.6));
            nodes.push_back(n);
        }
        Node pin;
        pin.id = static_cast<int>(nodes.size()) + 1;
        pin.position = nodes.back().position + Vec3(1.0, 0.3, -2.0);
        pin.fixed = {true, true, true, false, false, false};
        nodes.push_back(pin);

        std::vector<Section> pool = {
            TubeSection{0.3, 0.6},
            TubeSection{0.25, 0.5},
            ExplicitSection{0.01, 8e-5, 2e-5, 5e-5, 4e-4},
            ExplicitSection{0.012, 3e-5, 9e-5, 6e-5, 5e-4},
        };
        std::vector<Element> elements;
        int eid = 10;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            Element e;
            e.id = eid++;
            e.start = i;
            e.end = i + 1;
            e.kind = ElementKind::Frame;
            e.material = 0;
            e.section = pool[i % pool.size()];
            e.roll = i % 3 == 1 ? uniform(rng, -1.0, 1.0) : 0.0;
            elements.push_back(e);
        }
        // truss braces skipping one node
        for (std::size_t i = 1; i + 2 < nodes.size(); i += 3) {
            Element e;
            e.id = eid++;
            e.start = i;
            e.end = i + 2;
            e.kind = ElementKind::Truss;
            e.material = 1;
            e.section = ExplicitSection{0.004, 0, 0, 0, 0};
            elements.push_back(e);
        }
        std::vector<Load> loads;
        for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
            Load l;
            l.node = i;
            l.force = Vec3(uniform(rng, -20, 20), uniform(rng, -20, 20), uniform(rng, -60, -5));
            l.moment = Vec3(uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5));
            loads.push_back(l);
        }

        Problem p;
        p.model = Model(nodes, {steel(), glulam()}, elements, loads);
        const std::size_t ne = elements.size();
        const std::size_t nn = nodes.size();

        std::vector<std::size_t> tube_a, tube_b;
        for (std::size_t e = 0; e < ne; ++e) {
            if (elements[e].kind != ElementKind::Frame) continue;
            if (const auto* t = std::get_if<TubeSection>(&elements[e].section)) {
                (t->d > 0.28 ? tube_a : tube_b).push_back(e);
            }
        }
        auto var = [&](std::string name, VariableKind kind, double lo, double init, double hi) {
            DesignVariable v;
            v.name = std::move(name);
            v.kind = std::move(kind);
            v.lower = lo;
            v.initial = init;
            v.upper = hi;
            p.variables.push_back(std::move(v));
        };
        var("d_a", TubeDiameterVariable{tube_a}, 0.1, uniform(rng, 0.25, 0.35), 1.0);
        var("alpha_a", TubeRatioVariable{tube_a}, 0.05, uniform(rng, 0.4, 0.7), 0.95);
        var("d_b", TubeDiameterVariable{tube_b}, 0.1, uniform(rng, 0.2, 0.3), 1.0);
        var("alpha_b", TubeRatioVariable{tube_b}, 0.05, uniform(rng, 0.4, 0.7), 0.95);
        // explicit frame sections and braces
        for (std::size_t e = 0; e < ne; ++e) {
            if (std::holds_alternative<ExplicitSection>(elements[e].section)) {
                var("A" + std::to_string(e), AreaVariable{{e}}, 1e-4, std::get<ExplicitSection>(elements[e].section).A * uniform(rng, 0.8, 1.2), 0.1);
            }
        }
        var("shift", NodeOffset{{{2, Axis::X, 1.0}, {nn - 3, Axis::Y, -1.0}}}, -0.3, uniform(rng, -0.1, 0.1), 0.3);
        var("lift", ProjectedOffset{{{3, random_unit(rng)}, {4, random_unit(rng)}}}, -0.3, uniform(rng, -0.1, 0.1), 0.3);
        var("top_x", NodeOffset{{{1, Axis::X, 1.0}}}, -0.2, 0.0, 0.2);

        p.objective.kind = objective_for(seed + 1);
        std::vector<std::size_t> free_list;
        for (std::size_t i = 1; i + 1 < nn; ++i) free_list.push_back(i);
        p.constraints.push_back(DisplacementLimit{free_list, Axis::Z, 0.02});
        p.constraints.push_back(DisplacementLimit{free_list, Axis::Y, 0.02});
        std::vector<std::size_t> all(ne), frames;
        std::iota(all.begin(), all.end(), 0);
        for (std::size_t e = 0; e < ne; ++e) {
            if (elements[e].kind == ElementKind::Frame) frames.push_back(e);
        }
        p.constraints.push_back(AxialStressLimit{all, std::nullopt});
        p.constraints.push_back(AxialStressLimit{frames, 300e3});
        p.constraints.push_back(CombinedStressLimit{frames, 300e3});
        p.constraints.push_back(DiameterOrdering{tube_b, tube_a});
        if (stable(p, 1e6)) return p;
    }
}

}  // namespace testing_support
