#include "diffstiff/fixtures.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "diffstiff/errors.hpp"
#include "diffstiff/problem_io.hpp"

namespace diffstiff::fixtures {
namespace {

using Fixed = std::array<bool, 6>;
constexpr Fixed kFree{false, false, false, false, false, false};
constexpr Fixed kPin{true, true, true, false, false, false};
constexpr Fixed kPlanar{false, false, true, true, true, true};
constexpr Fixed kPlanarPin{true, true, true, true, true, true};
constexpr Fixed kPlanarRoller{false, true, true, true, true, true};
// In-plane pin for frames in the x-z plane: rotation about y stays free.
constexpr Fixed kFramePin{true, true, true, true, false, true};

class Builder {
public:
    std::size_t node(const Vec3& p, Fixed fixed = kFree) {
        Node n;
        n.id = static_cast<int>(nodes_.size()) + 1;
        n.position = p;
        n.fixed = fixed;
        nodes_.push_back(n);
        return nodes_.size() - 1;
    }
    std::size_t element(std::size_t a, std::size_t b, Section section, ElementKind kind = ElementKind::Truss,
                        std::size_t material = 0) {
        Element e;
        e.id = static_cast<int>(elements_.size()) + 1;
        e.start = a;
        e.end = b;
        e.material = material;
        e.section = section;
        e.kind = kind;
        elements_.push_back(e);
        return elements_.size() - 1;
    }
    void load(std::size_t n, const Vec3& f) {
        Load l;
        l.node = n;
        l.force = f;
        loads_.push_back(l);
    }
    const Vec3& position(std::size_t n) const { return nodes_[n].position; }
    std::size_t n_elements() const { return elements_.size(); }
    Model build(std::vector<Material> materials) const { return Model(nodes_, std::move(materials), elements_, loads_); }

private:
    std::vector<Node> nodes_;
    std::vector<Element> elements_;
    std::vector<Load> loads_;
};

ExplicitSection bar_section(double A) {
    // Only A matters for truss elements; the rest keeps the section valid.
    return ExplicitSection{A, A * A / 12.0, A * A / 12.0, A * A / 6.0, A * std::sqrt(A) / 6.0};
}

DesignVariable variable(std::string name, VariableKind kind, double lower, double initial, double upper) {
    DesignVariable v;
    v.name = std::move(name);
    v.kind = std::move(kind);
    v.lower = lower;
    v.initial = initial;
    v.upper = upper;
    return v;
}

NodeOffset mirrored(std::size_t a, std::size_t b, Axis axis, double coefficient_b) {
    return NodeOffset{{{a, axis, 1.0}, {b, axis, coefficient_b}}};
}

Material unit_material() {
    Material m;
    m.name = "unit";
    m.code = 'U';
    m.E = 1.0;
    m.G = 1.0;
    m.rho = 1.0;
    m.ecc = 1.0;
    m.sigma_t = 1e3;
    m.sigma_c = 1e3;
    return m;
}

/// Vertical profile of frame f over xi in [0, 1], zero at both supports.
double frame_height(int f, double xi) {
    constexpr double pi = std::numbers::pi;
    // Catenary of rise H; frames after the first add one sine mode.
    struct Shape {
        double rise, amplitude;
        int mode;
    };
    static constexpr std::array<Shape, 6> shapes{{
        {12.0, 0.0, 1},
        {12.0, 3.0, 2},
        {10.0, -4.0, 3},
        {14.0, 5.0, 2},
        {8.0, 2.5, 4},
        {11.0, -3.5, 2},
    }};
    const Shape& s = shapes[static_cast<std::size_t>(f) % shapes.size()];
    const double c = 1.5;
    const double cat = (std::cosh(c) - std::cosh(c * (2.0 * xi - 1.0))) / (std::cosh(c) - 1.0);
    return s.rise * cat + s.amplitude * std::sin(s.mode * pi * xi);
}

constexpr int kFrameElements = 30;
constexpr double kFrameSpan = 50.0;
constexpr double kFrameSpacing = 10.0;

std::vector<Vec3> frame_points(int f) {
    std::vector<Vec3> pts;
    for (int k = 0; k <= kFrameElements; ++k) {
        const double xi = static_cast<double>(k) / kFrameElements;
        pts.emplace_back(kFrameSpan * xi, kFrameSpacing * f, frame_height(f, xi));
    }
    return pts;
}

std::vector<std::size_t> all_elements(const Model& m) {
    std::vector<std::size_t> e(m.elements().size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = i;
    return e;
}

/// Nodes with at least one free translation.
std::vector<std::size_t> free_nodes(const Model& m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.nodes().size(); ++i) {
        const auto& f = m.nodes()[i].fixed;
        if (!(f[0] && f[1] && f[2])) out.push_back(i);
    }
    return out;
}

}  // namespace

Material steel() {
    Material m;
    m.name = "steel";
    m.code = 'S';
    m.E = 200e6;
    m.G = 77e6;
    m.rho = 7800.0;
    m.ecc = 1.55;
    m.sigma_t = 350e3;
    m.sigma_c = 350e3;
    return m;
}

Material glulam() {
    Material m;
    m.name = "glulam";
    m.code = 'W';
    m.E = 11.5e6;
    m.G = 0.65e6;
    m.rho = 560.0;
    m.ecc = 0.512;
    m.sigma_t = 33e3;
    m.sigma_c = 20.4e3;
    return m;
}

Fixture unit_bar() {
    Builder b;
    const auto n0 = b.node(Vec3::Zero(), {true, true, true, true, true, true});
    const auto n1 = b.node(Vec3(1, 0, 0), {false, true, true, true, true, true});
    b.element(n0, n1, bar_section(1.0));
    b.load(n1, Vec3(1, 0, 0));
    Fixture f;
    f.name = "unit_bar";
    f.problem.model = b.build({unit_material()});
    f.problem.variables.push_back(variable("A", AreaVariable{{0}}, 0.1, 1.0, 2.0));
    f.problem.objective.kind = ObjectiveKind::Volume;
    f.problem.constraints.push_back(DisplacementLimit{{1}, Axis::X, 100.0});
    f.notes = {"E = 1 kN/m2, A = 1 m2, L = 1 m so that K = [1] and u = [1] under 1 kN.",
               "Displacement limit of 100 m leaves the constraint slack at every admissible area."};
    return f;
}

Fixture bracket() {
    Builder b;
    const auto top = b.node(Vec3(0, 1, 0), kPlanarPin);
    const auto bottom = b.node(Vec3(0, -1, 0), kPlanarPin);
    const auto tip = b.node(Vec3(1, 0, 0), kPlanar);
    b.element(top, tip, bar_section(1e-3));
    b.element(bottom, tip, bar_section(1e-3));
    b.load(tip, Vec3(0, -10, 0));
    Fixture f;
    f.name = "bracket";
    f.problem.model = b.build({steel()});
    f.problem.variables.push_back(variable("A_upper", AreaVariable{{0}}, 1e-6, 1e-3, 1e-2));
    f.problem.variables.push_back(variable("A_lower", AreaVariable{{1}}, 1e-6, 1e-3, 1e-2));
    f.problem.objective.kind = ObjectiveKind::Volume;
    f.problem.constraints.push_back(AxialStressLimit{{0, 1}, 350e3});
    f.problem.optimizer.rel_tolerance = 1e-9;
    f.notes = {"Symmetric two-bar bracket at 45 degrees, 10 kN downward at the tip.",
               "Statics: upper bar +10/sqrt(2) kN tension, lower bar -10/sqrt(2) kN compression.",
               "Fully stressed optimum A = (10/sqrt(2)) / 350e3 m2 for both bars."};
    return f;
}

Fixture cantilever() {
    Builder b;
    const auto root = b.node(Vec3::Zero(), {true, true, true, true, true, true});
    const auto tip = b.node(Vec3(2, 0, 0));
    b.element(root, tip, TubeSection{0.2, 0.8}, ElementKind::Frame);
    b.load(tip, Vec3(0, 0, -5));
    Fixture f;
    f.name = "cantilever";
    f.problem.model = b.build({steel()});
    f.problem.variables.push_back(variable("d", TubeDiameterVariable{{0}}, 0.05, 0.2, 0.5));
    f.problem.variables.push_back(variable("alpha", TubeRatioVariable{{0}}, 0.0, 0.8, 0.95));
    f.problem.objective.kind = ObjectiveKind::Volume;
    f.problem.constraints.push_back(DisplacementLimit{{1}, Axis::Z, 0.01});
    f.problem.constraints.push_back(CombinedStressLimit{{0}, 350e3});
    f.notes = {"2 m steel tube cantilever, 5 kN tip load; root moment P L = 10 kNm, axial force 0."};
    return f;
}

Fixture warren() {
    constexpr int bays = 12;
    constexpr double span = 10.0;
    constexpr double depth = 1.0;
    constexpr double bay = span / bays;
    constexpr double load = 250.0;
    Builder b;
    std::vector<std::size_t> bottom, top;
    for (int i = 0; i <= bays; ++i) {
        const Fixed fx = i == 0 ? kPlanarPin : i == bays ? kPlanarRoller : kPlanar;
        bottom.push_back(b.node(Vec3(i * bay, 0, 0), fx));
    }
    for (int j = 0; j < bays; ++j) top.push_back(b.node(Vec3((j + 0.5) * bay, depth, 0), kPlanar));

    const ExplicitSection s0 = bar_section(0.15);
    for (int i = 0; i < bays; ++i) b.element(bottom[i], bottom[i + 1], s0);
    for (int j = 0; j + 1 < bays; ++j) b.element(top[j], top[j + 1], s0);
    const std::size_t first_diagonal = b.n_elements();
    for (int j = 0; j < bays; ++j) {
        b.element(bottom[j], top[j], s0);
        b.element(top[j], bottom[j + 1], s0);
    }
    for (int i = 1; i < bays; ++i) b.load(bottom[i], Vec3(0, -load, 0));

    Problem p;
    p.model = b.build({steel()});
    for (int j = 0; j < bays / 2; ++j) {
        const auto l = top[j];
        const auto r = top[bays - 1 - j];
        const auto tag = std::to_string(j + 1);
        p.variables.push_back(variable("dx" + tag, mirrored(l, r, Axis::X, -1.0), -0.83, 0.0, 0.83));
        p.variables.push_back(variable("dy" + tag, mirrored(l, r, Axis::Y, 1.0), -0.9, 0.0, 1.0));
    }
    auto area = [&](const std::string& name, std::vector<std::size_t> elements) {
        p.variables.push_back(variable(name, AreaVariable{std::move(elements)}, 1e-4, 0.15, 0.2));
    };
    const std::size_t top0 = bays;
    for (std::size_t i = 0; i < bays / 2; ++i) area("A_bottom" + std::to_string(i + 1), {i, bays - 1 - i});
    for (std::size_t j = 0; j + 1 < bays / 2; ++j) {
        area("A_top" + std::to_string(j + 1), {top0 + j, top0 + (bays - 2) - j});
    }
    area("A_top_mid", {top0 + bays / 2 - 1});
    for (std::size_t j = 0; j < bays / 2; ++j) {
        const std::size_t up = first_diagonal + 2 * j;
        const std::size_t down = up + 1;
        const std::size_t mirror_up = first_diagonal + 2 * (bays - 1 - j) + 1;
        const std::size_t mirror_down = first_diagonal + 2 * (bays - 1 - j);
        area("A_diag" + std::to_string(2 * j + 1), {up, mirror_up});
        area("A_diag" + std::to_string(2 * j + 2), {down, mirror_down});
    }

    std::vector<std::size_t> nodes(p.model.nodes().size());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = i;
    p.objective.kind = ObjectiveKind::Volume;
    p.constraints.push_back(DisplacementLimit{nodes, Axis::Y, 0.0278});
    p.constraints.push_back(AxialStressLimit{all_elements(p.model), 350e3});
    p.groups["bottom_chord"] = {};
    for (std::size_t i = 0; i < bays; ++i) p.groups["bottom_chord"].push_back(i);
    for (std::size_t j = 0; j + 1 < bays; ++j) p.groups["top_chord"].push_back(top0 + j);
    for (std::size_t e = first_diagonal; e < p.model.elements().size(); ++e) p.groups["web"].push_back(e);

    Fixture f;
    f.name = "warren";
    f.problem = std::move(p);
    f.notes = {
        "Span 10 m, 12 bays, depth 1 m, steel E = 200 GPa (G = 77 GPa assumed), sigma_max = 350 MPa, d_max = L/360 = 2.78 cm.",
        "Bottom chord nodes at i*10/12, top chord nodes at bay midpoints; pin at the left support, roller at the right.",
        "Planar: z fixed at every node, giving 47 free DOFs.",
        "The open bound -1 < dy is closed at -0.9 so that the truss keeps 10 cm of depth; dy = -1 makes the chords collinear and K singular.",
        "Assumed load (no magnitude is stated): 250 kN downward at each of the 11 interior bottom chord nodes.",
        "Variables: (dx, dy) for 6 mirrored top-node pairs with dx_L = -dx_R, dy_L = dy_R; 24 areas with A_L = A_R, the middle top chord element on its own.",
        "Constraints: |d_y| at all 25 nodes and |sigma| in all 47 elements.",
    };
    return f;
}

Fixture roof(int bays, RoofVariant variant) {
    if (bays < 2) throw ValidationError("roof needs at least 2 bays");
    constexpr double size = 24.0;
    constexpr double depth = 2.25;
    constexpr double load = 20.0;
    const double s = size / bays;
    const auto n = static_cast<std::size_t>(bays);
    Builder b;
    std::vector<std::size_t> top((n + 1) * (n + 1)), bot(n * n);
    auto T = [&](std::size_t i, std::size_t j) { return top[j * (n + 1) + i]; };
    auto B = [&](std::size_t i, std::size_t j) { return bot[j * n + i]; };
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
            const bool supported = i == 0 || j == 0;
            top[j * (n + 1) + i] = b.node(Vec3(i * s, j * s, depth), supported ? kPin : kFree);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) bot[j * n + i] = b.node(Vec3((i + 0.5) * s, (j + 0.5) * s, 0.0));
    }
    const ExplicitSection s0 = bar_section(0.1);
    std::vector<std::size_t> top_chord, bottom_chord, web;
    for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i < n; ++i) top_chord.push_back(b.element(T(i, j), T(i + 1, j), s0));
    }
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; j < n; ++j) top_chord.push_back(b.element(T(i, j), T(i, j + 1), s0));
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i + 1 < n; ++i) bottom_chord.push_back(b.element(B(i, j), B(i + 1, j), s0));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j + 1 < n; ++j) bottom_chord.push_back(b.element(B(i, j), B(i, j + 1), s0));
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            web.push_back(b.element(B(i, j), T(i, j), s0));
            web.push_back(b.element(B(i, j), T(i + 1, j), s0));
            web.push_back(b.element(B(i, j), T(i, j + 1), s0));
            web.push_back(b.element(B(i, j), T(i + 1, j + 1), s0));
        }
    }
    for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t i = 1; i <= n; ++i) b.load(T(i, j), Vec3(0, 0, -load));
    }

    Problem p;
    p.model = b.build({steel()});
    for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t i = j + 1; i <= n; ++i) {
            p.variables.push_back(variable("dz_" + std::to_string(i) + "_" + std::to_string(j),
                                           mirrored(T(i, j), T(j, i), Axis::Z, 1.0), -1.25, 0.0, 4.5));
        }
    }
    if (variant == RoofVariant::Grouped) {
        p.variables.push_back(variable("A_top", AreaVariable{top_chord}, 1e-3, 0.1, 0.2));
        p.variables.push_back(variable("A_web", AreaVariable{web}, 1e-3, 0.1, 0.2));
        p.variables.push_back(variable("A_bottom", AreaVariable{bottom_chord}, 1e-3, 0.1, 0.2));
    } else {
        for (std::size_t e = 0; e < p.model.elements().size(); ++e) {
            p.variables.push_back(variable("A" + std::to_string(e + 1), AreaVariable{{e}}, 1e-3, 0.1, 0.2));
        }
    }
    p.objective.kind = ObjectiveKind::Volume;
    p.constraints.push_back(DisplacementLimit{free_nodes(p.model), Axis::Z, 0.08});
    p.constraints.push_back(AxialStressLimit{all_elements(p.model), 350e3});
    p.groups["top_chord"] = top_chord;
    p.groups["bottom_chord"] = bottom_chord;
    p.groups["web"] = web;
    p.optimizer.time_limit = 300.0;
    p.optimizer.mma_conservative = true;

    Fixture f;
    f.name = variant == RoofVariant::Grouped ? "roof_grouped" : "roof";
    if (bays != 8) f.name += "_" + std::to_string(bays);
    f.problem = std::move(p);
    f.notes = {
        "24 m x 24 m square-on-offset-square space truss, 2.25 m deep: top grid (n+1)^2, bottom grid n^2 at cell centres, 4 webs per bottom node.",
        "n = 8 gives 145 nodes and 512 elements. Top chord nodes on the x = 0 and y = 0 edges are pinned; the (24, 24) corner is free.",
        "Assumed load: 20 kN downward at each free top node (about 2.2 kPa over a 3 m x 3 m tributary area at n = 8).",
        "Spatial variables: z offsets of free top nodes mirrored across the diagonal from the supported to the free corner; nodes on the diagonal are held.",
        "Every element carries its own area variable: 512 rather than the stated 484, since the excluded elements are not identified.",
        "Constraints: |d_z| at every free node and |sigma| in every element; the stated total of 596 is not reproduced by this reconstruction.",
        "MMA runs with the conservative inner loop: plain MMA cycles on this shape problem without reaching feasibility.",
    };
    return f;
}

Fixture frames(int count) {
    Builder b;
    for (int f = 0; f < count; ++f) {
        const auto pts = frame_points(f);
        std::size_t prev = 0;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const bool end = k == 0 || k + 1 == pts.size();
            const auto nd = b.node(pts[k], end ? kFramePin : kFree);
            if (!end) b.load(nd, Vec3(0, 0, -40.0));
            if (k > 0) b.element(prev, nd, TubeSection{0.75, 0.5}, ElementKind::Frame);
            prev = nd;
        }
    }
    Problem p;
    p.model = b.build({steel()});
    const auto all = all_elements(p.model);
    p.variables.push_back(variable("d", TubeDiameterVariable{all}, 0.1, 0.75, 1.0));
    p.variables.push_back(variable("alpha", TubeRatioVariable{all}, 0.05, 0.5, 0.98));
    p.objective.kind = ObjectiveKind::Volume;
    p.constraints.push_back(DisplacementLimit{free_nodes(p.model), Axis::Z, 0.17});
    p.constraints.push_back(CombinedStressLimit{all, 350e3});
    Fixture f;
    f.name = "frames";
    f.problem = std::move(p);
    f.notes = {
        "Six planar steel tube frames, 50 m span in the x-z plane, 10 m apart in y, 30 frame elements each.",
        "Frame curves are reconstructed: frame A is a catenary of 12 m rise; frames B-F add one sine mode to a catenary (rise, amplitude, mode) = (12, 3, 2), (10, -4, 3), (14, 5, 2), (8, 2.5, 4), (11, -3.5, 2).",
        "Supports pin the ends in plane: translations and rotations about x and z fixed, rotation about y free.",
        "40 kN downward at every free node. d_max = 50 m / 300 = 17 cm, sigma_max = 350 MPa on |N|/A + |M|/S.",
    };
    return f;
}

Fixture spine(int count, bool shape, int first) {
    constexpr double strut_length = 1.0;
    const double tilt = std::numbers::pi / 6.0;
    Builder b;
    std::vector<std::size_t> frame_el, strut_el, spine_el, tie_el;
    struct Pair {
        std::size_t plus, minus;
        Vec3 v_plus, v_minus;
    };
    std::vector<std::vector<Pair>> pairs(static_cast<std::size_t>(count));
    std::vector<std::array<std::size_t, 2>> anchors;
    const TubeSection s0{0.2, 0.95};
    for (int f = 0; f < count; ++f) {
        const auto pts = frame_points(first + f);
        const std::size_t m = pts.size();
        std::vector<std::size_t> fn(m);
        for (std::size_t k = 0; k < m; ++k) {
            const bool end = k == 0 || k + 1 == m;
            fn[k] = b.node(pts[k], end ? kFramePin : kFree);
            if (!end) b.load(fn[k], Vec3(0, 0, -40.0));
            if (k > 0) frame_el.push_back(b.element(fn[k - 1], fn[k], s0, ElementKind::Frame));
        }
        auto& fp = pairs[static_cast<std::size_t>(f)];
        for (std::size_t k = 0; k < m; ++k) {
            const Vec3 t = (pts[std::min(k + 1, m - 1)] - pts[k == 0 ? 0 : k - 1]).normalized();
            Vec3 nrm(-t.z(), 0.0, t.x());
            if (nrm.z() < 0.0) nrm = -nrm;
            const Vec3 vp = (std::cos(tilt) * nrm + std::sin(tilt) * Vec3::UnitY()).normalized();
            const Vec3 vm = (std::cos(tilt) * nrm - std::sin(tilt) * Vec3::UnitY()).normalized();
            const auto qp = b.node(pts[k] + strut_length * vp);
            const auto qm = b.node(pts[k] + strut_length * vm);
            strut_el.push_back(b.element(fn[k], qp, s0, ElementKind::Frame));
            strut_el.push_back(b.element(fn[k], qm, s0, ElementKind::Frame));
            tie_el.push_back(b.element(qp, qm, s0, ElementKind::Frame));
            if (k > 0) {
                spine_el.push_back(b.element(fp.back().plus, qp, s0, ElementKind::Frame));
                spine_el.push_back(b.element(fp.back().minus, qm, s0, ElementKind::Frame));
            }
            fp.push_back({qp, qm, vp, vm});
        }
        const auto left = b.node(pts.front() - Vec3(1.0, 0, 0), kPin);
        const auto right = b.node(pts.back() + Vec3(1.0, 0, 0), kPin);
        spine_el.push_back(b.element(left, fp.front().plus, s0, ElementKind::Frame));
        spine_el.push_back(b.element(left, fp.front().minus, s0, ElementKind::Frame));
        spine_el.push_back(b.element(right, fp.back().plus, s0, ElementKind::Frame));
        spine_el.push_back(b.element(right, fp.back().minus, s0, ElementKind::Frame));
        anchors.push_back({left, right});
    }

    Problem p;
    p.model = b.build({steel()});
    p.groups["frame"] = frame_el;
    p.groups["strut"] = strut_el;
    p.groups["spine"] = spine_el;
    p.groups["tie"] = tie_el;
    Fixture f;
    if (shape) {
        for (int fr = 0; fr < count; ++fr) {
            const auto& fp = pairs[static_cast<std::size_t>(fr)];
            const std::string tag = std::string(1, static_cast<char>('A' + first + fr));
            for (std::size_t k = 0; k < fp.size(); ++k) {
                ProjectedOffset po{{{fp[k].plus, fp[k].v_plus}, {fp[k].minus, fp[k].v_minus}}};
                p.variables.push_back(variable("mu_" + tag + std::to_string(k), po, -0.5, 0.0, 2.5));
            }
            const auto& an = anchors[static_cast<std::size_t>(fr)];
            p.variables.push_back(
                variable("anchor_" + tag + "_left", NodeOffset{{{an[0], Axis::X, -1.0}}}, 0.0, 0.0, 4.0));
            p.variables.push_back(
                variable("anchor_" + tag + "_right", NodeOffset{{{an[1], Axis::X, 1.0}}}, 0.0, 0.0, 4.0));
        }
        p.objective.kind = ObjectiveKind::Compliance;
        p.optimizer.algorithm = Algorithm::LBFGS;
        f.name = "spine_shape";
    } else {
        for (const char* g : {"frame", "strut", "spine", "tie"}) {
            const auto& els = p.groups[g];
            p.variables.push_back(variable(std::string("d_") + g, TubeDiameterVariable{els}, 0.2, 0.2, 1.0));
            p.variables.push_back(variable(std::string("alpha_") + g, TubeRatioVariable{els}, 0.01, 0.5, 0.98));
        }
        p.objective.kind = ObjectiveKind::Volume;
        p.constraints.push_back(DisplacementLimit{free_nodes(p.model), Axis::Z, 0.17});
        p.constraints.push_back(CombinedStressLimit{all_elements(p.model), 350e3});
        p.constraints.push_back(DiameterOrdering{strut_el, frame_el});
        p.constraints.push_back(DiameterOrdering{strut_el, spine_el});
        p.constraints.push_back(DiameterOrdering{tie_el, spine_el});
        f.name = "spine_sizing";
    }
    if (count != 6) f.name += "_" + std::to_string(count);
    f.problem = std::move(p);
    f.notes = {
        "Frames as in the frames fixture, each augmented with a strut pair per frame node: 1 m struts in the plane normal to the frame, tilted +-30 degrees from the outward in-plane normal.",
        "Strut ends are joined by a tie; strut ends along the frame are joined by two spines; each spine end connects to a pinned anchor 1 m beyond the frame support.",
        "All members are frame elements; initial tube d = 0.2 m, alpha = 0.95 (5 mm wall).",
        "Shape stage: one projected length change mu per strut pair (-0.5..2.5) and one x offset per anchor (0..4 m outward), 33 variables per frame, compliance objective.",
        "Sizing stage: (d, alpha) for the frame, strut, spine and tie groups, anchor links counted as spine; d_strut <= d_frame, d_strut <= d_spine, d_tie <= d_spine.",
        "Loads: 40 kN downward at each free frame node only.",
        "Frames used: " + std::string(1, static_cast<char>('A' + first)) + " to " +
            std::string(1, static_cast<char>('A' + first + count - 1)) + ".",
    };
    return f;
}

Fixture bridge(bool desk) {
    const int cant = desk ? 1 : 3;
    const int main = desk ? 6 : 10;
    const int panels = 2 * cant + main;
    const double span = 56.5;
    const double w = span / main;
    const double h = 3.0;
    const double pier_drop = 2.5;
    Builder b;
    std::vector<std::size_t> deck, top, bot;
    for (int i = 0; i <= panels; ++i) deck.push_back(b.node(Vec3(i * w, 0, 0), kPlanar));
    for (int i = 0; i < panels; ++i) top.push_back(b.node(Vec3((i + 0.5) * w, h, 0), kPlanar));
    for (int i = 0; i < panels; ++i) bot.push_back(b.node(Vec3((i + 0.5) * w, -h, 0), kPlanar));
    const std::array<int, 2> pier_at{cant, cant + main};
    std::vector<std::size_t> piers;
    for (int a : pier_at) piers.push_back(b.node(Vec3(a * w, -h - pier_drop, 0), kPlanarPin));

    const ExplicitSection s0 = bar_section(0.034);
    std::map<std::string, std::vector<std::size_t>> g;
    for (int i = 0; i + 1 < panels; ++i) g["bottom_chord"].push_back(b.element(bot[i], bot[i + 1], s0));
    for (int i = 0; i + 1 < panels; ++i) g["top_chord"].push_back(b.element(top[i], top[i + 1], s0));
    for (int i = 0; i < panels; ++i) {
        g["bottom_web"].push_back(b.element(deck[i], bot[i], s0));
        g["bottom_web"].push_back(b.element(bot[i], deck[i + 1], s0));
    }
    for (int i = 0; i < panels; ++i) {
        g["top_web"].push_back(b.element(deck[i], top[i], s0));
        g["top_web"].push_back(b.element(top[i], deck[i + 1], s0));
    }
    for (int i = 0; i < panels; ++i) g["strut"].push_back(b.element(top[i], bot[i], s0));
    for (std::size_t k = 0; k < 2; ++k) {
        const int a = pier_at[k];
        g["support"].push_back(b.element(piers[k], bot[a - 1], s0));
        g["support"].push_back(b.element(piers[k], bot[a], s0));
    }
    for (auto d : deck) b.load(d, Vec3(0, -150.0, 0));

    Material s = steel();
    s.area_bounds = AreaBounds{0.001, 0.034, 0.2};
    Material wd = glulam();
    wd.area_bounds = AreaBounds{0.06, 0.5, 1.8};

    Problem p;
    p.model = b.build({s, wd});
    for (int i = 0; i < panels / 2; ++i) {
        const auto tag = std::to_string(i + 1);
        const int j = panels - 1 - i;
        p.variables.push_back(variable("top_dx" + tag, mirrored(top[i], top[j], Axis::X, -1.0), -0.4 * w, 0.0, 0.4 * w));
        p.variables.push_back(variable("top_dy" + tag, mirrored(top[i], top[j], Axis::Y, 1.0), -2.5, 0.0, 4.0));
        p.variables.push_back(variable("bot_dx" + tag, mirrored(bot[i], bot[j], Axis::X, -1.0), -0.4 * w, 0.0, 0.4 * w));
        p.variables.push_back(variable("bot_dy" + tag, mirrored(bot[i], bot[j], Axis::Y, 1.0), -4.0, 0.0, 2.5));
    }
    if (desk) {
        auto join = [&](std::initializer_list<const char*> names) {
            std::vector<std::size_t> out;
            for (const char* n : names) out.insert(out.end(), g[n].begin(), g[n].end());
            return out;
        };
        p.groups["chord"] = join({"bottom_chord", "top_chord"});
        p.groups["web"] = join({"bottom_web", "top_web", "strut"});
        p.groups["support"] = g["support"];
        for (const char* n : {"chord", "web", "support"}) {
            p.variables.push_back(variable(std::string("A_") + n, AreaVariable{p.groups[n]}, 0.001, 0.034, 0.2));
        }
    } else {
        p.groups = g;
        for (const char* n : {"bottom_chord", "top_chord", "bottom_web", "top_web", "strut", "support"}) {
            p.variables.push_back(variable(std::string("A_") + n, AreaVariable{g[n]}, 0.001, 0.034, 0.2));
        }
    }
    p.objective.kind = ObjectiveKind::EmbodiedCarbon;
    p.constraints.push_back(DisplacementLimit{deck, Axis::Y, 0.15});
    p.constraints.push_back(AxialStressLimit{all_elements(p.model), std::nullopt});
    if (desk) p.optimizer.time_limit = 30.0;

    Fixture f;
    f.name = desk ? "bridge_desk" : "bridge";
    f.problem = std::move(p);
    f.notes = {
        "Planar doubly cantilevered truss bridge, main span 56.5 m between two pinned piers, deck nodes on y = 0 between top and bottom chords 3 m above and below.",
        desk ? "Desk scale: 6 main panels plus 1 cantilever panel each side; groups chord / web / support."
             : "10 main panels plus 3 cantilever panels each side; groups bottom chord, top chord, bottom web, top web, strut, support.",
        "Deck nodes carry 150 kN each and are not moved; the deck itself is not modelled as members.",
        "Variables: mirrored (dx, dy) of every top and bottom chord node, one area per group. Material area bounds: glulam 0.06 <= A0 = 0.5 <= 1.8, steel 0.001 <= A0 = 0.034 <= 0.2.",
        "Steel E = 200 GPa, G = 77 GPa; glulam E = 11.5 GPa, G = 0.65 GPa (assumed, GL24h class values). Stress limits per material, glulam 33 MPa tension / 20.4 MPa compression.",
        "The file assigns steel everywhere; the sweep reassigns groups.",
    };
    return f;
}

std::vector<std::string> names() {
    return {"unit_bar", "bracket", "cantilever", "warren", "roof", "roof_4", "roof_grouped",
            "frames", "spine_shape", "spine_shape_1", "spine_sizing", "bridge", "bridge_desk"};
}

Fixture by_name(const std::string& name) {
    if (name == "unit_bar") return unit_bar();
    if (name == "bracket") return bracket();
    if (name == "cantilever") return cantilever();
    if (name == "warren") return warren();
    if (name == "roof") return roof(8, RoofVariant::Independent);
    if (name == "roof_4") return roof(4, RoofVariant::Independent);
    if (name == "roof_grouped") return roof(8, RoofVariant::Grouped);
    if (name == "frames") return frames(6);
    if (name == "spine_shape") return spine(6, true);
    if (name == "spine_shape_1") return spine(1, true, 3);
    if (name == "spine_sizing") return spine(6, false);
    if (name == "bridge") return bridge(false);
    if (name == "bridge_desk") return bridge(true);
    throw ValidationError("unknown fixture '" + name + "'");
}

nlohmann::json to_json(const Fixture& fixture) {
    nlohmann::json doc = problem_to_json(fixture.problem);
    doc["notes"] = fixture.notes;
    return doc;
}

}  // namespace diffstiff::fixtures
