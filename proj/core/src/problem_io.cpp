#include "diffstiff/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "diffstiff/elements.hpp"
#include "diffstiff/errors.hpp"

namespace diffstiff {

using nlohmann::json;

namespace {

constexpr double kMPa = 1e3;  // kN/m² per MPa

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing \"") + key + "\"");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw UnitError(where + ": non-finite value");
    return d;
}

double number(const json& obj, const char* key, const std::string& where) {
    return number(need(obj, key, where), where + "." + key);
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

std::string text(const json& obj, const char* key, const std::string& where) {
    const auto& v = need(obj, key, where);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

Vec3 vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) fail(where, "expected a 3-vector");
    return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

Axis axis(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected an axis name");
    const auto s = v.get<std::string>();
    if (s == "x" || s == "X") return Axis::X;
    if (s == "y" || s == "Y") return Axis::Y;
    if (s == "z" || s == "Z") return Axis::Z;
    fail(where, "unknown axis \"" + s + "\"");
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer id");
    return v.get<int>();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

struct Reader {
    Model model;
    std::map<std::string, std::vector<std::size_t>> groups;

    std::size_t node(const json& v, const std::string& where) const {
        const int id = integer(v, where);
        if (!model.has_node(id)) fail(where, "unknown node id " + std::to_string(id));
        return model.node_index(id);
    }

    std::size_t element(const json& v, const std::string& where) const {
        const int id = integer(v, where);
        if (!model.has_element(id)) fail(where, "unknown element id " + std::to_string(id));
        return model.element_index(id);
    }

    // array of ids, a group name, or "all"
    std::vector<std::size_t> elements(const json& v, const std::string& where) const {
        std::vector<std::size_t> out;
        if (v.is_string()) {
            const auto name = v.get<std::string>();
            if (name == "all") {
                for (std::size_t i = 0; i < model.elements().size(); ++i) out.push_back(i);
                return out;
            }
            const auto it = groups.find(name);
            if (it == groups.end()) fail(where, "unknown group \"" + name + "\"");
            return it->second;
        }
        if (!v.is_array() || v.empty()) fail(where, "expected a non-empty element list or group name");
        for (const auto& e : v) out.push_back(element(e, where));
        return out;
    }

    std::vector<std::size_t> nodes(const json& v, const std::string& where) const {
        std::vector<std::size_t> out;
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            if (s != "all") fail(where, "expected a node list or \"all\"");
            for (std::size_t i = 0; i < model.nodes().size(); ++i) out.push_back(i);
            return out;
        }
        if (!v.is_array() || v.empty()) fail(where, "expected a non-empty node list");
        for (const auto& n : v) out.push_back(node(n, where));
        return out;
    }

    std::vector<std::size_t> element_selector(const json& obj, const std::string& where) const {
        if (obj.contains("elements")) return elements(obj.at("elements"), where + ".elements");
        if (obj.contains("group")) return elements(obj.at("group"), where + ".group");
        fail(where, "needs \"elements\" or \"group\"");
    }
};

Model read_model(const json& doc) {
    std::vector<Node> nodes;
    const auto& jn = need(doc, "nodes", "document");
    if (!jn.is_array()) fail("nodes", "expected an array");
    for (std::size_t i = 0; i < jn.size(); ++i) {
        const auto& n = jn[i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        Node node;
        node.id = integer(need(n, "id", where), where + ".id");
        node.position = vec3(need(n, "xyz", where), where + ".xyz");
        if (n.contains("fixed")) {
            const auto& f = n.at("fixed");
            if (!f.is_array() || f.size() != 6) fail(where + ".fixed", "expected 6 booleans");
            for (std::size_t k = 0; k < 6; ++k) {
                if (!f[k].is_boolean()) fail(where + ".fixed", "expected 6 booleans");
                node.fixed[k] = f[k].get<bool>();
            }
        }
        nodes.push_back(node);
    }

    std::vector<Material> materials;
    const auto& jm = need(doc, "materials", "document");
    if (!jm.is_array()) fail("materials", "expected an array");
    for (std::size_t i = 0; i < jm.size(); ++i) {
        const auto& m = jm[i];
        const std::string where = "materials[" + std::to_string(i) + "]";
        Material mat;
        mat.name = text(m, "name", where);
        if (m.contains("code")) {
            const auto c = m.at("code").get<std::string>();
            if (c.size() != 1) fail(where + ".code", "expected a single character");
            mat.code = c[0];
        } else {
            mat.code = mat.name.empty() ? '?' : static_cast<char>(std::toupper(mat.name[0]));
        }
        mat.E = number(m, "E", where);
        mat.G = number(m, "G", where);
        mat.rho = number_or(m, "rho", 0.0, where);
        mat.ecc = number_or(m, "ecc", 0.0, where);
        mat.sigma_t = number(m, "sigma_t", where) * kMPa;
        mat.sigma_c = std::abs(number(m, "sigma_c", where)) * kMPa;
        if (m.contains("area_bounds")) {
            const auto& b = m.at("area_bounds");
            if (!b.is_array() || b.size() != 3) fail(where + ".area_bounds", "expected [lower, initial, upper]");
            mat.area_bounds = AreaBounds{number(b[0], where), number(b[1], where), number(b[2], where)};
        }
        materials.push_back(mat);
    }

    std::map<std::string, Section> sections;
    if (doc.contains("sections")) {
        const auto& js = doc.at("sections");
        if (!js.is_array()) fail("sections", "expected an array");
        for (std::size_t i = 0; i < js.size(); ++i) {
            const auto& s = js[i];
            const std::string where = "sections[" + std::to_string(i) + "]";
            const auto name = text(s, "name", where);
            const auto type = s.contains("type") ? s.at("type").get<std::string>() : std::string("explicit");
            if (type == "tube") {
                sections[name] = TubeSection{number(s, "d", where), number(s, "alpha", where)};
            } else if (type == "explicit") {
                ExplicitSection e;
                e.A = number(s, "A", where);
                e.Iy = number_or(s, "Iy", 0.0, where);
                e.Iz = number_or(s, "Iz", 0.0, where);
                e.J = number_or(s, "J", 0.0, where);
                e.S = number_or(s, "S", 0.0, where);
                sections[name] = e;
            } else {
                fail(where + ".type", "expected \"explicit\" or \"tube\"");
            }
        }
    }

    std::unordered_map<int, std::size_t> node_ix;
    for (std::size_t i = 0; i < nodes.size(); ++i) node_ix[nodes[i].id] = i;
    std::unordered_map<std::string, std::size_t> mat_ix;
    for (std::size_t i = 0; i < materials.size(); ++i) mat_ix[materials[i].name] = i;

    std::vector<Element> elements;
    const auto& je = need(doc, "elements", "document");
    if (!je.is_array()) fail("elements", "expected an array");
    for (std::size_t i = 0; i < je.size(); ++i) {
        const auto& e = je[i];
        const std::string where = "elements[" + std::to_string(i) + "]";
        Element el;
        el.id = integer(need(e, "id", where), where + ".id");
        const auto& en = need(e, "nodes", where);
        if (!en.is_array() || en.size() != 2) fail(where + ".nodes", "expected [start, end]");
        for (int k = 0; k < 2; ++k) {
            const int id = integer(en[k], where + ".nodes");
            const auto it = node_ix.find(id);
            if (it == node_ix.end()) fail(where + ".nodes", "unknown node id " + std::to_string(id));
            (k == 0 ? el.start : el.end) = it->second;
        }
        if (el.start == el.end) fail(where, "start and end node coincide");
        const auto mname = text(e, "material", where);
        const auto mit = mat_ix.find(mname);
        if (mit == mat_ix.end()) fail(where + ".material", "unknown material \"" + mname + "\"");
        el.material = mit->second;
        const auto sname = text(e, "section", where);
        const auto sit = sections.find(sname);
        if (sit == sections.end()) fail(where + ".section", "unknown section \"" + sname + "\"");
        el.section = sit->second;
        const auto kind = e.contains("kind") ? e.at("kind").get<std::string>() : std::string("truss");
        if (kind == "truss") {
            el.kind = ElementKind::Truss;
        } else if (kind == "frame") {
            el.kind = ElementKind::Frame;
        } else {
            fail(where + ".kind", "expected \"truss\" or \"frame\"");
        }
        el.roll = number_or(e, "roll", 0.0, where);
        elements.push_back(std::move(el));
    }

    std::vector<Load> loads;
    if (doc.contains("loads")) {
        const auto& jl = doc.at("loads");
        if (!jl.is_array()) fail("loads", "expected an array");
        for (std::size_t i = 0; i < jl.size(); ++i) {
            const auto& l = jl[i];
            const std::string where = "loads[" + std::to_string(i) + "]";
            Load load;
            const int id = integer(need(l, "node", where), where + ".node");
            const auto it = node_ix.find(id);
            if (it == node_ix.end()) fail(where + ".node", "unknown node id " + std::to_string(id));
            load.node = it->second;
            if (l.contains("force")) load.force = vec3(l.at("force"), where + ".force");
            if (l.contains("moment")) load.moment = vec3(l.at("moment"), where + ".moment");
            loads.push_back(load);
        }
    }
    try {
        return Model(std::move(nodes), std::move(materials), std::move(elements), std::move(loads));
    } catch (const ValidationError&) {
        throw;
    }
}

VariableKind read_variable_kind(const Reader& r, const json& v, const std::string& where) {
    const auto kind = text(v, "kind", where);
    if (kind == "node_offset") {
        NodeOffset off;
        const auto& t = need(v, "targets", where);
        if (!t.is_array() || t.empty()) fail(where + ".targets", "expected a non-empty array");
        for (const auto& jt : t) {
            OffsetTarget target;
            target.node = r.node(need(jt, "node", where), where + ".targets.node");
            target.axis = axis(need(jt, "axis", where), where + ".targets.axis");
            target.coefficient = number_or(jt, "coefficient", 1.0, where + ".targets");
            off.targets.push_back(target);
        }
        return off;
    }
    if (kind == "projected_offset") {
        ProjectedOffset off;
        auto add = [&](const json& jt) {
            ProjectedTarget target;
            target.node = r.node(need(jt, "node", where), where + ".node");
            target.direction = vec3(need(jt, "direction", where), where + ".direction");
            off.targets.push_back(target);
        };
        if (v.contains("targets")) {
            for (const auto& jt : v.at("targets")) add(jt);
        } else {
            add(v);
        }
        return off;
    }
    if (kind == "area") return AreaVariable{r.element_selector(v, where)};
    if (kind == "tube_diameter") return TubeDiameterVariable{r.element_selector(v, where)};
    if (kind == "tube_ratio") return TubeRatioVariable{r.element_selector(v, where)};
    fail(where + ".kind", "unknown variable kind \"" + kind + "\"");
}

ConstraintSpec read_constraint(const Reader& r, const json& c, const std::string& where) {
    const auto kind = text(c, "kind", where);
    if (kind == "displacement") {
        DisplacementLimit d;
        d.nodes = r.nodes(need(c, "nodes", where), where + ".nodes");
        d.axis = axis(need(c, "axis", where), where + ".axis");
        d.limit = number(c, "limit", where);
        return d;
    }
    if (kind == "axial_stress") {
        AxialStressLimit a;
        a.elements = r.element_selector(c, where);
        if (c.contains("sigma_max")) a.sigma_max = number(c.at("sigma_max"), where + ".sigma_max") * kMPa;
        return a;
    }
    if (kind == "combined_stress") {
        CombinedStressLimit s;
        s.elements = r.element_selector(c, where);
        s.sigma_max = number(c, "sigma_max", where) * kMPa;
        return s;
    }
    if (kind == "diameter_ordering") {
        DiameterOrdering o;
        o.lesser = r.elements(need(c, "lesser", where), where + ".lesser");
        o.greater = r.elements(need(c, "greater", where), where + ".greater");
        return o;
    }
    fail(where + ".kind", "unknown constraint kind \"" + kind + "\"");
}

OptimizerSettings read_optimizer(const json& o) {
    OptimizerSettings s;
    if (!o.is_object()) return s;
    const std::string where = "optimizer";
    if (o.contains("algorithm")) {
        const auto a = o.at("algorithm").get<std::string>();
        if (a == "mma") s.algorithm = Algorithm::MMA;
        else if (a == "lbfgs") s.algorithm = Algorithm::LBFGS;
        else if (a == "ga") s.algorithm = Algorithm::GA;
        else fail(where + ".algorithm", "expected mma, lbfgs or ga");
    }
    if (o.contains("gradient")) {
        const auto g = o.at("gradient").get<std::string>();
        if (g == "adjoint") s.gradient = GradientMode::Adjoint;
        else if (g == "fd") s.gradient = GradientMode::FiniteDifference;
        else fail(where + ".gradient", "expected adjoint or fd");
    }
    s.rel_tolerance = number_or(o, "rel_tolerance", s.rel_tolerance, where);
    s.time_limit = number_or(o, "time_limit", s.time_limit, where);
    s.max_iterations = static_cast<int>(number_or(o, "max_iterations", s.max_iterations, where));
    s.feasibility_tolerance = number_or(o, "feasibility_tolerance", s.feasibility_tolerance, where);
    s.fd_step = number_or(o, "fd_step", s.fd_step, where);
    s.threads = static_cast<int>(number_or(o, "threads", s.threads, where));
    auto flag = [&](const char* key, bool& out) {
        if (!o.contains(key)) return;
        if (!o.at(key).is_boolean()) fail(where + "." + key, "expected a boolean");
        out = o.at(key).get<bool>();
    };
    flag("record_iterates", s.record_iterates);
    s.population = static_cast<int>(number_or(o, "population", s.population, where));
    if (o.contains("seed")) s.seed = o.at("seed").get<std::uint64_t>();
    s.move_limit = number_or(o, "move_limit", s.move_limit, where);
    s.asy_init = number_or(o, "asy_init", s.asy_init, where);
    s.asy_decr = number_or(o, "asy_decr", s.asy_decr, where);
    s.asy_incr = number_or(o, "asy_incr", s.asy_incr, where);
    s.artificial_penalty = number_or(o, "artificial_penalty", s.artificial_penalty, where);
    flag("mma_conservative", s.mma_conservative);
    s.memory = static_cast<int>(number_or(o, "memory", s.memory, where));
    return s;
}

}  // namespace

Problem problem_from_json(const json& doc) {
    if (!doc.is_object()) fail("document", "expected an object");
    Reader r;
    try {
        r.model = read_model(doc);
    } catch (const json::exception& e) {
        fail("model", e.what());
    }
    Problem p;
    try {
        if (doc.contains("groups")) {
            const auto& g = doc.at("groups");
            if (!g.is_object()) fail("groups", "expected an object");
            for (const auto& [name, ids] : g.items()) {
                std::vector<std::size_t> els;
                if (!ids.is_array() || ids.empty()) fail("groups." + name, "expected a non-empty id list");
                for (const auto& id : ids) els.push_back(r.element(id, "groups." + name));
                r.groups[name] = std::move(els);
            }
        }
        const auto& jv = need(doc, "variables", "document");
        if (!jv.is_array()) fail("variables", "expected an array");
        for (std::size_t i = 0; i < jv.size(); ++i) {
            const auto& v = jv[i];
            const std::string where = "variables[" + std::to_string(i) + "]";
            DesignVariable dv;
            dv.name = v.contains("name") ? v.at("name").get<std::string>() : "x" + std::to_string(i);
            dv.kind = read_variable_kind(r, v, where);
            dv.lower = number(v, "lower", where);
            dv.upper = number(v, "upper", where);
            dv.initial = number(v, "initial", where);
            p.variables.push_back(std::move(dv));
        }
        const auto& jo = need(doc, "objective", "document");
        const auto kind = text(jo, "kind", "objective");
        if (kind == "volume") p.objective.kind = ObjectiveKind::Volume;
        else if (kind == "compliance") p.objective.kind = ObjectiveKind::Compliance;
        else if (kind == "embodied_carbon") p.objective.kind = ObjectiveKind::EmbodiedCarbon;
        else fail("objective.kind", "unknown objective \"" + kind + "\"");
        if (doc.contains("constraints")) {
            const auto& jc = doc.at("constraints");
            if (!jc.is_array()) fail("constraints", "expected an array");
            for (std::size_t i = 0; i < jc.size(); ++i) {
                p.constraints.push_back(read_constraint(r, jc[i], "constraints[" + std::to_string(i) + "]"));
            }
        }
        if (doc.contains("optimizer")) p.optimizer = read_optimizer(doc.at("optimizer"));
    } catch (const json::exception& e) {
        fail("problem", e.what());
    }
    p.model = std::move(r.model);
    p.groups = std::move(r.groups);
    validate(p);
    return p;
}

Problem parse_problem(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                             std::to_string(col) + ": " + e.what(),
                         line, col);
    }
    return problem_from_json(doc);
}

Problem load_problem(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open problem file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

namespace {

json ids_of_elements(const Model& m, const std::vector<std::size_t>& els) {
    json a = json::array();
    for (auto e : els) a.push_back(m.elements()[e].id);
    return a;
}

json ids_of_nodes(const Model& m, const std::vector<std::size_t>& ns) {
    json a = json::array();
    for (auto n : ns) a.push_back(m.nodes()[n].id);
    return a;
}

const char* axis_name(Axis a) { return a == Axis::X ? "x" : (a == Axis::Y ? "y" : "z"); }

json section_json(const Section& s) {
    if (const auto* t = std::get_if<TubeSection>(&s)) return {{"type", "tube"}, {"d", t->d}, {"alpha", t->alpha}};
    const auto& e = std::get<ExplicitSection>(s);
    return {{"type", "explicit"}, {"A", e.A}, {"Iy", e.Iy}, {"Iz", e.Iz}, {"J", e.J}, {"S", e.S}};
}

}  // namespace

json problem_to_json(const Problem& problem) {
    const Model& m = problem.model;
    json doc;
    json nodes = json::array();
    for (const auto& n : m.nodes()) {
        nodes.push_back({{"id", n.id},
                         {"xyz", {n.position.x(), n.position.y(), n.position.z()}},
                         {"fixed", n.fixed}});
    }
    doc["nodes"] = std::move(nodes);
    json mats = json::array();
    for (const auto& mat : m.materials()) {
        json j = {{"name", mat.name}, {"code", std::string(1, mat.code)}, {"E", mat.E}, {"G", mat.G},
                  {"rho", mat.rho}, {"ecc", mat.ecc}, {"sigma_t", mat.sigma_t / kMPa},
                  {"sigma_c", mat.sigma_c / kMPa}};
        if (mat.area_bounds) {
            j["area_bounds"] = {mat.area_bounds->lower, mat.area_bounds->initial, mat.area_bounds->upper};
        }
        mats.push_back(std::move(j));
    }
    doc["materials"] = std::move(mats);

    std::vector<json> distinct;
    json sections = json::array();
    json elements = json::array();
    for (const auto& e : m.elements()) {
        const json sj = section_json(e.section);
        std::size_t k = 0;
        while (k < distinct.size() && distinct[k] != sj) ++k;
        if (k == distinct.size()) {
            distinct.push_back(sj);
            json named = sj;
            named["name"] = "s" + std::to_string(k);
            sections.push_back(std::move(named));
        }
        json ej = {{"id", e.id},
                   {"nodes", {m.nodes()[e.start].id, m.nodes()[e.end].id}},
                   {"material", m.materials()[e.material].name},
                   {"section", "s" + std::to_string(k)},
                   {"kind", e.kind == ElementKind::Truss ? "truss" : "frame"}};
        if (e.roll != 0.0) ej["roll"] = e.roll;
        elements.push_back(std::move(ej));
    }
    doc["sections"] = std::move(sections);
    doc["elements"] = std::move(elements);

    json loads = json::array();
    for (const auto& l : m.loads()) {
        json lj = {{"node", m.nodes()[l.node].id}, {"force", {l.force.x(), l.force.y(), l.force.z()}}};
        if (!l.moment.isZero(0.0)) lj["moment"] = {l.moment.x(), l.moment.y(), l.moment.z()};
        loads.push_back(std::move(lj));
    }
    doc["loads"] = std::move(loads);

    json groups = json::object();
    for (const auto& [name, els] : problem.groups) groups[name] = ids_of_elements(m, els);
    doc["groups"] = std::move(groups);

    json vars = json::array();
    for (const auto& v : problem.variables) {
        json j = {{"name", v.name}, {"lower", v.lower}, {"upper", v.upper}, {"initial", v.initial}};
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, NodeOffset>) {
                    j["kind"] = "node_offset";
                    json t = json::array();
                    for (const auto& target : k.targets) {
                        t.push_back({{"node", m.nodes()[target.node].id},
                                     {"axis", axis_name(target.axis)},
                                     {"coefficient", target.coefficient}});
                    }
                    j["targets"] = std::move(t);
                } else if constexpr (std::is_same_v<K, ProjectedOffset>) {
                    j["kind"] = "projected_offset";
                    json t = json::array();
                    for (const auto& target : k.targets) {
                        t.push_back({{"node", m.nodes()[target.node].id},
                                     {"direction",
                                      {target.direction.x(), target.direction.y(), target.direction.z()}}});
                    }
                    j["targets"] = std::move(t);
                } else if constexpr (std::is_same_v<K, AreaVariable>) {
                    j["kind"] = "area";
                    j["elements"] = ids_of_elements(m, k.elements);
                } else if constexpr (std::is_same_v<K, TubeDiameterVariable>) {
                    j["kind"] = "tube_diameter";
                    j["elements"] = ids_of_elements(m, k.elements);
                } else {
                    j["kind"] = "tube_ratio";
                    j["elements"] = ids_of_elements(m, k.elements);
                }
            },
            v.kind);
        vars.push_back(std::move(j));
    }
    doc["variables"] = std::move(vars);

    const char* obj = problem.objective.kind == ObjectiveKind::Volume
                          ? "volume"
                          : (problem.objective.kind == ObjectiveKind::Compliance ? "compliance" : "embodied_carbon");
    doc["objective"] = {{"kind", obj}};

    json cons = json::array();
    for (const auto& c : problem.constraints) {
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, DisplacementLimit>) {
                    cons.push_back({{"kind", "displacement"}, {"nodes", ids_of_nodes(m, k.nodes)},
                                    {"axis", axis_name(k.axis)}, {"limit", k.limit}});
                } else if constexpr (std::is_same_v<K, AxialStressLimit>) {
                    json j = {{"kind", "axial_stress"}, {"elements", ids_of_elements(m, k.elements)}};
                    if (k.sigma_max) j["sigma_max"] = *k.sigma_max / kMPa;
                    cons.push_back(std::move(j));
                } else if constexpr (std::is_same_v<K, CombinedStressLimit>) {
                    cons.push_back({{"kind", "combined_stress"}, {"elements", ids_of_elements(m, k.elements)},
                                    {"sigma_max", k.sigma_max / kMPa}});
                } else {
                    cons.push_back({{"kind", "diameter_ordering"}, {"lesser", ids_of_elements(m, k.lesser)},
                                    {"greater", ids_of_elements(m, k.greater)}});
                }
            },
            c);
    }
    doc["constraints"] = std::move(cons);

    const auto& s = problem.optimizer;
    doc["optimizer"] = {{"algorithm", s.algorithm == Algorithm::MMA ? "mma" : (s.algorithm == Algorithm::LBFGS ? "lbfgs" : "ga")},
                        {"gradient", s.gradient == GradientMode::Adjoint ? "adjoint" : "fd"},
                        {"rel_tolerance", s.rel_tolerance},
                        {"time_limit", s.time_limit},
                        {"max_iterations", s.max_iterations},
                        {"feasibility_tolerance", s.feasibility_tolerance},
                        {"fd_step", s.fd_step},
                        {"threads", s.threads},
                        {"record_iterates", s.record_iterates},
                        {"population", s.population},
                        {"seed", s.seed},
                        {"move_limit", s.move_limit},
                        {"asy_init", s.asy_init},
                        {"asy_decr", s.asy_decr},
                        {"asy_incr", s.asy_incr},
                        {"artificial_penalty", s.artificial_penalty},
                        {"mma_conservative", s.mma_conservative},
                        {"memory", s.memory}};
    return doc;
}

Problem with_geometry(const Problem& problem, const json& geometry) {
    const auto& jn = need(geometry, "nodes", "geometry");
    if (!jn.is_array()) fail("geometry.nodes", "expected an array");
    std::vector<Vec3> positions;
    for (const auto& n : problem.model.nodes()) positions.push_back(n.position);
    for (const auto& n : jn) {
        const int id = integer(need(n, "id", "geometry.nodes"), "geometry.nodes.id");
        if (!problem.model.has_node(id)) fail("geometry.nodes", "unknown node id " + std::to_string(id));
        positions[problem.model.node_index(id)] = vec3(need(n, "xyz", "geometry.nodes"), "geometry.nodes.xyz");
    }
    Problem p = problem;
    p.model = problem.model.with_positions(std::move(positions));
    validate(p);
    return p;
}

json geometry_to_json(const Model& model) {
    json nodes = json::array();
    for (const auto& n : model.nodes()) {
        nodes.push_back({{"id", n.id}, {"xyz", {n.position.x(), n.position.y(), n.position.z()}}});
    }
    json elements = json::array();
    for (const auto& e : model.elements()) {
        json j = section_json(e.section);
        j["id"] = e.id;
        j["material"] = model.materials()[e.material].name;
        elements.push_back(std::move(j));
    }
    return {{"nodes", std::move(nodes)}, {"elements", std::move(elements)}};
}

}  // namespace diffstiff
