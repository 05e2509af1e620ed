#include "report.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include <openssl/evp.h>

#include "diffstiff/functions.hpp"

namespace diffstiff::cli {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[md[i] >> 4];
        out += kHex[md[i] & 0xF];
    }
    return out;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_row(std::span<const std::string> fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) line += ',';
        line += csv_field(fields[i]);
    }
    line += "\r\n";
    return line;
}

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

namespace {

constexpr double kPerMPa = 1e3;  // kN/m² per MPa

nlohmann::json vec(const Eigen::Ref<const Eigen::VectorXd>& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

double json_safe(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

nlohmann::json analysis_json(const Evaluator& evaluator, const AnalysisCache& cache) {
    const Model& model = cache.model;
    const auto& dofs = cache.dofs();
    const int per = dofs.dofs_per_node;
    nlohmann::json doc;

    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < model.nodes().size(); ++i) {
        const auto& n = model.nodes()[i];
        nodes.push_back({{"id", n.id},
                         {"xyz", {n.position.x(), n.position.y(), n.position.z()}},
                         {"u", vec(cache.u_full.segment(static_cast<Eigen::Index>(i) * per, per))}});
    }
    doc["nodes"] = std::move(nodes);

    const Eigen::VectorXd r = reactions(cache);
    nlohmann::json react = nlohmann::json::array();
    for (std::size_t k = 0; k < dofs.fixed.size(); ++k) {
        const std::size_t g = dofs.fixed[k];
        react.push_back({{"node", model.nodes()[g / static_cast<std::size_t>(per)].id},
                         {"dof", static_cast<int>(g % static_cast<std::size_t>(per))},
                         {"value", r[static_cast<Eigen::Index>(k)]}});
    }
    doc["reactions"] = std::move(react);

    nlohmann::json elements = nlohmann::json::array();
    for (std::size_t e = 0; e < model.elements().size(); ++e) {
        const auto& st = cache.elements[e];
        const double N = axial_force(cache, e);
        nlohmann::json item{{"id", model.elements()[e].id},
                            {"local_forces", vec(element_forces(cache, e))},
                            {"N", N},
                            {"A", st.section.A},
                            {"L", st.geometry.L},
                            {"sigma_axial_MPa", N / st.section.A / kPerMPa}};
        if (st.kind == ElementKind::Frame) item["sigma_combined_MPa"] = frame_combined_stress(cache, e) / kPerMPa;
        elements.push_back(std::move(item));
    }
    doc["elements"] = std::move(elements);

    doc["volume"] = volume(model);
    doc["mass"] = mass(model);
    doc["embodied_carbon"] = embodied_carbon(model);
    doc["compliance"] = compliance(cache.u, cache.p);
    doc["objective"] = evaluator.value(cache, 0);

    const Eigen::VectorXd g = evaluator.constraints(cache);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        rows.push_back({{"name", evaluator.output_name(static_cast<std::size_t>(i) + 1)}, {"value", g[i]}});
    }
    doc["constraints"] = std::move(rows);
    doc["max_violation"] = g.size() > 0 ? std::max(0.0, g.maxCoeff()) : 0.0;
    return doc;
}

nlohmann::json result_json(const Problem& problem, const OptimizationResult& result) {
    nlohmann::json doc;
    nlohmann::json x = nlohmann::json::array();
    for (std::size_t i = 0; i < result.x_final.size(); ++i) {
        x.push_back({{"name", problem.variables[i].name}, {"value", result.x_final[i]}});
    }
    doc["x_final"] = std::move(x);
    doc["objective_final"] = json_safe(result.objective_final);
    doc["max_violation"] = json_safe(result.max_violation);
    doc["feasible"] = result.feasible;
    doc["termination"] = to_string(result.reason);
    doc["message"] = result.message;
    doc["iterations"] = result.history.empty() ? 0 : result.history.back().iteration;
    doc["evaluations"] = result.evaluations;
    doc["wall_time_s"] = result.wall_time;
    if (!result.history.empty()) doc["objective_initial"] = result.history.front().objective;
    return doc;
}

std::string history_csv(const OptimizationResult& result) {
    std::string out = "iteration,wall_time_s,objective,max_violation\r\n";
    for (const auto& h : result.history) {
        const std::vector<std::string> f{std::to_string(h.iteration), number(h.wall_time), number(h.objective),
                                         number(h.max_violation)};
        out += csv_row(f);
    }
    return out;
}

}  // namespace diffstiff::cli
