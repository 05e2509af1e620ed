#include <gtest/gtest.h>

#include "diffstiff/errors.hpp"
#include "diffstiff/evaluator.hpp"
#include "diffstiff/fixtures.hpp"
#include "diffstiff/problem_io.hpp"
#include "random_models.hpp"

using namespace diffstiff;
using nlohmann::json;

namespace {

json unit_doc() { return fixtures::to_json(fixtures::unit_bar()); }

}  // namespace

TEST(ProblemIo, RoundTripPreservesModelAndOutputs) {
    for (const Problem& p : {fixtures::warren().problem, fixtures::frames().problem, fixtures::bridge(true).problem,
                             testing_support::random_frame(4)}) {
        const Problem q = problem_from_json(problem_to_json(p));
        EXPECT_TRUE(q.model == p.model);
        EXPECT_EQ(q.variables.size(), p.variables.size());
        EXPECT_EQ(q.constraint_rows(), p.constraint_rows());
        EXPECT_EQ(problem_to_json(q), problem_to_json(p));
        Evaluator a(p), b(q);
        const auto ca = a.analyze(p.initial_point());
        const auto cb = b.analyze(q.initial_point());
        for (std::size_t k = 0; k < a.n_outputs(); ++k) EXPECT_EQ(a.value(ca, k), b.value(cb, k));
    }
}

TEST(ProblemIo, StressLimitsAreReadInMegapascal) {
    json doc = unit_doc();
    doc["constraints"].push_back({{"kind", "axial_stress"}, {"elements", {1}}, {"sigma_max", 350.0}});
    const Problem p = problem_from_json(doc);
    const auto& spec = std::get<AxialStressLimit>(p.constraints.back());
    EXPECT_DOUBLE_EQ(*spec.sigma_max, 350e3);
    EXPECT_DOUBLE_EQ(problem_to_json(p)["constraints"].back()["sigma_max"].get<double>(), 350.0);
}

TEST(ProblemIo, SyntaxErrorsCarryLineAndColumn) {
    try {
        parse_problem("{\n  \"nodes\": [\n    {\"id\": 1,,}\n  ]\n}");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_GT(e.column(), 0u);
    }
}

TEST(ProblemIo, RejectsUnresolvedReferences) {
    json doc = unit_doc();
    doc["elements"][0]["nodes"] = {1, 9};
    EXPECT_THROW(problem_from_json(doc), ValidationError);

    doc = unit_doc();
    doc["elements"][0]["material"] = "concrete";
    EXPECT_THROW(problem_from_json(doc), ValidationError);

    doc = unit_doc();
    doc["variables"][0]["elements"] = {4};
    EXPECT_THROW(problem_from_json(doc), ValidationError);
}

TEST(ProblemIo, RejectsBadBoundsAndDuplicates) {
    json doc = unit_doc();
    doc["variables"][0]["lower"] = 3.0;
    EXPECT_THROW(problem_from_json(doc), ValidationError);

    doc = unit_doc();
    doc["variables"].push_back(doc["variables"][0]);
    doc["variables"][1]["name"] = "A2";
    EXPECT_THROW(problem_from_json(doc), ValidationError);

    doc = unit_doc();
    doc["nodes"].push_back(doc["nodes"][0]);
    EXPECT_THROW(problem_from_json(doc), ValidationError);
}

TEST(ProblemIo, RejectsWrongTypes) {
    json doc = unit_doc();
    doc["optimizer"]["record_iterates"] = "yes";
    EXPECT_THROW(problem_from_json(doc), ValidationError);

    doc = unit_doc();
    doc["materials"][0]["E"] = -1.0;
    EXPECT_THROW(problem_from_json(doc), ValidationError);

    doc = unit_doc();
    doc["optimizer"]["algorithm"] = "simplex";
    EXPECT_THROW(problem_from_json(doc), ValidationError);
}

TEST(ProblemIo, GeometryRoundTrip) {
    const Problem p = fixtures::warren().problem;
    std::vector<double> x = p.initial_point();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * (p.variables[i].lower + p.variables[i].upper);
    const Model moved = apply_variables(p, x);
    const Problem q = with_geometry(p, geometry_to_json(moved));
    for (std::size_t n = 0; n < moved.nodes().size(); ++n) {
        EXPECT_EQ(q.model.nodes()[n].position, moved.nodes()[n].position);
    }
    EXPECT_THROW(with_geometry(p, json{{"nodes", {{{"id", 999}, {"xyz", {0, 0, 0}}}}}}), ValidationError);
}
