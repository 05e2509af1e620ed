#include <chrono>
#include <cmath>
#include <thread>

#include <gtest/gtest.h>

#include "diffstiff/errors.hpp"
#include "diffstiff/optimize.hpp"
#include "random_models.hpp"

using namespace diffstiff;

namespace {

// min x1^2 + x2^2 + x3^2 inside two balls of radius 3.
FunctionTarget toy_problem() {
    return FunctionTarget({0, 0, 0}, {5, 5, 5}, {4, 3, 2}, 2, [](std::span<const double> x, bool grad) {
        Evaluation e;
        e.f = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        e.g.resize(2);
        e.g(0) = std::pow(x[0] - 5, 2) + std::pow(x[1] - 2, 2) + std::pow(x[2] - 1, 2) - 9;
        e.g(1) = std::pow(x[0] - 3, 2) + std::pow(x[1] - 4, 2) + std::pow(x[2] - 3, 2) - 9;
        if (grad) {
            e.df = Eigen::Vector3d(2 * x[0], 2 * x[1], 2 * x[2]);
            e.dg.resize(2, 3);
            e.dg << 2 * (x[0] - 5), 2 * (x[1] - 2), 2 * (x[2] - 1), 2 * (x[0] - 3), 2 * (x[1] - 4),
                2 * (x[2] - 3);
        }
        return e;
    });
}

FunctionTarget bowl(std::size_t n) {
    std::vector<double> lo(n, -10.0), hi(n, 10.0), x0(n, 5.0);
    return FunctionTarget(lo, hi, x0, 0, [n](std::span<const double> x, bool grad) {
        Evaluation e;
        e.df.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const double a = 1.0 + static_cast<double>(i);
            const double c = 0.3 * static_cast<double>(i) - 1.0;
            e.f += a * (x[i] - c) * (x[i] - c);
            e.df(static_cast<Eigen::Index>(i)) = 2 * a * (x[i] - c);
        }
        if (!grad) e.df.resize(0);
        return e;
    });
}

FunctionTarget sphere(std::size_t n) {
    std::vector<double> lo(n, -5.0), hi(n, 5.0), x0(n, 4.0);
    return FunctionTarget(lo, hi, x0, 0, [](std::span<const double> x, bool) {
        Evaluation e;
        for (double v : x) e.f += v * v;
        return e;
    });
}

// Two bars meeting at a loaded node below two pinned supports; statically
// determinate, so the optimum is fully stressed.
Problem two_bar() {
    std::vector<Node> nodes(3);
    for (int i = 0; i < 2; ++i) {
        nodes[static_cast<std::size_t>(i)].id = i + 1;
        nodes[static_cast<std::size_t>(i)].position = Vec3(2.0 * i - 1.0, 0, 0);
        nodes[static_cast<std::size_t>(i)].fixed = {true, true, true, true, true, true};
    }
    nodes[2].id = 3;
    nodes[2].position = Vec3(0, -1, 0);
    nodes[2].fixed = {false, false, true, true, true, true};
    std::vector<Element> elements;
    for (std::size_t i = 0; i < 2; ++i) {
        Element e;
        e.id = static_cast<int>(i) + 1;
        e.start = i;
        e.end = 2;
        e.section = ExplicitSection{1e-3, 1e-8, 1e-8, 1e-8, 1e-6};
        elements.push_back(e);
    }
    Load load;
    load.node = 2;
    load.force = Vec3(30, -100, 0);
    Problem p;
    p.model = Model(nodes, {testing_support::steel()}, elements, {load});
    for (std::size_t i = 0; i < 2; ++i) {
        DesignVariable v;
        v.name = "A" + std::to_string(i + 1);
        v.kind = AreaVariable{{i}};
        v.lower = 1e-6;
        v.upper = 1e-2;
        v.initial = 1e-3;
        p.variables.push_back(v);
    }
    p.objective.kind = ObjectiveKind::Volume;
    p.constraints.push_back(AxialStressLimit{{0, 1}, std::nullopt});
    p.optimizer.rel_tolerance = 1e-9;
    return p;
}

}  // namespace

TEST(Mma, SolvesTwoBallToyProblem) {
    auto t = toy_problem();
    OptimizerSettings s;
    s.rel_tolerance = 1e-10;
    const auto r = optimize_mma(t, s);
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(r.reason, Termination::Converged);
    EXPECT_NEAR(r.x_final[0], 2.0175, 2e-3);
    EXPECT_NEAR(r.x_final[1], 1.7800, 2e-3);
    EXPECT_NEAR(r.x_final[2], 1.2376, 2e-3);
}

TEST(Mma, SolvesCantileverBeam) {
    // Five-segment cantilever: volume against a tip-deflection limit.
    FunctionTarget t(std::vector<double>(5, 1.0), std::vector<double>(5, 10.0), std::vector<double>(5, 5.0), 1,
                     [](std::span<const double> x, bool grad) {
                         const double c[5] = {61, 37, 19, 7, 1};
                         Evaluation e;
                         e.f = 0.0624 * (x[0] + x[1] + x[2] + x[3] + x[4]);
                         e.g = Eigen::VectorXd::Constant(1, -1.0);
                         for (int i = 0; i < 5; ++i) e.g(0) += c[i] / std::pow(x[i], 3);
                         if (grad) {
                             e.df = Eigen::VectorXd::Constant(5, 0.0624);
                             e.dg.resize(1, 5);
                             for (int i = 0; i < 5; ++i) e.dg(0, i) = -3 * c[i] / std::pow(x[i], 4);
                         }
                         return e;
                     });
    OptimizerSettings s;
    s.rel_tolerance = 1e-9;
    const auto r = optimize_mma(t, s);
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(r.reason, Termination::Converged);
    EXPECT_NEAR(r.objective_final, 1.340, 1e-3);
    const double expect[5] = {6.016, 5.309, 4.494, 3.502, 2.153};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.x_final[static_cast<std::size_t>(i)], expect[i], 5e-3);
    EXPECT_LT(r.history.size(), 60u);
}

TEST(Mma, HistoryRowsAndIterates) {
    auto t = toy_problem();
    OptimizerSettings s;
    s.record_iterates = true;
    s.max_iterations = 5;
    s.rel_tolerance = 0.0;
    const auto r = optimize_mma(t, s);
    EXPECT_EQ(r.reason, Termination::MaxIterations);
    ASSERT_EQ(r.history.size(), 6u);
    EXPECT_EQ(r.iterates.size(), r.history.size());
    for (std::size_t i = 0; i < r.history.size(); ++i) EXPECT_EQ(r.history[i].iteration, static_cast<int>(i));
}

TEST(Mma, AnalysisFailureReturnsPartialHistory) {
    int calls = 0;
    FunctionTarget t({0.0}, {1.0}, {0.5}, 0, [&](std::span<const double> x, bool) {
        if (++calls == 3) throw GeometryError("zero-length element");
        Evaluation e;
        e.f = (x[0] - 0.2) * (x[0] - 0.2);
        e.df = Eigen::VectorXd::Constant(1, 2 * (x[0] - 0.2));
        e.g.resize(0);
        e.dg.resize(0, 1);
        return e;
    });
    OptimizerSettings s;
    s.rel_tolerance = 0.0;
    const auto r = optimize_mma(t, s);
    EXPECT_EQ(r.reason, Termination::AnalysisFailure);
    EXPECT_EQ(r.history.size(), 2u);
    EXPECT_NE(r.message.find("zero-length"), std::string::npos);
}

TEST(Lbfgs, QuadraticBowlConverges) {
    auto t = bowl(10);
    OptimizerSettings s;
    s.rel_tolerance = 0.0;
    s.max_iterations = 50;
    const auto r = optimize_lbfgs(t, s);
    ASSERT_LE(r.history.size(), 51u);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_NEAR(r.x_final[i], 0.3 * static_cast<double>(i) - 1.0, 1e-8);
    }
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        EXPECT_LT(r.history[i].objective, r.history[i - 1].objective);
    }
}

TEST(Lbfgs, ActiveBoundsAreRespected) {
    std::vector<double> lo{0.0, 0.0}, hi{1.0, 1.0};
    FunctionTarget t(lo, hi, {0.5, 0.5}, 0, [](std::span<const double> x, bool) {
        Evaluation e;
        e.f = (x[0] + 1) * (x[0] + 1) + (x[1] - 0.25) * (x[1] - 0.25);
        e.df = Eigen::Vector2d(2 * (x[0] + 1), 2 * (x[1] - 0.25));
        return e;
    });
    OptimizerSettings s;
    const auto r = optimize_lbfgs(t, s);
    EXPECT_DOUBLE_EQ(r.x_final[0], 0.0);
    EXPECT_NEAR(r.x_final[1], 0.25, 1e-6);
}

TEST(Lbfgs, RejectsConstrainedTargets) {
    auto t = toy_problem();
    EXPECT_THROW(optimize_lbfgs(t, OptimizerSettings{}), OptimizerError);
}

TEST(Ga, SphereHistoryNonIncreasingAndDeterministic) {
    auto t1 = sphere(4);
    auto t2 = sphere(4);
    OptimizerSettings s;
    s.population = 30;
    s.max_iterations = 60;
    s.seed = 42;
    const auto a = optimize_ga(t1, s);
    const auto b = optimize_ga(t2, s);
    ASSERT_EQ(a.history.size(), 61u);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        EXPECT_TRUE(a.history[i].same_values(b.history[i]));
        if (i > 0) EXPECT_LE(a.history[i].objective, a.history[i - 1].objective);
    }
    EXPECT_EQ(a.x_final, b.x_final);
    EXPECT_LT(a.objective_final, 0.1);

    s.seed = 43;
    auto t3 = sphere(4);
    const auto c = optimize_ga(t3, s);
    EXPECT_NE(c.x_final, a.x_final);
}

TEST(Ga, PrefersFeasibleIndividuals) {
    // min x subject to x >= 0.6 on [0, 1]
    FunctionTarget t({0.0}, {1.0}, {1.0}, 1, [](std::span<const double> x, bool) {
        Evaluation e;
        e.f = x[0];
        e.g = Eigen::VectorXd::Constant(1, 0.6 - x[0]);
        return e;
    });
    OptimizerSettings s;
    s.population = 20;
    s.max_iterations = 40;
    const auto r = optimize_ga(t, s);
    EXPECT_TRUE(r.feasible);
    EXPECT_GE(r.x_final[0], 0.6 - 1e-6);
    EXPECT_LT(r.x_final[0], 0.7);
}

TEST(TimeLimit, EveryAlgorithmStopsWithinBudget) {
    const double budget = 0.3;
    for (auto algo : {Algorithm::MMA, Algorithm::LBFGS, Algorithm::GA}) {
        std::vector<double> lo(3, -1.0), hi(3, 1.0), x0(3, 0.9);
        FunctionTarget t(lo, hi, x0, 0, [](std::span<const double> x, bool) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            Evaluation e;
            e.f = std::cos(3 * x[0]) + x[1] * x[1] + std::sin(x[2]);
            e.df = Eigen::Vector3d(-3 * std::sin(3 * x[0]), 2 * x[1], std::cos(x[2]));
            e.dg.resize(0, 3);
            return e;
        });
        OptimizerSettings s;
        s.time_limit = budget;
        s.rel_tolerance = 0.0;
        s.max_iterations = 1000000;
        s.population = 10;
        const auto start = std::chrono::steady_clock::now();
        OptimizationResult r;
        switch (algo) {
            case Algorithm::MMA: r = optimize_mma(t, s); break;
            case Algorithm::LBFGS: r = optimize_lbfgs(t, s); break;
            case Algorithm::GA: r = optimize_ga(t, s); break;
        }
        const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (r.reason == Termination::TimeLimit) {
            EXPECT_LE(took, 1.1 * budget) << to_string(algo);
        } else {
            EXPECT_LE(took, budget) << to_string(algo);
        }
        EXPECT_FALSE(r.history.empty());
    }
}

TEST(ProblemOptimize, TwoBarVolumeReachesFullyStressedDesign) {
    const auto r = optimize(two_bar());
    ASSERT_TRUE(r.feasible) << r.max_violation;
    EXPECT_EQ(r.reason, Termination::Converged);
    const double sigma = 350e3;
    const double a1 = 130.0 / std::sqrt(2.0) / sigma;
    const double a2 = 70.0 / std::sqrt(2.0) / sigma;
    EXPECT_NEAR(r.x_final[0], a1, 1e-4 * a1);
    EXPECT_NEAR(r.x_final[1], a2, 1e-4 * a2);
    EXPECT_NEAR(r.objective_final, 200.0 / sigma, 1e-4 * 200.0 / sigma);
}

TEST(ProblemOptimize, AdjointAndFdMmaReachTheSameDesign) {
    auto p = two_bar();
    auto fd = p.optimizer;
    fd.gradient = GradientMode::FiniteDifference;
    fd.fd_step = 1e-9;
    const auto a = optimize(p);
    const auto b = optimize(p, fd);
    ASSERT_TRUE(a.feasible);
    ASSERT_TRUE(b.feasible);
    for (std::size_t i = 0; i < a.x_final.size(); ++i) {
        EXPECT_NEAR(a.x_final[i], b.x_final[i], 1e-4 * a.x_final[i]);
    }
}
