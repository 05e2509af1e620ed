#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "diffstiff/errors.hpp"
#include "diffstiff/optimize.hpp"
#include "run_log.hpp"

namespace diffstiff {
namespace {

struct Individual {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    double v = std::numeric_limits<double>::infinity();
};

/// Feasible before infeasible; feasible by objective, infeasible by violation.
struct Ranking {
    double tol;
    bool operator()(const Individual& a, const Individual& b) const {
        const bool fa = a.v <= tol;
        const bool fb = b.v <= tol;
        if (fa != fb) return fa;
        if (fa) return a.f < b.f;
        if (a.v != b.v) return a.v < b.v;
        return a.f < b.f;
    }
};

}  // namespace

OptimizationResult optimize_ga(OptimizationTarget& target, const OptimizerSettings& settings) {
    if (settings.population < 2) throw OptimizerError("GA population must be at least 2");
    detail::RunLog run(target, settings);
    const std::size_t n = target.n();
    const auto lo = target.lower();
    const auto hi = target.upper();
    std::mt19937_64 rng(settings.seed);
    const Ranking better{settings.feasibility_tolerance};
    const auto pop_size = static_cast<std::size_t>(settings.population);
    const std::size_t elites = std::max<std::size_t>(1, pop_size / 20);
    const double blx = 0.5;
    const double crossover_rate = 0.9;
    const double mutation_rate = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;

    auto evaluate = [&](Individual& ind) {
        try {
            const Evaluation e = run.evaluate(ind.x, false);
            ind.f = e.f;
            ind.v = detail::max_violation(e.g);
            if (!std::isfinite(ind.f)) ind.v = std::numeric_limits<double>::infinity();
        } catch (const DeadlineExceeded&) {
            throw;
        } catch (const Error&) {
            ind.f = std::numeric_limits<double>::infinity();
            ind.v = std::numeric_limits<double>::infinity();
        }
        run.consider(ind.x, ind.f, ind.v);
    };

    std::vector<Individual> pop(pop_size);
    pop[0].x = target.initial();
    for (std::size_t i = 0; i < n; ++i) pop[0].x[i] = std::clamp(pop[0].x[i], lo[i], hi[i]);
    for (std::size_t p = 1; p < pop_size; ++p) {
        pop[p].x.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pop[p].x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
        }
    }

    std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto tournament = [&]() -> const Individual& {
        const Individual& a = pop[pick(rng)];
        const Individual& b = pop[pick(rng)];
        return better(b, a) ? b : a;
    };

    try {
        for (auto& ind : pop) evaluate(ind);
        std::stable_sort(pop.begin(), pop.end(), better);
        run.record(0, pop[0].x, pop[0].f, pop[0].v);

        for (int gen = 1; gen <= settings.max_iterations; ++gen) {
            if (run.out_of_time()) return run.finish(Termination::TimeLimit);
            std::vector<Individual> next(pop.begin(), pop.begin() + static_cast<std::ptrdiff_t>(elites));
            while (next.size() < pop_size) {
                const Individual& p1 = tournament();
                const Individual& p2 = tournament();
                Individual child;
                child.x = p1.x;
                if (unit(rng) < crossover_rate) {
                    for (std::size_t i = 0; i < n; ++i) {
                        const double a = std::min(p1.x[i], p2.x[i]);
                        const double b = std::max(p1.x[i], p2.x[i]);
                        const double w = b - a;
                        child.x[i] = a - blx * w + unit(rng) * (1.0 + 2.0 * blx) * w;
                    }
                }
                for (std::size_t i = 0; i < n; ++i) {
                    if (unit(rng) < mutation_rate) child.x[i] += 0.1 * (hi[i] - lo[i]) * gauss(rng);
                    child.x[i] = std::clamp(child.x[i], lo[i], hi[i]);
                }
                next.push_back(std::move(child));
            }
            for (std::size_t p = elites; p < next.size(); ++p) evaluate(next[p]);
            pop = std::move(next);
            std::stable_sort(pop.begin(), pop.end(), better);
            run.record(gen, pop[0].x, pop[0].f, pop[0].v);
        }
    } catch (const DeadlineExceeded&) {
        return run.finish(Termination::TimeLimit);
    }
    return run.finish(Termination::MaxIterations);
}

}  // namespace diffstiff
