#include "diffstiff/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "diffstiff/errors.hpp"
#include "diffstiff/parallel.hpp"

namespace diffstiff {

Evaluator::Evaluator(Problem problem) : problem_(std::move(problem)) {
    validate(problem_);
    topology_ = make_topology(problem_.model);
    rows_ = constraint_catalog(problem_);
}

std::string Evaluator::output_name(std::size_t output) const {
    if (output == 0) return "objective";
    return describe(rows_.at(output - 1), problem_.model);
}

std::optional<std::size_t> Evaluator::find_output(const std::string& name) const {
    if (name == "objective") return 0;
    std::size_t index = 0;
    const auto* end = name.data() + name.size();
    if (auto [p, ec] = std::from_chars(name.data(), end, index); ec == std::errc{} && p == end) {
        if (index < n_outputs()) return index;
        return std::nullopt;
    }
    for (std::size_t k = 1; k < n_outputs(); ++k) {
        if (output_name(k) == name) return k;
    }
    return std::nullopt;
}

AnalysisCache Evaluator::analyze(std::span<const double> x) const {
    std::optional<Factorization> spare;
    {
        std::lock_guard lock(spare_mutex_);
        if (!spares_.empty()) {
            spare = std::move(spares_.back());
            spares_.pop_back();
        }
    }
    return diffstiff::analyze(apply_variables(problem_, x), topology_, std::move(spare));
}

void Evaluator::recycle(AnalysisCache&& cache) const {
    std::lock_guard lock(spare_mutex_);
    if (spares_.size() < 8) spares_.push_back(std::move(cache.factorization));
}

double Evaluator::value(const AnalysisCache& cache, std::size_t output) const {
    if (output == 0) return objective_value(problem_.objective.kind, cache);
    return row_value(rows_.at(output - 1), cache);
}

Eigen::VectorXd Evaluator::constraints(const AnalysisCache& cache) const {
    Eigen::VectorXd g(static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t i = 0; i < rows_.size(); ++i) g[static_cast<Eigen::Index>(i)] = row_value(rows_[i], cache);
    return g;
}

OutputSeeds Evaluator::seeds(const AnalysisCache& cache, std::size_t output) const {
    if (output == 0) return objective_seeds(problem_.objective.kind, cache);
    return row_seeds(rows_.at(output - 1), cache);
}

Eigen::VectorXd Evaluator::gradient(const AnalysisCache& cache, std::size_t output,
                                    AdjointState* trace) const {
    Eigen::VectorXd g = pull_back(problem_, reverse_pass(cache, seeds(cache, output), trace));
    if (gradient_hook) gradient_hook(output, g);
    return g;
}

Eigen::MatrixXd Evaluator::constraint_jacobian(const AnalysisCache& cache, int threads) const {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(n_variables()));
    parallel_for(rows_.size(), threads, [&](std::size_t i) {
        J.row(static_cast<Eigen::Index>(i)) = gradient(cache, i + 1).transpose();
    });
    return J;
}

namespace {

/// f(x + h e_i) and f(x - h e_i) for every coordinate, h_i = rel_step * max(1, |x_i|).
template <class Eval, class Store>
void central_stencil(std::span<const double> x, double rel_step, Eval&& eval, Store&& store) {
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        try {
            xp[i] = x[i] + h;
            auto fp = eval(xp);
            xp[i] = x[i] - h;
            auto fm = eval(xp);
            xp[i] = x[i];
            store(i, fp, fm, h);
        } catch (const Error& e) {
            throw FiniteDifferenceError(
                "analysis failed at coordinate " + std::to_string(i) + ": " + e.what(), i);
        }
    }
}

}  // namespace

Eigen::VectorXd Evaluator::finite_difference(std::span<const double> x, std::size_t output,
                                             double rel_step) const {
    Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
    central_stencil(
        x, rel_step,
        [&](const std::vector<double>& xp) {
            auto c = analyze(xp);
            const double f = value(c, output);
            recycle(std::move(c));
            return f;
        },
        [&](std::size_t i, double fp, double fm, double h) {
            g[static_cast<Eigen::Index>(i)] = (fp - fm) / (2.0 * h);
        });
    return g;
}

Eigen::MatrixXd Evaluator::finite_difference_all(std::span<const double> x, double rel_step) const {
    Eigen::MatrixXd G(static_cast<Eigen::Index>(n_outputs()), static_cast<Eigen::Index>(x.size()));
    central_stencil(
        x, rel_step,
        [&](const std::vector<double>& xp) {
            auto c = analyze(xp);
            Eigen::VectorXd f(static_cast<Eigen::Index>(n_outputs()));
            for (std::size_t k = 0; k < n_outputs(); ++k) f[static_cast<Eigen::Index>(k)] = value(c, k);
            recycle(std::move(c));
            return f;
        },
        [&](std::size_t i, const Eigen::VectorXd& fp, const Eigen::VectorXd& fm, double h) {
            G.col(static_cast<Eigen::Index>(i)) = (fp - fm) / (2.0 * h);
        });
    return G;
}

Eigen::VectorXd gradient(const Problem& problem, std::span<const double> x, std::size_t output) {
    Evaluator ev(problem);
    const auto cache = ev.analyze(x);
    return ev.gradient(cache, output);
}

Eigen::VectorXd finite_difference_gradient(const Problem& problem, std::span<const double> x,
                                           std::size_t output, double rel_step) {
    Evaluator ev(problem);
    return ev.finite_difference(x, output, rel_step);
}

}  // namespace diffstiff
