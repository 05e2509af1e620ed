#include "diffstiff/optimize.hpp"

#include "diffstiff/errors.hpp"
#include "run_log.hpp"

namespace diffstiff {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::MaxIterations: return "max_iterations";
        case Termination::TimeLimit: return "time_limit";
        case Termination::LineSearchFailure: return "line_search_failure";
        case Termination::AnalysisFailure: return "analysis_failure";
    }
    return "unknown";
}

ProblemTarget::ProblemTarget(const Evaluator& evaluator, GradientMode mode, double fd_step, int threads)
    : ev_(evaluator), mode_(mode), fd_step_(fd_step), threads_(threads) {}

Evaluation ProblemTarget::evaluate(std::span<const double> x, bool gradients) {
    check_deadline();
    AnalysisCache cache = ev_.analyze(x);
    ++forward_;
    Evaluation e;
    e.f = ev_.value(cache, 0);
    e.g = ev_.constraints(cache);
    if (gradients) {
        if (mode_ == GradientMode::Adjoint) {
            e.df = ev_.gradient(cache, 0);
            e.dg = ev_.constraint_jacobian(cache, threads_);
            reverse_ += m() + 1;
        } else {
            const Eigen::MatrixXd G = ev_.finite_difference_all(x, fd_step_);
            e.df = G.row(0).transpose();
            e.dg = G.bottomRows(static_cast<Eigen::Index>(m()));
            forward_ += 2 * n();
        }
    }
    ev_.recycle(std::move(cache));
    return e;
}

OptimizationResult optimize(const Problem& problem, std::optional<OptimizerSettings> settings) {
    const OptimizerSettings s = settings.value_or(problem.optimizer);
    Evaluator ev(problem);
    ProblemTarget target(ev, s.gradient, s.fd_step, s.threads);
    OptimizationResult r;
    switch (s.algorithm) {
        case Algorithm::MMA: r = optimize_mma(target, s); break;
        case Algorithm::LBFGS: r = optimize_lbfgs(target, s); break;
        case Algorithm::GA: r = optimize_ga(target, s); break;
    }
    if (!r.x_final.empty() && r.history.size() > 0) {
        try {
            AnalysisCache c = ev.analyze(r.x_final);
            r.objective_final = ev.value(c, 0);
            r.max_violation = detail::max_violation(ev.constraints(c));
            r.feasible = r.max_violation <= s.feasibility_tolerance;
        } catch (const Error&) {
            r.feasible = false;
        }
    }
    return r;
}

}  // namespace diffstiff
