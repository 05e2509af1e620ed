#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diffstiff/errors.hpp"
#include "diffstiff/evaluator.hpp"
#include "diffstiff/model.hpp"

namespace diffstiff {

struct HistoryEntry {
    int iteration = 0;
    double wall_time = 0.0;  // s since start
    double objective = 0.0;
    double max_violation = 0.0;  // max(0, max g)

    /// Equal ignoring wall time.
    bool same_values(const HistoryEntry& o) const {
        return iteration == o.iteration && objective == o.objective && max_violation == o.max_violation;
    }
};

enum class Termination { Converged, MaxIterations, TimeLimit, LineSearchFailure, AnalysisFailure };
std::string to_string(Termination t);

struct OptimizationResult {
    std::vector<double> x_final;
    double objective_final = 0.0;
    double max_violation = 0.0;
    bool feasible = false;
    std::vector<HistoryEntry> history;
    Termination reason = Termination::MaxIterations;
    std::string message;
    std::vector<std::vector<double>> iterates;  // filled when record_iterates
    std::size_t evaluations = 0;                // forward evaluations requested
    double wall_time = 0.0;
};

struct Evaluation {
    double f = 0.0;
    Eigen::VectorXd g;   // constraint values, feasible when <= 0
    Eigen::VectorXd df;  // empty unless gradients were requested
    Eigen::MatrixXd dg;  // m x n
};

/// Thrown by a target whose evaluation ran past its deadline.
class DeadlineExceeded : public Error {
public:
    DeadlineExceeded() : Error("time limit reached during evaluation") {}
};

using Clock = std::chrono::steady_clock;

/// What the optimizers see.
class OptimizationTarget {
public:
    virtual ~OptimizationTarget() = default;
    virtual std::size_t n() const = 0;
    virtual std::size_t m() const = 0;
    virtual std::vector<double> lower() const = 0;
    virtual std::vector<double> upper() const = 0;
    virtual std::vector<double> initial() const = 0;
    virtual Evaluation evaluate(std::span<const double> x, bool gradients) = 0;

    void set_deadline(std::optional<Clock::time_point> d) { deadline_ = d; }

protected:
    void check_deadline() const {
        if (deadline_ && Clock::now() > *deadline_) throw DeadlineExceeded();
    }

private:
    std::optional<Clock::time_point> deadline_;
};

/// Objective and constraint rows of a Problem. Adjoint mode runs one reverse
/// pass per output; FD mode runs central differences per output.
class ProblemTarget : public OptimizationTarget {
public:
    ProblemTarget(const Evaluator& evaluator, GradientMode mode, double fd_step = 1e-6, int threads = 1);

    std::size_t n() const override { return ev_.n_variables(); }
    std::size_t m() const override { return ev_.n_rows(); }
    std::vector<double> lower() const override { return ev_.problem().lower_bounds(); }
    std::vector<double> upper() const override { return ev_.problem().upper_bounds(); }
    std::vector<double> initial() const override { return ev_.problem().initial_point(); }
    Evaluation evaluate(std::span<const double> x, bool gradients) override;

    std::size_t forward_analyses() const noexcept { return forward_; }
    std::size_t reverse_passes() const noexcept { return reverse_; }

private:
    const Evaluator& ev_;
    GradientMode mode_;
    double fd_step_;
    int threads_;
    std::size_t forward_ = 0;
    std::size_t reverse_ = 0;
};

/// Closure-backed target for analytic test functions.
class FunctionTarget : public OptimizationTarget {
public:
    using Fn = std::function<Evaluation(std::span<const double>, bool)>;
    FunctionTarget(std::vector<double> lower, std::vector<double> upper, std::vector<double> initial,
                   std::size_t m, Fn fn)
        : lower_(std::move(lower)), upper_(std::move(upper)), initial_(std::move(initial)), m_(m), fn_(std::move(fn)) {}

    std::size_t n() const override { return initial_.size(); }
    std::size_t m() const override { return m_; }
    std::vector<double> lower() const override { return lower_; }
    std::vector<double> upper() const override { return upper_; }
    std::vector<double> initial() const override { return initial_; }
    Evaluation evaluate(std::span<const double> x, bool gradients) override {
        check_deadline();
        return fn_(x, gradients);
    }

private:
    std::vector<double> lower_, upper_, initial_;
    std::size_t m_;
    Fn fn_;
};

OptimizationResult optimize_mma(OptimizationTarget& target, const OptimizerSettings& settings);
/// Throws OptimizerError when the target has constraint rows.
OptimizationResult optimize_lbfgs(OptimizationTarget& target, const OptimizerSettings& settings);
OptimizationResult optimize_ga(OptimizationTarget& target, const OptimizerSettings& settings);

/// Runs problem.optimizer (or `settings` when given) and re-evaluates the
/// final point from scratch for the reported objective and feasibility.
OptimizationResult optimize(const Problem& problem, std::optional<OptimizerSettings> settings = std::nullopt);

struct SweepRun {
    std::string id;                      // one material code per group, in group order
    std::vector<std::size_t> assignment; // material index per group
    OptimizationResult result;
    // Evaluated at result.x_final; NaN when the run failed.
    double embodied_carbon = 0.0;
    double mass = 0.0;
    double volume = 0.0;
    double compliance = 0.0;
    std::string error;                   // non-empty when the run threw
};

/// Problem with `groups` reassigned to the given materials. Area variables
/// whose elements all lie in one group take that material's area bounds.
Problem assign_materials(const Problem& problem, std::span<const std::string> groups,
                         std::span<const std::size_t> materials);

/// One MMA run per assignment of `materials` to `groups`, |materials|^k runs,
/// sorted by objective (failed runs last). Runs may execute on `jobs` workers.
std::vector<SweepRun> material_sweep(const Problem& problem, const std::vector<std::string>& groups,
                                     const std::vector<std::string>& materials, int jobs = 1,
                                     std::optional<OptimizerSettings> settings = std::nullopt);

}  // namespace diffstiff
