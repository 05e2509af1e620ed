#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "diffstiff/optimize.hpp"

namespace diffstiff::detail {

inline double max_violation(const Eigen::VectorXd& g) {
    return g.size() == 0 ? 0.0 : std::max(0.0, g.maxCoeff());
}

/// Shared bookkeeping: history, best feasible point, time budget.
class RunLog {
public:
    RunLog(OptimizationTarget& target, const OptimizerSettings& s)
        : target_(target), settings_(s), start_(Clock::now()) {
        if (s.time_limit > 0.0) {
            deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(
                                     std::chrono::duration<double>(s.time_limit));
        }
        target_.set_deadline(deadline_);
    }
    ~RunLog() { target_.set_deadline(std::nullopt); }

    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
    bool out_of_time() const { return deadline_ && Clock::now() > *deadline_; }

    Evaluation evaluate(std::span<const double> x, bool gradients) {
        ++result.evaluations;
        return target_.evaluate(x, gradients);
    }

    /// Records an accepted iterate.
    void record(int iteration, std::span<const double> x, double f, double violation) {
        result.history.push_back({iteration, elapsed(), f, violation});
        if (settings_.record_iterates) result.iterates.emplace_back(x.begin(), x.end());
        consider(x, f, violation);
    }

    /// Tracks the best point without adding a history row.
    void consider(std::span<const double> x, double f, double violation) {
        const bool feasible = violation <= settings_.feasibility_tolerance;
        const bool better = !have_ ||
                            (feasible && (!best_feasible_ || f < best_f_)) ||
                            (!feasible && !best_feasible_ && violation < best_v_);
        if (!better) return;
        have_ = true;
        best_feasible_ = feasible;
        best_f_ = f;
        best_v_ = violation;
        best_x_.assign(x.begin(), x.end());
    }

    OptimizationResult finish(Termination reason, std::string message = {}) {
        result.reason = reason;
        result.message = std::move(message);
        if (have_) {
            result.x_final = best_x_;
            result.objective_final = best_f_;
            result.max_violation = best_v_;
            result.feasible = best_feasible_;
        } else {
            result.x_final = target_.initial();
            result.objective_final = std::numeric_limits<double>::quiet_NaN();
            result.max_violation = std::numeric_limits<double>::infinity();
            result.feasible = false;
        }
        result.wall_time = elapsed();
        return std::move(result);
    }

    OptimizationResult result;

private:
    OptimizationTarget& target_;
    const OptimizerSettings& settings_;
    Clock::time_point start_;
    std::optional<Clock::time_point> deadline_;
    bool have_ = false;
    bool best_feasible_ = false;
    double best_f_ = 0.0;
    double best_v_ = 0.0;
    std::vector<double> best_x_;
};

}  // namespace diffstiff::detail
