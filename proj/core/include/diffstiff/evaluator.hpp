#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diffstiff/adjoint.hpp"
#include "diffstiff/analysis.hpp"
#include "diffstiff/functions.hpp"
#include "diffstiff/model.hpp"

namespace diffstiff {

/// Output 0 is the objective; outputs 1..n_rows are the constraint rows in
/// catalog order.
class Evaluator {
public:
    explicit Evaluator(Problem problem);
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    const Problem& problem() const noexcept { return problem_; }
    const std::vector<ConstraintRow>& rows() const noexcept { return rows_; }
    std::size_t n_variables() const noexcept { return problem_.variables.size(); }
    std::size_t n_rows() const noexcept { return rows_.size(); }
    std::size_t n_outputs() const noexcept { return rows_.size() + 1; }
    std::string output_name(std::size_t output) const;
    /// "objective", a row description, or a numeric index.
    std::optional<std::size_t> find_output(const std::string& name) const;

    AnalysisCache analyze(std::span<const double> x) const;
    /// Hands the cache's factorization back for symbolic reuse.
    void recycle(AnalysisCache&& cache) const;

    double value(const AnalysisCache& cache, std::size_t output) const;
    /// Constraint rows only.
    Eigen::VectorXd constraints(const AnalysisCache& cache) const;
    OutputSeeds seeds(const AnalysisCache& cache, std::size_t output) const;

    /// One reverse pass.
    Eigen::VectorXd gradient(const AnalysisCache& cache, std::size_t output,
                             AdjointState* trace = nullptr) const;
    /// Rows are constraint rows; one reverse pass each, possibly in parallel.
    Eigen::MatrixXd constraint_jacobian(const AnalysisCache& cache, int threads = 1) const;

    /// Central differences, h_i = rel_step * max(1, |x_i|), one output.
    Eigen::VectorXd finite_difference(std::span<const double> x, std::size_t output,
                                      double rel_step = 1e-6) const;
    /// Same stencil shared by every output; rows are outputs.
    Eigen::MatrixXd finite_difference_all(std::span<const double> x, double rel_step = 1e-6) const;

    /// Test hook applied to every adjoint gradient before it is returned.
    std::function<void(std::size_t output, Eigen::VectorXd& gradient)> gradient_hook;

private:
    Problem problem_;
    std::shared_ptr<const Topology> topology_;
    std::vector<ConstraintRow> rows_;
    mutable std::mutex spare_mutex_;
    mutable std::vector<Factorization> spares_;
};

/// Convenience wrappers over a throwaway Evaluator.
Eigen::VectorXd gradient(const Problem& problem, std::span<const double> x, std::size_t output);
Eigen::VectorXd finite_difference_gradient(const Problem& problem, std::span<const double> x,
                                           std::size_t output, double rel_step = 1e-6);

}  // namespace diffstiff
