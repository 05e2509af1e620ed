#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "diffstiff/errors.hpp"
#include "diffstiff/optimize.hpp"
#include "run_log.hpp"

namespace diffstiff {
namespace {

using Eigen::VectorXd;

VectorXd project(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

OptimizationResult optimize_lbfgs(OptimizationTarget& target, const OptimizerSettings& settings) {
    if (target.m() != 0) {
        throw OptimizerError("L-BFGS handles bound constraints only; the problem has " +
                             std::to_string(target.m()) + " constraint rows");
    }
    detail::RunLog run(target, settings);
    const auto n = static_cast<Eigen::Index>(target.n());
    const auto nz = static_cast<std::size_t>(n);
    const auto lo_v = target.lower();
    const auto hi_v = target.upper();
    const VectorXd lo = Eigen::Map<const VectorXd>(lo_v.data(), n);
    const VectorXd hi = Eigen::Map<const VectorXd>(hi_v.data(), n);
    const auto x0 = target.initial();
    VectorXd x = project(Eigen::Map<const VectorXd>(x0.data(), n), lo, hi);

    Evaluation cur;
    try {
        cur = run.evaluate({x.data(), nz}, true);
    } catch (const DeadlineExceeded&) {
        return run.finish(Termination::TimeLimit);
    } catch (const Error& e) {
        return run.finish(Termination::AnalysisFailure, e.what());
    }
    run.record(0, {x.data(), nz}, cur.f, 0.0);

    std::deque<std::pair<VectorXd, VectorXd>> memory;
    const double c1 = 1e-4;

    for (int k = 1;; ++k) {
        const VectorXd pg = project(x - cur.df, lo, hi) - x;
        if (pg.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, std::abs(cur.f))) {
            return run.finish(Termination::Converged);
        }
        if (k > settings.max_iterations) return run.finish(Termination::MaxIterations);
        if (run.out_of_time()) return run.finish(Termination::TimeLimit);

        // Variables held at a bound by the gradient are frozen for this step.
        Eigen::Array<bool, Eigen::Dynamic, 1> free(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            free(i) = !((x(i) <= lo(i) && cur.df(i) > 0.0) || (x(i) >= hi(i) && cur.df(i) < 0.0));
        }
        auto mask = [&](VectorXd v) {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!free(i)) v(i) = 0.0;
            }
            return v;
        };

        VectorXd q = mask(cur.df);
        std::vector<double> alpha(memory.size());
        for (std::size_t j = memory.size(); j-- > 0;) {
            const auto& [s, y] = memory[j];
            alpha[j] = mask(s).dot(q) / y.dot(s);
            q -= alpha[j] * mask(y);
        }
        double gamma = 1.0;
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            gamma = s.dot(y) / y.dot(y);
        }
        VectorXd d = gamma * q;
        for (std::size_t j = 0; j < memory.size(); ++j) {
            const auto& [s, y] = memory[j];
            const double beta = mask(y).dot(d) / y.dot(s);
            d += (alpha[j] - beta) * mask(s);
        }
        d = -mask(d);
        if (!(cur.df.dot(d) < 0.0)) {
            memory.clear();
            d = -mask(cur.df);
        }
        double step = 1.0;
        if (memory.empty()) {
            // Unscaled first step: move at most a tenth of the box (or unit length).
            const VectorXd width = (hi - lo).cwiseMin(10.0);
            double lim = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                if (d(i) != 0.0) lim = std::min(lim, 0.1 * width(i) / std::abs(d(i)));
            }
            if (std::isfinite(lim)) step = std::min(1.0, lim);
        }

        VectorXd x_new;
        Evaluation next;
        bool accepted = false;
        for (int ls = 0; ls < 60 && !accepted; ++ls, step *= 0.5) {
            x_new = project(x + step * d, lo, hi);
            if ((x_new - x).lpNorm<Eigen::Infinity>() == 0.0) break;
            try {
                next = run.evaluate({x_new.data(), nz}, true);
            } catch (const DeadlineExceeded&) {
                return run.finish(Termination::TimeLimit);
            } catch (const Error&) {
                continue;
            }
            accepted = std::isfinite(next.f) && next.f <= cur.f + c1 * cur.df.dot(x_new - x) &&
                       next.f < cur.f;
        }
        if (!accepted) {
            return run.finish(Termination::LineSearchFailure, "no step satisfied the sufficient decrease test");
        }

        const VectorXd s = x_new - x;
        const VectorXd y = next.df - cur.df;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            memory.emplace_back(s, y);
            if (static_cast<int>(memory.size()) > std::max(1, settings.memory)) memory.pop_front();
        }
        const double f_old = cur.f;
        x = x_new;
        cur = std::move(next);
        run.record(k, {x.data(), nz}, cur.f, 0.0);
        if (std::abs(f_old - cur.f) <= settings.rel_tolerance * std::max(std::abs(f_old), 1e-300)) {
            return run.finish(Termination::Converged);
        }
    }
}

}  // namespace diffstiff
