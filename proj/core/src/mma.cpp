#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diffstiff/errors.hpp"
#include "diffstiff/optimize.hpp"
#include "run_log.hpp"

namespace diffstiff {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Convex separable subproblem in the asymptotes low/upp.
struct Subproblem {
    VectorXd low, upp, alfa, beta, p0, q0, b;
    MatrixXd P, Q;
    VectorXd c, d;
};

/// Projected Levenberg-Marquardt ascent on the concave dual of the subproblem.
class DualSolver {
public:
    explicit DualSolver(const Subproblem& s) : s_(s), n_(s.low.size()), m_(s.b.size()) {}

    /// Maximizes the dual from lam (updated in place) and returns the primal point.
    VectorXd solve(VectorXd& lam) {
        if (lam.size() != m_) lam = VectorXd::Zero(m_);
        double w = value(lam);
        double shift = 1e-3;
        for (int it = 0; it < 500; ++it) {
            const VectorXd grad = gradient();
            std::vector<Eigen::Index> free;
            double kkt = 0.0;
            for (Eigen::Index j = 0; j < m_; ++j) {
                if (lam(j) <= 0.0 && grad(j) <= 0.0) continue;
                free.push_back(j);
                kkt = std::max(kkt, std::abs(grad(j)));
            }
            if (kkt <= 1e-10) break;

            const auto nf = static_cast<Eigen::Index>(free.size());
            MatrixXd Gf(nf, n_);
            VectorXd gf(nf);
            for (Eigen::Index k = 0; k < nf; ++k) {
                Gf.row(k) = G_.row(free[static_cast<std::size_t>(k)]);
                gf(k) = grad(free[static_cast<std::size_t>(k)]);
            }
            MatrixXd H = Gf * active_.cwiseProduct(curv_inv_).asDiagonal() * Gf.transpose();
            // Marquardt scaling from the curvature with every variable released.
            VectorXd scale = Gf.cwiseAbs2() * curv_inv_;
            for (Eigen::Index k = 0; k < nf; ++k) {
                const Eigen::Index j = free[static_cast<std::size_t>(k)];
                if (lam(j) > s_.c(j)) H(k, k) += 1.0 / s_.d(j);
                scale(k) = std::max(scale(k), 1e-300);
            }

            // Levenberg-Marquardt shift grows until the projected step is an ascent step.
            bool accepted = false;
            for (int tries = 0; tries < 80; ++tries) {
                MatrixXd Hs = H;
                Hs.diagonal() += shift * scale;
                const VectorXd step = Hs.llt().solve(gf);
                VectorXd trial = lam;
                for (Eigen::Index k = 0; k < nf; ++k) {
                    const Eigen::Index j = free[static_cast<std::size_t>(k)];
                    trial(j) = std::max(0.0, lam(j) + step(k));
                }
                const double wt = value(trial);
                const double gain = grad.dot(trial - lam);
                if (wt >= w + 1e-4 * gain) {
                    accepted = true;
                    const double stall = wt - w;
                    lam = trial;
                    w = wt;
                    shift = std::max(shift * 0.25, 1e-10);
                    if (stall <= 1e-15 * std::max(std::abs(w), 1.0) && gain <= 1e-15 * std::max(std::abs(w), 1.0)) {
                        return x_;
                    }
                    break;
                }
                shift *= 4.0;
            }
            if (!accepted) {
                value(lam);
                break;
            }
        }
        return x_;
    }

private:
    /// Dual value at lam; caches the primal minimiser, constraint gradient rows and curvature.
    double value(const VectorXd& lam) {
        const VectorXd pl = s_.p0 + s_.P.transpose() * lam;
        const VectorXd ql = s_.q0 + s_.Q.transpose() * lam;
        x_.resize(n_);
        curv_inv_.resize(n_);
        active_.resize(n_);
        double w = -lam.dot(s_.b);
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double sp = std::sqrt(pl(i));
            const double sq = std::sqrt(ql(i));
            const double xi = (sp * s_.low(i) + sq * s_.upp(i)) / (sp + sq);
            const double xc = std::clamp(xi, s_.alfa(i), s_.beta(i));
            x_(i) = xc;
            const double ux = s_.upp(i) - xc;
            const double xl = xc - s_.low(i);
            w += pl(i) / ux + ql(i) / xl;
            const double curv = 2.0 * pl(i) / (ux * ux * ux) + 2.0 * ql(i) / (xl * xl * xl);
            curv_inv_(i) = 1.0 / curv;
            active_(i) = xc == xi ? 1.0 : 0.0;
        }
        const VectorXd ux = s_.upp - x_;
        const VectorXd xl = x_ - s_.low;
        G_ = s_.P * ux.cwiseAbs2().cwiseInverse().asDiagonal() - s_.Q * xl.cwiseAbs2().cwiseInverse().asDiagonal();
        gvec_ = s_.P * ux.cwiseInverse() + s_.Q * xl.cwiseInverse();
        y_.resize(m_);
        for (Eigen::Index j = 0; j < m_; ++j) {
            const double y = std::max(0.0, (lam(j) - s_.c(j)) / s_.d(j));
            y_(j) = y;
            w += s_.c(j) * y + 0.5 * s_.d(j) * y * y - lam(j) * y;
        }
        return w;
    }

    VectorXd gradient() const { return gvec_ - y_ - s_.b; }

    const Subproblem& s_;
    Eigen::Index n_, m_;
    VectorXd x_, y_, gvec_, curv_inv_, active_;
    MatrixXd G_;
};

VectorXd subsolve(const Subproblem& s, VectorXd& lam) { return DualSolver(s).solve(lam); }

}  // namespace

OptimizationResult optimize_mma(OptimizationTarget& target, const OptimizerSettings& settings) {
    detail::RunLog run(target, settings);
    const auto n = static_cast<Eigen::Index>(target.n());
    const auto m = static_cast<Eigen::Index>(target.m());
    const auto nz = static_cast<std::size_t>(n);
    const auto lo = target.lower();
    const auto hi = target.upper();
    const VectorXd xmin = Eigen::Map<const VectorXd>(lo.data(), n);
    const VectorXd xmax = Eigen::Map<const VectorXd>(hi.data(), n);
    const VectorXd range = (xmax - xmin).cwiseMax(1e-12);
    // Iterations run on t = (x - xmin) / range in [0, 1].
    auto to_x = [&](const VectorXd& t) { return VectorXd((xmin + range.cwiseProduct(t)).cwiseMax(xmin).cwiseMin(xmax)); };
    const auto x0 = target.initial();
    VectorXd t = ((Eigen::Map<const VectorXd>(x0.data(), n) - xmin).cwiseQuotient(range)).cwiseMax(0.0).cwiseMin(1.0);
    VectorXd told1 = t, told2 = t;
    VectorXd low = VectorXd::Zero(n), upp = VectorXd::Ones(n);

    Subproblem sp;
    VectorXd lam;
    sp.c = VectorXd::Constant(m, settings.artificial_penalty);
    sp.d = VectorXd::Ones(m);

    double scale = 1.0;
    double f_prev = 0.0;
    const double albefa = 0.1;

    for (int k = 0;; ++k) {
        if (run.out_of_time()) return run.finish(Termination::TimeLimit);
        const VectorXd x = to_x(t);
        Evaluation ev;
        try {
            ev = run.evaluate({x.data(), nz}, true);
        } catch (const DeadlineExceeded&) {
            return run.finish(Termination::TimeLimit);
        } catch (const Error& e) {
            return run.finish(Termination::AnalysisFailure, e.what());
        }
        const double viol = detail::max_violation(ev.g);
        run.record(k, {x.data(), nz}, ev.f, viol);

        if (k == 0) scale = std::abs(ev.f) > 0.0 ? 1.0 / std::abs(ev.f) : 1.0;
        if (k > 0 && viol <= settings.feasibility_tolerance &&
            std::abs(ev.f - f_prev) <= settings.rel_tolerance * std::max(std::abs(f_prev), 1e-300)) {
            return run.finish(Termination::Converged);
        }
        if (k >= settings.max_iterations) return run.finish(Termination::MaxIterations);
        f_prev = ev.f;

        // Asymptotes.
        if (k < 2) {
            low = t.array() - settings.asy_init;
            upp = t.array() + settings.asy_init;
        } else {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double zzz = (t(i) - told1(i)) * (told1(i) - told2(i));
                const double factor = zzz > 0.0 ? settings.asy_incr : zzz < 0.0 ? settings.asy_decr : 1.0;
                low(i) = t(i) - factor * (told1(i) - low(i));
                upp(i) = t(i) + factor * (upp(i) - told1(i));
                low(i) = std::clamp(low(i), t(i) - 10.0, t(i) - 0.01);
                upp(i) = std::clamp(upp(i), t(i) + 0.01, t(i) + 10.0);
            }
        }
        sp.low = low;
        sp.upp = upp;
        sp.alfa.resize(n);
        sp.beta.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            sp.alfa(i) = std::max({low(i) + albefa * (t(i) - low(i)), t(i) - settings.move_limit, 0.0});
            sp.beta(i) = std::min({upp(i) - albefa * (upp(i) - t(i)), t(i) + settings.move_limit, 1.0});
        }

        const VectorXd df = scale * ev.df.cwiseProduct(range);
        const MatrixXd dg = ev.dg * range.asDiagonal();
        VectorXd raa = VectorXd::Constant(m, 1e-5);
        double raa0 = 1e-5;
        if (settings.mma_conservative) {
            raa0 = std::max(1e-6, 0.1 / static_cast<double>(n) * df.cwiseAbs().sum());
            raa = (0.1 / static_cast<double>(n) * dg.cwiseAbs().rowwise().sum()).cwiseMax(1e-6);
        }
        const VectorXd ux1 = upp - t;
        const VectorXd xl1 = t - low;
        const VectorXd ux2 = ux1.cwiseAbs2();
        const VectorXd xl2 = xl1.cwiseAbs2();
        double r0 = 0.0;
        auto build = [&] {
            sp.p0.resize(n);
            sp.q0.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double p = std::max(df(i), 0.0);
                const double q = std::max(-df(i), 0.0);
                const double pq = 0.001 * (p + q) + raa0;
                sp.p0(i) = (p + pq) * ux2(i);
                sp.q0(i) = (q + pq) * xl2(i);
            }
            sp.P.resize(m, n);
            sp.Q.resize(m, n);
            for (Eigen::Index j = 0; j < m; ++j) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double p = std::max(dg(j, i), 0.0);
                    const double q = std::max(-dg(j, i), 0.0);
                    const double pq = 0.001 * (p + q) + raa(j);
                    sp.P(j, i) = (p + pq) * ux2(i);
                    sp.Q(j, i) = (q + pq) * xl2(i);
                }
            }
            sp.b = sp.P * ux1.cwiseInverse() + sp.Q * xl1.cwiseInverse() - ev.g;
            r0 = scale * ev.f - sp.p0.dot(ux1.cwiseInverse()) - sp.q0.dot(xl1.cwiseInverse());
        };
        build();
        VectorXd t_new = subsolve(sp, lam);

        // Conservative inner loop: raise the curvature terms until the
        // approximations bound the true functions at the candidate.
        for (int inner = 0; settings.mma_conservative && inner < 15; ++inner) {
            if (run.out_of_time()) return run.finish(Termination::TimeLimit);
            const VectorXd xc = to_x(t_new);
            Evaluation trial;
            try {
                trial = run.evaluate({xc.data(), nz}, false);
            } catch (const DeadlineExceeded&) {
                return run.finish(Termination::TimeLimit);
            } catch (const Error&) {
                raa0 *= 10.0;
                raa *= 10.0;
                build();
                t_new = subsolve(sp, lam);
                continue;
            }
            run.consider({xc.data(), nz}, trial.f, detail::max_violation(trial.g));
            const VectorXd uxn = (upp - t_new).cwiseInverse();
            const VectorXd xln = (t_new - low).cwiseInverse();
            const double f_app = r0 + sp.p0.dot(uxn) + sp.q0.dot(xln);
            const VectorXd g_app = sp.P * uxn + sp.Q * xln - sp.b;
            const double f_new = scale * trial.f;
            const double tol = 1e-7;
            bool conservative = f_app + tol >= f_new;
            for (Eigen::Index j = 0; j < m; ++j) conservative = conservative && g_app(j) + tol >= trial.g(j);
            if (conservative) break;

            const VectorXd dt = t_new - t;
            const VectorXd xxul = dt.cwiseQuotient(upp - t_new).cwiseProduct(dt.cwiseQuotient(t_new - low));
            const double raacof = std::max(xxul.dot(upp - low), 1e-12);
            if (f_new > f_app + 0.5 * tol) raa0 = std::min(1.1 * (raa0 + (f_new - f_app) / raacof), 10.0 * raa0);
            for (Eigen::Index j = 0; j < m; ++j) {
                if (trial.g(j) > g_app(j) + 0.5 * tol) {
                    raa(j) = std::min(1.1 * (raa(j) + (trial.g(j) - g_app(j)) / raacof), 10.0 * raa(j));
                }
            }
            build();
            t_new = subsolve(sp, lam);
        }

        told2 = told1;
        told1 = t;
        t = t_new;
    }
}

}  // namespace diffstiff
