#ifndef RANGESHIFT_STEADY_STATE_HPP
#define RANGESHIFT_STEADY_STATE_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "rangeshift/common.hpp"
#include "rangeshift/discrete_operator.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/spectral.hpp"

namespace rangeshift {

enum class SteadyClass { nontrivial, trivial, borderline };

/// |lambda_p| below this is reported "borderline", never silently classified:
/// the continuum dichotomy is sharp but discretization blurs it by O(h).
inline constexpr double kBorderlineBand = 1e-4;

struct ContinuationRow {
    double level = 0.0;
    double param = 0.0;
    double sup_increment = 0.0;
    double residual = 0.0;
    double l1_mass = 0.0;
};

struct SteadyStateResult {
    Vec u;
    Vec x;
    double residual = 0.0;
    SteadyClass classification = SteadyClass::trivial;
    double epsilon = 0.0;
    double domain_R = 0.0;
    double bracket_sub = 0.0;    // sup norm of the subsolution seed
    double bracket_super = 0.0;  // sup norm of the supersolution seed
    double l1_mass = 0.0;
    double grad_sup = 0.0;
    double h1_norm = 0.0;  // recorded diagnostic: sqrt(h sum(u^2 + (du/h)^2))
    long long iterations = 0;
    bool converged = false;
    double lambda_p = 0.0;  // linearized eigenvalue on the same grid
    double max_bracket_violation = 0.0;
    double subsolution_kappa = 0.0;
    std::vector<ContinuationRow> trace;
    Vec level_lambda_p;  // per continuation level, when applicable
};

namespace detail {

struct MonotoneIteration {
    // damped explicit fixed point u <- u + theta (L u + f(x,u)); theta keeps
    // the map order-preserving, so ordered seeds stay ordered
    const DiscreteOperator* L = nullptr;  // assembled with a == 0
    const GrowthModel* growth = nullptr;
    Vec x;
    double theta = 0.0;

    void residual_into(const Vec& u, Vec& g) const {
        L->apply_into(u, g);
        for (std::size_t i = 0; i < u.size(); ++i) g[i] += growth->f(x[i], u[i]);
    }
    double step(Vec& u, Vec& g) const {
        residual_into(u, g);
        double res = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            res = std::max(res, std::fabs(g[i]));
            u[i] = std::max(u[i] + theta * g[i], 0.0);
        }
        return res;
    }
};

inline MonotoneIteration make_iteration(const DiscreteOperator& L, const GrowthModel& growth,
                                        const Grid& grid, double reach) {
    MonotoneIteration it;
    it.L = &L;
    it.growth = &growth;
    it.x = grid.abscissae();
    const double lf = growth.lipschitz_f(reach);
    it.theta = 1.0 / (1.0 + lf + std::fabs(L.c()) / grid.h +
                      2.0 * L.epsilon() / (grid.h * grid.h));
    return it;
}

inline double grad_sup_of(const Vec& u, double h) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        m = std::max(m, std::fabs(u[i + 1] - u[i]) / h);
    return m;
}

inline double h1_norm_of(const Vec& u, double h) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        s += u[i] * u[i];
        if (i + 1 < u.size()) {
            const double d = (u[i + 1] - u[i]) / h;
            s += d * d;
        }
    }
    return std::sqrt(s * h);
}

inline double niche_min(const Vec& u, const Vec& x, const GrowthModel& growth) {
    // inner half of the interval where a > 0
    double lo = 0.0, hi = 0.0;
    bool found = false;
    const double rs = growth.structure_radius() + 1.0;
    for (double xx = -rs; xx <= rs; xx += 1e-3 * rs) {
        if (growth.a(xx) > 0.0) {
            if (!found) lo = xx;
            hi = xx;
            found = true;
        }
    }
    if (!found) return 0.0;
    const double mid = 0.5 * (lo + hi), quarter = 0.25 * (hi - lo);
    double m = 1e300;
    bool any = false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::fabs(x[i] - mid) <= quarter) {
            m = std::min(m, u[i]);
            any = true;
        }
    return any ? m : 0.0;
}

}  // namespace detail

/// Monotone sub/supersolution iteration for
///   eps u'' + c u' + M_R u + f(x,u) = 0,  Dirichlet ghosts per the operator.
/// Starts downward from the constant supersolution and upward from
/// kappa * phi_p when the linearized lambda_p is negative; the two brackets
/// meet at the unique fixed point.
inline SteadyStateResult solve_bounded_viscous(const Grid& grid, const Kernel& kernel,
                                               const GrowthModel& growth, double c,
                                               double epsilon, double tol = 1e-10,
                                               long long max_iter = 2000000,
                                               ConvPath path = ConvPath::automatic) {
    SteadyStateResult out;
    out.epsilon = epsilon;
    out.domain_R = grid.R;
    out.x = grid.abscissae();

    DiscreteOperator lin = assemble_linearized(grid, kernel, growth, c, epsilon, path);
    EigenResult eig = principal_eigenvalue(lin, std::min(tol, 1e-8), max_iter);
    out.lambda_p = eig.lambda_p;

    DiscreteOperator L = DiscreteOperator::assemble(grid, kernel, c, epsilon,
                                                    [](double) { return 0.0; }, false, path);
    const double M = std::max(growth.sup_saturation(), 1e-12);
    auto iter = detail::make_iteration(L, growth, grid, M);

    // subsolution seed: largest kappa in a halving search from 0.5 with
    // L(kappa phi) + f(x, kappa phi) >= 0 at every grid point
    Vec sub(out.x.size(), 0.0);
    double kappa = 0.0;
    if (eig.lambda_p < 0.0) {
        Vec trial(out.x.size()), g(out.x.size());
        for (double k = 0.5; k > 1e-14; k *= 0.5) {
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = k * eig.eigenfunction[i];
            iter.residual_into(trial, g);
            double worst = 0.0;
            for (double gi : g) worst = std::min(worst, gi);
            if (worst >= -1e-13 * std::max(1.0, M)) {
                sub = trial;
                kappa = k;
                break;
            }
        }
    }
    out.subsolution_kappa = kappa;
    out.bracket_sub = sup_norm(sub);
    out.bracket_super = M;

    Vec upper(out.x.size(), M), lower = sub, g(out.x.size());
    double viol = 0.0, res_up = 0.0;
    long long it = 0;
    bool converged = false;
    Vec prev_up = upper, prev_lo = lower;
    const bool track_lower = kappa > 0.0;
    for (; it < max_iter; ++it) {
        prev_up = upper;
        res_up = iter.step(upper, g);
        for (std::size_t i = 0; i < upper.size(); ++i)
            viol = std::max(viol, upper[i] - prev_up[i]);  // downward route must not increase
        if (track_lower) {
            prev_lo = lower;
            iter.step(lower, g);
            for (std::size_t i = 0; i < lower.size(); ++i) {
                viol = std::max(viol, prev_lo[i] - lower[i]);  // upward route must not decrease
                viol = std::max(viol, lower[i] - upper[i]);    // containment
            }
        }
        const double gap = track_lower ? sup_diff(upper, lower) : sup_norm(upper);
        const bool res_ok = res_up <= tol * std::max(1.0, M);
        if ((track_lower && gap <= tol && res_ok) || (!track_lower && res_ok)) {
            converged = true;
            ++it;
            break;
        }
    }
    out.max_bracket_violation = viol;
    out.iterations = it;
    out.converged = converged;
    out.u = upper;
    iter.residual_into(out.u, g);
    out.residual = sup_norm(g);
    out.l1_mass = trapezoid_mass(out.u, grid.h);
    out.grad_sup = detail::grad_sup_of(out.u, grid.h);
    out.h1_norm = detail::h1_norm_of(out.u, grid.h);

    const double nmin = detail::niche_min(out.u, out.x, growth);
    // a barely-supercritical lambda lets the iterate stall at residual/lambda,
    // so the trivial-branch size check scales accordingly
    const double decay_floor =
        10.0 * tol * std::max(1.0, M) / std::min(1.0, std::max(eig.lambda_p, kBorderlineBand));
    if (eig.lambda_p < -kBorderlineBand && nmin > 0.0 && converged)
        out.classification = SteadyClass::nontrivial;
    else if (eig.lambda_p > kBorderlineBand && sup_norm(out.u) <= decay_floor)
        out.classification = SteadyClass::trivial;
    else
        out.classification = SteadyClass::borderline;
    return out;
}

namespace detail {

/// Warm-started relaxation to the fixed point from an arbitrary nonnegative
/// seed; the damped explicit map converges to the unique steady state.
inline void relax_to_fixed_point(const MonotoneIteration& iter, Vec& u, double tol, double scale,
                                 long long max_iter, long long& used, bool& converged) {
    Vec g(u.size());
    converged = false;
    for (long long it = 0; it < max_iter; ++it) {
        const double res = iter.step(u, g);
        if (res <= tol * std::max(1.0, scale)) {
            used = it + 1;
            converged = true;
            return;
        }
    }
    used = max_iter;
}

}  // namespace detail

/// Fixed point of the damped iteration from an arbitrary nonnegative seed;
/// used by the uniqueness probes (the flow converges to the unique positive
/// steady state from any nontrivial seed when lambda_p < 0).
inline SteadyStateResult steady_from_seed(const Grid& grid, const Kernel& kernel,
                                          const GrowthModel& growth, double c, double epsilon,
                                          const Vec& seed, double tol = 1e-10,
                                          long long max_iter = 2000000,
                                          ConvPath path = ConvPath::automatic) {
    DiscreteOperator L = DiscreteOperator::assemble(grid, kernel, c, epsilon,
                                                    [](double) { return 0.0; }, false, path);
    const double M = std::max({growth.sup_saturation(), sup_norm(seed), 1e-12});
    auto iter = detail::make_iteration(L, growth, grid, M);
    SteadyStateResult out;
    out.epsilon = epsilon;
    out.domain_R = grid.R;
    out.x = grid.abscissae();
    out.u = seed;
    long long used = 0;
    bool conv = false;
    detail::relax_to_fixed_point(iter, out.u, tol, M, max_iter, used, conv);
    out.iterations = used;
    out.converged = conv;
    Vec g(out.u.size());
    iter.residual_into(out.u, g);
    out.residual = sup_norm(g);
    out.l1_mass = trapezoid_mass(out.u, grid.h);
    out.grad_sup = detail::grad_sup_of(out.u, grid.h);
    out.h1_norm = detail::h1_norm_of(out.u, grid.h);
    return out;
}

/// Vanishing-viscosity continuation: solve at each eps warm-started from the
/// previous level; at eps = 0 the drift upwind alone regularizes (c != 0).
inline SteadyStateResult vanishing_viscosity(const Grid& grid, const Kernel& kernel,
                                             const GrowthModel& growth, double c,
                                             const Vec& eps_schedule, double tol = 1e-10,
                                             long long max_iter = 2000000,
                                             ConvPath path = ConvPath::automatic) {
    if (eps_schedule.empty()) throw Error("steady_state.vanishing_viscosity: empty schedule");
    for (std::size_t i = 1; i < eps_schedule.size(); ++i)
        if (!(eps_schedule[i] < eps_schedule[i - 1]))
            throw Error("steady_state.vanishing_viscosity: schedule must be strictly decreasing");
    if (eps_schedule.back() < 0.0)
        throw Error("steady_state.vanishing_viscosity: eps must be >= 0");
    if (eps_schedule.back() == 0.0 && c == 0.0)
        throw Error("steady_state.vanishing_viscosity: the eps = 0 endpoint requires c != 0");

    SteadyStateResult out = solve_bounded_viscous(grid, kernel, growth, c, eps_schedule.front(),
                                                  tol, max_iter, path);
    out.trace.push_back({0.0, eps_schedule.front(), 0.0, out.residual, out.l1_mass});
    Vec u = out.u;
    const double M = std::max(growth.sup_saturation(), 1e-12);
    for (std::size_t k = 1; k < eps_schedule.size(); ++k) {
        const double eps = eps_schedule[k];
        DiscreteOperator L = DiscreteOperator::assemble(grid, kernel, c, eps,
                                                        [](double) { return 0.0; }, false, path);
        auto iter = detail::make_iteration(L, growth, grid, M);
        Vec prev = u;
        long long used = 0;
        bool conv = false;
        detail::relax_to_fixed_point(iter, u, tol, M, max_iter, used, conv);
        if (!conv)
            throw Error("steady_state.vanishing_viscosity: non-convergence at eps=" +
                        fmt_g17(eps));
        Vec g(u.size());
        iter.residual_into(u, g);
        out.trace.push_back({static_cast<double>(k), eps, sup_diff(u, prev), sup_norm(g),
                             trapezoid_mass(u, grid.h)});
        out.iterations += used;
    }
    // flag a coarse discretization: increments must not grow over three
    // consecutive levels
    for (std::size_t k = 3; k < out.trace.size(); ++k)
        if (out.trace[k].sup_increment >= out.trace[k - 1].sup_increment &&
            out.trace[k - 1].sup_increment >= out.trace[k - 2].sup_increment &&
            out.trace[k].sup_increment > 0.0)
            throw Error("steady_state.vanishing_viscosity: increments non-decreasing over three "
                        "levels (discretization too coarse)");
    out.u = u;
    out.epsilon = eps_schedule.back();
    Vec g(u.size());
    DiscreteOperator L0 = DiscreteOperator::assemble(grid, kernel, c, eps_schedule.back(),
                                                     [](double) { return 0.0; }, false, path);
    auto iter0 = detail::make_iteration(L0, growth, grid, M);
    iter0.residual_into(out.u, g);
    out.residual = sup_norm(g);
    out.l1_mass = trapezoid_mass(out.u, grid.h);
    out.grad_sup = detail::grad_sup_of(out.u, grid.h);
    out.h1_norm = detail::h1_norm_of(out.u, grid.h);
    return out;
}

/// Growing-domain continuation; solutions increase pointwise with R.
inline SteadyStateResult domain_continuation(const Kernel& kernel, const GrowthModel& growth,
                                             double c, double epsilon, const Vec& R_schedule,
                                             double tol = 1e-10, const GridPolicy& policy = {},
                                             long long max_iter = 2000000) {
    if (R_schedule.size() < 2)
        throw Error("steady_state.domain_continuation: schedule needs >= 2 levels");
    for (std::size_t i = 1; i < R_schedule.size(); ++i)
        if (!(R_schedule[i] > R_schedule[i - 1]))
            throw Error("steady_state.domain_continuation: R_schedule must be increasing");

    Grid grid = Grid::with_spacing(R_schedule.front(), policy.h);
    SteadyStateResult out =
        solve_bounded_viscous(grid, kernel, growth, c, epsilon, tol, max_iter, policy.path);
    out.trace.push_back({0.0, R_schedule.front(), 0.0, out.residual, out.l1_mass});
    Vec u = out.u, xs = out.x;
    const double M = std::max(growth.sup_saturation(), 1e-12);
    for (std::size_t k = 1; k < R_schedule.size(); ++k) {
        Grid g2 = Grid::with_spacing(R_schedule[k], policy.h);
        DiscreteOperator L = DiscreteOperator::assemble(g2, kernel, c, epsilon,
                                                        [](double) { return 0.0; }, false,
                                                        policy.path);
        auto iter = detail::make_iteration(L, growth, g2, M);
        Vec xs2 = g2.abscissae();
        Vec u2(xs2.size());
        for (std::size_t i = 0; i < xs2.size(); ++i) u2[i] = interp_or_zero(xs, u, xs2[i]);
        Vec seed = u2;
        long long used = 0;
        bool conv = false;
        detail::relax_to_fixed_point(iter, u2, tol, M, max_iter, used, conv);
        if (!conv)
            throw Error("steady_state.domain_continuation: non-convergence at R=" +
                        fmt_g17(R_schedule[k]));
        double drop = 0.0, inc = 0.0;
        for (std::size_t i = 0; i < u2.size(); ++i) {
            drop = std::max(drop, seed[i] - u2[i]);
            inc = std::max(inc, std::fabs(u2[i] - seed[i]));
        }
        if (drop > (1e-10 + 10.0 * tol) * std::max(1.0, M))
            throw Error("steady_state.domain_continuation: domain monotonicity violated at R=" +
                        fmt_g17(R_schedule[k]) + " (boundary-condition bug)");
        Vec g(u2.size());
        iter.residual_into(u2, g);
        out.trace.push_back({static_cast<double>(k), R_schedule[k], inc, sup_norm(g),
                             trapezoid_mass(u2, g2.h)});
        out.iterations += used;
        u = std::move(u2);
        xs = std::move(xs2);
        out.domain_R = R_schedule[k];
        if (inc < tol * std::max(1.0, M) && k >= 1) break;
    }
    out.u = u;
    out.x = xs;
    out.l1_mass = out.trace.back().l1_mass;
    out.residual = out.trace.back().residual;
    out.grad_sup = detail::grad_sup_of(out.u, (xs[1] - xs[0]));
    out.h1_norm = detail::h1_norm_of(out.u, (xs[1] - xs[0]));
    return out;
}

/// Fat-tail route: solve with the increasing truncation sequence J_N; the
/// solutions increase pointwise in N.
inline SteadyStateResult fat_tail_solve(const Kernel& kernel, const GrowthModel& growth, double c,
                                        const Vec& N_schedule, const Grid& grid,
                                        double tol = 1e-10, long long max_iter = 2000000,
                                        ConvPath path = ConvPath::automatic) {
    if (N_schedule.empty()) throw Error("steady_state.fat_tail_solve: empty N schedule");
    for (std::size_t i = 1; i < N_schedule.size(); ++i)
        if (!(N_schedule[i] > N_schedule[i - 1]))
            throw Error("steady_state.fat_tail_solve: N_schedule must be increasing");
    if (!(growth.sup_a() > 1.0))
        throw Error("steady_state.fat_tail_solve: requires sup a > 1");
    (void)kernel.moment(2, false);  // H6: second moment must be finite (throws otherwise)

    SteadyStateResult out;
    const double M = std::max(growth.sup_saturation(), 1e-12);
    Vec u;
    Vec level_lambdas;
    for (std::size_t k = 0; k < N_schedule.size(); ++k) {
        const Kernel kn = kernel.truncate(N_schedule[k]);
        DiscreteOperator lin = assemble_linearized(grid, kn, growth, c, 0.0, path);
        EigenResult eig = principal_eigenvalue(lin, 1e-8, max_iter);
        level_lambdas.push_back(eig.lambda_p);
        if (k == 0) {
            if (eig.lambda_p >= 0.0)
                throw Error("steady_state.fat_tail_solve: lambda_p >= 0 at the first truncation "
                            "level (not persistent even truncated)");
            out = solve_bounded_viscous(grid, kn, growth, c, 0.0, tol, max_iter, path);
            out.trace.push_back({0.0, N_schedule[0], 0.0, out.residual, out.l1_mass});
            u = out.u;
            continue;
        }
        DiscreteOperator L = DiscreteOperator::assemble(grid, kn, c, 0.0,
                                                        [](double) { return 0.0; }, false, path);
        auto iter = detail::make_iteration(L, growth, grid, M);
        Vec prev = u;
        long long used = 0;
        bool conv = false;
        detail::relax_to_fixed_point(iter, u, tol, M, max_iter, used, conv);
        if (!conv)
            throw Error("steady_state.fat_tail_solve: non-convergence at N=" +
                        fmt_g17(N_schedule[k]));
        double drop = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) drop = std::max(drop, prev[i] - u[i]);
        if (drop > (1e-10 + 10.0 * tol) * std::max(1.0, M))
            throw Error("steady_state.fat_tail_solve: truncation monotonicity violated at N=" +
                        fmt_g17(N_schedule[k]));
        Vec g(u.size());
        iter.residual_into(u, g);
        out.trace.push_back({static_cast<double>(k), N_schedule[k], sup_diff(u, prev),
                             sup_norm(g), trapezoid_mass(u, grid.h)});
        out.iterations += used;
    }
    out.u = u;
    out.level_lambda_p = std::move(level_lambdas);
    out.residual = out.trace.back().residual;
    out.l1_mass = out.trace.back().l1_mass;
    out.grad_sup = detail::grad_sup_of(out.u, grid.h);
    out.h1_norm = detail::h1_norm_of(out.u, grid.h);
    return out;
}

}  // namespace rangeshift

#endif
