#ifndef RANGESHIFT_EVOLUTION_HPP
#define RANGESHIFT_EVOLUTION_HPP

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "rangeshift/common.hpp"
#include "rangeshift/convolution.hpp"
#include "rangeshift/grid.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/kernel.hpp"

namespace rangeshift {

enum class Frame { fixed, moving };

struct EvolutionTrace {
    Frame frame = Frame::moving;
    Vec times;
    Vec sup_norms;
    Vec l1_masses;
    Vec niche_minima;  // min over the moving niche core
    std::map<double, Vec> snapshots;
    double dt = 0.0;
    Vec final_state;
    Vec x;
    double mass_balance_residual = 0.0;  // max |d/dt int u - (flux + int f)|
};

struct EvolveOptions {
    double dt = 0.0;            // <= 0 means auto (0.9 x monotonicity bound)
    bool enforce_dt_bound = true;  // false is a test-only destructive path
    double output_stride = 0.0;    // <= 0 means T/256
    Vec snapshot_times;
    ConvPath path = ConvPath::automatic;
};

namespace detail {

struct NicheCore {
    double mid = 0.0;
    double quarter = 0.0;
    bool valid = false;
};

inline NicheCore find_niche_core(const GrowthModel& growth) {
    NicheCore c;
    const double rs = growth.structure_radius() + 1.0;
    double lo = 0.0, hi = 0.0;
    bool found = false;
    const double dx = std::max(1e-3 * rs, 1e-6);
    for (double x = -rs; x <= rs; x += dx) {
        if (growth.a(x) > 0.0) {
            if (!found) lo = x;
            hi = x;
            found = true;
        }
    }
    if (found) {
        c.mid = 0.5 * (lo + hi);
        c.quarter = 0.25 * (hi - lo);
        c.valid = true;
    }
    return c;
}

}  // namespace detail

/// Monotonicity-preserving time step: dt (1 + L_f + [moving: |c|/h]) <= 1,
/// L_f the Lipschitz constant of f over the reachable s-range.
inline double dt_bound(const GrowthModel& growth, double c, const Grid& grid, Frame frame,
                       double reach) {
    const double lf = growth.lipschitz_f(reach);
    const double drift = frame == Frame::moving ? std::fabs(c) / grid.h : 0.0;
    return 1.0 / (1.0 + lf + drift);
}

/// Forward-Euler integration of the population density. Fixed frame:
/// du/dt = M u + f(x - c t, u) with the niche profile re-evaluated at shifted
/// abscissae; moving frame: du/dt = c u' + M u + f(x, u) with the same upwind
/// stencil as the discrete operator.
inline EvolutionTrace integrate(const Vec& initial, Frame frame, const Kernel& kernel,
                                const GrowthModel& growth, double c, const Grid& grid, double T,
                                const EvolveOptions& opts = {}) {
    const int n = grid.n;
    if (static_cast<int>(initial.size()) != n)
        throw Error("evolution.integrate: initial state length mismatch");
    for (double v : initial)
        if (v < 0.0 || !std::isfinite(v))
            throw Error("evolution.integrate: initial state must be nonnegative and finite");
    if (!(T > 0.0)) throw Error("evolution.integrate: T must be positive");

    const double reach = std::max(sup_norm(initial), growth.sup_saturation());
    const double bound = dt_bound(growth, c, grid, frame, reach);
    double dt = opts.dt;
    if (dt <= 0.0)
        dt = 0.9 * bound;
    else if (opts.enforce_dt_bound && dt > bound)
        throw Error("evolution.integrate: dt=" + fmt_g17(dt) +
                    " violates the monotonicity bound " + fmt_g17(bound));
    const long long steps = static_cast<long long>(std::ceil(T / dt - 1e-12));
    dt = T / static_cast<double>(steps);

    ConvolutionEngine conv(discretize(kernel, grid.h), n, opts.path);
    const Vec xs = grid.abscissae();
    const auto core = detail::find_niche_core(growth);

    EvolutionTrace tr;
    tr.frame = frame;
    tr.dt = dt;
    tr.x = xs;
    const double stride = opts.output_stride > 0.0 ? opts.output_stride : T / 256.0;

    Vec u = initial, cu(static_cast<std::size_t>(n));
    Vec snap_left = opts.snapshot_times;
    std::sort(snap_left.begin(), snap_left.end());

    const double h = grid.h;
    const double ch = c / h;
    double next_record = 0.0;
    double mass_prev = trapezoid_mass(u, h);
    double t_prev_record = 0.0;
    double flux_accum = 0.0;  // integral of (conv defect + drift flux + growth) dt

    auto record = [&](double t) {
        tr.times.push_back(t);
        tr.sup_norms.push_back(sup_norm(u));
        tr.l1_masses.push_back(trapezoid_mass(u, h));
        double nm = 0.0;
        if (core.valid) {
            const double mid = core.mid + (frame == Frame::fixed ? c * t : 0.0);
            double m = 1e300;
            bool any = false;
            for (int i = 0; i < n; ++i)
                if (std::fabs(xs[static_cast<std::size_t>(i)] - mid) <= core.quarter) {
                    m = std::min(m, u[static_cast<std::size_t>(i)]);
                    any = true;
                }
            nm = any ? m : 0.0;
        }
        tr.niche_minima.push_back(nm);
    };
    record(0.0);

    for (long long m = 0; m < steps; ++m) {
        const double t = dt * static_cast<double>(m);
        conv.apply(u.data(), cu.data());
        double step_flux = 0.0;  // sum of rhs * h (trapezoid endpoint halves applied below)
        for (int i = 0; i < n; ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            double rhs = cu[s] - u[s];
            if (frame == Frame::moving) {
                if (c > 0.0)
                    rhs += ch * (((i + 1 < n) ? u[s + 1] : 0.0) - u[s]);
                else if (c < 0.0)
                    rhs += ch * (u[s] - ((i > 0) ? u[s - 1] : 0.0));
                rhs += growth.f(xs[s], u[s]);
            } else {
                rhs += growth.f(xs[s] - c * t, u[s]);
            }
            const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            step_flux += w * rhs * h;
            double un = u[s] + dt * rhs;
            if (opts.enforce_dt_bound) {
                if (un < -1e-10 * std::max(1.0, reach))
                    throw Error("evolution.integrate: negative value (dt bound violation)");
                if (un < 0.0) un = 0.0;
            }
            cu[s] = un;  // reuse as the next state buffer
        }
        std::swap(u, cu);
        flux_accum += step_flux * dt;
        const double t_next = dt * static_cast<double>(m + 1);
        if (t_next + 1e-12 >= next_record + stride || m + 1 == steps) {
            record(t_next);
            const double mass_now = tr.l1_masses.back();
            const double d = std::fabs((mass_now - mass_prev) - flux_accum) /
                             std::max(t_next - t_prev_record, dt);
            tr.mass_balance_residual = std::max(tr.mass_balance_residual, d);
            mass_prev = mass_now;
            flux_accum = 0.0;
            t_prev_record = t_next;
            next_record = t_next;
        }
        while (!snap_left.empty() && t_next + 1e-12 >= snap_left.front()) {
            tr.snapshots[snap_left.front()] = u;
            snap_left.erase(snap_left.begin());
        }
    }
    tr.final_state = std::move(u);
    return tr;
}

/// Exploratory fast path: classic RK4 on the same right-hand side. Higher
/// order in time but not order-preserving, so none of the comparison
/// properties are claimed for it; the acceptance runs use integrate().
inline EvolutionTrace integrate_rk4(const Vec& initial, Frame frame, const Kernel& kernel,
                                    const GrowthModel& growth, double c, const Grid& grid,
                                    double T, const EvolveOptions& opts = {}) {
    const int n = grid.n;
    if (static_cast<int>(initial.size()) != n)
        throw Error("evolution.integrate: initial state length mismatch");
    const double reach = std::max(sup_norm(initial), growth.sup_saturation());
    double dt = opts.dt > 0.0 ? opts.dt : 0.9 * dt_bound(growth, c, grid, frame, reach);
    const long long steps = static_cast<long long>(std::ceil(T / dt - 1e-12));
    dt = T / static_cast<double>(steps);

    ConvolutionEngine conv(discretize(kernel, grid.h), n, opts.path);
    const Vec xs = grid.abscissae();
    const double h = grid.h, ch = c / h;
    auto rhs = [&](const Vec& u, double t, Vec& out) {
        conv.apply(u.data(), out.data());
        for (int i = 0; i < n; ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            double r = out[s] - u[s];
            if (frame == Frame::moving) {
                if (c > 0.0)
                    r += ch * (((i + 1 < n) ? u[s + 1] : 0.0) - u[s]);
                else if (c < 0.0)
                    r += ch * (u[s] - ((i > 0) ? u[s - 1] : 0.0));
                r += growth.f(xs[s], u[s]);
            } else {
                r += growth.f(xs[s] - c * t, u[s]);
            }
            out[s] = r;
        }
    };

    EvolutionTrace tr;
    tr.frame = frame;
    tr.dt = dt;
    tr.x = xs;
    Vec u = initial;
    Vec k1(u.size()), k2(u.size()), k3(u.size()), k4(u.size()), tmp(u.size());
    const double stride = opts.output_stride > 0.0 ? opts.output_stride : T / 256.0;
    double next_record = 0.0;
    auto record = [&](double t) {
        tr.times.push_back(t);
        tr.sup_norms.push_back(sup_norm(u));
        tr.l1_masses.push_back(trapezoid_mass(u, h));
        tr.niche_minima.push_back(0.0);
    };
    record(0.0);
    for (long long m = 0; m < steps; ++m) {
        const double t = dt * static_cast<double>(m);
        rhs(u, t, k1);
        for (std::size_t s = 0; s < u.size(); ++s) tmp[s] = u[s] + 0.5 * dt * k1[s];
        rhs(tmp, t + 0.5 * dt, k2);
        for (std::size_t s = 0; s < u.size(); ++s) tmp[s] = u[s] + 0.5 * dt * k2[s];
        rhs(tmp, t + 0.5 * dt, k3);
        for (std::size_t s = 0; s < u.size(); ++s) tmp[s] = u[s] + dt * k3[s];
        rhs(tmp, t + dt, k4);
        for (std::size_t s = 0; s < u.size(); ++s)
            u[s] += dt / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
        const double t_next = dt * static_cast<double>(m + 1);
        if (t_next + 1e-12 >= next_record + stride || m + 1 == steps) {
            record(t_next);
            next_record = t_next;
        }
    }
    tr.final_state = std::move(u);
    return tr;
}

/// Co-integrates an ordered pair with the same dt and returns the largest
/// ordering violation max_{t,x} (lower - upper)_+ .
inline double comparison_probe(const Vec& lower0, const Vec& upper0, Frame frame,
                               const Kernel& kernel, const GrowthModel& growth, double c,
                               const Grid& grid, double T, const EvolveOptions& opts = {}) {
    const int n = grid.n;
    if (static_cast<int>(lower0.size()) != n || static_cast<int>(upper0.size()) != n)
        throw Error("evolution.comparison_probe: length mismatch");
    for (int i = 0; i < n; ++i)
        if (lower0[static_cast<std::size_t>(i)] > upper0[static_cast<std::size_t>(i)])
            throw Error("evolution.comparison_probe: seeds must be ordered");

    const double reach = std::max(sup_norm(upper0), growth.sup_saturation());
    const double bound = dt_bound(growth, c, grid, frame, reach);
    double dt = opts.dt > 0.0 ? opts.dt : 0.9 * bound;
    if (opts.enforce_dt_bound && dt > bound)
        throw Error("evolution.comparison_probe: dt violates the monotonicity bound");
    const long long steps = static_cast<long long>(std::ceil(T / dt - 1e-12));
    dt = T / static_cast<double>(steps);

    ConvolutionEngine conv(discretize(kernel, grid.h), n, opts.path);
    const Vec xs = grid.abscissae();
    const double h = grid.h;
    const double ch = c / h;

    Vec lo = lower0, hi = upper0, clo(lo.size()), chi(hi.size());
    double violation = 0.0;
    for (long long m = 0; m < steps; ++m) {
        const double t = dt * static_cast<double>(m);
        conv.apply(lo.data(), clo.data());
        conv.apply(hi.data(), chi.data());
        for (int i = 0; i < n; ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            double rl = clo[s] - lo[s], rh = chi[s] - hi[s];
            if (frame == Frame::moving) {
                if (c > 0.0) {
                    rl += ch * (((i + 1 < n) ? lo[s + 1] : 0.0) - lo[s]);
                    rh += ch * (((i + 1 < n) ? hi[s + 1] : 0.0) - hi[s]);
                } else if (c < 0.0) {
                    rl += ch * (lo[s] - ((i > 0) ? lo[s - 1] : 0.0));
                    rh += ch * (hi[s] - ((i > 0) ? hi[s - 1] : 0.0));
                }
                rl += growth.f(xs[s], lo[s]);
                rh += growth.f(xs[s], hi[s]);
            } else {
                rl += growth.f(xs[s] - c * t, lo[s]);
                rh += growth.f(xs[s] - c * t, hi[s]);
            }
            clo[s] = lo[s] + dt * rl;
            chi[s] = hi[s] + dt * rh;
        }
        std::swap(lo, clo);
        std::swap(hi, chi);
        for (std::size_t s = 0; s < lo.size(); ++s)
            violation = std::max(violation, lo[s] - hi[s]);
    }
    return violation;
}

enum class LongTimeClass { extinct, persistent, undecided };

struct ClassifyThresholds {
    double extinction = 1e-3;
    double persistence = 5e-2;
    double convergence = 1e-2;
};

/// Conservative classification of a finished trace; undecided when neither
/// certificate holds (never misclassifies a short horizon).
inline LongTimeClass long_time_classify(const EvolutionTrace& trace, const Vec* steady = nullptr,
                                        const ClassifyThresholds& th = {}) {
    if (trace.times.size() < 8) return LongTimeClass::undecided;
    if (steady && steady->size() != trace.final_state.size())
        throw Error("evolution.long_time_classify: trace/steady grid mismatch");
    const std::size_t nrec = trace.times.size();
    const std::size_t q3 = (3 * nrec) / 4;

    bool sup_decreasing = true;
    for (std::size_t i = q3 + 1; i < nrec; ++i)
        if (trace.sup_norms[i] > trace.sup_norms[i - 1] + 1e-12) sup_decreasing = false;
    if (trace.sup_norms.back() < th.extinction && sup_decreasing) return LongTimeClass::extinct;

    // persistent needs an alive AND stabilized niche core over the last
    // quartile: a decaying core on a short horizon stays undecided
    bool core_alive = true;
    double core_max = 0.0, core_min = 1e300;
    for (std::size_t i = q3; i < nrec; ++i) {
        if (trace.niche_minima[i] < th.persistence) core_alive = false;
        core_max = std::max(core_max, trace.niche_minima[i]);
        core_min = std::min(core_min, trace.niche_minima[i]);
    }
    const bool stabilized = core_max > 0.0 && (core_max - core_min) <= 0.1 * core_max;
    if (core_alive && stabilized) {
        if (!steady) return LongTimeClass::persistent;
        if (sup_diff(trace.final_state, *steady) < th.convergence)
            return LongTimeClass::persistent;
    }
    return LongTimeClass::undecided;
}

}  // namespace rangeshift

#endif
