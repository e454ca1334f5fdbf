#ifndef RANGESHIFT_CRITICAL_SPEED_HPP
#define RANGESHIFT_CRITICAL_SPEED_HPP

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "rangeshift/common.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/kernel.hpp"
#include "rangeshift/parallel.hpp"
#include "rangeshift/spectral.hpp"

namespace rangeshift {

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    bool open_ended = false;  // no sign change found inside the scan range
    double width() const { return hi - lo; }
};

struct SpeedBoundResult {
    double value = 0.0;
    double argmin = 0.0;
    bool boundary = false;  // minimum sat on the alpha-range boundary
};

/// Closed-form speed bound c_alpha = inf_{alpha>0} (E(alpha) - 1 + sup a)/alpha
/// with E the exponential transform in the requested orientation. Coarse
/// log-grid bracketing followed by golden-section refinement.
inline SpeedBoundResult spectral_speed_bound(const Kernel& kernel, const GrowthModel& growth,
                                             Orientation orientation, double alpha_lo = 1e-4,
                                             double alpha_hi = 64.0) {
    if (!(alpha_lo > 0.0) || !(alpha_hi > alpha_lo))
        throw Error("critical_speed.spectral_speed_bound: bad alpha range");
    const double sup_a = growth.sup_a();
    auto g = [&](double alpha) {
        return (kernel.exponential_moment(alpha, orientation) - 1.0 + sup_a) / alpha;
    };
    // coarse log grid
    const int m = 160;
    const double lr = std::log(alpha_hi / alpha_lo);
    int best = 0;
    double best_v = 0.0;
    Vec vals(static_cast<std::size_t>(m + 1));
    for (int i = 0; i <= m; ++i) {
        const double a = alpha_lo * std::exp(lr * static_cast<double>(i) / m);
        vals[static_cast<std::size_t>(i)] = g(a);
        if (i == 0 || vals[static_cast<std::size_t>(i)] < best_v) {
            best_v = vals[static_cast<std::size_t>(i)];
            best = i;
        }
    }
    SpeedBoundResult out;
    if (best == 0 || best == m) {
        out.value = best_v;
        out.argmin = alpha_lo * std::exp(lr * static_cast<double>(best) / m);
        out.boundary = true;
        return out;
    }
    double a = alpha_lo * std::exp(lr * static_cast<double>(best - 1) / m);
    double b = alpha_lo * std::exp(lr * static_cast<double>(best + 1) / m);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, b); ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        }
    }
    out.argmin = 0.5 * (a + b);
    out.value = g(out.argmin);
    return out;
}

/// The symmetric-kernel quantitative remark: reported value 2 sqrt(m2 sup a)
/// next to the cosh-expansion value sqrt(2 m2 sup a). Only the latter is a
/// certified lower bound for the directly minimized speed; both are
/// informational outputs.
inline std::pair<double, double> symmetric_remark_values(const Kernel& kernel,
                                                         const GrowthModel& growth) {
    const double sup_a = growth.sup_a();
    if (!(sup_a > 0.0))
        throw Error("critical_speed.symmetric_remark_values: requires sup a > 0");
    const double m2 = kernel.moment(2, false);
    return {2.0 * std::sqrt(m2 * sup_a), std::sqrt(2.0 * m2 * sup_a)};
}

struct FatTailSpeedBound {
    double c_hash = 0.0;
    double tau0 = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double R0 = 0.0;
    double kappa = 0.0;
    double delta = 0.0;
    double barrier_residual = 0.0;  // max of (R[w] + delta w) away from the kink
};

namespace detail {

inline double barrier_w(double tau, double x) {
    return x <= 0.0 ? 1.0 - tau * x : 1.0 / (1.0 + tau * x);
}
inline double barrier_dw(double tau, double x) {
    if (x <= 0.0) return -tau;
    const double d = 1.0 + tau * x;
    return -tau / (d * d);
}

}  // namespace detail

/// Upper speed bound for symmetric kernels with a finite second moment:
/// tau0 solves tau^2 M2 + tau M1 = kappa, and c# = max{c0, c1, c2} makes the
/// rational barrier a positive test function certifying lambda_p >= delta.
/// The differential inequality is re-verified numerically on the given grid.
inline FatTailSpeedBound fat_tail_speed_bound(const Kernel& kernel, const GrowthModel& growth,
                                              double delta, const Grid& barrier_grid) {
    const TailBound tb = growth.tail_bounds(delta);
    const double M1 = kernel.moment(1, true);
    const double M2 = kernel.moment(2, true);
    if (!(M1 > 0.0) || !(M2 > 0.0))
        throw Error("critical_speed.fat_tail_speed_bound: kernel half-moments must be positive");
    FatTailSpeedBound out;
    out.delta = delta;
    out.R0 = tb.R0;
    out.kappa = tb.kappa;
    out.tau0 = (-M1 + std::sqrt(M1 * M1 + 4.0 * tb.kappa * M2)) / (2.0 * M2);
    if (!(out.tau0 > 0.0))
        throw Error("critical_speed.fat_tail_speed_bound: tau0 must be positive");
    const double sup_a = growth.sup_a();
    const double geom = (1.0 + out.tau0 * tb.R0) / out.tau0;
    out.c0 = M1;
    out.c1 = out.c0 + (sup_a + delta) * geom;
    out.c2 = (tb.kappa + delta + sup_a) * geom;
    out.c_hash = std::max({out.c0, out.c1, out.c2});

    // numerical verification of c w' + (J*w - w) + (a + delta) w <= 0 at
    // c = c#, skipping a neighborhood of the kink at x = 0
    const auto [klo, khi] = kernel.range();
    const double hq = std::min(0.01, barrier_grid.h);
    const int nq = static_cast<int>(std::ceil((khi - klo) / hq)) + 1;
    double worst = -1e300;
    for (int i = 0; i < barrier_grid.n; ++i) {
        const double x = barrier_grid.x(i);
        if (std::fabs(x) < 0.5) continue;
        // trapezoid for int J(z) w(x+z) dz over the kernel support
        double acc = 0.0;
        for (int k = 0; k < nq; ++k) {
            const double z = klo + (khi - klo) * static_cast<double>(k) / (nq - 1);
            const double w = (k == 0 || k == nq - 1) ? 0.5 : 1.0;
            acc += w * kernel.density(z) * detail::barrier_w(out.tau0, x + z);
        }
        acc *= (khi - klo) / (nq - 1);
        const double wv = detail::barrier_w(out.tau0, x);
        const double r = out.c_hash * detail::barrier_dw(out.tau0, x) + (acc - wv) +
                         (growth.a(x) + delta) * wv;
        worst = std::max(worst, r);
    }
    out.barrier_residual = worst;
    return out;
}

struct CriticalSpeedBounds {
    double c_alpha_plus = 0.0;
    double c_alpha_minus = 0.0;
    double alpha_star_plus = 0.0;
    double alpha_star_minus = 0.0;
    double c0_plus = 0.0;   // the drift threshold from exponential test
    double c0_minus = 0.0;  // functions; same formula as c_alpha
    double symmetric_remark_value = 0.0;
    double corrected_symmetric_value = 0.0;
    bool has_symmetric_values = false;
    double c_hash = 0.0;
    bool has_c_hash = false;
    bool thin_tailed = true;
};

struct LambdaCurvePoint {
    double c = 0.0;
    double lambda_p = 0.0;
    double residual = 0.0;
    double R = 0.0;
    long long n = 0;
    long long iterations = 0;
};

struct CriticalSpeedReport {
    Bracket c_star_plus, c_star_minus;    // magnitudes on the minus side
    Bracket c_dstar_plus, c_dstar_minus;  // outer thresholds
    std::vector<LambdaCurvePoint> lambda_curve;
    CriticalSpeedBounds bounds;
    bool monotone_sign_structure = false;
    double lambda_at_rest = 0.0;
    double bracket_tol = 0.0;
    // endpoint re-verification: lambda_p at each bracket's lo/hi
    double verify_star_plus_lo = 0.0, verify_star_plus_hi = 0.0;
    double verify_star_minus_lo = 0.0, verify_star_minus_hi = 0.0;
    double verify_dstar_plus_lo = 0.0, verify_dstar_plus_hi = 0.0;
    double verify_dstar_minus_lo = 0.0, verify_dstar_minus_hi = 0.0;
};

struct FindSpeedsOptions {
    GridPolicy policy{};
    Vec R_schedule;            // empty means auto from the growth structure
    double R_tol = 1e-4;
    double eig_tol = 1e-9;
    double bracket_tol = 1e-3;
    int scan_points = 41;      // coarse sign scan resolution
    double c_min = 0.0;        // scan range; both 0 means auto
    double c_max = 0.0;
    unsigned workers = 1;
    long long max_iter = 1000000;
    double fat_tail_delta = 0.0;  // 0 means half the available tail margin
};

namespace detail {

inline bool kernel_is_symmetric(const Kernel& k) {
    const auto [lo, hi] = k.range();
    if (std::fabs(lo + hi) > 1e-12 * std::max(1.0, std::fabs(hi))) return false;
    const int probes = 257;
    for (int i = 0; i < probes; ++i) {
        const double z = hi * static_cast<double>(i) / (probes - 1);
        if (std::fabs(k.density(z) - k.density(-z)) > 1e-12) return false;
    }
    return true;
}

}  // namespace detail

/// Locates the inner (c*) and outer (c**) thresholds of the sign structure of
/// c |-> lambda_p from a coarse scan plus bisection, and evaluates every
/// closed-form bound. Magnitudes are reported on the minus side.
inline CriticalSpeedReport find_speeds(const Kernel& kernel, const GrowthModel& growth,
                                       const FindSpeedsOptions& opts = {}) {
    CriticalSpeedReport rep;
    rep.bracket_tol = opts.bracket_tol;

    Vec R_schedule = opts.R_schedule;
    if (R_schedule.empty()) {
        // geometric, 5 levels; the R-tolerance stops at the plateau early
        const double r0 = std::max(growth.structure_radius() + 2.0, 10.0);
        for (int k = 0; k < 5; ++k) R_schedule.push_back(r0 * static_cast<double>(1 << k));
    }
    auto lambda_of = [&](double c) {
        return lambda_p_limit(kernel, growth, c, 0.0, R_schedule, opts.R_tol, opts.policy,
                              opts.eig_tol, opts.max_iter);
    };

    {
        LambdaLimitResult at_rest = lambda_of(0.0);
        rep.lambda_at_rest = at_rest.result.lambda_p;
        if (!(rep.lambda_at_rest < 0.0))
            throw Error("critical_speed.find_speeds: not-persistent-at-rest (lambda_p(0) = " +
                        fmt_g17(rep.lambda_at_rest) + " >= 0)");
    }

    // closed-form bounds & scan range
    try {
        SpeedBoundResult bp = spectral_speed_bound(kernel, growth, Orientation::plus);
        SpeedBoundResult bm = spectral_speed_bound(kernel, growth, Orientation::minus);
        rep.bounds.c_alpha_plus = bp.value;
        rep.bounds.alpha_star_plus = bp.argmin;
        rep.bounds.c_alpha_minus = bm.value;
        rep.bounds.alpha_star_minus = bm.argmin;
        rep.bounds.c0_plus = bp.value;
        rep.bounds.c0_minus = bm.value;
        rep.bounds.thin_tailed = true;
    } catch (const Error&) {
        rep.bounds.thin_tailed = false;  // fat tail: no exponential transform
    }
    if (detail::kernel_is_symmetric(kernel) && growth.sup_a() > 0.0) {
        auto [remark_v, corrected_v] = symmetric_remark_values(kernel, growth);
        rep.bounds.symmetric_remark_value = remark_v;
        rep.bounds.corrected_symmetric_value = corrected_v;
        rep.bounds.has_symmetric_values = true;
    }
    if (!rep.bounds.thin_tailed || detail::kernel_is_symmetric(kernel)) {
        try {
            const double margin = -growth.tail_sup_a();
            const double delta =
                opts.fat_tail_delta > 0.0 ? opts.fat_tail_delta : 0.5 * margin;
            const Grid bg = Grid::with_spacing(
                std::max(4.0 * growth.structure_radius(), 20.0), 0.05);
            rep.bounds.c_hash = fat_tail_speed_bound(kernel, growth, delta, bg).c_hash;
            rep.bounds.has_c_hash = true;
        } catch (const Error&) {
            rep.bounds.has_c_hash = false;
        }
    }

    double c_lo = opts.c_min, c_hi = opts.c_max;
    if (c_lo == 0.0 && c_hi == 0.0) {
        if (rep.bounds.thin_tailed) {
            c_hi = 1.25 * rep.bounds.c_alpha_plus;
            c_lo = -1.25 * rep.bounds.c_alpha_minus;
        } else if (rep.bounds.has_c_hash) {
            c_hi = 1.1 * rep.bounds.c_hash;
            c_lo = -c_hi;
        } else {
            throw Error("critical_speed.find_speeds: no closed-form bound to size the scan; "
                        "pass an explicit c range");
        }
    }
    if (!(c_hi > 0.0) || !(c_lo < 0.0))
        throw Error("critical_speed.find_speeds: scan range must straddle 0");

    // coarse scan (embarrassingly parallel, slot-indexed for determinism)
    const int ns = std::max(opts.scan_points, 5);
    Vec cs(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i)
        cs[static_cast<std::size_t>(i)] =
            c_lo + (c_hi - c_lo) * static_cast<double>(i) / (ns - 1);
    // the sign walk anchors at c = 0, so it must be a sample
    bool has_zero = false;
    for (double c : cs) has_zero = has_zero || std::fabs(c) < 1e-15;
    if (!has_zero) {
        cs.push_back(0.0);
        std::sort(cs.begin(), cs.end());
    }
    std::vector<LambdaCurvePoint> curve(cs.size());
    parallel_for(cs.size(), opts.workers, [&](std::size_t i) {
        LambdaLimitResult r = lambda_of(cs[i]);
        curve[i] = {cs[i], r.result.lambda_p, r.result.residual, r.result.domain_R,
                    static_cast<long long>(r.result.eigenfunction.size()),
                    r.result.iterations};
    });
    rep.lambda_curve = curve;

    // sign structure: negative exactly on one contiguous block containing 0?
    {
        bool in_block = false, left_done = false, ok = true;
        for (const auto& p : curve) {
            const bool neg = p.lambda_p < 0.0;
            if (neg && !in_block) {
                if (left_done) ok = false;  // a second negative block
                in_block = true;
            }
            if (!neg && in_block) {
                in_block = false;
                left_done = true;
            }
        }
        rep.monotone_sign_structure = ok;
    }

    // bisection refinement of a sign change between (c_neg, c_pos) where
    // lambda(c_neg) < 0 <= lambda(c_pos)
    auto bisect = [&](double c_neg, double c_pos) {
        while (std::fabs(c_pos - c_neg) > opts.bracket_tol) {
            const double mid = 0.5 * (c_neg + c_pos);
            const double lam = lambda_of(mid).result.lambda_p;
            if (lam < 0.0)
                c_neg = mid;
            else
                c_pos = mid;
        }
        return std::make_pair(c_neg, c_pos);
    };

    // sign changes, stored as (lambda<0 endpoint, lambda>=0 endpoint);
    // plus side walks right from 0, minus side walks left
    std::vector<std::pair<double, double>> plus_changes, minus_changes;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const auto &a = curve[i - 1], &b = curve[i];
        if (b.c <= 0.0 || a.c < 0.0) continue;
        if ((a.lambda_p < 0.0) != (b.lambda_p < 0.0)) {
            if (a.lambda_p < 0.0)
                plus_changes.push_back({a.c, b.c});
            else
                plus_changes.push_back({b.c, a.c});
        }
    }
    for (std::size_t i = curve.size(); i-- > 1;) {
        const auto &a = curve[i - 1], &b = curve[i];
        if (a.c >= 0.0 || b.c > 0.0) continue;
        if ((a.lambda_p < 0.0) != (b.lambda_p < 0.0)) {
            if (b.lambda_p < 0.0)
                minus_changes.push_back({b.c, a.c});
            else
                minus_changes.push_back({a.c, b.c});
        }
    }

    auto verify = [&](double c) { return lambda_of(c).result.lambda_p; };

    if (plus_changes.empty()) {
        rep.c_star_plus = {curve.back().c, curve.back().c, true};
        rep.c_dstar_plus = rep.c_star_plus;
    } else {
        auto first = plus_changes.front();
        auto [lo1, hi1] = bisect(first.first, first.second);
        rep.c_star_plus = {lo1, hi1, false};
        if (plus_changes.size() == 1) {
            rep.c_dstar_plus = rep.c_star_plus;
        } else {
            auto last = plus_changes.back();
            auto [lo2, hi2] = bisect(last.first, last.second);
            rep.c_dstar_plus = {lo2, hi2, false};
        }
        rep.verify_star_plus_lo = verify(rep.c_star_plus.lo);
        rep.verify_star_plus_hi = verify(rep.c_star_plus.hi);
        rep.verify_dstar_plus_lo = verify(rep.c_dstar_plus.lo);
        rep.verify_dstar_plus_hi = verify(rep.c_dstar_plus.hi);
    }
    if (minus_changes.empty()) {
        rep.c_star_minus = {-curve.front().c, -curve.front().c, true};
        rep.c_dstar_minus = rep.c_star_minus;
    } else {
        // entries were pushed walking left from 0: front() is the inner
        // threshold, back() the outer; each pair is (lambda<0 side, other)
        auto first = minus_changes.front();
        auto [lo1, hi1] = bisect(first.first, first.second);
        rep.c_star_minus = {-lo1, -hi1, false};  // magnitudes: |lo1| < |hi1|
        if (minus_changes.size() == 1) {
            rep.c_dstar_minus = rep.c_star_minus;
        } else {
            auto last = minus_changes.back();
            auto [lo2, hi2] = bisect(last.first, last.second);
            rep.c_dstar_minus = {-lo2, -hi2, false};
        }
        rep.verify_star_minus_lo = verify(-rep.c_star_minus.lo);
        rep.verify_star_minus_hi = verify(-rep.c_star_minus.hi);
        rep.verify_dstar_minus_lo = verify(-rep.c_dstar_minus.lo);
        rep.verify_dstar_minus_hi = verify(-rep.c_dstar_minus.hi);
    }
    return rep;
}

}  // namespace rangeshift

#endif
