#ifndef RANGESHIFT_SPECTRAL_HPP
#define RANGESHIFT_SPECTRAL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

#include "rangeshift/common.hpp"
#include "rangeshift/discrete_operator.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/kernel.hpp"

namespace rangeshift {

enum class EigenMethod { perron_iteration, dense_oracle };

/// Sign convention: lambda_p solves c*D phi + M phi + a phi + lambda_p phi = 0,
/// i.e. lambda_p = -(Perron root of the assembled Metzler matrix).
struct EigenResult {
    double lambda_p = 0.0;
    Vec eigenfunction;  // sup-normalized, strictly positive
    double residual = 0.0;
    double domain_R = 0.0;
    long long iterations = 0;
    EigenMethod method = EigenMethod::perron_iteration;
    bool converged = false;
    // Collatz-Wielandt bounds on lambda_p over well-scaled entries (diagnostic)
    double cw_lower = 0.0;
    double cw_upper = 0.0;
    Vec residual_tail;  // last recorded residuals, oldest first
};

namespace detail {

// The eigenfunction tail can decay below what doubles represent while the
// FFT route carries ~1e-16 absolute noise, so iterates are clamped
// nonnegative and floored; the eigenvalue estimate below is immune to
// noise-floor entries.
inline constexpr double kIterateFloor = 1e-280;
inline constexpr double kTrustLevel = 1e-10;

}  // namespace detail

/// Shifted power iteration on B = A + kI, k = 1 + sup|a| + |c|/h + 2 eps/h^2.
/// The iterate stays positive; the returned eigenvalue is the converged
/// Perron root (estimated by the iterate-weighted quotient), residual is the
/// sup-norm of A phi + lambda phi against the sup-normalized phi.
inline EigenResult principal_eigenvalue(const DiscreteOperator& op, double tol = 1e-10,
                                        long long max_iter = 1000000,
                                        const Vec* warm_start = nullptr) {
    const int n = op.grid().n;
    const double k = op.nonnegativity_shift();
    Vec v;
    if (warm_start && static_cast<int>(warm_start->size()) == n)
        v = *warm_start;
    else
        v.assign(static_cast<std::size_t>(n), 1.0);
    double vmax = sup_norm(v);
    if (!(vmax > 0.0)) v.assign(static_cast<std::size_t>(n), 1.0), vmax = 1.0;
    for (double& x : v) x = std::max(x / vmax, detail::kIterateFloor);

    Vec w(static_cast<std::size_t>(n));
    EigenResult r;
    r.domain_R = op.grid().R;
    r.method = EigenMethod::perron_iteration;
    constexpr int kTail = 16;
    Vec tail;
    tail.reserve(kTail);

    double rho = 0.0, res = 0.0;
    for (long long it = 1; it <= max_iter; ++it) {
        op.apply_into(v, w);
        double num = 0.0, den = 0.0, wmax = 0.0;
        for (int i = 0; i < n; ++i) {
            double wi = w[static_cast<std::size_t>(i)] + k * v[static_cast<std::size_t>(i)];
            if (wi < 0.0) wi = 0.0;
            w[static_cast<std::size_t>(i)] = wi;
            num += wi * v[static_cast<std::size_t>(i)];
            den += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
            if (wi > wmax) wmax = wi;
        }
        rho = num / den;
        res = 0.0;
        for (int i = 0; i < n; ++i)
            res = std::max(res, std::fabs(w[static_cast<std::size_t>(i)] -
                                          rho * v[static_cast<std::size_t>(i)]));
        if (static_cast<int>(tail.size()) == kTail) tail.erase(tail.begin());
        tail.push_back(res);
        const double lam = -(rho - k);
        if (res <= tol * (1.0 + std::fabs(lam))) {
            r.lambda_p = lam;
            r.iterations = it;
            r.residual = res;
            r.converged = true;
            break;
        }
        if (!(wmax > 0.0))
            throw Error("spectral.principal_eigenvalue: non-positive iterate (Metzler "
                        "regression)");
        for (int i = 0; i < n; ++i)
            v[static_cast<std::size_t>(i)] =
                std::max(w[static_cast<std::size_t>(i)] / wmax, detail::kIterateFloor);
        if (it == max_iter) {
            r.lambda_p = lam;
            r.iterations = it;
            r.residual = res;
            r.converged = false;
        }
    }
    // Collatz-Wielandt diagnostics over well-scaled entries, in lambda units
    double qlo = 1e300, qhi = -1e300;
    for (int i = 0; i < n; ++i) {
        if (v[static_cast<std::size_t>(i)] < detail::kTrustLevel) continue;
        const double q = w[static_cast<std::size_t>(i)] / v[static_cast<std::size_t>(i)];
        qlo = std::min(qlo, q);
        qhi = std::max(qhi, q);
    }
    r.cw_lower = -(qhi - k);
    r.cw_upper = -(qlo - k);
    r.residual_tail = std::move(tail);
    for (double& x : v) x = std::max(x, 1e-300);
    r.eigenfunction = std::move(v);
    return r;
}

/// Full nonsymmetric eigensolve of the dense assembly; oracle path for
/// n <= 2048, used by tests and the verify task.
inline EigenResult principal_eigenvalue_dense(const DiscreteOperator& op) {
    const int n = op.grid().n;
    const Vec A = op.dense();
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = A[static_cast<std::size_t>(i) * n + j];
    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw Error("spectral.dense_oracle: eigensolver failed to converge");
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
    const double s = es.eigenvalues()[best].real();
    Eigen::VectorXd phi = es.eigenvectors().col(best).real();
    int argmax = 0;
    for (int i = 1; i < n; ++i)
        if (std::fabs(phi[i]) > std::fabs(phi[argmax])) argmax = i;
    if (phi[argmax] < 0.0) phi = -phi;
    const double m = phi.maxCoeff();
    EigenResult r;
    r.method = EigenMethod::dense_oracle;
    r.domain_R = op.grid().R;
    r.lambda_p = -s;
    r.converged = true;
    r.iterations = 0;
    r.eigenfunction.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        r.eigenfunction[static_cast<std::size_t>(i)] = std::max(phi[i] / m, 1e-300);
    Vec res = op.apply(r.eigenfunction);
    double rmax = 0.0;
    for (int i = 0; i < n; ++i)
        rmax = std::max(rmax, std::fabs(res[static_cast<std::size_t>(i)] +
                                        r.lambda_p * r.eigenfunction[static_cast<std::size_t>(i)]));
    r.residual = rmax;
    r.cw_lower = r.cw_upper = r.lambda_p;
    return r;
}

struct GridPolicy {
    double h = 0.05;
    ConvPath path = ConvPath::automatic;
};

struct LambdaLimitResult {
    EigenResult result;           // final level
    Vec R_values;                 // levels actually solved
    Vec lambda_values;            // lambda_p per level
    bool converged_in_R = false;  // successive change < tol before exhaustion
};

inline double interp_or_zero(const Vec& xs, const Vec& ys, double x) {
    if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    std::size_t i = static_cast<std::size_t>((x - xs.front()) / h);
    i = std::min(i, xs.size() - 2);
    const double w = (x - xs[i]) / h;
    return (1.0 - w) * ys[i] + w * ys[i + 1];
}

inline DiscreteOperator assemble_linearized(const Grid& grid, const Kernel& kernel,
                                            const GrowthModel& growth, double c, double epsilon,
                                            ConvPath path = ConvPath::automatic) {
    return DiscreteOperator::assemble(grid, kernel, c, epsilon,
                                      [&](double x) { return growth.a(x); }, false, path);
}

/// Domain limit R -> infinity along a schedule; warm-starts each level from
/// the previous eigenfunction and checks the monotone nonincreasing property.
inline LambdaLimitResult lambda_p_limit(const Kernel& kernel, const GrowthModel& growth, double c,
                                        double epsilon, const Vec& R_schedule, double tol_R,
                                        const GridPolicy& policy = GridPolicy{},
                                        double eig_tol = 1e-8, long long max_iter = 1000000) {
    if (R_schedule.empty()) throw Error("spectral.lambda_p_limit: empty R schedule");
    for (std::size_t i = 1; i < R_schedule.size(); ++i)
        if (!(R_schedule[i] > R_schedule[i - 1]))
            throw Error("spectral.lambda_p_limit: R_schedule must be strictly increasing");
    if (R_schedule.front() < growth.structure_radius())
        throw Error("spectral.lambda_p_limit: first R must cover the niche");

    LambdaLimitResult out;
    Vec prev_phi, prev_x;
    for (std::size_t level = 0; level < R_schedule.size(); ++level) {
        const Grid grid = Grid::with_spacing(R_schedule[level], policy.h);
        DiscreteOperator op = assemble_linearized(grid, kernel, growth, c, epsilon, policy.path);
        Vec warm;
        if (!prev_phi.empty()) {
            warm.resize(static_cast<std::size_t>(grid.n));
            for (int i = 0; i < grid.n; ++i)
                warm[static_cast<std::size_t>(i)] = interp_or_zero(prev_x, prev_phi, grid.x(i));
        }
        EigenResult r = principal_eigenvalue(op, eig_tol, max_iter,
                                             warm.empty() ? nullptr : &warm);
        if (!r.converged)
            throw Error("spectral.lambda_p_limit: non-convergence at R=" +
                        fmt_g17(R_schedule[level]));
        if (!out.lambda_values.empty()) {
            // the exact property carries estimator noise of a few times the
            // residual tolerance; a genuine boundary-condition bug shows up
            // at O(h), far beyond this slack
            const double slack = 1e-12 + 100.0 * eig_tol * (1.0 + std::fabs(r.lambda_p));
            if (r.lambda_p > out.lambda_values.back() + slack)
                throw Error("spectral.lambda_p_limit: domain monotonicity violated at R=" +
                            fmt_g17(R_schedule[level]));
        }
        out.R_values.push_back(R_schedule[level]);
        out.lambda_values.push_back(r.lambda_p);
        const bool settled = out.lambda_values.size() >= 2 &&
                             std::fabs(out.lambda_values.back() -
                                       out.lambda_values[out.lambda_values.size() - 2]) < tol_R;
        prev_phi = r.eigenfunction;
        prev_x = grid.abscissae();
        out.result = std::move(r);
        if (settled) {
            out.converged_in_R = true;
            break;
        }
    }
    return out;
}

struct LambdaBoundCertificate {
    double mu = 0.0;
    double value = 0.0;  // a valid lower bound for lambda_p
};

struct AnalyticLambdaBounds {
    double lower = 0.0;
    std::vector<LambdaBoundCertificate> certificates;
    Vec skipped_mu;  // transform-divergent entries
};

/// Exponential test functions e^{-mu x}: each admissible mu yields the lower
/// bound  c mu + 1 - int J(z) e^{mu z} dz - sup a  for lambda_p.
inline AnalyticLambdaBounds analytic_lambda_bounds(const Kernel& kernel,
                                                   const GrowthModel& growth, double c,
                                                   const Vec& mu_grid) {
    AnalyticLambdaBounds out;
    const double sup_a = growth.sup_a();
    bool first = true;
    for (double mu : mu_grid) {
        double transform;
        try {
            transform = mu >= 0.0 ? kernel.exponential_moment(mu, Orientation::plus)
                                  : kernel.exponential_moment(-mu, Orientation::minus);
        } catch (const Error&) {
            out.skipped_mu.push_back(mu);
            continue;
        }
        const double value = c * mu + 1.0 - transform - sup_a;
        out.certificates.push_back({mu, value});
        if (first || value > out.lower) {
            out.lower = value;
            first = false;
        }
    }
    if (first) throw Error("spectral.analytic_lambda_bounds: every mu was transform-divergent");
    return out;
}

/// |lambda_p(A) - lambda_p(A^T)| by two independent Perron iterations.
inline double duality_residual(const DiscreteOperator& op, double tol = 1e-12,
                               long long max_iter = 2000000) {
    EigenResult a = principal_eigenvalue(op, tol, max_iter);
    EigenResult b = principal_eigenvalue(op.transpose(), tol, max_iter);
    if (!a.converged || !b.converged)
        throw Error("spectral.duality_residual: non-convergence");
    return std::fabs(a.lambda_p - b.lambda_p);
}

/// |lambda_p(c, J, a(x)) - lambda_p(-c, J(-.), a(-x))| on a symmetric grid.
inline double reflection_identity_residual(const Kernel& kernel, const GrowthModel& growth,
                                           double c, const Grid& grid, double epsilon = 0.0,
                                           double tol = 1e-12, long long max_iter = 2000000) {
    DiscreteOperator A = assemble_linearized(grid, kernel, growth, c, epsilon);
    DiscreteOperator B = DiscreteOperator::assemble(
        grid, kernel.reflect(), -c, epsilon, [&](double x) { return growth.a(-x); });
    EigenResult ra = principal_eigenvalue(A, tol, max_iter);
    EigenResult rb = principal_eigenvalue(B, tol, max_iter);
    if (!ra.converged || !rb.converged)
        throw Error("spectral.reflection_identity: non-convergence");
    return std::fabs(ra.lambda_p - rb.lambda_p);
}

}  // namespace rangeshift

#endif
