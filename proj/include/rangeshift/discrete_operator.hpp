#ifndef RANGESHIFT_DISCRETE_OPERATOR_HPP
#define RANGESHIFT_DISCRETE_OPERATOR_HPP

#include <cmath>
#include <functional>
#include <utility>

#include "rangeshift/common.hpp"
#include "rangeshift/convolution.hpp"
#include "rangeshift/csv.hpp"
#include "rangeshift/grid.hpp"
#include "rangeshift/kernel.hpp"

namespace rangeshift {

/// Which ghost values the drift stencil zeroes out. The upwind direction is
/// tied to sign(c): forward difference (right ghost) for c > 0, backward
/// (left ghost) for c < 0. That single choice keeps the assembled matrix
/// Metzler and pins the vanishing endpoint to the downstream boundary, which
/// is where the bounded-domain eigenfunction vanishes. With eps > 0 the
/// centered second difference zeroes both ghosts.
struct BoundaryConvention {
    bool drift_ghost_right = false;
    bool drift_ghost_left = false;
    bool viscous_ghosts = false;
};

/// Discretization of eps*Dxx + c*Dx + M_R + a on a uniform grid. Immutable;
/// apply() is pure and safe to call concurrently.
class DiscreteOperator {
  public:
    static DiscreteOperator assemble(const Grid& grid, const Kernel& kernel, double c,
                                     double epsilon, const std::function<double(double)>& a,
                                     bool dual = false, ConvPath path = ConvPath::automatic) {
        if (!std::isfinite(c) || !std::isfinite(epsilon))
            throw Error("discrete_operator.assemble: c and epsilon must be finite");
        if (epsilon < 0.0) throw Error("discrete_operator.assemble: epsilon must be >= 0");
        DiscreteOperator op;
        op.grid_ = grid;
        // the dual operator is the exact transpose: reflected kernel, flipped
        // drift, same potential
        const Kernel k = dual ? kernel.reflect() : kernel;
        op.c_ = dual ? -c : c;
        op.eps_ = epsilon;
        KernelTaps taps = discretize(k, grid.h);
        if (taps.at(0) <= 0.0 || taps.at(1) <= 0.0 || taps.at(-1) <= 0.0)
            throw Error("discrete_operator.assemble: grid spacing exceeds the kernel's "
                        "positivity radius at 0 (irreducibility lost)");
        for (double w : taps.t)
            if (w < 0.0) throw Error("discrete_operator.assemble: Metzler violation (negative "
                                     "kernel weight)");
        op.conv_ = ConvolutionEngine(std::move(taps), grid.n, path);
        op.a_.resize(static_cast<std::size_t>(grid.n));
        for (int i = 0; i < grid.n; ++i) op.a_[static_cast<std::size_t>(i)] = a(grid.x(i));
        op.bc_.drift_ghost_right = op.c_ > 0.0;
        op.bc_.drift_ghost_left = op.c_ < 0.0;
        op.bc_.viscous_ghosts = epsilon > 0.0;
        return op;
    }

    const Grid& grid() const { return grid_; }
    double c() const { return c_; }
    double epsilon() const { return eps_; }
    const Vec& a_values() const { return a_; }
    const BoundaryConvention& bc() const { return bc_; }
    const ConvolutionEngine& convolution() const { return conv_; }

    double sup_abs_a() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::fabs(v));
        return m;
    }

    /// Shift that makes A + kI entrywise nonnegative.
    double nonnegativity_shift() const {
        return 1.0 + sup_abs_a() + std::fabs(c_) / grid_.h + 2.0 * eps_ / (grid_.h * grid_.h);
    }

    void apply_into(const Vec& v, Vec& out) const {
        const int n = grid_.n;
        if (static_cast<int>(v.size()) != n)
            throw Error("discrete_operator.apply: length mismatch");
        out.resize(v.size());
        conv_.apply(v.data(), out.data());
        const double h = grid_.h;
        const double ch = c_ / h;
        const double e2 = eps_ / (h * h);
        for (int i = 0; i < n; ++i) {
            double acc = out[static_cast<std::size_t>(i)] +
                         (a_[static_cast<std::size_t>(i)] - 1.0) * v[static_cast<std::size_t>(i)];
            if (c_ > 0.0) {
                const double vr = (i + 1 < n) ? v[static_cast<std::size_t>(i + 1)] : 0.0;
                acc += ch * (vr - v[static_cast<std::size_t>(i)]);
            } else if (c_ < 0.0) {
                const double vl = (i > 0) ? v[static_cast<std::size_t>(i - 1)] : 0.0;
                acc += ch * (v[static_cast<std::size_t>(i)] - vl);
            }
            if (eps_ > 0.0) {
                const double vl = (i > 0) ? v[static_cast<std::size_t>(i - 1)] : 0.0;
                const double vr = (i + 1 < n) ? v[static_cast<std::size_t>(i + 1)] : 0.0;
                acc += e2 * (vl - 2.0 * v[static_cast<std::size_t>(i)] + vr);
            }
            out[static_cast<std::size_t>(i)] = acc;
        }
    }

    Vec apply(const Vec& v) const {
        Vec out;
        apply_into(v, out);
        return out;
    }

    /// Algebraic transpose built from the stored taps: reversed lags, flipped
    /// drift, same potential and viscosity.
    DiscreteOperator transpose() const {
        DiscreteOperator op;
        op.grid_ = grid_;
        op.c_ = -c_;
        op.eps_ = eps_;
        const KernelTaps& t = conv_.taps();
        KernelTaps rt;
        rt.h = t.h;
        rt.m_lo = -t.m_hi;
        rt.m_hi = -t.m_lo;
        rt.t.assign(t.t.rbegin(), t.t.rend());
        rt.weight_sum = t.weight_sum;
        op.conv_ = ConvolutionEngine(std::move(rt), grid_.n, conv_.path());
        op.a_ = a_;
        op.bc_.drift_ghost_right = op.c_ > 0.0;
        op.bc_.drift_ghost_left = op.c_ < 0.0;
        op.bc_.viscous_ghosts = eps_ > 0.0;
        return op;
    }

    /// Exact transpose, assembled through the continuum dual route
    /// (reflected kernel, flipped drift); the two coincide entrywise here.
    DiscreteOperator dual(const Kernel& kernel) const {
        DiscreteOperator op;
        op.grid_ = grid_;
        op.c_ = -c_;
        op.eps_ = eps_;
        KernelTaps taps = discretize(kernel.reflect(), grid_.h);
        op.conv_ = ConvolutionEngine(std::move(taps), grid_.n, conv_.path());
        op.a_ = a_;
        op.bc_.drift_ghost_right = op.c_ > 0.0;
        op.bc_.drift_ghost_left = op.c_ < 0.0;
        op.bc_.viscous_ghosts = eps_ > 0.0;
        return op;
    }

    /// Dense row-major assembly; oracle path, n <= 2048 only.
    Vec dense() const {
        const int n = grid_.n;
        if (n > 2048) throw Error("discrete_operator.dense: dense assembly limited to n <= 2048");
        Vec A(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
        const auto& taps = conv_.taps();
        const double h = grid_.h;
        const double ch = c_ / h;
        const double e2 = eps_ / (h * h);
        for (int i = 0; i < n; ++i) {
            double* row = A.data() + static_cast<std::size_t>(i) * n;
            for (int m = std::max(taps.m_lo, i - (n - 1)); m <= std::min(taps.m_hi, i); ++m)
                row[i - m] += taps.at(m);
            row[i] += a_[static_cast<std::size_t>(i)] - 1.0;
            if (c_ > 0.0) {
                row[i] -= ch;
                if (i + 1 < n) row[i + 1] += ch;
            } else if (c_ < 0.0) {
                row[i] += ch;
                if (i > 0) row[i - 1] -= ch;
            }
            if (eps_ > 0.0) {
                row[i] -= 2.0 * e2;
                if (i > 0) row[i - 1] += e2;
                if (i + 1 < n) row[i + 1] += e2;
            }
        }
        return A;
    }

    /// Smallest off-diagonal entry of the dense assembly (>= 0 iff Metzler).
    double min_offdiagonal() const {
        const Vec A = dense();
        const int n = grid_.n;
        double m = 0.0;
        bool first = true;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double v = A[static_cast<std::size_t>(i) * n + j];
                if (first || v < m) {
                    m = v;
                    first = false;
                }
            }
        return m;
    }

    void save_dense_csv(const std::string& path) const {
        const Vec A = dense();
        const int n = grid_.n;
        std::ofstream out(path);
        if (!out) throw Error("discrete_operator.export: cannot open " + path);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (j) out << ',';
                out << fmt_g17(A[static_cast<std::size_t>(i) * n + j]);
            }
            out << '\n';
        }
    }

  private:
    DiscreteOperator() = default;

    Grid grid_;
    double c_ = 0.0;
    double eps_ = 0.0;
    ConvolutionEngine conv_;
    Vec a_;
    BoundaryConvention bc_;
};

}  // namespace rangeshift

#endif
