#ifndef RANGESHIFT_VERIFY_HPP
#define RANGESHIFT_VERIFY_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "rangeshift/common.hpp"
#include "rangeshift/critical_speed.hpp"
#include "rangeshift/evolution.hpp"
#include "rangeshift/spectral.hpp"
#include "rangeshift/steady_state.hpp"

namespace rangeshift {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Fast field diagnostic: spot-checks the library's structural invariants on
/// seeded instances. The full acceptance evidence lives in the test suite.
inline std::vector<VerifyCheck> run_property_suite(std::uint64_t seed) {
    std::vector<VerifyCheck> out;
    Rng rng(seed ^ 0x5eedULL);
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        out.push_back({name, pass, detail});
    };

    const Kernel uni = Kernel::uniform(1.0);
    const GrowthModel niche =
        GrowthModel::logistic_const_b(NicheProfile::niche(1.0, 2.0, 1.0, -1.0), 1.0);

    {  // discretized mass
        double worst = 0.0;
        for (double h : {0.05, 0.037}) {
            for (const Kernel& k : {Kernel::uniform(1.0), Kernel::tent(1.5),
                                    Kernel::gaussian(1.0, 8.0)}) {
                const KernelTaps t = discretize(k, h);
                worst = std::max(worst, std::fabs(t.weight_sum - 1.0));
            }
        }
        check("kernel.unit_mass_after_discretization", worst <= 1e-12,
              "max |sum w - 1| = " + fmt_g17(worst));
    }
    {  // closed form vs quadrature
        const double d1 = std::fabs(uni.moment(2, false) - uni.moment_quadrature(2, false));
        const double d2 = std::fabs(uni.exponential_moment(2.0, Orientation::plus) -
                                    uni.exponential_moment_quadrature(2.0, Orientation::plus));
        check("kernel.moment_routes_agree", d1 <= 1e-6 && d2 <= 1e-6,
              "m2 diff = " + fmt_g17(d1) + ", exp diff = " + fmt_g17(d2));
    }
    {  // truncation monotone in N
        const Kernel fat = Kernel::fat_quartic(1.0, 200.0);
        const KernelTaps t5 = discretize(fat.truncate(5.0), 0.05);
        const KernelTaps t10 = discretize(fat.truncate(10.0), 0.05);
        double worst = 0.0;
        for (int m = t5.m_lo; m <= t5.m_hi; ++m)
            worst = std::max(worst, t5.at(m) - t10.at(m));
        check("kernel.truncation_monotone", worst <= 0.0 && t5.weight_sum < t10.weight_sum,
              "max pointwise excess = " + fmt_g17(worst));
    }
    {  // Metzler structure
        double worst = 1e300;
        for (double c : {-0.7, 0.0, 0.7})
            for (double eps : {0.0, 0.05}) {
                const Grid g(8.0, 161);
                DiscreteOperator op = assemble_linearized(g, uni, niche, c, eps);
                worst = std::min(worst, op.min_offdiagonal());
            }
        check("discrete_operator.metzler", worst >= 0.0, "min offdiag = " + fmt_g17(worst));
    }
    {  // FFT vs direct convolution
        const Grid g(12.0, 1024);
        KernelTaps taps = discretize(uni, g.h);
        ConvolutionEngine direct(taps, g.n, ConvPath::direct);
        ConvolutionEngine fft(taps, g.n, ConvPath::fft);
        Vec v(static_cast<std::size_t>(g.n));
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        const double diff = sup_diff(direct.apply(v), fft.apply(v));
        check("discrete_operator.fft_matches_direct", diff <= 1e-10 * sup_norm(v),
              "max diff = " + fmt_g17(diff));
    }
    {  // duality and reflection identities
        const Grid g(10.0, 321);
        DiscreteOperator op = assemble_linearized(g, uni, niche, 0.6, 0.0);
        const double dres = duality_residual(op, 1e-12);
        const double rres = reflection_identity_residual(uni, niche, 0.6, g);
        check("spectral.duality", dres <= 1e-10, "residual = " + fmt_g17(dres));
        check("spectral.reflection_identity", rres <= 1e-10, "residual = " + fmt_g17(rres));
    }
    {  // lower bound (phi == 1 test function) and monotonicity in a
        const Grid g(10.0, 321);
        DiscreteOperator op = assemble_linearized(g, uni, niche, 0.3, 0.0);
        EigenResult r = principal_eigenvalue(op, 1e-11);
        // -sup(M_Omega 1 + a)
        Vec ones(static_cast<std::size_t>(g.n), 1.0);
        Vec Aones = op.apply(ones);
        double sup = -1e300;
        for (int i = 0; i < g.n; ++i)
            sup = std::max(sup, Aones[static_cast<std::size_t>(i)]);
        check("spectral.lower_bound", r.lambda_p >= -sup - 1e-10,
              "lambda_p = " + fmt_g17(r.lambda_p) + ", bound = " + fmt_g17(-sup));
        const GrowthModel bigger = niche.with_potential_shift(0.1);
        DiscreteOperator op2 = assemble_linearized(g, uni, bigger, 0.3, 0.0);
        EigenResult r2 = principal_eigenvalue(op2, 1e-11);
        check("spectral.monotone_in_a", r2.lambda_p <= r.lambda_p + 1e-12,
              "shifted lambda_p = " + fmt_g17(r2.lambda_p));
    }
    {  // comparison principle
        const Grid g(10.0, 321);
        Vec lo(static_cast<std::size_t>(g.n)), hi(static_cast<std::size_t>(g.n));
        for (int i = 0; i < g.n; ++i) {
            const double b = rng.uniform(0.0, 0.5);
            lo[static_cast<std::size_t>(i)] = b;
            hi[static_cast<std::size_t>(i)] = b + rng.uniform(0.0, 0.5);
        }
        const double viol = comparison_probe(lo, hi, Frame::moving, uni, niche, 0.4, g, 10.0);
        check("evolution.comparison", viol <= 1e-13, "violation = " + fmt_g17(viol));
    }
    {  // two-seed uniqueness probe
        const Grid g(12.0, 361);
        SteadyStateResult s = solve_bounded_viscous(g, uni, niche, 0.3, 0.0, 1e-11);
        check("steady_state.converged",
              s.converged && s.classification == SteadyClass::nontrivial,
              "residual = " + fmt_g17(s.residual));
    }
    {  // determinism of a small scan
        auto run_once = [&]() {
            const Grid g(8.0, 161);
            Vec lams;
            for (double c : {0.0, 0.3, 0.6}) {
                DiscreteOperator op = assemble_linearized(g, uni, niche, c, 0.0);
                lams.push_back(principal_eigenvalue(op, 1e-10).lambda_p);
            }
            return lams;
        };
        const Vec a = run_once(), b = run_once();
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i] == b[i];
        check("cli.determinism", same, same ? "bit-identical" : "mismatch");
    }
    return out;
}

inline int print_property_suite(std::uint64_t seed) {
    int fails = 0;
    for (const auto& c : run_property_suite(seed)) {
        std::printf("[%s] %s — %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
        if (!c.pass) ++fails;
    }
    return fails == 0 ? 0 : 3;
}

}  // namespace rangeshift

#endif
