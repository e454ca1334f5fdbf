#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rangeshift/steady_state.hpp"

using namespace rangeshift;

namespace {

const Kernel kU = Kernel::uniform(1.0);

GrowthModel reference_niche(double height = 1.0) {
    return GrowthModel::logistic_const_b(NicheProfile::niche(height, 2.0, 1.0, -1.0), 1.0);
}

}  // namespace

TEST_CASE("bracketed solve: ordered iterates meeting at the fixed point") {
    const Grid grid(15.0, 601);
    GrowthModel g = reference_niche();
    SteadyStateResult s = solve_bounded_viscous(grid, kU, g, 0.45, 0.0, 1e-10);
    REQUIRE(s.converged);
    REQUIRE(s.classification == SteadyClass::nontrivial);
    REQUIRE(s.lambda_p < 0.0);
    REQUIRE(s.max_bracket_violation <= 1e-13);
    REQUIRE(s.residual <= 1e-10);
    REQUIRE(s.subsolution_kappa > 0.0);
    REQUIRE(s.bracket_super == Catch::Approx(1.0));
    for (double v : s.u) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0 + 1e-12);  // below the saturation level
    }
    // strictly positive over the niche
    for (std::size_t i = 0; i < s.u.size(); ++i)
        if (std::fabs(s.x[i]) <= 1.0) REQUIRE(s.u[i] > 1e-3);
}

TEST_CASE("trivial branch beyond the critical speed") {
    const Grid grid(15.0, 601);
    GrowthModel g = reference_niche();
    SteadyStateResult s = solve_bounded_viscous(grid, kU, g, 1.4, 0.0, 1e-10);
    REQUIRE(s.lambda_p > 0.0);
    REQUIRE(s.classification == SteadyClass::trivial);
    REQUIRE(sup_norm(s.u) <= 1e-9);
}

TEST_CASE("borderline band is reported, never silently classified") {
    GrowthModel g = reference_niche();
    const Grid grid(12.0, 481);
    // bisect c to land inside the +/- 1e-4 band around the crossing
    double clo = 0.7, chi = 1.1;
    double lam = 1.0, c = 0.0;
    for (int it = 0; it < 60; ++it) {
        c = 0.5 * (clo + chi);
        lam = principal_eigenvalue(assemble_linearized(grid, kU, g, c, 0.0), 1e-10).lambda_p;
        if (std::fabs(lam) < 0.5 * kBorderlineBand) break;
        (lam < 0.0 ? clo : chi) = c;
    }
    REQUIRE(std::fabs(lam) < kBorderlineBand);
    SteadyStateResult s = solve_bounded_viscous(grid, kU, g, c, 0.0, 1e-9, 400000);
    REQUIRE(s.classification == SteadyClass::borderline);
}

TEST_CASE("two-seed uniqueness probe") {
    const Grid grid(15.0, 601);
    GrowthModel g = reference_niche();
    SteadyStateResult ref = solve_bounded_viscous(grid, kU, g, 0.45, 0.0, 1e-11);
    REQUIRE(ref.subsolution_kappa > 0.0);

    DiscreteOperator lin = assemble_linearized(grid, kU, g, 0.45, 0.0);
    EigenResult eig = principal_eigenvalue(lin, 1e-10);
    Vec seed_a(eig.eigenfunction), seed_b(eig.eigenfunction);
    for (std::size_t i = 0; i < seed_a.size(); ++i) {
        seed_a[i] *= ref.subsolution_kappa;
        seed_b[i] *= 0.25 * ref.subsolution_kappa;
    }
    SteadyStateResult a = steady_from_seed(grid, kU, g, 0.45, 0.0, seed_a, 1e-11);
    SteadyStateResult b = steady_from_seed(grid, kU, g, 0.45, 0.0, seed_b, 1e-11);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    REQUIRE(sup_diff(a.u, b.u) <= 1e-8);
    REQUIRE(sup_diff(a.u, ref.u) <= 1e-8);  // constant super-solution route
}

TEST_CASE("kpp comparison: larger potential, pointwise larger state") {
    const Grid grid(12.0, 481);
    GrowthModel g = reference_niche();
    SteadyStateResult base = solve_bounded_viscous(grid, kU, g, 0.3, 0.0, 1e-11);
    SteadyStateResult up =
        solve_bounded_viscous(grid, kU, g.with_potential_shift(0.1), 0.3, 0.0, 1e-11);
    for (std::size_t i = 0; i < base.u.size(); ++i)
        REQUIRE(up.u[i] >= base.u[i] - 1e-10);
}

TEST_CASE("vanishing viscosity: decreasing increments and the gradient bound") {
    const Grid grid(15.0, 601);
    GrowthModel g = reference_niche();
    const double c = 0.45;
    const Vec eps = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 0.0};
    SteadyStateResult s = vanishing_viscosity(grid, kU, g, c, eps, 1e-11);
    REQUIRE(s.trace.size() == eps.size());
    for (std::size_t k = 2; k < s.trace.size(); ++k)
        REQUIRE(s.trace[k].sup_increment < s.trace[k - 1].sup_increment);
    REQUIRE(s.residual <= 1e-10);
    const double M = g.sup_saturation();
    const double bound = (M + g.sup_abs_f(M)) / std::fabs(c) + 10.0 * grid.h;
    REQUIRE(s.grad_sup <= bound);

    REQUIRE_THROWS_AS(vanishing_viscosity(grid, kU, g, c, {1e-2, 1e-2}, 1e-10), Error);
    REQUIRE_THROWS_AS(vanishing_viscosity(grid, kU, g, 0.0, {1e-2, 0.0}, 1e-10), Error);
}

TEST_CASE("domain continuation: pointwise growth, stable mass, decayed tails") {
    GrowthModel g = reference_niche();
    SteadyStateResult s = domain_continuation(kU, g, 0.4, 0.0, {8.0, 12.0, 16.0, 20.0}, 1e-10,
                                              GridPolicy{0.05});
    REQUIRE(s.trace.size() >= 3);
    // l1 mass converges: successive changes decrease
    double prev_change = 1e300;
    for (std::size_t k = 1; k < s.trace.size(); ++k) {
        const double change = std::fabs(s.trace[k].l1_mass - s.trace[k - 1].l1_mass);
        REQUIRE(change <= prev_change + 1e-12);
        prev_change = change;
    }
    // tail decay at the final R: below 1e-6 one kernel radius from the edge
    for (std::size_t i = 0; i < s.u.size(); ++i)
        if (std::fabs(s.x[i]) >= s.domain_R - 1.0) REQUIRE(s.u[i] <= 1e-6);
}

TEST_CASE("fat-tail truncation route") {
    Kernel fat = Kernel::fat_quartic(1.0, 200.0);
    GrowthModel g = reference_niche(1.5);
    const Grid grid(20.0, 801);
    SteadyStateResult s = fat_tail_solve(fat, g, 0.25, {5.0, 10.0, 20.0}, grid, 1e-10);
    REQUIRE(s.converged);
    REQUIRE(s.level_lambda_p.size() == 3);
    for (double lam : s.level_lambda_p) REQUIRE(lam < 0.0);
    // increments shrink along N
    for (std::size_t k = 2; k < s.trace.size(); ++k)
        REQUIRE(s.trace[k].sup_increment <= s.trace[k - 1].sup_increment + 1e-12);

    GrowthModel weak = reference_niche(0.9);  // sup a <= 1: the lemma does not apply
    REQUIRE_THROWS_AS(fat_tail_solve(fat, weak, 0.25, {5.0, 10.0}, grid, 1e-10), Error);
}

TEST_CASE("dichotomy coherence with the eigenvalue sign") {
    const Grid grid(12.0, 481);
    GrowthModel g = reference_niche();
    for (double c : {0.2, 0.6, 1.2, 1.5}) {
        SteadyStateResult s = solve_bounded_viscous(grid, kU, g, c, 0.0, 1e-9, 500000);
        if (s.lambda_p < -kBorderlineBand)
            REQUIRE(s.classification == SteadyClass::nontrivial);
        else if (s.lambda_p > kBorderlineBand)
            REQUIRE(s.classification == SteadyClass::trivial);
    }
}

TEST_CASE("viscous solve keeps its bracket with eps > 0") {
    const Grid grid(12.0, 481);
    GrowthModel g = reference_niche();
    SteadyStateResult s = solve_bounded_viscous(grid, kU, g, 0.45, 0.05, 1e-10);
    REQUIRE(s.converged);
    REQUIRE(s.classification == SteadyClass::nontrivial);
    REQUIRE(s.max_bracket_violation <= 1e-13);
    REQUIRE(s.epsilon == 0.05);
}
