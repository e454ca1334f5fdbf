#ifndef RANGESHIFT_RUNNER_HPP
#define RANGESHIFT_RUNNER_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>

#include "rangeshift/common.hpp"
#include "rangeshift/config.hpp"
#include "rangeshift/critical_speed.hpp"
#include "rangeshift/csv.hpp"
#include "rangeshift/evolution.hpp"
#include "rangeshift/kernel.hpp"
#include "rangeshift/parallel.hpp"
#include "rangeshift/spectral.hpp"
#include "rangeshift/steady_state.hpp"
#include "rangeshift/version.hpp"

namespace rangeshift {

struct RunContext {
    std::string out_dir = ".";
    unsigned workers = 1;
    std::uint64_t seed = 0;
};

namespace runner_detail {

inline Kernel kernel_from_config(const Config& cfg) {
    const std::string preset = cfg.require_string("kernel.preset");
    Kernel k = [&]() {
        if (preset == "uniform") return Kernel::uniform(cfg.get_double("kernel.radius", 1.0));
        if (preset == "tent") return Kernel::tent(cfg.get_double("kernel.radius", 1.0));
        if (preset == "truncated_cosine")
            return Kernel::truncated_cosine(cfg.get_double("kernel.radius", 1.0));
        if (preset == "gaussian") {
            if (!cfg.has("kernel.sampling_radius"))
                throw Error("cli.run: kernel.sampling_radius is required for unbounded "
                            "profiles (gaussian)");
            return Kernel::gaussian(cfg.get_double("kernel.sigma", 1.0),
                                    cfg.require_double("kernel.sampling_radius"));
        }
        if (preset == "fat_quartic") {
            if (!cfg.has("kernel.sampling_radius"))
                throw Error("cli.run: kernel.sampling_radius is required for unbounded "
                            "profiles (fat_quartic)");
            return Kernel::fat_quartic(cfg.get_double("kernel.scale", 1.0),
                                       cfg.require_double("kernel.sampling_radius"));
        }
        if (preset == "tabulated") return Kernel::from_csv(cfg.require_string("kernel.csv"));
        throw Error("cli.run: unknown kernel.preset '" + preset + "'");
    }();
    if (cfg.has("kernel.truncate_N")) k = k.truncate(cfg.require_double("kernel.truncate_N"));
    if (cfg.get_string("kernel.reflect", "no") == "yes") k = k.reflect();
    return k;
}

inline GrowthModel growth_from_config(const Config& cfg) {
    const std::string preset = cfg.require_string("growth.preset");
    if (preset == "niche")
        return GrowthModel::logistic_const_b(
            NicheProfile::niche(cfg.get_double("growth.height", 1.0),
                                cfg.get_double("growth.radius", 2.0),
                                cfg.get_double("growth.width", 1.0),
                                cfg.get_double("growth.floor", -1.0)),
            cfg.get_double("growth.b", 1.0));
    if (preset == "constant")
        return GrowthModel::logistic_const_b(
            NicheProfile::constant(cfg.require_double("growth.a0")),
            cfg.get_double("growth.b", 1.0));
    if (preset == "plateau")
        return GrowthModel::plateau(cfg.get_double("growth.a", 1.0),
                                    cfg.get_double("growth.q", 1.0),
                                    cfg.get_double("growth.L", 2.0),
                                    cfg.get_double("growth.L0", 1.0));
    if (preset == "csv")
        return GrowthModel::logistic_const_b(
            NicheProfile::from_csv(cfg.require_string("growth.csv")),
            cfg.get_double("growth.b", 1.0));
    throw Error("cli.run: unknown growth.preset '" + preset + "'");
}

inline void check_increasing(const Vec& v, const std::string& field) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1]))
            throw Error("cli.run: schedule '" + field + "' must be strictly increasing");
}
inline void check_decreasing(const Vec& v, const std::string& field) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1]))
            throw Error("cli.run: schedule '" + field + "' must be strictly decreasing");
}

struct Manifest {
    std::string task;
    std::string status = "ok";
    double wall_seconds = 0.0;
    const Config* cfg = nullptr;
    const RunContext* ctx = nullptr;
    std::vector<std::pair<std::string, std::string>> extra;

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cli.run: cannot open " + path);
        out << "[run]\n";
        out << "task = " << task << "\n";
        out << "version = " << kVersion << "\n";
        out << "workers = " << ctx->workers << "\n";
        out << "seed = " << ctx->seed << "\n";
        out << "status = " << status << "\n";
        out << "wall_clock_seconds = " << fmt_g17(wall_seconds) << "\n";
        for (const auto& [k, v] : extra) out << k << " = " << v << "\n";
        out << "\n[config]\n";
        for (const auto& [k, v] : cfg->resolved()) out << k << " = " << v << "\n";
    }
};

inline std::string artifact(const RunContext& ctx, const std::string& name) {
    return (std::filesystem::path(ctx.out_dir) / name).string();
}

// ---- task: eig -------------------------------------------------------------

inline int run_eig(const Config& cfg, const RunContext& ctx, Manifest& man) {
    const Kernel kernel = kernel_from_config(cfg);
    const GrowthModel growth = growth_from_config(cfg);
    const double eps = cfg.get_double("numerics.eps", 0.0);
    GridPolicy policy{cfg.get_double("numerics.h", 0.05), ConvPath::automatic};
    const double eig_tol = cfg.get_double("numerics.eig_tol", 1e-10);
    const long long max_iter = cfg.get_int("numerics.max_iter", 1000000);
    Vec R_schedule = cfg.get_schedule("numerics.R_schedule");
    if (!R_schedule.empty()) check_increasing(R_schedule, "numerics.R_schedule");
    const double R_tol = cfg.get_double("numerics.R_tol", 1e-4);
    const double single_R = cfg.get_double("numerics.R", 20.0);

    // one frame speed, or a sweep solved concurrently across workers
    Vec cs = cfg.get_schedule("eig.c_list");
    if (cs.empty()) cs.push_back(cfg.get_double("eig.c", 0.0));

    std::vector<EigenResult> results(cs.size());
    std::vector<bool> in_R(cs.size(), true);
    parallel_for(cs.size(), ctx.workers, [&](std::size_t i) {
        if (!R_schedule.empty()) {
            LambdaLimitResult lim = lambda_p_limit(kernel, growth, cs[i], eps, R_schedule,
                                                   R_tol, policy, eig_tol, max_iter);
            results[i] = std::move(lim.result);
            in_R[i] = lim.converged_in_R;
        } else {
            const Grid grid = Grid::with_spacing(single_R, policy.h);
            DiscreteOperator op = assemble_linearized(grid, kernel, growth, cs[i], eps);
            results[i] = principal_eigenvalue(op, eig_tol, max_iter);
        }
    });

    CsvWriter w(artifact(ctx, "lambda_curve.csv"),
                {"c", "lambda_p", "residual", "R", "n", "iterations"});
    bool all_ok = true;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const EigenResult& r = results[i];
        w.row({cs[i], r.lambda_p, r.residual, r.domain_R,
               static_cast<double>(r.eigenfunction.size()),
               static_cast<double>(r.iterations)});
        all_ok = all_ok && r.converged;
        if (!in_R[i])
            man.extra.push_back({"R_limit_at_c_" + fmt_g17(cs[i]), "unconverged-in-R"});
    }
    man.extra.push_back({"lambda_p", fmt_g17(results.back().lambda_p)});
    if (!all_ok) {
        man.status = "non-converged";
        return 3;
    }
    return 0;
}

// ---- task: steady ----------------------------------------------------------

inline int run_steady(const Config& cfg, const RunContext& ctx, Manifest& man) {
    const Kernel kernel = kernel_from_config(cfg);
    const GrowthModel growth = growth_from_config(cfg);
    const double c = cfg.get_double("steady.c", 0.0);
    const double tol = cfg.get_double("numerics.tol", 1e-10);
    const long long max_iter = cfg.get_int("numerics.max_iter", 2000000);
    GridPolicy policy{cfg.get_double("numerics.h", 0.05), ConvPath::automatic};
    const std::string mode = cfg.get_string("steady.mode", "bounded");

    SteadyStateResult result;
    if (mode == "bounded") {
        const Grid grid = Grid::with_spacing(cfg.get_double("numerics.R", 20.0), policy.h);
        result = solve_bounded_viscous(grid, kernel, growth, c,
                                       cfg.get_double("numerics.eps", 0.0), tol, max_iter);
    } else if (mode == "viscosity") {
        Vec eps_schedule = cfg.get_schedule("numerics.eps_schedule");
        if (eps_schedule.empty())
            throw Error("cli.run: steady.mode=viscosity requires numerics.eps_schedule");
        check_decreasing(eps_schedule, "numerics.eps_schedule");
        const Grid grid = Grid::with_spacing(cfg.get_double("numerics.R", 20.0), policy.h);
        result = vanishing_viscosity(grid, kernel, growth, c, eps_schedule, tol, max_iter);
    } else if (mode == "domain") {
        Vec R_schedule = cfg.get_schedule("numerics.R_schedule");
        if (R_schedule.empty())
            throw Error("cli.run: steady.mode=domain requires numerics.R_schedule");
        check_increasing(R_schedule, "numerics.R_schedule");
        result = domain_continuation(kernel, growth, c, cfg.get_double("numerics.eps", 0.0),
                                     R_schedule, tol, policy, max_iter);
    } else if (mode == "fat_tail") {
        Vec N_schedule = cfg.get_schedule("steady.N_schedule");
        if (N_schedule.empty())
            throw Error("cli.run: steady.mode=fat_tail requires steady.N_schedule");
        check_increasing(N_schedule, "steady.N_schedule");
        const Grid grid = Grid::with_spacing(cfg.get_double("numerics.R", 20.0), policy.h);
        result = fat_tail_solve(kernel, growth, c, N_schedule, grid, tol, max_iter);
    } else {
        throw Error("cli.run: unknown steady.mode '" + mode + "'");
    }

    {
        CsvWriter w(artifact(ctx, "steady_state.csv"), {"x", "u"});
        for (std::size_t i = 0; i < result.u.size(); ++i) w.row({result.x[i], result.u[i]});
    }
    {
        CsvWriter w(artifact(ctx, "trace.csv"),
                    {"level", "param", "sup_increment", "residual", "l1_mass"});
        for (const auto& r : result.trace)
            w.row({r.level, r.param, r.sup_increment, r.residual, r.l1_mass});
    }
    const char* cls = result.classification == SteadyClass::nontrivial  ? "nontrivial"
                      : result.classification == SteadyClass::trivial   ? "trivial"
                                                                        : "borderline";
    man.extra.push_back({"classification", cls});
    man.extra.push_back({"lambda_p", fmt_g17(result.lambda_p)});
    man.extra.push_back({"residual", fmt_g17(result.residual)});
    man.extra.push_back({"l1_mass", fmt_g17(result.l1_mass)});
    man.extra.push_back({"grad_sup", fmt_g17(result.grad_sup)});
    if (!result.converged && result.classification != SteadyClass::trivial) {
        man.status = "non-converged";
        return 3;
    }
    return 0;
}

// ---- task: evolve ----------------------------------------------------------

inline int run_evolve(const Config& cfg, const RunContext& ctx, Manifest& man) {
    const Kernel kernel = kernel_from_config(cfg);
    const GrowthModel growth = growth_from_config(cfg);
    const double c = cfg.get_double("evolve.c", 0.0);
    const double T = cfg.require_double("evolve.T");
    const std::string frame_s = cfg.get_string("evolve.frame", "moving");
    if (frame_s != "moving" && frame_s != "fixed")
        throw Error("cli.run: evolve.frame must be 'moving' or 'fixed'");
    const Frame frame = frame_s == "moving" ? Frame::moving : Frame::fixed;
    const Grid grid = Grid::with_spacing(cfg.get_double("numerics.R", 20.0),
                                         cfg.get_double("numerics.h", 0.05));

    EvolveOptions opts;
    const std::string dt_s = cfg.get_string("evolve.dt", "auto");
    if (dt_s != "auto") opts.dt = cfg.require_double("evolve.dt");
    opts.snapshot_times = cfg.get_schedule("evolve.snapshot_times");
    opts.output_stride = cfg.get_double("evolve.output_stride", 0.0);

    const std::string init = cfg.get_string("evolve.initial", "bump");
    const double level = cfg.get_double("evolve.initial_height", 0.5);
    Vec u0(static_cast<std::size_t>(grid.n), 0.0);
    if (init == "bump") {
        for (int i = 0; i < grid.n; ++i)
            if (growth.a(grid.x(i)) > 0.0) u0[static_cast<std::size_t>(i)] = level;
    } else if (init == "constant") {
        u0.assign(u0.size(), level);
    } else {
        throw Error("cli.run: unknown evolve.initial '" + init + "'");
    }

    EvolutionTrace tr = integrate(u0, frame, kernel, growth, c, grid, T, opts);
    {
        CsvWriter w(artifact(ctx, "trace.csv"), {"t", "sup_norm", "l1_mass", "niche_min"});
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            w.row({tr.times[i], tr.sup_norms[i], tr.l1_masses[i], tr.niche_minima[i]});
    }
    {
        CsvWriter w(artifact(ctx, "final_state.csv"), {"x", "u"});
        for (std::size_t i = 0; i < tr.final_state.size(); ++i)
            w.row({tr.x[i], tr.final_state[i]});
    }
    for (const auto& [t, snap] : tr.snapshots) {
        CsvWriter w(artifact(ctx, "snapshot_" + fmt_g17(t) + ".csv"), {"x", "u"});
        for (std::size_t i = 0; i < snap.size(); ++i) w.row({tr.x[i], snap[i]});
    }
    const LongTimeClass cls = long_time_classify(tr);
    man.extra.push_back({"classification", cls == LongTimeClass::extinct      ? "extinct"
                                           : cls == LongTimeClass::persistent ? "persistent"
                                                                              : "undecided"});
    man.extra.push_back({"dt", fmt_g17(tr.dt)});
    man.extra.push_back({"final_sup_norm", fmt_g17(tr.sup_norms.back())});
    return 0;
}

// ---- task: speeds ----------------------------------------------------------

inline void write_speed_report(const CriticalSpeedReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cli.run: cannot open " + path);
    auto bracket = [&](const char* name, const Bracket& b) {
        out << name << ".lo = " << fmt_g17(b.lo) << "\n";
        out << name << ".hi = " << fmt_g17(b.hi) << "\n";
        out << name << ".open_ended = " << (b.open_ended ? "yes" : "no") << "\n";
    };
    out << "[thresholds]\n";
    bracket("c_star_plus", rep.c_star_plus);
    bracket("c_star_minus", rep.c_star_minus);
    bracket("c_dstar_plus", rep.c_dstar_plus);
    bracket("c_dstar_minus", rep.c_dstar_minus);
    out << "monotone_sign_structure = " << (rep.monotone_sign_structure ? "yes" : "no") << "\n";
    out << "lambda_at_rest = " << fmt_g17(rep.lambda_at_rest) << "\n";
    out << "bracket_tol = " << fmt_g17(rep.bracket_tol) << "\n";
    out << "\n[bounds]\n";
    out << "thin_tailed = " << (rep.bounds.thin_tailed ? "yes" : "no") << "\n";
    if (rep.bounds.thin_tailed) {
        out << "c_alpha_plus = " << fmt_g17(rep.bounds.c_alpha_plus) << "\n";
        out << "c_alpha_minus = " << fmt_g17(rep.bounds.c_alpha_minus) << "\n";
        out << "alpha_star_plus = " << fmt_g17(rep.bounds.alpha_star_plus) << "\n";
        out << "alpha_star_minus = " << fmt_g17(rep.bounds.alpha_star_minus) << "\n";
        out << "c0_plus = " << fmt_g17(rep.bounds.c0_plus) << "\n";
        out << "c0_minus = " << fmt_g17(rep.bounds.c0_minus) << "\n";
    }
    if (rep.bounds.has_symmetric_values) {
        out << "symmetric_remark_value = " << fmt_g17(rep.bounds.symmetric_remark_value) << "\n";
        out << "corrected_symmetric_value = " << fmt_g17(rep.bounds.corrected_symmetric_value)
            << "\n";
    }
    if (rep.bounds.has_c_hash) out << "c_hash = " << fmt_g17(rep.bounds.c_hash) << "\n";
    out << "\n[verification]\n";
    out << "lambda_at_c_star_plus_lo = " << fmt_g17(rep.verify_star_plus_lo) << "\n";
    out << "lambda_at_c_star_plus_hi = " << fmt_g17(rep.verify_star_plus_hi) << "\n";
    out << "lambda_at_c_star_minus_lo = " << fmt_g17(rep.verify_star_minus_lo) << "\n";
    out << "lambda_at_c_star_minus_hi = " << fmt_g17(rep.verify_star_minus_hi) << "\n";
    out << "lambda_at_c_dstar_plus_lo = " << fmt_g17(rep.verify_dstar_plus_lo) << "\n";
    out << "lambda_at_c_dstar_plus_hi = " << fmt_g17(rep.verify_dstar_plus_hi) << "\n";
    out << "lambda_at_c_dstar_minus_lo = " << fmt_g17(rep.verify_dstar_minus_lo) << "\n";
    out << "lambda_at_c_dstar_minus_hi = " << fmt_g17(rep.verify_dstar_minus_hi) << "\n";
}

inline int run_speeds(const Config& cfg, const RunContext& ctx, Manifest& man) {
    const Kernel kernel = kernel_from_config(cfg);
    const GrowthModel growth = growth_from_config(cfg);
    FindSpeedsOptions opts;
    opts.policy.h = cfg.get_double("numerics.h", 0.05);
    opts.R_schedule = cfg.get_schedule("numerics.R_schedule");
    if (!opts.R_schedule.empty()) check_increasing(opts.R_schedule, "numerics.R_schedule");
    opts.R_tol = cfg.get_double("numerics.R_tol", 1e-4);
    opts.eig_tol = cfg.get_double("numerics.eig_tol", 1e-8);
    opts.bracket_tol = cfg.get_double("speeds.bracket_tol", 1e-3);
    opts.scan_points = static_cast<int>(cfg.get_int("speeds.points", 41));
    opts.c_min = cfg.get_double("speeds.c_min", 0.0);
    opts.c_max = cfg.get_double("speeds.c_max", 0.0);
    opts.max_iter = cfg.get_int("numerics.max_iter", 1000000);
    opts.fat_tail_delta = cfg.get_double("bounds.delta", 0.0);
    opts.workers = ctx.workers;

    CriticalSpeedReport rep = find_speeds(kernel, growth, opts);
    write_speed_report(rep, artifact(ctx, "report.txt"));
    CsvWriter w(artifact(ctx, "lambda_curve.csv"), {"c", "lambda_p"});
    for (const auto& p : rep.lambda_curve) w.row({p.c, p.lambda_p});
    man.extra.push_back({"c_star_plus_hi", fmt_g17(rep.c_star_plus.hi)});
    man.extra.push_back({"c_dstar_plus_hi", fmt_g17(rep.c_dstar_plus.hi)});
    if (rep.c_star_plus.open_ended || rep.c_star_minus.open_ended) {
        man.status = "open-ended-bracket";
        return 3;
    }
    return 0;
}

// ---- task: bounds ----------------------------------------------------------

inline int run_bounds(const Config& cfg, const RunContext& ctx, Manifest& man) {
    const Kernel kernel = kernel_from_config(cfg);
    const GrowthModel growth = growth_from_config(cfg);
    std::ofstream out(artifact(ctx, "report.txt"));
    if (!out) throw Error("cli.run: cannot open report.txt");
    const double alpha_lo = cfg.get_double("bounds.alpha_lo", 1e-4);
    const double alpha_hi = cfg.get_double("bounds.alpha_hi", 64.0);

    out << "[spectral_speed_bound]\n";
    bool thin = true;
    try {
        SpeedBoundResult bp = spectral_speed_bound(kernel, growth, Orientation::plus, alpha_lo,
                                                   alpha_hi);
        SpeedBoundResult bm = spectral_speed_bound(kernel, growth, Orientation::minus, alpha_lo,
                                                   alpha_hi);
        out << "c_alpha_plus = " << fmt_g17(bp.value) << "\n";
        out << "alpha_star_plus = " << fmt_g17(bp.argmin) << "\n";
        out << "boundary_plus = " << (bp.boundary ? "yes" : "no") << "\n";
        out << "c_alpha_minus = " << fmt_g17(bm.value) << "\n";
        out << "alpha_star_minus = " << fmt_g17(bm.argmin) << "\n";
        out << "boundary_minus = " << (bm.boundary ? "yes" : "no") << "\n";
    } catch (const Error&) {
        thin = false;
        out << "transform = divergent\n";
    }
    out << "\n[symmetric_remark]\n";
    if (growth.sup_a() > 0.0) {
        auto [remark_v, corrected_v] = symmetric_remark_values(kernel, growth);
        out << "remark_value = " << fmt_g17(remark_v) << "\n";
        out << "corrected_value = " << fmt_g17(corrected_v) << "\n";
    } else {
        out << "remark_value = undefined (sup a <= 0)\n";
    }
    out << "\n[fat_tail_bound]\n";
    try {
        const double margin = -growth.tail_sup_a();
        const double delta = cfg.get_double("bounds.delta", 0.5 * margin);
        const Grid bg = Grid::with_spacing(cfg.get_double("numerics.R", 30.0),
                                           cfg.get_double("numerics.h", 0.05));
        FatTailSpeedBound fb = fat_tail_speed_bound(kernel, growth, delta, bg);
        out << "delta = " << fmt_g17(fb.delta) << "\n";
        out << "R0 = " << fmt_g17(fb.R0) << "\n";
        out << "kappa = " << fmt_g17(fb.kappa) << "\n";
        out << "tau0 = " << fmt_g17(fb.tau0) << "\n";
        out << "c0 = " << fmt_g17(fb.c0) << "\n";
        out << "c1 = " << fmt_g17(fb.c1) << "\n";
        out << "c2 = " << fmt_g17(fb.c2) << "\n";
        out << "c_hash = " << fmt_g17(fb.c_hash) << "\n";
        out << "barrier_residual = " << fmt_g17(fb.barrier_residual) << "\n";
    } catch (const Error& e) {
        out << "unavailable = " << e.what() << "\n";
    }
    man.extra.push_back({"thin_tailed", thin ? "yes" : "no"});
    return 0;
}

}  // namespace runner_detail

/// Executes one configured task, writing artifacts plus a manifest echoing
/// the resolved configuration. Returns the process exit status: 0 success,
/// 3 numerical non-convergence (artifacts still written).
/// Validation problems throw Error (the CLI maps those to exit 2).
inline int run_task(const Config& cfg, const RunContext& ctx) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(ctx.out_dir);
    const std::string task = cfg.require_string("task");
    runner_detail::Manifest man;
    man.task = task;
    man.cfg = &cfg;
    man.ctx = &ctx;
    int status = 0;
    if (task == "eig")
        status = runner_detail::run_eig(cfg, ctx, man);
    else if (task == "steady")
        status = runner_detail::run_steady(cfg, ctx, man);
    else if (task == "evolve")
        status = runner_detail::run_evolve(cfg, ctx, man);
    else if (task == "speeds")
        status = runner_detail::run_speeds(cfg, ctx, man);
    else if (task == "bounds")
        status = runner_detail::run_bounds(cfg, ctx, man);
    else
        throw Error("cli.run: unknown task '" + task + "'");
    cfg.reject_unused();
    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    man.write(runner_detail::artifact(ctx, "manifest.txt"));
    return status;
}

}  // namespace rangeshift

#endif
