#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rangeshift/runner.hpp"

using namespace rangeshift;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("rangeshift_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const std::string kEigConfig =
    "task = eig\n"
    "kernel.preset = uniform\n"
    "kernel.radius = 1.0\n"
    "growth.preset = constant\n"
    "growth.a0 = 0.5\n"
    "numerics.R = 10\n"
    "numerics.h = 0.1\n"
    "numerics.eig_tol = 1e-9\n"
    "eig.c = 0\n";

// strip the wall-clock line before comparing manifests
std::string without_timing(const std::string& text) {
    std::stringstream in(text), out;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("wall_clock_seconds", 0) != 0) out << line << '\n';
    return out.str();
}

}  // namespace

TEST_CASE("config parsing and validation") {
    REQUIRE_THROWS_AS(Config::from_string("novalue\n"), Error);
    REQUIRE_THROWS_AS(Config::from_string("a = 1\na = 2\n"), Error);
    Config c = Config::from_string("x.y = 3.5 # comment\n; full comment\nz = hi\n");
    REQUIRE(c.get_double("x.y", 0.0) == 3.5);
    REQUIRE(c.get_string("z", "") == "hi");
    REQUIRE_THROWS_AS(c.require_string("missing"), Error);
    Config bad = Config::from_string("n = twelve\n");
    REQUIRE_THROWS_AS(bad.get_double("n", 0.0), Error);
}

TEST_CASE("unknown keys are named") {
    TempDir tmp("unknown_key");
    Config cfg = Config::from_string(kEigConfig + "kernel.radis = 2\n");
    RunContext ctx{tmp.path.string(), 1, 0};
    try {
        run_task(cfg, ctx);
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("kernel.radis") != std::string::npos);
    }
}

TEST_CASE("smallest task: eig writes a manifest and one curve row") {
    TempDir tmp("eig");
    Config cfg = Config::from_string(kEigConfig);
    RunContext ctx{tmp.path.string(), 1, 0};
    REQUIRE(run_task(cfg, ctx) == 0);
    REQUIRE(fs::exists(tmp.path / "manifest.txt"));
    const std::string csv = slurp(tmp.path / "lambda_curve.csv");
    std::stringstream ss(csv);
    std::string header, row, extra;
    REQUIRE(std::getline(ss, header));
    REQUIRE(header == "c,lambda_p,residual,R,n,iterations");
    REQUIRE(std::getline(ss, row));
    REQUIRE_FALSE(std::getline(ss, extra));  // exactly one data row
    // every resolved default appears in the manifest
    const std::string man = slurp(tmp.path / "manifest.txt");
    REQUIRE(man.find("numerics.eps = 0") != std::string::npos);
    REQUIRE(man.find("status = ok") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
    TempDir a("det_a"), b("det_b");
    Config cfg1 = Config::from_string(kEigConfig);
    Config cfg2 = Config::from_string(kEigConfig);
    REQUIRE(run_task(cfg1, RunContext{a.path.string(), 1, 7}) == 0);
    REQUIRE(run_task(cfg2, RunContext{b.path.string(), 1, 7}) == 0);
    REQUIRE(slurp(a.path / "lambda_curve.csv") == slurp(b.path / "lambda_curve.csv"));
    REQUIRE(without_timing(slurp(a.path / "manifest.txt")) ==
            without_timing(slurp(b.path / "manifest.txt")));
}

TEST_CASE("malformed schedule names the field") {
    TempDir tmp("sched");
    Config cfg = Config::from_string(
        "task = eig\nkernel.preset = uniform\ngrowth.preset = constant\ngrowth.a0 = 0.5\n"
        "numerics.R_schedule = 10,8\nnumerics.h = 0.1\n");
    try {
        run_task(cfg, RunContext{tmp.path.string(), 1, 0});
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("numerics.R_schedule") != std::string::npos);
    }
}

TEST_CASE("steady task artifacts") {
    TempDir tmp("steady");
    Config cfg = Config::from_string(
        "task = steady\nkernel.preset = uniform\ngrowth.preset = niche\n"
        "numerics.R = 12\nnumerics.h = 0.05\nnumerics.tol = 1e-9\nsteady.c = 0.4\n");
    REQUIRE(run_task(cfg, RunContext{tmp.path.string(), 1, 0}) == 0);
    REQUIRE(slurp(tmp.path / "steady_state.csv").rfind("x,u\n", 0) == 0);
    REQUIRE(slurp(tmp.path / "trace.csv").rfind("level,param,sup_increment,residual,l1_mass\n",
                                                0) == 0);
    REQUIRE(slurp(tmp.path / "manifest.txt").find("classification = nontrivial") !=
            std::string::npos);
}

TEST_CASE("evolve task artifacts") {
    TempDir tmp("evolve");
    Config cfg = Config::from_string(
        "task = evolve\nkernel.preset = uniform\ngrowth.preset = niche\n"
        "numerics.R = 12\nnumerics.h = 0.05\nevolve.c = 0.3\nevolve.T = 20\n"
        "evolve.snapshot_times = 10\n");
    REQUIRE(run_task(cfg, RunContext{tmp.path.string(), 1, 0}) == 0);
    REQUIRE(slurp(tmp.path / "trace.csv").rfind("t,sup_norm,l1_mass,niche_min\n", 0) == 0);
    REQUIRE(fs::exists(tmp.path / "final_state.csv"));
    REQUIRE(fs::exists(tmp.path / "snapshot_10.csv"));
}

TEST_CASE("speeds task is deterministic across worker counts") {
    const std::string speeds_cfg =
        "task = speeds\nkernel.preset = uniform\ngrowth.preset = niche\n"
        "numerics.h = 0.1\nnumerics.R_schedule = 6,9\nnumerics.eig_tol = 1e-8\n"
        "speeds.points = 11\nspeeds.bracket_tol = 0.02\n";
    TempDir a("speeds_w1"), b("speeds_w4");
    Config cfg1 = Config::from_string(speeds_cfg);
    Config cfg2 = Config::from_string(speeds_cfg);
    REQUIRE(run_task(cfg1, RunContext{a.path.string(), 1, 0}) == 0);
    REQUIRE(run_task(cfg2, RunContext{b.path.string(), 4, 0}) == 0);
    REQUIRE(slurp(a.path / "lambda_curve.csv") == slurp(b.path / "lambda_curve.csv"));
    REQUIRE(slurp(a.path / "report.txt") == slurp(b.path / "report.txt"));
    REQUIRE(slurp(a.path / "lambda_curve.csv").rfind("c,lambda_p\n", 0) == 0);
}

TEST_CASE("eig sweep over a c list is worker-count independent") {
    const std::string sweep_cfg =
        "task = eig\nkernel.preset = uniform\ngrowth.preset = niche\n"
        "numerics.R = 8\nnumerics.h = 0.1\nnumerics.eig_tol = 1e-9\n"
        "eig.c_list = 0,0.2,0.4,0.6\n";
    TempDir a("sweep_w1"), b("sweep_w4");
    Config c1 = Config::from_string(sweep_cfg);
    Config c2 = Config::from_string(sweep_cfg);
    REQUIRE(run_task(c1, RunContext{a.path.string(), 1, 0}) == 0);
    REQUIRE(run_task(c2, RunContext{b.path.string(), 4, 0}) == 0);
    const std::string csv = slurp(a.path / "lambda_curve.csv");
    REQUIRE(csv == slurp(b.path / "lambda_curve.csv"));
    REQUIRE(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 rows
}

TEST_CASE("domain-continuation mode with a plateau growth law") {
    TempDir tmp("domain");
    Config cfg = Config::from_string(
        "task = steady\nkernel.preset = tent\nkernel.radius = 1.2\n"
        "growth.preset = plateau\ngrowth.a = 1.0\ngrowth.q = 1.0\ngrowth.L = 2\ngrowth.L0 = 1\n"
        "numerics.h = 0.05\nnumerics.R_schedule = 8,12,16\nsteady.c = 0.3\n"
        "steady.mode = domain\n");
    REQUIRE(run_task(cfg, RunContext{tmp.path.string(), 1, 0}) == 0);
    const std::string trace = slurp(tmp.path / "trace.csv");
    REQUIRE(std::count(trace.begin(), trace.end(), '\n') >= 3);  // header + levels
}

TEST_CASE("gaussian and truncated kernels parse from config") {
    TempDir tmp("gauss");
    Config cfg = Config::from_string(
        "task = eig\nkernel.preset = gaussian\nkernel.sigma = 0.8\n"
        "kernel.sampling_radius = 8\nkernel.truncate_N = 6\n"
        "growth.preset = niche\nnumerics.R = 10\nnumerics.h = 0.05\neig.c = 0.2\n");
    REQUIRE(run_task(cfg, RunContext{tmp.path.string(), 1, 0}) == 0);
    // missing sampling radius is a named validation error
    Config bad = Config::from_string(
        "task = eig\nkernel.preset = gaussian\nkernel.sigma = 0.8\n"
        "growth.preset = niche\nnumerics.R = 10\n");
    try {
        TempDir t2("gauss_bad");
        run_task(bad, RunContext{t2.path.string(), 1, 0});
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("sampling_radius") != std::string::npos);
    }
}

TEST_CASE("bounds task artifacts") {
    TempDir tmp("bounds");
    Config cfg = Config::from_string(
        "task = bounds\nkernel.preset = uniform\ngrowth.preset = niche\n");
    REQUIRE(run_task(cfg, RunContext{tmp.path.string(), 1, 0}) == 0);
    const std::string rep = slurp(tmp.path / "report.txt");
    REQUIRE(rep.find("c_alpha_plus = ") != std::string::npos);
    REQUIRE(rep.find("corrected_value = ") != std::string::npos);
}

TEST_CASE("the installed binary maps errors to exit codes") {
    const std::string exe = RANGESHIFT_CLI_PATH;
    TempDir tmp("binary");
    const fs::path cfg = tmp.path / "eig.cfg";
    {
        std::ofstream out(cfg);
        out << kEigConfig;
    }
    auto run = [&](const std::string& args) {
        const std::string cmd = exe + " " + args + " > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };
    REQUIRE(run("eig --config " + cfg.string() + " --out " + (tmp.path / "out").string()) == 0);
    REQUIRE(run("eig --config /nonexistent.cfg") == 2);
    REQUIRE(run("verify --seed 3") == 0);
    // config task must match the subcommand
    REQUIRE(run("steady --config " + cfg.string()) == 2);
}
