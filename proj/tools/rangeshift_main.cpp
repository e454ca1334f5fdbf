// Command-line experiment runner: eigenvalue studies, steady states,
// time integration, critical-speed reports, closed-form bounds, and a
// quick property-suite diagnostic. See README.md for config keys.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "rangeshift/config.hpp"
#include "rangeshift/runner.hpp"
#include "rangeshift/verify.hpp"

namespace {

int dispatch(const std::string& task, const std::string& config_path, const std::string& out_dir,
             unsigned workers, std::uint64_t seed) {
    using namespace rangeshift;
    if (task == "verify") return print_property_suite(seed);
    try {
        std::ifstream in(config_path);
        if (!in) throw Error("cli.run: cannot open config " + config_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        Config cfg = Config::from_string(text);
        if (cfg.has("task")) {
            const std::string declared = cfg.require_string("task");
            if (declared != task)
                throw Error("cli.run: config declares task '" + declared +
                            "' but the subcommand is '" + task + "'");
        } else {
            cfg = Config::from_string("task = " + task + "\n" + text);
        }
        RunContext ctx{out_dir, workers, seed};
        return run_task(cfg, ctx);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        const std::string what = e.what();
        return what.find("non-converg") != std::string::npos ? 3 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal-dispersal persistence toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    unsigned workers = 1;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "path to the experiment config");
    app.add_option("--out", out_dir, "output directory for artifacts");
    app.add_option("--workers", workers, "worker threads for independent sub-solves");
    app.add_option("--seed", seed, "seed for perturbation-based property runs");

    const char* tasks[] = {"eig", "steady", "evolve", "speeds", "bounds", "verify"};
    const char* help[] = {"principal eigenvalue of the linearized operator",
                          "positive steady state (bounded / viscosity / domain / fat-tail)",
                          "time integration and long-time classification",
                          "critical-speed report from the sign structure of lambda_p(c)",
                          "closed-form speed bounds",
                          "run the property suite"};
    for (int i = 0; i < 6; ++i) app.add_subcommand(tasks[i], help[i])->fallthrough();

    CLI11_PARSE(app, argc, argv);
    const std::string task = app.get_subcommands().front()->get_name();
    if (task != "verify" && config_path.empty()) {
        std::fprintf(stderr, "error: cli.run: --config is required for task '%s'\n",
                     task.c_str());
        return 2;
    }
    return dispatch(task, config_path, out_dir, workers, seed);
}
