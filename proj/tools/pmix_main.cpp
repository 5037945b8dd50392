#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "pmix/config.hpp"
#include "pmix/io.hpp"
#include "pmix/runner.hpp"

namespace {

struct CliOverrides {
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool deterministic = false;
    int threads = 0;
};

int run(const std::string& config_path, pmix::Task task, const CliOverrides& ov) {
    try {
        pmix::ExperimentConfig cfg = pmix::parse_config(pmix::io::read_file(config_path));
        cfg.task = task;
        if (task == pmix::Task::Extremal && !(cfg.delta > 0.0 && cfg.delta < 1.0)) {
            std::fprintf(stderr,
                         "error: extremal analysis requires 0 < delta < 1; the extremal constant and the "
                         "associated inequality are defined only in that range\n");
            return 2;
        }
        if (!ov.out.empty()) cfg.output_dir = ov.out;
        if (ov.seed_set) cfg.seed = ov.seed;
        if (ov.deterministic) {
            cfg.deterministic = true;
            cfg.threads = 1;
        }
        if (ov.threads > 0 && !cfg.deterministic) cfg.threads = ov.threads;
        return pmix::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational laboratory for the singular mixed local/nonlocal p-Laplace problem"};
    app.require_subcommand(1);

    CliOverrides ov;
    app.add_option("--out", ov.out, "output directory override");
    auto* seed_opt = app.add_option("--seed", ov.seed, "random seed override");
    app.add_flag("--deterministic", ov.deterministic, "bit-reproducible mode (forces a single thread)");
    app.add_option("--threads", ov.threads, "worker threads for sweeps");

    std::string config_path;
    pmix::Task task = pmix::Task::Solve;
    auto add_task = [&](const char* name, const char* help, pmix::Task t) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config_path, "experiment config (json)")->required();
        sub->callback([&task, t] { task = t; });
        return sub;
    };
    add_task("solve", "run the continuation solve and emit solution + trace files", pmix::Task::Solve);
    add_task("extremal", "solve, then compute the extremal constant, margins and simplicity records",
             pmix::Task::Extremal);
    add_task("verify", "run the full property-check table", pmix::Task::Verify);
    add_task("sweep", "run one solve per sweep grid point and emit a summary table", pmix::Task::Sweep);

    CLI11_PARSE(app, argc, argv);
    ov.seed_set = seed_opt->count() > 0;
    return run(config_path, task, ov);
}
