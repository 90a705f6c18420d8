// rcinar: experiment runner for the thinning-autoregression laboratory.
//
//   rcinar <experiment> --config <file> [--seed N] [--reps N] [--out DIR]
//   rcinar verify [--seed N] [--out DIR] [--workers N]
//   rcinar replay --manifest <file> [--out DIR]
//
// Exit codes: 0 pass, 1 execution error, 2 statistical check failed.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rcinar/acceptance.hpp"
#include "rcinar/config.hpp"
#include "rcinar/runner.hpp"
#include "rcinar/version.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::string seed;
    std::string reps;
    std::string n;
    std::string workers;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "configuration file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
    cmd->add_option("--reps", opts.reps, "replica count (overrides config)");
    cmd->add_option("--n", opts.n, "horizon/steps (overrides config)");
    cmd->add_option("--workers", opts.workers, "worker threads (0 = auto)");
}

rcinar::ExperimentConfig load_config(const std::string& experiment, const CommonOptions& opts) {
    std::string text;
    if (!opts.config_path.empty()) text = rcinar::read_text_file(opts.config_path);
    rcinar::ExperimentConfig probe = rcinar::parse_config(text, experiment);
    // CLI overrides are folded into the raw map so manifests stay faithful.
    auto& raw = probe.raw;
    if (!opts.out_dir.empty()) raw["out_dir"] = opts.out_dir;
    if (!opts.seed.empty()) raw["seed"] = opts.seed;
    if (!opts.reps.empty()) raw["reps"] = opts.reps;
    if (!opts.n.empty()) raw["n"] = opts.n;
    if (!opts.workers.empty()) raw["workers"] = opts.workers;
    return rcinar::parse_config(probe.canonical_text());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rcinar: simulation and verification laboratory for "
                 "random-coefficient thinning autoregressions"};
    app.set_version_flag("--version", rcinar::kVersion);
    app.require_subcommand(1);

    std::map<std::string, CommonOptions> opts;
    for (const std::string& name : rcinar::known_experiments()) {
        auto* cmd = app.add_subcommand(name, name == "verify"
                                                 ? "run the full acceptance suite"
                                                 : "run the " + name + " experiment");
        add_common(cmd, opts[name], name != "verify");
    }
    std::string manifest_path, replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "re-run an experiment from its manifest");
    replay_cmd->add_option("--manifest", manifest_path, "manifest file")->required();
    replay_cmd->add_option("--out", replay_out, "output directory override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (replay_cmd->parsed()) {
            const auto artifacts = rcinar::replay(manifest_path, replay_out);
            std::cout << artifacts.summary.dump(2) << "\n";
            return artifacts.exit_code;
        }
        const std::string experiment = app.get_subcommands().front()->get_name();
        if (experiment == "verify") {
            const CommonOptions& o = opts["verify"];
            const std::uint64_t seed = o.seed.empty() ? 1 : std::stoull(o.seed);
            const unsigned workers =
                o.workers.empty() ? 0 : static_cast<unsigned>(std::stoul(o.workers));
            const std::string out_dir = o.out_dir.empty() ? "out" : o.out_dir;
            bool all_pass = true;
            const auto results = rcinar::run_acceptance(
                seed, workers, out_dir, [&](const rcinar::CriterionResult& r) {
                    std::printf("[%s] %2d. %s — %s\n", r.pass ? "PASS" : "FAIL", r.id,
                                r.name.c_str(), r.detail.c_str());
                    std::fflush(stdout);
                    all_pass = all_pass && r.pass;
                });
            std::printf("%zu/%zu criteria passed\n",
                        static_cast<std::size_t>(
                            std::count_if(results.begin(), results.end(),
                                          [](const auto& r) { return r.pass; })),
                        results.size());
            return all_pass ? 0 : 2;
        }
        const auto artifacts = rcinar::run(load_config(experiment, opts[experiment]));
        std::cout << artifacts.summary.dump(2) << "\n";
        return artifacts.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
