// abp-sim: Monte Carlo experiments for auxiliary beam pair angle estimation.
#include "abp/errors.hpp"
#include "abp/sim_harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> threads;
    std::string out;
    bool json = false;
    bool dump_config = false;
};

int fail(const std::string &kind, const std::string &message, int code) {
    nlohmann::json err{{"error", kind}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Auxiliary beam pair estimation experiments"};
    app.require_subcommand(1);
    Options opt;

    const char *kinds[] = {"single-path-mse", "variance", "quantization", "multipath-mse",
                           "maee", "control-channel", "rician"};
    for (const char *name : kinds) {
        auto *sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", opt.config, "JSON or TOML experiment descriptor");
        sub->add_option("--seed", opt.seed, "master seed");
        sub->add_option("--trials", opt.trials, "Monte Carlo trials per point");
        sub->add_option("--threads", opt.threads, "worker threads (0: all cores)");
        sub->add_option("--out", opt.out, "CSV output path (default stdout)");
        sub->add_flag("--json", opt.json, "print the report as JSON on stdout");
        sub->add_flag("--dump-config", opt.dump_config, "print the effective config and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        return fail("usage", e.what(), 2);
    }

    try {
        const auto kind = abp::parse_experiment_kind(app.get_subcommands().front()->get_name());
        abp::ExperimentConfig cfg = opt.config.empty() ? abp::default_config(kind) : abp::load_config(opt.config, kind);
        if (opt.seed)
            cfg.seed = *opt.seed;
        if (opt.trials)
            cfg.trials = *opt.trials;
        if (opt.threads)
            cfg.threads = *opt.threads;
        if (!opt.out.empty())
            cfg.output = opt.out;
        cfg.validate();
        if (opt.dump_config) {
            std::cout << abp::config_to_json(cfg) << "\n";
            return 0;
        }

        const abp::MetricReport report = abp::run_experiment(cfg);
        if (!cfg.output.empty()) {
            std::ofstream f(cfg.output, std::ios::binary);
            if (!f)
                return fail("io", "cannot write '" + cfg.output + "'", 3);
            f << report.to_csv();
        }
        if (opt.json)
            std::cout << report.to_json() << "\n";
        else if (cfg.output.empty())
            std::cout << report.to_csv();
        return 0;
    } catch (const abp::ConfigError &e) {
        return fail("config", e.what(), 2);
    } catch (const std::exception &e) {
        return fail("runtime", e.what(), 1);
    }
}
