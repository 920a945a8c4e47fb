#include "qspec/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <thread>

namespace {

struct SubArgs {
    std::string config;
    std::string out;
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common_flags(CLI::App* sub, SubArgs& args, bool config_required) {
    auto* config = sub->add_option("--config", args.config, "experiment config file (JSON)");
    if (config_required) config->required();
    sub->add_option("--out", args.out, "CSV output path (overrides config)");
    sub->add_option("--workers", args.workers, "worker pool size (default: hardware)");
    sub->add_option("--seed", args.seed, "root seed (overrides config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

int run_subcommand(const std::string& kind, const SubArgs& args) {
    qspec::harness::CliOverrides overrides;
    if (!args.out.empty()) overrides.out = args.out;
    overrides.workers = args.workers > 0
                            ? args.workers
                            : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (args.seed_set) overrides.seed = args.seed;

    qspec::harness::RunOutcome outcome;
    if (args.config.empty()) {
        outcome = qspec::harness::run_default_verify(*overrides.workers,
                                                     args.seed_set ? args.seed : 1);
    } else {
        outcome = qspec::harness::run_config_file(args.config, kind, overrides);
    }

    std::optional<std::string> out_path = overrides.out;
    if (!out_path && !args.config.empty()) {
        out_path = qspec::harness::configured_out(args.config, overrides);
    }
    if (out_path) {
        qspec::harness::emit_csv(outcome.rows, *out_path);
        std::printf("wrote %zu rows to %s\n", outcome.rows.size(), out_path->c_str());
    } else {
        std::fputs(qspec::harness::csv_string(outcome.rows).c_str(), stdout);
    }

    if (kind == "verify") {
        for (const auto& row : outcome.rows) {
            if (row.metric != "checks" && row.metric != "failures") continue;
            std::printf("%-32s %s = %g\n", row.params.c_str(), row.metric.c_str(), row.value);
        }
        std::printf(outcome.failures == 0 ? "verify: all checks passed\n"
                                          : "verify: %d failure(s)\n",
                    outcome.failures);
    }
    return outcome.failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-spectrum toolkit for finite-dimensional quantum coding"};
    app.require_subcommand(1);

    const std::vector<std::string> kinds = {"spectrum", "compress", "mixed",
                                            "capacity", "densecode", "verify"};
    std::vector<SubArgs> args(kinds.size());
    for (size_t i = 0; i < kinds.size(); ++i) {
        CLI::App* sub = app.add_subcommand(kinds[i], kinds[i] + " experiment");
        add_common_flags(sub, args[i], kinds[i] != "verify");
    }

    CLI11_PARSE(app, argc, argv);

    for (size_t i = 0; i < kinds.size(); ++i) {
        if (app.got_subcommand(kinds[i])) {
            try {
                return run_subcommand(kinds[i], args[i]);
            } catch (const qspec::harness::ConfigError& e) {
                std::fprintf(stderr, "%s\n", e.what());
                return 2;
            } catch (const std::exception& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                return 1;
            }
        }
    }
    return 2;
}
