#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "cmp/errors.hpp"
#include "cmp/workbench.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    bool force = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config, "task configuration file")->required();
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--seed", args.seed, "RNG seed for synthetic-data tasks");
    sub->add_flag("--force-overwrite", args.force, "replace existing artifacts");
}

int run_task(const std::string& task, const CommonArgs& args) {
    cmp::RunConfig cfg = cmp::RunConfig::load(args.config, args.out, args.seed, args.force);
    if (cfg.task != task)
        throw cmp::ConfigError("config task '" + cfg.task + "' does not match subcommand '" +
                               task + "'");
    const cmp::ArtifactManifest manifest = cmp::run(cfg);
    for (const auto& e : manifest.entries)
        std::printf("%s  %s\n", e.digest.c_str(), e.filename.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity magnon polariton magnetometry workbench"};
    app.require_subcommand(1);

    const char* tasks[] = {"anticrossing", "bloch",           "sidebands", "tsm-sensitivity",
                           "lsm-sensitivity", "fit",          "scan-limit"};
    CommonArgs args;
    std::string chosen;
    for (const char* t : tasks) {
        CLI::App* sub = app.add_subcommand(t);
        add_common(sub, args);
        sub->callback([&chosen, t] { chosen = t; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return run_task(chosen, args);
    } catch (const cmp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const cmp::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const cmp::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
