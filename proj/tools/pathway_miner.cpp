#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathway/errors.hpp"
#include "pathway/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    int threads = 1;
};

std::vector<std::pair<std::string, std::string>> split_sets(
    const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw pathway::ConfigError("--set expects key=value, got '" + s + "'");
        out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
}

pathway::RunConfig make_config(const CommonOpts& o) {
    std::optional<std::filesystem::path> out_override;
    if (!o.out.empty()) out_override = o.out;
    return pathway::load_config(o.config, split_sets(o.sets), out_override, o.threads);
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config, "run config JSON file")->required();
    cmd->add_option("--set", o.sets, "config override key=value (dotted keys)");
    cmd->add_option("--out", o.out, "output directory override");
    cmd->add_option("--threads", o.threads, "worker thread cap")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathway-miner: impact detection and pathway mining on gridded "
                 "spatio-temporal ensembles"};
    app.require_subcommand(1);

    CommonOpts opts;
    void (*run)(const pathway::RunConfig&) = nullptr;
    struct Sub {
        const char* name;
        const char* desc;
        void (*fn)(const pathway::RunConfig&);
    };
    const Sub subs[] = {
        {"gen", "generate a synthetic forced/baseline ensemble", pathway::cmd_gen},
        {"stability", "sweep clustering parameters for stability", pathway::cmd_stability},
        {"cluster", "fit per-variable clusterings and persist labels", pathway::cmd_cluster},
        {"detect", "membership, significance and latitude-mode reports", pathway::cmd_detect},
        {"mine", "mine cluster-evolution n-gram patterns", pathway::cmd_mine},
        {"assert", "filter patterns by rules; prevalence and significance", pathway::cmd_assert},
        {"report", "collate run artifacts into a report", pathway::cmd_report},
    };
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.desc);
        add_common(cmd, opts);
        cmd->callback([&opts, &run, fn = s.fn]() { run = fn; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        run(make_config(opts));
    } catch (const pathway::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const pathway::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
    return 0;
}
