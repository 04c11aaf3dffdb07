#include "spavg/spavg.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<long> seed;
    std::optional<std::string> system;
    std::vector<std::string> eps;
    std::optional<std::string> L;
    std::optional<std::string> T;
    bool timing = false;
    std::vector<std::string> sets;
};

int exit_code(spavg_status s) {
    switch (s) {
        case SPAVG_OK: return 0;
        case SPAVG_ERR_CONFIG:
        case SPAVG_ERR_ARGUMENT: return 2;
        default: return 1;
    }
}

int report(spavg_status s, const char* what) {
    std::fprintf(stderr, "spavg: %s: %s (%s)\n", what, spavg_last_error(), spavg_status_name(s));
    return exit_code(s);
}

std::string join_list(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out + "]";
}

// Flags are shorthands for config keys; the target key depends on the command.
std::vector<std::pair<std::string, std::string>> flag_keys(const std::string& cmd, const Options& o) {
    std::vector<std::pair<std::string, std::string>> kv;
    if (o.seed) kv.emplace_back("seed", std::to_string(*o.seed));
    if (o.system) kv.emplace_back("system.name", *o.system);
    if (!o.eps.empty()) {
        if (cmd == "sweep")
            kv.emplace_back("sweep.eps", join_list(o.eps));
        else if (cmd == "bounds")
            kv.emplace_back("bounds.eps", join_list(o.eps));
        else if (cmd == "simulate" || cmd == "grid")
            kv.emplace_back(cmd + ".eps", o.eps.front());
        else if (cmd == "figures" && o.eps.size() == 2) {
            kv.emplace_back("figures.eps_a", o.eps[0]);
            kv.emplace_back("figures.eps_b", o.eps[1]);
        } else
            kv.emplace_back("--eps", "");
    }
    if (o.L) kv.emplace_back(cmd == "grid" ? "grid.L" : "constants.L", *o.L);
    if (o.T) kv.emplace_back(cmd == "grid" ? "grid.T" : "sweep.T", *o.T);
    if (o.timing) kv.emplace_back("sweep.timing", "true");
    return kv;
}

int run(const std::string& cmd, const Options& o) {
    spavg_config* cfg = nullptr;
    spavg_status s = spavg_config_create(&cfg);
    if (s != SPAVG_OK) return report(s, "config");
    struct Free {
        spavg_config* c;
        ~Free() { spavg_config_free(c); }
    } free_cfg{cfg};

    if (!o.config.empty() && (s = spavg_config_load_file(cfg, o.config.c_str())) != SPAVG_OK)
        return report(s, "config");
    for (const auto& [k, v] : flag_keys(cmd, o)) {
        if (k == "--eps") {
            std::fprintf(stderr, "spavg: --eps is not accepted by '%s' in this form\n", cmd.c_str());
            return 2;
        }
        if ((s = spavg_config_set(cfg, k.c_str(), v.c_str())) != SPAVG_OK) return report(s, "config");
    }
    for (const auto& item : o.sets) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "spavg: --set expects key=value, got '%s'\n", item.c_str());
            return 2;
        }
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if ((s = spavg_config_set(cfg, key.c_str(), value.c_str())) != SPAVG_OK) return report(s, "config");
    }

    spavg_result* res = nullptr;
    if ((s = spavg_run(cfg, cmd.c_str(), &res)) != SPAVG_OK) return report(s, cmd.c_str());
    struct FreeRes {
        spavg_result* r;
        ~FreeRes() { spavg_result_free(r); }
    } free_res{res};

    if ((s = spavg_result_write(res, o.out.c_str())) != SPAVG_OK) return report(s, "output");
    if (cmd == "grid") {
        std::size_t len = 0;
        const char* data = spavg_result_artifact_data(res, 0, &len);
        std::fwrite(data, 1, len, stdout);
    }
    std::fputs(spavg_result_summary(res), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Averaging analysis of singularly perturbed systems"};
    app.require_subcommand(1);
    Options o;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"simulate", "full, boundary-layer and reduced trajectories"},
        {"average", "average field and averaging envelope"},
        {"grid", "interval length S_eps and the knot table"},
        {"bounds", "closed-form bounds over an eps grid"},
        {"sweep", "closeness sweep and order fit"},
        {"figures", "slow-state and fast-norm figures for the built-in example"},
        {"estimate", "estimate the analysis constants"},
    };
    std::string chosen;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", o.config, "TOML-style config file")->check(CLI::ExistingFile);
        sub->add_option("-o,--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--seed", o.seed, "random seed (default 42)");
        sub->add_option("--system", o.system, "system name");
        sub->add_option("--eps", o.eps, "perturbation value(s)");
        sub->add_option("--L", o.L, "Lipschitz constant");
        sub->add_option("--T", o.T, "horizon");
        sub->add_flag("--timing", o.timing, "record wall time per sweep row");
        sub->add_option("--set", o.sets, "override a config key: section.key=value");
        sub->callback([&chosen, name = name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        std::cerr << app.help();
        return 2;
    }
    return run(chosen, o);
}
