// Command-line front end for the emcel library.
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emcel/cli.hpp"
#include "emcel/parallel.hpp"

namespace {

struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> values;
};

struct OptionSpec {
    const char* name;
    const char* help;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EMCEL scale factors and chain simulation for one-dimensional diffusions"};
    app.set_help_flag("--help", "print this help and exit");  // -h is taken by the step size
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(EMCEL_VERSION));

    std::string config;
    std::string out_dir;
    std::map<std::string, Sub> subs;

    auto add = [&](const std::string& name, const std::string& help, std::vector<OptionSpec> opts, bool needs_config) {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, help);
        s.app->set_help_flag("--help", "print this help and exit");
        auto* c = s.app->add_option("--config", config, "measure config (JSON)");
        if (needs_config) c->required();
        s.app->add_option("--out", out_dir, "output directory")->default_val("out/" + name);
        for (const auto& o : opts) {
            std::string& slot = s.values[o.name];
            s.app->add_option(std::string("--") + o.name, slot, o.help)->allow_extra_args(false);
        }
    };

    add("scale-table", "tabulate the scale factor on a grid",
        {{"h", "time step (default 0.01)"},
         {"grid", "lo:hi:step (default -1:1:0.01)"},
         {"mode", "bisect-all | ode-hybrid (default ode-hybrid)"}},
        true);
    add("simulate", "simulate EMCEL or Euler paths",
        {{"h", "time step (default 0.01)"},
         {"T", "horizon (default 1)"},
         {"y0", "start point"},
         {"paths", "number of paths (default 1000)"},
         {"seed", "RNG seed (default 0)"},
         {"scheme", "emcel | euler (default emcel)"},
         {"record", "full | terminal (default full)"},
         {"thin", "keep every n-th state in paths.csv (default 1)"},
         {"window", "lo:hi range of the interpolation table"},
         {"nodes", "table nodes (default 8001)"},
         {"eta", "diffusion coefficient expression for the Euler scheme"}},
        true);
    add("check", "run a property suite",
        {{"suite", "scale-properties (alias section2)"}, {"h", "time step (default 0.01)"}, {"grid", "lo:hi:step"}},
        true);
    add("order", "estimate the asymptotic order of the scale factor at a point",
        {{"y", "point"},
         {"h-max", "largest h (default 1e-2)"},
         {"h-min", "smallest h (default 1e-8)"},
         {"per-decade", "step sizes per decade (default 1)"}},
        true);
    add("compare-euler", "EMCEL against the Euler scheme for dY = eta(Y) dW",
        {{"eta", "expression in x, or a bare function name such as cosh"},
         {"h", "time step (default 0.01)"},
         {"T", "horizon (default 6)"},
         {"paths", "number of paths (default 100)"},
         {"seed", "RNG seed (default 7)"},
         {"y0", "start point (default 0)"},
         {"window", "lo:hi of the scale table (default -6:6)"},
         {"nodes", "table nodes (default 1201)"}},
        false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return emcel::kExitInputError;
    }
    emcel::configure_threads();

    for (auto& [name, s] : subs) {
        if (!s.app->parsed()) continue;
        emcel::JobSpec job;
        job.command = name;
        job.measure_config = config;
        job.out_dir = out_dir;
        for (const auto& [k, v] : s.values) {
            if (s.app->get_option("--" + k)->count() > 0) job.params[k] = v;
        }
        return emcel::run(job, std::cerr);
    }
    return emcel::kExitInputError;
}
