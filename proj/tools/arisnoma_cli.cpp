// Command-line front end: parameter sweeps over the analytic, asymptotic and
// Monte Carlo engines, the validation report, and quadrature table dumps.

#include "arisnoma/config.hpp"
#include "arisnoma/presets_data.hpp"
#include "arisnoma/sweep.hpp"
#include "arisnoma/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace arisnoma;

enum Exit { kOk = 0, kConfigError = 1, kInfeasible = 2, kValidationFailed = 3 };

struct Options
{
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::string engines;
    std::string out;
    std::string json;
    unsigned workers = 1;
    int order = kDefaultQuadratureOrder;
};

unsigned default_workers()
{
    if (const char* env = std::getenv("ARISNOMA_WORKERS"))
    {
        try
        {
            return static_cast<unsigned>(std::stoul(env));
        }
        catch (const std::exception&)
        {
            std::cerr << "warning: ignoring ARISNOMA_WORKERS='" << env << "'\n";
        }
    }
    return 1;
}

Config load(const Options& o)
{
    if (!o.config_path.empty() && !o.preset.empty())
        throw ConfigError("give either --config or --preset, not both");
    Config c;
    if (!o.preset.empty())
    {
        std::string names;
        for (const auto& [name, text] : kPresets)
        {
            if (name == o.preset)
            {
                c = parse_config(std::string(text), "preset:" + o.preset);
                break;
            }
            names += (names.empty() ? "" : ", ") + std::string(name);
        }
        if (c.name.empty())
            throw ConfigError("unknown preset '" + o.preset + "' (available: " + names + ")");
    }
    else if (!o.config_path.empty())
        c = load_config(o.config_path);
    else
        throw ConfigError("one of --config or --preset is required");

    if (o.trials)
        c.mc.trials = *o.trials;
    if (o.seed)
        c.mc.seed = *o.seed;
    if (!o.engines.empty())
    {
        c.sweep.engines.clear();
        std::stringstream list(o.engines);
        for (std::string item; std::getline(list, item, ',');)
        {
            if (item == "a" || item == "analytic")
                c.sweep.engines.push_back(Engine::analytic);
            else if (item == "m" || item == "mc" || item == "montecarlo")
                c.sweep.engines.push_back(Engine::montecarlo);
            else if (item == "asy" || item == "asymptotic")
                c.sweep.engines.push_back(Engine::asymptotic);
            else
                throw ConfigError("--engines: unknown engine '" + item + "' (use a, m, asy)");
        }
    }
    if (c.mc.trials < mc::kMinTrials)
        throw ConfigError("Monte Carlo trials must be >= " + std::to_string(mc::kMinTrials));

    const bool amplifier_off = c.budget.p_ris ? *c.budget.p_ris == 0.0 : c.budget.p_ris_fraction == 0.0;
    if (amplifier_off && c.system.kappa > 1.0)
        for (const auto& curve : c.sweep.curves)
            if (curve.mode == Mode::aris)
            {
                std::cerr << "warning: kappa = " << c.system.kappa
                          << " > 1 with an amplifier budget of 0 W; the two are independent inputs\n";
                break;
            }
    return c;
}

std::vector<std::pair<std::string, std::string>> metadata(const Config& c, const std::string& command)
{
    std::string engines;
    for (Engine e : c.sweep.engines)
        engines += (engines.empty() ? "" : ",") + std::string(to_string(e));
    return {
        {"tool", std::string("arisnoma ") + kVersion},
        {"command", command},
        {"config_name", c.name},
        {"engines", engines},
        {"trials", std::to_string(c.mc.trials)},
        {"seed", std::to_string(c.mc.seed)},
        {"quadrature", "D=" + std::to_string(c.order_d) + " S=" + std::to_string(c.order_s)},
        {"config", c.source.dump()},
    };
}

/// Runs `fn` with the CSV destination: --out, or stdout.
template <class Fn>
void with_output(const std::string& path, Fn fn)
{
    if (path.empty() || path == "-")
    {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    fn(out);
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    if (path.empty())
        return;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

int run_sweep_command(const Options& o, const std::string& command, std::optional<std::vector<Engine>> engines)
{
    Config c = load(o);
    if (engines && o.engines.empty())
        c.sweep.engines = *engines;
    const auto result = run_sweep(c, {o.workers});
    const auto meta = metadata(c, command);
    with_output(o.out, [&](std::ostream& out) { write_csv(out, result.rows, meta); });
    write_json(o.json, rows_json(result.rows, meta));
    if (result.infeasible_everywhere())
    {
        std::cerr << "error: the power budget is infeasible at every sweep point\n";
        return kInfeasible;
    }
    if (result.infeasible_points > 0)
        std::cerr << "warning: " << result.infeasible_points << " of " << result.points
                  << " sweep points are infeasible\n";
    return kOk;
}

int run_validate(const Options& o)
{
    const Config c = load(o);
    std::vector<Mode> modes;
    for (const auto& curve : c.sweep.curves)
        if (std::find(modes.begin(), modes.end(), curve.mode) == modes.end())
            modes.push_back(curve.mode);

    ValidateOptions vo;
    vo.trials = c.mc.trials;
    vo.seed = c.mc.seed;
    vo.workers = o.workers;
    vo.tables = QuadraturePair::of_order(c.order_d, c.order_s);

    bool pass = true;
    nlohmann::json checks = nlohmann::json::array();
    std::ostringstream table;
    for (const auto& [key, value] : metadata(c, "validate"))
        table << "# " << key << ": " << value << "\n";
    table << "mode,group,check,analytic,empirical,stderr,tolerance,result\n";
    for (Mode mode : modes)
    {
        SystemParams p;
        try
        {
            p = resolve(c.system, c.budget, mode);
        }
        catch (const InfeasibleBudget& e)
        {
            std::cerr << "error: " << e.what() << "\n";
            return kInfeasible;
        }
        const auto report = validate_point(p, vo);
        pass &= report.all_pass();
        for (const auto& k : report.checks)
        {
            const char* verdict = k.informational ? "info" : k.pass ? "pass" : "FAIL";
            table << to_string(mode) << "," << k.group << "," << k.name << ","
                  << detail::format_number(k.analytic) << "," << detail::format_number(k.empirical) << ","
                  << detail::format_number(k.std_error) << "," << detail::format_number(k.tolerance) << ","
                  << verdict << "\n";
            checks.push_back({{"mode", to_string(mode)}, {"group", k.group}, {"check", k.name},
                              {"analytic", k.analytic}, {"empirical", k.empirical},
                              {"stderr", k.std_error}, {"tolerance", k.tolerance}, {"result", verdict}});
        }
    }
    with_output(o.out, [&](std::ostream& out) { out << table.str(); });
    write_json(o.json, {{"checks", checks}, {"pass", pass}});
    std::cerr << (pass ? "validation passed\n" : "validation FAILED\n");
    return pass ? kOk : kValidationFailed;
}

int run_quadrature_dump(const Options& o)
{
    const auto table = specfun::gauss_laguerre(o.order);
    nlohmann::json j = {{"order", table.order},
                        {"nodes", table.nodes},
                        {"weights", table.weights},
                        {"log_weights", table.log_weights}};
    with_output(o.out, [&](std::ostream& out) { out << j.dump(2) << "\n"; });
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Secrecy outage and throughput of active/passive RIS-assisted NOMA downlinks"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(0, 1);

    Options o;
    o.workers = default_workers();
    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "Print the names of the built-in presets and exit");

    auto add_common = [&](CLI::App* sub, bool with_engines) {
        sub->add_option("--config", o.config_path, "Scenario file (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--preset", o.preset, "Built-in scenario name (see --list-presets)");
        sub->add_option("--trials", o.trials, "Monte Carlo trials per point");
        sub->add_option("--seed", o.seed, "Monte Carlo seed");
        if (with_engines)
            sub->add_option("--engines", o.engines, "Comma-separated engines: a, m, asy");
        sub->add_option("--out", o.out, "CSV output file (default stdout)");
        sub->add_option("--json", o.json, "JSON mirror of the output");
        sub->add_option("--workers", o.workers, "Worker threads, 0 = all cores (default $ARISNOMA_WORKERS or 1)");
    };

    auto* analytic = app.add_subcommand("analytic", "Closed-form sweep (add asy via --engines)");
    add_common(analytic, true);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo sweep");
    add_common(simulate, false);
    auto* sweep = app.add_subcommand("sweep", "Sweep with the engines listed in the config");
    add_common(sweep, true);
    auto* validate = app.add_subcommand("validate", "Analytic vs Monte Carlo report at the base point");
    add_common(validate, false);
    auto* dump = app.add_subcommand("quadrature-dump", "Print a Gauss-Laguerre table as JSON");
    dump->add_option("--order,-D", o.order, "Number of nodes")->check(CLI::Range(1, specfun::kMaxQuadratureOrder));
    dump->add_option("--out", o.out, "Output file (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::Success& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return kConfigError;
    }
    if (list_presets)
    {
        for (const auto& [name, text] : kPresets)
            std::cout << name << "\n";
        return kOk;
    }
    if (app.get_subcommands().empty())
    {
        std::cerr << app.help();
        return kConfigError;
    }

    try
    {
        if (*analytic)
            return run_sweep_command(o, "analytic", std::vector<Engine>{Engine::analytic});
        if (*simulate)
            return run_sweep_command(o, "simulate", std::vector<Engine>{Engine::montecarlo});
        if (*sweep)
            return run_sweep_command(o, "sweep", std::nullopt);
        if (*validate)
            return run_validate(o);
        if (*dump)
            return run_quadrature_dump(o);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}
