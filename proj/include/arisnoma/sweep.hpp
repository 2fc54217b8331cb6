#pragma once

// Parameter sweeps over all three engines, the analytic-vs-simulation
// validation report, and the CSV/JSON writers. Rows are produced in sweep
// order whatever the worker count.

#include "arisnoma/analytic.hpp"
#include "arisnoma/config.hpp"
#include "arisnoma/montecarlo.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace arisnoma {

inline constexpr const char* kCsvColumns =
    "sweep_var,value,scenario,sic,mode,engine,metric,estimate,stderr,trials,seed,flags";

struct Row
{
    std::string sweep_var;
    double value = 0;
    Target target = Target::external_n;
    Sic sic = Sic::psic;
    Mode mode = Mode::aris;
    Engine engine = Engine::analytic;
    Metric metric = Metric::sop;
    std::optional<double> estimate;
    std::optional<double> std_error;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> flags;
    std::optional<SystemParams> params;  // resolved; absent when infeasible
};

struct SweepResult
{
    std::vector<Row> rows;
    std::size_t infeasible_points = 0;
    std::size_t points = 0;

    bool infeasible_everywhere() const { return points > 0 && infeasible_points == points; }
};

struct RunOptions
{
    unsigned workers = 1;
};

namespace detail {

inline int checked_divide(int m, int by, const char* what)
{
    if (by <= 0 || m % by != 0)
        throw ConfigError("M sweep: M = " + std::to_string(m) + " is not divisible by fixed " + what +
                          " = " + std::to_string(by));
    return m / by;
}

/// The config with the sweep variable set to `value`.
inline void apply_sweep_value(SweepVariable variable, double value, char m_fixed, SystemParams& p,
                              BudgetSpec& b)
{
    switch (variable)
    {
    case SweepVariable::p_tot_dbm: b.p_tot = dbm_to_watts(value); break;
    case SweepVariable::kappa: p.kappa = value; break;
    case SweepVariable::M:
    {
        const int m = static_cast<int>(std::lround(value));
        if (std::abs(value - m) > 1e-9 || m < 1)
            throw ConfigError("M sweep values must be positive integers");
        p.M = m;
        if (m_fixed == 'P')
            p.Q = checked_divide(m, p.P, "P");
        else
            p.P = checked_divide(m, p.Q, "Q");
        break;
    }
    case SweepVariable::alpha_p:
        p.a_f = value;
        p.a_n = 1.0 - value;
        break;
    case SweepVariable::sigma2_t_dbm: p.sigma2_t = dbm_to_watts(value); break;
    case SweepVariable::R:
        p.R_n = value;
        p.R_f = value;
        break;
    }
}

inline Scenario scenario_of(Target t)
{
    switch (t)
    {
    case Target::external_n: return Scenario::external_n;
    case Target::external_f: return Scenario::external_f;
    case Target::internal: return Scenario::internal;
    case Target::external_system: break;
    }
    throw std::logic_error("external_system has no single scenario");
}

inline void add_estimate_flags(const SopEstimate& e, std::vector<std::string>& flags)
{
    if (e.numerical_warning())
        flags.emplace_back("clamped");
    if (e.quadrature_unconverged)
        flags.emplace_back("quadrature_unconverged");
    if (!e.regime_valid)
        flags.emplace_back("regime_invalid");
}

inline std::string format_number(double v)
{
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.12g", v);
    return buffer;
}

}  // namespace detail

/// Every (value x curve x engine) row of the sweep.
inline SweepResult run_sweep(const Config& config, const RunOptions& options = {})
{
    const auto& spec = config.sweep;
    const auto tables = QuadraturePair::of_order(config.order_d, config.order_s);

    SweepResult result;
    result.points = spec.values.size();

    struct McSlot
    {
        std::size_t row;
        std::vector<std::size_t> queries;  // one, or two (n, f) for external_system
    };
    std::vector<mc::SopQuery> mc_queries;
    std::vector<McSlot> mc_slots;
    std::vector<std::function<void()>> analytic_jobs;

    for (double value : spec.values)
    {
        SystemParams system = config.system;
        BudgetSpec budget = config.budget;
        detail::apply_sweep_value(spec.variable, value, spec.m_fixed, system, budget);
        try
        {
            validate(system);
        }
        catch (const InvalidParams& e)
        {
            throw ConfigError(std::string("sweep point ") + to_string(spec.variable) + " = " +
                              detail::format_number(value) + ": " + e.what());
        }
        bool point_feasible = false;
        for (const auto& curve : spec.curves)
        {
            std::optional<SystemParams> params;
            try
            {
                params = resolve(system, budget, curve.mode);
                point_feasible = true;
            }
            catch (const InfeasibleBudget&)
            {
            }
            for (Engine engine : spec.engines)
            {
                Row row;
                row.sweep_var = to_string(spec.variable);
                row.value = value;
                row.target = curve.target;
                row.sic = curve.target == Target::external_f ? Sic::psic : curve.sic;
                row.mode = curve.mode;
                row.engine = engine;
                row.metric = spec.metric;
                row.params = params;
                if (!params)
                {
                    row.flags.emplace_back("infeasible");
                    result.rows.push_back(std::move(row));
                    continue;
                }
                const std::size_t index = result.rows.size();
                if (engine == Engine::montecarlo)
                {
                    McSlot slot{index, {}};
                    auto push = [&](Scenario s) {
                        slot.queries.push_back(mc_queries.size());
                        mc_queries.push_back({*params, s, curve.sic});
                    };
                    if (curve.target == Target::external_system)
                    {
                        push(Scenario::external_n);
                        push(Scenario::external_f);
                    }
                    else
                        push(detail::scenario_of(curve.target));
                    row.trials = config.mc.trials;
                    row.seed = config.mc.seed;
                    if (config.mc.shared_hbr)
                        row.flags.emplace_back("shared_hbr");
                    mc_slots.push_back(std::move(slot));
                }
                else
                {
                    analytic_jobs.push_back([&result, index, p = *params, curve, engine, tables] {
                        Row& r = result.rows[index];
                        auto one = [&](Scenario s) {
                            if (engine == Engine::asymptotic)
                                return sop_asymptotic(p, s, curve.sic, tables);
                            return sop_checked(p, s, curve.sic, tables);
                        };
                        try
                        {
                            if (curve.target == Target::external_system)
                            {
                                const auto n = one(Scenario::external_n);
                                const auto f = one(Scenario::external_f);
                                detail::add_estimate_flags(n, r.flags);
                                detail::add_estimate_flags(f, r.flags);
                                r.estimate = r.metric == Metric::sop
                                                 ? system_sop(n.value, f.value)
                                                 : secrecy_throughput(n.value, p.R_n) +
                                                       secrecy_throughput(f.value, p.R_f);
                            }
                            else
                            {
                                const auto s = detail::scenario_of(curve.target);
                                const auto e = one(s);
                                detail::add_estimate_flags(e, r.flags);
                                r.estimate = r.metric == Metric::sop
                                                 ? e.value
                                                 : secrecy_throughput(e.value, target_rate(p, s));
                            }
                        }
                        catch (const UnsupportedScenario&)
                        {
                            r.flags.emplace_back("unsupported");
                        }
                    });
                }
                result.rows.push_back(std::move(row));
            }
        }
        if (!point_feasible)
            ++result.infeasible_points;
    }

    mc::parallel_chunks(analytic_jobs.size(), options.workers,
                        [&](std::uint64_t i) { analytic_jobs[i](); });

    if (!mc_queries.empty())
    {
        mc::BatchOptions batch;
        batch.workers = options.workers;
        batch.draw.shared_hbr = config.mc.shared_hbr;
        const auto estimates = mc::estimate_sop_batch(mc_queries, config.mc.trials, config.mc.seed, batch);
        for (const auto& slot : mc_slots)
        {
            Row& r = result.rows[slot.row];
            if (slot.queries.size() == 2)
            {
                const auto& n = estimates[slot.queries[0]];
                const auto& f = estimates[slot.queries[1]];
                if (r.metric == Metric::sop)
                {
                    r.estimate = system_sop(n.sop.value, f.sop.value);
                    r.std_error = std::hypot((1.0 - f.sop.value) * *n.sop.std_error,
                                             (1.0 - n.sop.value) * *f.sop.std_error);
                }
                else
                {
                    r.estimate = n.throughput + f.throughput;
                    r.std_error = std::hypot(n.throughput_std_error, f.throughput_std_error);
                }
            }
            else
            {
                const auto& e = estimates[slot.queries[0]];
                if (r.metric == Metric::sop)
                {
                    r.estimate = e.sop.value;
                    r.std_error = e.sop.std_error;
                }
                else
                {
                    r.estimate = e.throughput;
                    r.std_error = e.throughput_std_error;
                }
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string csv_line(const Row& r)
{
    std::string flags;
    for (const auto& f : r.flags)
        flags += (flags.empty() ? "" : ";") + f;
    std::string line = r.sweep_var + "," + detail::format_number(r.value) + "," + to_string(r.target) + "," +
                       to_string(r.sic) + "," + to_string(r.mode) + "," + to_string(r.engine) + "," +
                       to_string(r.metric) + ",";
    line += (r.estimate ? detail::format_number(*r.estimate) : "") + ",";
    line += (r.std_error ? detail::format_number(*r.std_error) : "") + ",";
    line += (r.trials ? std::to_string(*r.trials) : "") + ",";
    line += (r.seed ? std::to_string(*r.seed) : "") + ",";
    return line + flags;
}

/// `# key: value` metadata lines, then the header, then one line per row.
inline void write_csv(std::ostream& out, const std::vector<Row>& rows,
                      const std::vector<std::pair<std::string, std::string>>& metadata)
{
    for (const auto& [key, value] : metadata)
        out << "# " << key << ": " << value << "\n";
    out << kCsvColumns << "\n";
    for (const auto& r : rows)
        out << csv_line(r) << "\n";
}

inline nlohmann::json params_json(const SystemParams& p)
{
    nlohmann::json j = {
        {"d_br", p.d_br},         {"d_rn", p.d_rn},         {"d_rf", p.d_rf},     {"d_re", p.d_re},
        {"alpha", p.alpha},       {"beta", p.beta},         {"M", p.M},           {"P", p.P},
        {"Q", p.Q},               {"kappa", p.kappa},       {"sigma2", p.sigma2}, {"sigma2_e", p.sigma2_e},
        {"sigma2_t", p.sigma2_t}, {"a_f", p.a_f},           {"a_n", p.a_n},       {"R_f", p.R_f},
        {"R_n", p.R_n},           {"varpi", p.varpi},       {"omega_ipu", p.omega_ipu},
        {"omega_ipe", p.omega_ipe}, {"p_bs", p.p_bs},
    };
    if (p.p_bs_eve)
        j["p_bs_eve"] = *p.p_bs_eve;
    return j;
}

inline nlohmann::json rows_json(const std::vector<Row>& rows,
                                const std::vector<std::pair<std::string, std::string>>& metadata)
{
    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [key, value] : metadata)
        meta[key] = value;
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : rows)
    {
        nlohmann::json j = {
            {"sweep_var", r.sweep_var},       {"value", r.value},          {"scenario", to_string(r.target)},
            {"sic", to_string(r.sic)},         {"mode", to_string(r.mode)}, {"engine", to_string(r.engine)},
            {"metric", to_string(r.metric)},   {"flags", r.flags},
        };
        j["estimate"] = r.estimate ? nlohmann::json(*r.estimate) : nlohmann::json();
        j["stderr"] = r.std_error ? nlohmann::json(*r.std_error) : nlohmann::json();
        j["trials"] = r.trials ? nlohmann::json(*r.trials) : nlohmann::json();
        j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json();
        if (r.params)
            j["params"] = params_json(*r.params);
        list.push_back(std::move(j));
    }
    return {{"metadata", meta}, {"rows", list}};
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

struct Check
{
    std::string group;  // sop | cdf | pdf
    std::string name;
    double analytic = 0;
    double empirical = 0;
    double std_error = 0;
    double tolerance = 0;
    bool pass = true;
    bool informational = false;  // reported, never gating
};

struct ValidationReport
{
    std::vector<Check> checks;

    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.informational && !c.pass)
                return false;
        return true;
    }
};

/// Smallest x with cdf(x) >= level, by bisection in log x.
template <class Cdf>
double quantile(Cdf cdf, double level, double lo = 1e-12, double hi = 1e12)
{
    for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-12; ++i)
    {
        const double mid = std::sqrt(lo * hi);
        (cdf(mid) < level ? lo : hi) = mid;
    }
    return hi;
}

struct ValidateOptions
{
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    QuadraturePair tables;
};

/// Compares every analytic SOP, CDF and PDF against the simulation at one point.
///   SOP:  |a - m| <= max(3 se, r a), r = 2% for the passive pSIC case, 15% otherwise
///   CDF:  |a - m| <= 3 se + 2% of a, at the analytic deciles
///   PDF:  |a - m| <= 3 se + 5% of a, histogram density over a +-2% bin at the quartiles
/// Simulated SOPs under a shared BS->RIS channel are reported as informational.
inline ValidationReport validate_point(const SystemParams& params, const ValidateOptions& options = {})
{
    ValidationReport report;
    const bool passive = params.kappa == 1.0 && params.sigma2_t == 0.0;
    const auto& td = *options.tables.d;

    struct SopCase
    {
        const char* name;
        Scenario scenario;
        Sic sic;
    };
    const SopCase sop_cases[] = {
        {"external_n/ipsic", Scenario::external_n, Sic::ipsic},
        {"external_n/psic", Scenario::external_n, Sic::psic},
        {"external_f", Scenario::external_f, Sic::psic},
        {"internal/ipsic", Scenario::internal, Sic::ipsic},
        {"internal/psic", Scenario::internal, Sic::psic},
    };
    std::vector<mc::SopQuery> sop_queries;
    for (const auto& c : sop_cases)
        sop_queries.push_back({params, c.scenario, c.sic});

    struct CdfCase
    {
        const char* name;
        mc::Variable variable;
        Sic sic;
        std::function<double(double)> cdf;
        std::function<double(double)> pdf;  // empty for legitimate users
    };
    const auto p_ip = params;
    const auto p_p = with_sic(params, Sic::psic);
    const std::vector<CdfCase> cdf_cases = {
        {"user_n/ipsic", mc::Variable::sinr_user_n, Sic::ipsic,
         [&](double x) { return cdf_user_n_ipsic(x, p_ip, td); }, {}},
        {"user_n/psic", mc::Variable::sinr_user_n, Sic::psic, [&](double x) { return cdf_user_n_psic(x, p_p); }, {}},
        {"user_f", mc::Variable::sinr_user_f, Sic::psic, [&](double x) { return cdf_user_f(x, p_p); }, {}},
        {"eve_n/ipsic", mc::Variable::sinr_eve_n, Sic::ipsic,
         [&](double x) { return cdf_eve_n_ipsic(x, p_ip, td); },
         [&](double x) { return pdf_eve_n_ipsic(x, p_ip, td); }},
        {"eve_n/psic", mc::Variable::sinr_eve_n, Sic::psic, [&](double x) { return cdf_eve_n_psic(x, p_p); },
         [&](double x) { return pdf_eve_n_psic(x, p_p); }},
        {"eve_f", mc::Variable::sinr_eve_f, Sic::psic, [&](double x) { return cdf_eve_f(x, p_p); },
         [&](double x) { return pdf_eve_f(x, p_p); }},
        {"internal_f_to_n", mc::Variable::sinr_internal_f_to_n, Sic::psic,
         [&](double x) { return cdf_internal_f_to_n(x, p_p); },
         [&](double x) { return pdf_internal_f_to_n(x, p_p); }},
    };
    constexpr double kBin = 0.02;
    const double cdf_levels[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const double pdf_levels[] = {0.25, 0.5, 0.75};

    std::vector<mc::CdfQuery> cdf_queries;
    std::vector<std::vector<double>> cdf_points, pdf_points;
    for (const auto& c : cdf_cases)
    {
        mc::CdfQuery q{c.sic == Sic::psic ? p_p : p_ip, c.variable, {}};
        std::vector<double> xs, centres;
        for (double level : cdf_levels)
            xs.push_back(quantile(c.cdf, level));
        if (c.pdf)
            for (double level : pdf_levels)
                centres.push_back(quantile(c.cdf, level));
        q.thresholds = xs;
        for (double x : centres)
        {
            q.thresholds.push_back(x * (1.0 - kBin));
            q.thresholds.push_back(x * (1.0 + kBin));
        }
        std::sort(q.thresholds.begin(), q.thresholds.end());
        cdf_points.push_back(xs);
        pdf_points.push_back(centres);
        cdf_queries.push_back(std::move(q));
    }

    mc::BatchOptions batch;
    batch.workers = options.workers;
    const auto counts = mc::run_batch(sop_queries, cdf_queries, options.trials, options.seed, batch);
    batch.draw.shared_hbr = true;
    const auto shared = mc::run_batch(sop_queries, {}, options.trials, options.seed, batch);
    const double n = static_cast<double>(options.trials);

    for (std::size_t i = 0; i < std::size(sop_cases); ++i)
    {
        const auto a = sop(params, sop_cases[i].scenario, sop_cases[i].sic, options.tables).value;
        const double rel = passive && sop_cases[i].sic == Sic::psic ? 0.02 : 0.15;
        for (bool is_shared : {false, true})
        {
            const auto m = mc::proportion(is_shared ? shared.outages[i] : counts.outages[i], options.trials);
            Check c;
            c.group = "sop";
            c.name = std::string(sop_cases[i].name) + (is_shared ? " (shared h_br)" : "");
            c.analytic = a;
            c.empirical = m.value;
            c.std_error = *m.std_error;
            c.tolerance = std::max(3.0 * c.std_error, rel * a);
            c.pass = std::abs(a - m.value) <= c.tolerance;
            c.informational = is_shared;
            report.checks.push_back(c);
        }
    }

    auto count_at = [&](std::size_t query, double x) {
        const auto& t = cdf_queries[query].thresholds;
        const auto it = std::lower_bound(t.begin(), t.end(), x);
        return static_cast<double>(counts.below[query][static_cast<std::size_t>(it - t.begin())]);
    };
    for (std::size_t i = 0; i < cdf_cases.size(); ++i)
    {
        for (double x : cdf_points[i])
        {
            Check c;
            c.group = "cdf";
            c.name = std::string(cdf_cases[i].name) + " @ " + detail::format_number(x);
            c.analytic = cdf_cases[i].cdf(x);
            c.empirical = count_at(i, x) / n;
            c.std_error = std::sqrt(c.empirical * (1.0 - c.empirical) / n);
            c.tolerance = 3.0 * c.std_error + 0.02 * c.analytic;
            c.pass = std::abs(c.analytic - c.empirical) <= c.tolerance;
            report.checks.push_back(c);
        }
        for (double x : pdf_points[i])
        {
            const double lo = x * (1.0 - kBin);
            const double hi = x * (1.0 + kBin);
            const double mass = (count_at(i, hi) - count_at(i, lo)) / n;
            Check c;
            c.group = "pdf";
            c.name = std::string(cdf_cases[i].name) + " @ " + detail::format_number(x);
            c.analytic = cdf_cases[i].pdf(x);
            c.empirical = mass / (hi - lo);
            c.std_error = std::sqrt(mass * (1.0 - mass) / n) / (hi - lo);
            c.tolerance = 3.0 * c.std_error + 0.05 * c.analytic;
            c.pass = std::abs(c.analytic - c.empirical) <= c.tolerance;
            report.checks.push_back(c);
        }
    }
    return report;
}

}  // namespace arisnoma
