#pragma once

// Scenario files: JSON with dB/dBm-suffixed numeric fields converted to
// linear units once, here. Errors name the offending field and its line.

#include "arisnoma/analytic.hpp"
#include "arisnoma/budget.hpp"
#include "arisnoma/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace arisnoma {

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Engine { analytic, asymptotic, montecarlo };

inline const char* to_string(Engine e)
{
    switch (e)
    {
    case Engine::analytic: return "analytic";
    case Engine::asymptotic: return "asymptotic";
    case Engine::montecarlo: return "montecarlo";
    }
    return "?";
}

enum class SweepVariable { p_tot_dbm, kappa, M, alpha_p, sigma2_t_dbm, R };

inline const char* to_string(SweepVariable v)
{
    switch (v)
    {
    case SweepVariable::p_tot_dbm: return "p_tot_dbm";
    case SweepVariable::kappa: return "kappa";
    case SweepVariable::M: return "M";
    case SweepVariable::alpha_p: return "alpha_p";
    case SweepVariable::sigma2_t_dbm: return "sigma2_t_dbm";
    case SweepVariable::R: return "R";
    }
    return "?";
}

enum class Metric { sop, throughput };

inline const char* to_string(Metric m) { return m == Metric::sop ? "sop" : "throughput"; }

/// What one curve reports. `system` combines external_n and external_f.
enum class Target { external_n, external_f, internal, external_system };

inline const char* to_string(Target t)
{
    switch (t)
    {
    case Target::external_n: return "external_n";
    case Target::external_f: return "external_f";
    case Target::internal: return "internal";
    case Target::external_system: return "external_system";
    }
    return "?";
}

struct CurveSpec
{
    Target target = Target::external_n;
    Sic sic = Sic::psic;
    Mode mode = Mode::aris;
};

struct BudgetSpec
{
    double p_tot = 0.1;                 // watts
    std::optional<double> p_ris;        // watts; otherwise p_ris_fraction * p_tot
    double p_ris_fraction = 0.2;
    double p_ps = 1e-10;
    double p_dc = 1e-10;
    /// Total budget whose BS power the eavesdroppers see; unset means the actual one.
    std::optional<double> eve_p_tot;
};

struct SweepSpec
{
    SweepVariable variable = SweepVariable::p_tot_dbm;
    std::vector<double> values;
    char m_fixed = 'P';  // M sweeps: which of P, Q stays fixed
    std::vector<CurveSpec> curves;
    std::vector<Engine> engines{Engine::analytic};
    Metric metric = Metric::sop;
};

struct McSettings
{
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    bool shared_hbr = false;
};

struct Config
{
    std::string name;
    std::string notes;
    SystemParams system;  // ARIS-side values; PRIS curves override kappa and sigma2_t
    BudgetSpec budget;
    int order_d = kDefaultQuadratureOrder;
    int order_s = kDefaultQuadratureOrder;
    SweepSpec sweep;
    McSettings mc;
    nlohmann::json source;  // as parsed, for provenance output
};

namespace detail {

/// 1-based line of the first occurrence of "key" in the text, 0 if absent.
inline int line_of(const std::string& text, const std::string& key)
{
    const auto pos = text.find('"' + key + '"');
    if (pos == std::string::npos)
        return 0;
    int line = 1;
    for (std::size_t i = 0; i < pos; ++i)
        line += text[i] == '\n' ? 1 : 0;
    return line;
}

class Reader
{
public:
    Reader(const std::string& text, const std::string& origin) : text_(text), origin_(origin) {}

    [[noreturn]] void fail(const std::string& path, const std::string& key, const std::string& what) const
    {
        std::ostringstream msg;
        msg << origin_;
        if (const int line = line_of(text_, key); line > 0)
            msg << ":" << line;
        msg << ": field '" << path << "': " << what;
        throw ConfigError(msg.str());
    }

    void reject_unknown(const nlohmann::json& obj, const std::string& path,
                        const std::set<std::string>& allowed) const
    {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key()))
                fail(path + "." + it.key(), it.key(), "unknown field");
    }

    double number(const nlohmann::json& obj, const std::string& path, const std::string& key) const
    {
        const auto& v = obj.at(key);
        if (!v.is_number())
            fail(path + "." + key, key, "expected a number");
        return v.get<double>();
    }

    /// Reads `key` (linear), `key_db` or `key_dbm`; at most one may be present.
    std::optional<double> scaled(const nlohmann::json& obj, const std::string& path,
                                 const std::string& key) const
    {
        std::optional<double> out;
        int seen = 0;
        if (obj.contains(key))
        {
            out = number(obj, path, key);
            ++seen;
        }
        if (obj.contains(key + "_db"))
        {
            out = db_to_linear(number(obj, path, key + "_db"));
            ++seen;
        }
        if (obj.contains(key + "_dbm"))
        {
            out = dbm_to_watts(number(obj, path, key + "_dbm"));
            ++seen;
        }
        if (seen > 1)
            fail(path + "." + key, key, "given in more than one unit");
        return out;
    }

    const std::string& text() const { return text_; }

private:
    const std::string& text_;
    std::string origin_;
};

inline std::set<std::string> with_units(std::initializer_list<const char*> plain,
                                        std::initializer_list<const char*> scaled)
{
    std::set<std::string> keys(plain.begin(), plain.end());
    for (const char* k : scaled)
    {
        keys.insert(k);
        keys.insert(std::string(k) + "_db");
        keys.insert(std::string(k) + "_dbm");
    }
    return keys;
}

template <class Enum>
Enum parse_enum(const Reader& r, const nlohmann::json& v, const std::string& path,
                const std::string& key, std::initializer_list<std::pair<const char*, Enum>> options)
{
    if (v.is_string())
        for (auto [name, value] : options)
            if (v.get<std::string>() == name)
                return value;
    std::string allowed;
    for (auto [name, value] : options)
        allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    r.fail(path, key, "expected one of: " + allowed);
}

inline std::vector<double> parse_range(const Reader& r, const nlohmann::json& s)
{
    std::vector<double> values;
    if (s.contains("values"))
    {
        if (!s["values"].is_array() || s["values"].empty())
            r.fail("sweep.values", "values", "expected a non-empty array");
        for (const auto& v : s["values"])
        {
            if (!v.is_number())
                r.fail("sweep.values", "values", "expected numbers");
            values.push_back(v.get<double>());
        }
    }
    else if (s.contains("start"))
    {
        const double start = r.number(s, "sweep", "start");
        const double stop = r.number(s, "sweep", "stop");
        const double step = r.number(s, "sweep", "step");
        if (!(step != 0.0) || (stop - start) / step < 0)
            r.fail("sweep.step", "step", "step must be nonzero and point from start to stop");
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= n; ++i)
            values.push_back(start + static_cast<double>(i) * step);
    }
    else
        r.fail("sweep", "sweep", "needs either 'values' or 'start'/'stop'/'step'");
    bool ascending = true;
    bool descending = true;
    for (std::size_t i = 1; i < values.size(); ++i)
    {
        ascending &= values[i] > values[i - 1];
        descending &= values[i] < values[i - 1];
    }
    if (!ascending && !descending)
        r.fail("sweep.values", "values", "range must be strictly monotone");
    return values;
}

}  // namespace detail

inline Config parse_config(const std::string& text, const std::string& origin = "<config>")
{
    nlohmann::json root;
    try
    {
        root = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        int line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            line += text[i] == '\n' ? 1 : 0;
        throw ConfigError(origin + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
    }
    detail::Reader r(text, origin);
    if (!root.is_object())
        r.fail("<root>", "", "expected a JSON object");
    r.reject_unknown(root, "<root>",
                     {"name", "notes", "system", "budget", "quadrature", "sweep", "montecarlo"});

    Config c;
    c.source = root;
    if (root.contains("name"))
        c.name = root["name"].get<std::string>();
    if (root.contains("notes"))
    {
        const auto& n = root["notes"];
        if (n.is_string())
            c.notes = n.get<std::string>();
        else if (n.is_array())
            for (const auto& line : n)
                c.notes += line.get<std::string>() + "\n";
    }

    try
    {
        if (root.contains("system"))
        {
            const auto& s = root["system"];
            r.reject_unknown(s, "system",
                             detail::with_units({"d_br", "d_rn", "d_rf", "d_re", "alpha", "M", "P", "Q",
                                                 "kappa", "a_f", "a_n", "R_f", "R_n", "varpi"},
                                                {"beta", "sigma2", "sigma2_e", "sigma2_t", "omega_ipu",
                                                 "omega_ipe", "omega_ip"}));
            auto& p = c.system;
            for (auto [key, field] : {std::pair{"d_br", &p.d_br}, {"d_rn", &p.d_rn}, {"d_rf", &p.d_rf},
                                      {"d_re", &p.d_re}, {"alpha", &p.alpha}, {"kappa", &p.kappa},
                                      {"R_f", &p.R_f}, {"R_n", &p.R_n}, {"varpi", &p.varpi}})
                if (s.contains(key))
                    *field = r.number(s, "system", key);
            for (auto [key, field] : {std::pair{"M", &p.M}, {"P", &p.P}, {"Q", &p.Q}})
                if (s.contains(key))
                {
                    if (!s[key].is_number_integer())
                        r.fail(std::string("system.") + key, key, "expected an integer");
                    *field = s[key].get<int>();
                }
            if (s.contains("M") && !s.contains("P") && s.contains("Q") && p.Q > 0)
                p.P = p.M / p.Q;
            if (s.contains("M") && s.contains("P") && !s.contains("Q") && p.P > 0)
                p.Q = p.M / p.P;
            if (s.contains("a_f"))
            {
                p.a_f = r.number(s, "system", "a_f");
                p.a_n = s.contains("a_n") ? r.number(s, "system", "a_n") : 1.0 - p.a_f;
            }
            else if (s.contains("a_n"))
            {
                p.a_n = r.number(s, "system", "a_n");
                p.a_f = 1.0 - p.a_n;
            }
            for (auto [key, field] : {std::pair{"beta", &p.beta}, {"sigma2", &p.sigma2},
                                      {"sigma2_e", &p.sigma2_e}, {"sigma2_t", &p.sigma2_t},
                                      {"omega_ipu", &p.omega_ipu}, {"omega_ipe", &p.omega_ipe}})
                if (auto v = r.scaled(s, "system", key))
                    *field = *v;
            if (auto v = r.scaled(s, "system", "omega_ip"))
            {
                if (r.scaled(s, "system", "omega_ipu") || r.scaled(s, "system", "omega_ipe"))
                    r.fail("system.omega_ip", "omega_ip", "conflicts with omega_ipu/omega_ipe");
                p.omega_ipu = p.omega_ipe = *v;
            }
        }

        if (root.contains("budget"))
        {
            const auto& b = root["budget"];
            r.reject_unknown(b, "budget",
                             detail::with_units({"p_ris_fraction"}, {"p_tot", "p_ris", "p_ps", "p_dc",
                                                                     "eve_p_tot"}));
            if (auto v = r.scaled(b, "budget", "p_tot"))
                c.budget.p_tot = *v;
            c.budget.p_ris = r.scaled(b, "budget", "p_ris");
            if (b.contains("p_ris_fraction"))
            {
                if (c.budget.p_ris)
                    r.fail("budget.p_ris_fraction", "p_ris_fraction", "conflicts with p_ris");
                c.budget.p_ris_fraction = r.number(b, "budget", "p_ris_fraction");
                if (!(c.budget.p_ris_fraction >= 0.0 && c.budget.p_ris_fraction < 1.0))
                    r.fail("budget.p_ris_fraction", "p_ris_fraction", "must lie in [0, 1)");
            }
            if (auto v = r.scaled(b, "budget", "p_ps"))
                c.budget.p_ps = *v;
            if (auto v = r.scaled(b, "budget", "p_dc"))
                c.budget.p_dc = *v;
            c.budget.eve_p_tot = r.scaled(b, "budget", "eve_p_tot");
        }

        if (root.contains("quadrature"))
        {
            const auto& q = root["quadrature"];
            r.reject_unknown(q, "quadrature", {"D", "S"});
            for (auto [key, field] : {std::pair{"D", &c.order_d}, {"S", &c.order_s}})
                if (q.contains(key))
                {
                    *field = q[key].get<int>();
                    if (*field < 1 || *field > specfun::kMaxQuadratureOrder)
                        r.fail(std::string("quadrature.") + key, key, "must lie in [1, 512]");
                }
        }

        if (root.contains("montecarlo"))
        {
            const auto& m = root["montecarlo"];
            r.reject_unknown(m, "montecarlo", {"trials", "seed", "shared_hbr"});
            if (m.contains("trials"))
                c.mc.trials = m["trials"].get<std::uint64_t>();
            if (m.contains("seed"))
                c.mc.seed = m["seed"].get<std::uint64_t>();
            if (m.contains("shared_hbr"))
                c.mc.shared_hbr = m["shared_hbr"].get<bool>();
        }

        auto& sw = c.sweep;
        if (root.contains("sweep"))
        {
            const auto& s = root["sweep"];
            r.reject_unknown(s, "sweep",
                             {"variable", "values", "start", "stop", "step", "m_fixed", "curves", "engines",
                              "metric"});
            if (s.contains("variable"))
                sw.variable = detail::parse_enum<SweepVariable>(
                    r, s["variable"], "sweep.variable", "variable",
                    {{"p_tot_dbm", SweepVariable::p_tot_dbm}, {"kappa", SweepVariable::kappa},
                     {"M", SweepVariable::M}, {"alpha_p", SweepVariable::alpha_p},
                     {"sigma2_t_dbm", SweepVariable::sigma2_t_dbm}, {"R", SweepVariable::R}});
            if (s.contains("values") || s.contains("start"))
                sw.values = detail::parse_range(r, s);
            if (s.contains("m_fixed"))
            {
                const auto f = s["m_fixed"].get<std::string>();
                if (f != "P" && f != "Q")
                    r.fail("sweep.m_fixed", "m_fixed", "expected \"P\" or \"Q\"");
                sw.m_fixed = f[0];
            }
            if (s.contains("metric"))
                sw.metric = detail::parse_enum<Metric>(r, s["metric"], "sweep.metric", "metric",
                                                       {{"sop", Metric::sop}, {"throughput", Metric::throughput}});
            if (s.contains("engines"))
            {
                sw.engines.clear();
                for (const auto& e : s["engines"])
                    sw.engines.push_back(detail::parse_enum<Engine>(
                        r, e, "sweep.engines", "engines",
                        {{"analytic", Engine::analytic}, {"asymptotic", Engine::asymptotic},
                         {"montecarlo", Engine::montecarlo}}));
            }
            if (s.contains("curves"))
                for (const auto& cv : s["curves"])
                {
                    r.reject_unknown(cv, "sweep.curves[]", {"scenario", "sic", "mode"});
                    CurveSpec curve;
                    curve.target = detail::parse_enum<Target>(
                        r, cv.at("scenario"), "sweep.curves[].scenario", "scenario",
                        {{"external_n", Target::external_n}, {"external_f", Target::external_f},
                         {"internal", Target::internal}, {"external_system", Target::external_system}});
                    if (cv.contains("sic"))
                        curve.sic = detail::parse_enum<Sic>(r, cv["sic"], "sweep.curves[].sic", "sic",
                                                            {{"ipsic", Sic::ipsic}, {"psic", Sic::psic}});
                    if (cv.contains("mode"))
                        curve.mode = detail::parse_enum<Mode>(r, cv["mode"], "sweep.curves[].mode", "mode",
                                                              {{"aris", Mode::aris}, {"pris", Mode::pris}});
                    sw.curves.push_back(curve);
                }
        }
        if (sw.values.empty())
            sw.values.push_back(watts_to_dbm(c.budget.p_tot));
        if (sw.curves.empty())
            sw.curves.push_back({});
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError(origin + ": " + e.what());
    }

    try
    {
        validate(c.system);
    }
    catch (const InvalidParams& e)
    {
        throw ConfigError(origin + ": system: " + e.what());
    }
    return c;
}

inline Config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

/// System parameters of one curve at the config's base budget. Throws
/// InfeasibleBudget when the surface consumes the whole budget.
inline SystemParams resolve(const SystemParams& system, const BudgetSpec& budget, Mode mode)
{
    SystemParams p = system;
    if (mode == Mode::pris)
    {
        p.kappa = 1.0;
        p.sigma2_t = 0.0;
    }
    auto bs_power = [&](double p_tot) {
        PowerBudget b;
        b.p_tot = p_tot;
        b.p_ris = mode == Mode::aris ? budget.p_ris.value_or(budget.p_ris_fraction * p_tot) : 0.0;
        b.p_ps = budget.p_ps;
        b.p_dc = budget.p_dc;
        b.mode = mode;
        return solve_bs_power(b, p.M, p.P, p.Q);
    };
    p.p_bs = bs_power(budget.p_tot);
    if (budget.eve_p_tot)
        p.p_bs_eve = bs_power(*budget.eve_p_tot);
    return p;
}

}  // namespace arisnoma
