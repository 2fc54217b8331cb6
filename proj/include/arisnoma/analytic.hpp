#pragma once

// Closed-form SINR statistics, secrecy outage probabilities, their high-SNR
// asymptotes, diversity order and secrecy throughput.
//
// Every CDF here is a mixture of the normalized cascade distribution,
// F(x) = E[cascade_cdf(Xi x)], with Xi either fixed or a function of an
// Exp(1) residual-interference variable integrated by Gauss-Laguerre.

#include "arisnoma/model.hpp"
#include "arisnoma/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arisnoma {

enum class Scenario { external_n, external_f, internal };

inline const char* to_string(Scenario s)
{
    switch (s)
    {
    case Scenario::external_n: return "external_n";
    case Scenario::external_f: return "external_f";
    case Scenario::internal: return "internal";
    }
    return "?";
}

enum class Provenance { analytic, asymptotic, monte_carlo };

inline const char* to_string(Provenance p)
{
    switch (p)
    {
    case Provenance::analytic: return "analytic";
    case Provenance::asymptotic: return "asymptotic";
    case Provenance::monte_carlo: return "monte-carlo";
    }
    return "?";
}

struct SopEstimate
{
    double value = 0;
    Provenance provenance = Provenance::analytic;
    std::optional<std::uint64_t> trials;
    std::optional<double> std_error;  // present iff provenance is monte_carlo
    double clamped_drift = 0;         // |raw - value| removed by clamping to [0, 1]
    bool regime_valid = true;         // asymptotes only: argument inside the small-x regime
    bool quadrature_unconverged = false;

    /// Set when clamping removed more than round-off.
    bool numerical_warning() const { return clamped_drift > 1e-9; }
};

class UnsupportedScenario : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateCurve : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kDefaultQuadratureOrder = 64;

/// Process-wide cache of Gauss-Laguerre tables; entries are never mutated.
inline const specfun::QuadratureTable& quadrature(int order = kDefaultQuadratureOrder)
{
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const specfun::QuadratureTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot)
        slot = std::make_unique<const specfun::QuadratureTable>(specfun::gauss_laguerre(order));
    return *slot;
}

/// Inner (D, over zeta_d) and outer (S, over zeta_s) tables.
struct QuadraturePair
{
    const specfun::QuadratureTable* d = &quadrature();
    const specfun::QuadratureTable* s = &quadrature();

    static QuadraturePair of_order(int d_order, int s_order)
    {
        return {&quadrature(d_order), &quadrature(s_order)};
    }
};

namespace detail {

inline SopEstimate clamped(double raw, Provenance provenance = Provenance::analytic)
{
    SopEstimate e;
    e.provenance = provenance;
    e.value = std::clamp(raw, 0.0, 1.0);
    e.clamped_drift = std::abs(raw - e.value);
    return e;
}

inline double clamp_probability(double raw) { return std::clamp(raw, 0.0, 1.0); }

/// Sum_d G_d cascade_cdf(xi(zeta_d) x).
template <class XiOfNode>
double mixture_cdf(double x, int q, const specfun::QuadratureTable& table, XiOfNode xi)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i)
        sum += table.weights[i] * specfun::cascade_cdf(xi(table.nodes[i]) * x, q);
    return sum;
}

/// Density of x when x * xi follows the normalized cascade law.
inline double scaled_cascade_pdf(double x, double xi, int q)
{
    return xi * std::exp(specfun::log_cascade_pdf(xi * x, q));
}

inline double cascade_ratio(const DerivedConstants& k) { return k.omega_br * k.omega_rn; }

inline void require_threshold(double x)
{
    if (std::isnan(x) || x < 0.0)
        throw std::domain_error("SINR threshold must be >= 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Composite symbols that depend on rates or quadrature nodes
// ---------------------------------------------------------------------------

/// Xi_n(zeta) = (v_n + varpi P_BS Omega_ipu zeta) / (c_n Omega_br Omega_rn)
inline double xi_n(const SystemParams& p, const DerivedConstants& k, double zeta)
{
    return (k.v_n + k.ip_user * p.omega_ipu * zeta) / (k.c_n * k.omega_br * k.omega_rn);
}

/// Xi_e1(zeta) = (v_e1 + varpi P_BS Omega_ipe zeta) / (c_n Omega_br Omega_re)
inline double xi_e1(const SystemParams& p, const DerivedConstants& k, double zeta)
{
    return (k.v_e1 + k.ip_eve * p.omega_ipe * zeta) / (k.c_n_e * k.omega_br * k.omega_re);
}

/// Xi_e5(zeta) = (v_n + varpi P_BS Omega_ipe zeta) / (c_n Omega_br Omega_rn)
inline double xi_e5(const SystemParams& p, const DerivedConstants& k, double zeta)
{
    return (k.v_n + k.ip_user * p.omega_ipe * zeta) / (k.c_n * k.omega_br * k.omega_rn);
}

namespace detail {

// Eve's mean-field SINR terms: thermal-to-noise ratio and mean cascaded SNR.
inline double eve_thermal_ratio(const SystemParams& p, const DerivedConstants& k, double omega)
{
    return k.thermal * p.Q * omega / p.sigma2_e;
}

inline double eve_mean_snr(const SystemParams& p, const DerivedConstants& k, double omega)
{
    const double kappa2 = p.kappa * p.kappa;
    return k.rho_e * kappa2 * p.Q * k.omega_br * omega;
}

}  // namespace detail

/// eps_n1(zeta_s): rate-adjusted threshold against Eve with residual interference.
inline double eps_n1(const SystemParams& p, const DerivedConstants& k, double zeta_s)
{
    const double t = detail::eve_thermal_ratio(p, k, k.omega_re);
    const double a = detail::eve_mean_snr(p, k, k.omega_re);
    return std::exp2(p.R_n) * (1.0 + p.a_n * a / (t + p.varpi * k.rho_e * p.omega_ipe * zeta_s + 1.0)) -
           1.0;
}

inline double eps_n2(const SystemParams& p, const DerivedConstants& k)
{
    const double t = detail::eve_thermal_ratio(p, k, k.omega_re);
    const double a = detail::eve_mean_snr(p, k, k.omega_re);
    return std::exp2(p.R_n) * (1.0 + p.a_n * a / (t + 1.0)) - 1.0;
}

inline double eps_f(const SystemParams& p, const DerivedConstants& k)
{
    const double t = detail::eve_thermal_ratio(p, k, k.omega_re);
    const double a = detail::eve_mean_snr(p, k, k.omega_re);
    return std::exp2(p.R_f) * (1.0 + p.a_f * a / (t + p.a_n * a + 1.0)) - 1.0;
}

inline double eps_f_to_n(const SystemParams& p, const DerivedConstants& k)
{
    const double t = detail::eve_thermal_ratio(p, k, k.omega_rf);
    const double a = detail::eve_mean_snr(p, k, k.omega_rf);
    return std::exp2(p.R_n) * (1.0 + p.a_n * a / (t + 1.0)) - 1.0;
}

// ---------------------------------------------------------------------------
// Legitimate-user CDFs
// ---------------------------------------------------------------------------

inline double cdf_user_n_ipsic(double x, const SystemParams& p,
                               const specfun::QuadratureTable& table = quadrature())
{
    detail::require_threshold(x);
    const auto k = derive(p);
    return detail::clamp_probability(
        detail::mixture_cdf(x, p.Q, table, [&](double z) { return xi_n(p, k, z); }));
}

inline double cdf_user_n_psic(double x, const SystemParams& p)
{
    detail::require_threshold(x);
    const auto k = derive(p);
    return specfun::cascade_cdf(k.v_n * x / (k.c_n * k.omega_br * k.omega_rn), p.Q);
}

namespace detail {

/// P(c_f Y / (c_n Y + v) < x) for a cascade-scaled Y with ratio xi; 1 past the ceiling.
inline double ceiling_cdf(double x, double xi, double c_f, double c_n, int q)
{
    const double gap = c_f - x * c_n;
    if (gap <= 1e-300 * c_f)
        return 1.0;
    return specfun::cascade_cdf(x * xi / gap, q);
}

}  // namespace detail

inline double cdf_user_f(double x, const SystemParams& p)
{
    detail::require_threshold(x);
    const auto k = derive(p);
    return detail::ceiling_cdf(x, k.xi_f, k.c_f, k.c_n, p.Q);
}

// ---------------------------------------------------------------------------
// Eavesdropper CDFs (integrals of the PDFs below)
// ---------------------------------------------------------------------------

inline double cdf_eve_n_ipsic(double x, const SystemParams& p,
                              const specfun::QuadratureTable& table = quadrature())
{
    detail::require_threshold(x);
    const auto k = derive(p);
    return detail::clamp_probability(
        detail::mixture_cdf(x, p.Q, table, [&](double z) { return xi_e1(p, k, z); }));
}

inline double cdf_eve_n_psic(double x, const SystemParams& p)
{
    detail::require_threshold(x);
    return specfun::cascade_cdf(derive(p).xi_e2 * x, p.Q);
}

inline double cdf_eve_f(double x, const SystemParams& p)
{
    detail::require_threshold(x);
    const auto k = derive(p);
    return detail::ceiling_cdf(x, k.xi_e3, k.c_f_e, k.c_n_e, p.Q);
}

inline double cdf_internal_f_to_n(double x, const SystemParams& p)
{
    detail::require_threshold(x);
    return specfun::cascade_cdf(derive(p).xi_e4 * x, p.Q);
}

// ---------------------------------------------------------------------------
// Eavesdropper PDFs
// ---------------------------------------------------------------------------

inline double pdf_eve_n_ipsic(double x, const SystemParams& p,
                              const specfun::QuadratureTable& table = quadrature())
{
    if (!(x > 0.0))
        return 0.0;
    const auto k = derive(p);
    double sum = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i)
        sum += table.weights[i] * detail::scaled_cascade_pdf(x, xi_e1(p, k, table.nodes[i]), p.Q);
    return sum;
}

inline double pdf_eve_n_psic(double x, const SystemParams& p)
{
    if (!(x > 0.0))
        return 0.0;
    return detail::scaled_cascade_pdf(x, derive(p).xi_e2, p.Q);
}

/// Zero at and beyond the ceiling c_f / c_n.
inline double pdf_eve_f(double x, const SystemParams& p)
{
    if (!(x > 0.0))
        return 0.0;
    const auto k = derive(p);
    const double gap = k.c_f_e - x * k.c_n_e;
    if (gap <= 1e-300 * k.c_f_e)
        return 0.0;
    const double arg = k.xi_e3 * x / gap;
    const double jacobian = arg * k.c_f_e / (x * gap);
    return std::exp(specfun::log_cascade_pdf(arg, p.Q)) * jacobian;
}

inline double pdf_internal_f_to_n(double x, const SystemParams& p)
{
    if (!(x > 0.0))
        return 0.0;
    return detail::scaled_cascade_pdf(x, derive(p).xi_e4, p.Q);
}

// ---------------------------------------------------------------------------
// Secrecy outage probabilities
// ---------------------------------------------------------------------------

// Zero target rate: the clipped secrecy capacity is never below 0, so SOP = 0 exactly.
// The closed forms would instead give P(gamma_user < gamma_eve).

inline SopEstimate sop_external_n(const SystemParams& p, const QuadraturePair& tables, Sic sic)
{
    if (p.R_n == 0.0)
        return detail::clamped(0.0);
    const auto k = derive(p);
    if (sic == Sic::psic)
    {
        const double arg = eps_n2(p, k) * k.v_n / (k.c_n * k.omega_br * k.omega_rn);
        return detail::clamped(specfun::cascade_cdf(arg, p.Q));
    }
    const auto& ts = *tables.s;
    const auto& td = *tables.d;
    double outer = 0.0;
    for (std::size_t s = 0; s < ts.size(); ++s)
    {
        const double eps = eps_n1(p, k, ts.nodes[s]);
        outer += ts.weights[s] *
                 detail::mixture_cdf(eps, p.Q, td, [&](double z) { return xi_n(p, k, z); });
    }
    return detail::clamped(outer);
}

inline SopEstimate sop_external_n(const SystemParams& p, Sic sic)
{
    return sop_external_n(p, QuadraturePair{}, sic);
}

inline SopEstimate sop_external_f(const SystemParams& p)
{
    if (p.R_f == 0.0)
        return detail::clamped(0.0);
    const auto k = derive(p);
    const double eps = eps_f(p, k);
    return detail::clamped(detail::ceiling_cdf(eps, k.xi_f, k.c_f, k.c_n, p.Q));
}

inline SopEstimate sop_internal(const SystemParams& p, const specfun::QuadratureTable& table, Sic sic)
{
    if (p.R_n == 0.0)
        return detail::clamped(0.0);
    const auto k = derive(p);
    const double eps = eps_f_to_n(p, k);
    if (sic == Sic::psic)
        return detail::clamped(
            specfun::cascade_cdf(eps * k.v_n / (k.c_n * k.omega_br * k.omega_rn), p.Q));
    return detail::clamped(
        detail::mixture_cdf(eps, p.Q, table, [&](double z) { return xi_e5(p, k, z); }));
}

inline SopEstimate sop_internal(const SystemParams& p, Sic sic)
{
    return sop_internal(p, quadrature(), sic);
}

/// Dispatch on scenario. `sic` is ignored for external_f.
inline SopEstimate sop(const SystemParams& p, Scenario scenario, Sic sic,
                       const QuadraturePair& tables = {})
{
    switch (scenario)
    {
    case Scenario::external_n: return sop_external_n(p, tables, sic);
    case Scenario::external_f: return sop_external_f(p);
    case Scenario::internal: return sop_internal(p, *tables.d, sic);
    }
    throw UnsupportedScenario("unknown scenario");
}

/// |SOP(D, S) - SOP(2D, 2S)|: the quadrature truncation estimate.
inline double quadrature_sensitivity(const SystemParams& p, Scenario scenario, Sic sic,
                                     const QuadraturePair& tables = {})
{
    if (scenario == Scenario::external_f || sic == Sic::psic)
        return 0.0;
    const int d2 = std::min(2 * tables.d->order, specfun::kMaxQuadratureOrder);
    const int s2 = std::min(2 * tables.s->order, specfun::kMaxQuadratureOrder);
    return std::abs(sop(p, scenario, sic, tables).value -
                    sop(p, scenario, sic, QuadraturePair::of_order(d2, s2)).value);
}

inline constexpr double kQuadratureTolerance = 1e-8;

/// As sop(), with quadrature_unconverged set from the D vs 2D comparison.
inline SopEstimate sop_checked(const SystemParams& p, Scenario scenario, Sic sic,
                               const QuadraturePair& tables = {})
{
    auto e = sop(p, scenario, sic, tables);
    e.quadrature_unconverged = quadrature_sensitivity(p, scenario, sic, tables) > kQuadratureTolerance;
    return e;
}

/// 1 - (1 - P_n)(1 - P_f): outage of either user, treating the events as independent.
inline double system_sop(double sop_n, double sop_f)
{
    return 1.0 - (1.0 - sop_n) * (1.0 - sop_f);
}

// ---------------------------------------------------------------------------
// High-SNR asymptotes
// ---------------------------------------------------------------------------

namespace detail {

/// Small-argument expansion of cascade_cdf(u): -u ln u for Q = 1, u/(Q-1) otherwise.
/// Capped at 1; outside u < 0.1 the value is flagged rather than trusted.
inline SopEstimate small_argument(double u, int q)
{
    SopEstimate e;
    e.provenance = Provenance::asymptotic;
    e.value = std::clamp(q == 1 ? -u * std::log(u) : u / (q - 1), 0.0, 1.0);
    e.regime_valid = u < 0.1;
    return e;
}

}  // namespace detail

inline SopEstimate sop_asymptotic(const SystemParams& p, Scenario scenario, Sic sic,
                                  const QuadraturePair& tables = {})
{
    const bool has_asymptote = !(scenario == Scenario::internal && sic == Sic::ipsic);
    if (has_asymptote && (scenario == Scenario::external_f ? p.R_f : p.R_n) == 0.0)
        return detail::clamped(0.0, Provenance::asymptotic);
    const auto k = derive(p);
    const double legit_n = k.c_n * k.omega_br * k.omega_rn;
    switch (scenario)
    {
    case Scenario::external_n:
        if (sic == Sic::psic)
            return detail::small_argument(k.v_n * eps_n2(p, k) / legit_n, p.Q);
        else
        {
            const auto& ts = *tables.s;
            const auto& td = *tables.d;
            const double scale = p.varpi * p.omega_ipu /
                                 (p.a_n * p.kappa * p.kappa * k.omega_br * k.omega_rn);
            double outer = 0.0;
            for (std::size_t s = 0; s < ts.size(); ++s)
            {
                const double eps = eps_n1(p, k, ts.nodes[s]);
                outer += ts.weights[s] *
                         detail::mixture_cdf(eps, p.Q, td, [&](double z) { return scale * z; });
            }
            auto e = detail::clamped(outer, Provenance::asymptotic);
            // The legitimate link must be in its high-SNR regime, as for pSIC.
            e.regime_valid = k.v_n * eps_n2(p, k) / legit_n < 0.1;
            return e;
        }
    case Scenario::external_f:
    {
        const double eps = eps_f(p, k);
        const double gap = k.c_f - k.c_n * eps;
        if (gap <= 0.0)
        {
            SopEstimate e;
            e.provenance = Provenance::asymptotic;
            e.value = 1.0;
            e.regime_valid = false;
            return e;
        }
        return detail::small_argument(k.xi_f * eps / gap, p.Q);
    }
    case Scenario::internal:
        if (sic == Sic::ipsic)
            throw UnsupportedScenario("no high-SNR asymptote exists for the internal ipSIC scenario");
        return detail::small_argument(eps_f_to_n(p, k) * k.v_n / legit_n, p.Q);
    }
    throw UnsupportedScenario("unknown scenario");
}

// ---------------------------------------------------------------------------
// Diversity order and throughput
// ---------------------------------------------------------------------------

struct CurvePoint
{
    double rho;
    double sop;
};

/// -d log(SOP) / d log(rho) over the last two points of an ascending curve.
inline double diversity_order(const std::vector<CurvePoint>& curve)
{
    if (curve.size() < 2)
        throw DegenerateCurve("diversity_order needs at least two points");
    const auto& a = curve[curve.size() - 2];
    const auto& b = curve.back();
    if (!(a.sop > 0.0) || !(b.sop > 0.0))
        throw DegenerateCurve("diversity_order: SOP must be > 0 at the last two points");
    if (!(a.rho > 0.0) || !(b.rho > a.rho))
        throw DegenerateCurve("diversity_order: rho must be positive and strictly ascending");
    return -(std::log(b.sop) - std::log(a.sop)) / (std::log(b.rho) - std::log(a.rho));
}

/// (1 - SOP) R for the rate of the user the scenario protects.
inline double secrecy_throughput(double sop_value, double rate) { return (1.0 - sop_value) * rate; }

inline double target_rate(const SystemParams& p, Scenario scenario)
{
    return scenario == Scenario::external_f ? p.R_f : p.R_n;
}

inline double secrecy_throughput(const SystemParams& p, Scenario scenario, Sic sic,
                                 const QuadraturePair& tables = {})
{
    return secrecy_throughput(sop(p, scenario, sic, tables).value, target_rate(p, scenario));
}

}  // namespace arisnoma
