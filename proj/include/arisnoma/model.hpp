#pragma once

// Scenario parameters, the composite constants both engines share, and the
// exact per-draw SINRs of the on-off controlled downlink.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace arisnoma {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1e3); }

enum class Sic { ipsic, psic };

inline const char* to_string(Sic sic) { return sic == Sic::ipsic ? "ipsic" : "psic"; }

class InvalidParams : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// One scenario. All quantities are linear: watts, meters, variances.
/// Defaults are the Table I geometry with an ARIS of M = 40, P = 2, Q = 20.
struct SystemParams
{
    double d_br = 20.0;
    double d_rn = 10.0;
    double d_rf = 20.0;
    double d_re = 20.0;
    double alpha = 2.0;
    double beta = 1e-3;

    int M = 40;
    int P = 2;
    int Q = 20;
    double kappa = 10.0;

    double sigma2 = 3.1622776601683795e-09;    // -55 dBm
    double sigma2_e = 3.1622776601683795e-09;  // -55 dBm
    double sigma2_t = 1e-7;                    // -40 dBm

    double a_f = 0.7;
    double a_n = 0.3;
    double R_f = 0.05;
    double R_n = 0.05;

    double varpi = 1.0;
    double omega_ipu = 1e-8;
    double omega_ipe = 1e-8;

    double p_bs = 1e-3;
    /// BS power as seen by the eavesdroppers; equal to p_bs when unset.
    std::optional<double> p_bs_eve;

    double eve_power() const { return p_bs_eve.value_or(p_bs); }
};

/// Throws InvalidParams naming the first violated invariant.
inline void validate(const SystemParams& p)
{
    auto fail = [](const std::string& what) { throw InvalidParams(what); };
    if (p.M < 1 || p.P < 1 || p.Q < 1)
        fail("M, P, Q must be positive integers");
    if (p.M != p.P * p.Q)
        fail("M must equal P*Q (got M=" + std::to_string(p.M) + ", P=" + std::to_string(p.P) +
             ", Q=" + std::to_string(p.Q) + ")");
    for (auto [name, v] : {std::pair{"d_br", p.d_br}, {"d_rn", p.d_rn}, {"d_rf", p.d_rf},
                           {"d_re", p.d_re}, {"beta", p.beta}, {"sigma2", p.sigma2},
                           {"sigma2_e", p.sigma2_e}, {"p_bs", p.p_bs},
                           {"omega_ipu", p.omega_ipu}, {"omega_ipe", p.omega_ipe}})
    {
        if (!(v > 0.0) || !std::isfinite(v))
            fail(std::string(name) + " must be finite and > 0");
    }
    if (!(p.alpha > 0.0))
        fail("alpha must be > 0");
    if (!(p.sigma2_t >= 0.0))
        fail("sigma2_t must be >= 0");
    if (!(p.kappa >= 1.0))
        fail("kappa must be >= 1");
    if (!(p.varpi >= 0.0 && p.varpi <= 1.0))
        fail("varpi must lie in [0, 1]");
    if (!(p.a_n > 0.0 && p.a_f > p.a_n) || std::abs(p.a_f + p.a_n - 1.0) > 1e-12)
        fail("power split must satisfy a_f > a_n > 0 and a_f + a_n = 1");
    if (!(p.R_f >= 0.0 && p.R_n >= 0.0))
        fail("target rates must be >= 0");
    if (p.p_bs_eve && !(*p.p_bs_eve > 0.0))
        fail("p_bs_eve must be > 0");
}

/// Mean power gain beta * d^-alpha of one element-to-node link.
inline double mean_channel_gain(double d, double alpha, double beta)
{
    if (!(d > 0.0))
        throw std::domain_error("mean_channel_gain: distance must be > 0");
    return beta * std::pow(d, -alpha);
}

/// Composite symbols computed once per scenario. Eavesdropper-side constants
/// (suffix _e, rho_e, xi_e*) use SystemParams::eve_power().
struct DerivedConstants
{
    double omega_br = 0, omega_rn = 0, omega_rf = 0, omega_re = 0;
    double c_n = 0, c_f = 0;
    double c_n_e = 0, c_f_e = 0;
    double v_n = 0, v_f = 0, v_e1 = 0, v_e2 = 0;
    double rho_e = 0;
    double xi_f = 0;
    double xi_e2 = 0, xi_e3 = 0, xi_e4 = 0;

    double thermal = 0;   // kappa^2 sigma_t^2, per unit of on-group norm
    double ip_user = 0;   // varpi P_BS
    double ip_eve = 0;    // varpi P_BS (eavesdropper reference)
    double sigma2 = 0, sigma2_e = 0;
};

inline DerivedConstants derive(const SystemParams& p)
{
    DerivedConstants k;
    k.omega_br = mean_channel_gain(p.d_br, p.alpha, p.beta);
    k.omega_rn = mean_channel_gain(p.d_rn, p.alpha, p.beta);
    k.omega_rf = mean_channel_gain(p.d_rf, p.alpha, p.beta);
    k.omega_re = mean_channel_gain(p.d_re, p.alpha, p.beta);

    const double kappa2 = p.kappa * p.kappa;
    const double p_eve = p.eve_power();
    k.c_n = p.a_n * p.p_bs * kappa2;
    k.c_f = p.a_f * p.p_bs * kappa2;
    k.c_n_e = p.a_n * p_eve * kappa2;
    k.c_f_e = p.a_f * p_eve * kappa2;

    k.thermal = kappa2 * p.sigma2_t;
    k.v_n = k.thermal * p.Q * k.omega_rn + p.sigma2;
    k.v_f = k.thermal * p.Q * k.omega_rf + p.sigma2;
    k.v_e1 = k.thermal * p.Q * k.omega_re + p.sigma2_e;
    k.v_e2 = k.thermal * p.Q * k.omega_rf + p.sigma2_e;
    k.rho_e = p_eve / p.sigma2_e;

    k.xi_f = k.v_f / (k.omega_br * k.omega_rf);
    k.xi_e2 = k.v_e1 / (k.c_n_e * k.omega_br * k.omega_re);
    k.xi_e3 = k.v_e1 / (k.omega_br * k.omega_re);
    k.xi_e4 = k.v_e2 / (k.c_n_e * k.omega_br * k.omega_rf);

    k.ip_user = p.varpi * p.p_bs;
    k.ip_eve = p.varpi * p_eve;
    k.sigma2 = p.sigma2;
    k.sigma2_e = p.sigma2_e;
    return k;
}

/// The same scenario with perfect SIC forced (varpi = 0) or left as given.
inline SystemParams with_sic(SystemParams p, Sic sic)
{
    if (sic == Sic::psic)
        p.varpi = 0.0;
    return p;
}

/// One realization of every random quantity the SINRs depend on.
struct ChannelDraw
{
    double cascaded_gain_n = 0;  // |sum_q conj(h_rn^q) h_br^q|^2
    double cascaded_gain_f = 0;
    double cascaded_gain_e = 0;
    double norm_n = 0;  // sum_q |h_rn^q|^2 over the on-group
    double norm_f = 0;
    double norm_e = 0;
    double ip_user = 0;  // |h_ipu|^2
    double ip_eve = 0;   // |h_ipe|^2
};

inline double sinr_user_n(const ChannelDraw& d, const DerivedConstants& k)
{
    return k.c_n * d.cascaded_gain_n / (k.thermal * d.norm_n + k.ip_user * d.ip_user + k.sigma2);
}

inline double sinr_user_f(const ChannelDraw& d, const DerivedConstants& k)
{
    return k.c_f * d.cascaded_gain_f /
           (k.c_n * d.cascaded_gain_f + k.thermal * d.norm_f + k.sigma2);
}

inline double sinr_eve_n(const ChannelDraw& d, const DerivedConstants& k)
{
    return k.c_n_e * d.cascaded_gain_e /
           (k.thermal * d.norm_e + k.ip_eve * d.ip_eve + k.sigma2_e);
}

inline double sinr_eve_f(const ChannelDraw& d, const DerivedConstants& k)
{
    return k.c_f_e * d.cascaded_gain_e /
           (k.c_n_e * d.cascaded_gain_e + k.thermal * d.norm_e + k.sigma2_e);
}

/// User f decoding user n's message: its own cascade, Eve-grade noise.
inline double sinr_internal_f_to_n(const ChannelDraw& d, const DerivedConstants& k)
{
    return k.c_n_e * d.cascaded_gain_f / (k.thermal * d.norm_f + k.sigma2_e);
}

inline double sinr_user_n(const ChannelDraw& d, const SystemParams& p) { return sinr_user_n(d, derive(p)); }
inline double sinr_user_f(const ChannelDraw& d, const SystemParams& p) { return sinr_user_f(d, derive(p)); }
inline double sinr_eve_n(const ChannelDraw& d, const SystemParams& p) { return sinr_eve_n(d, derive(p)); }
inline double sinr_eve_f(const ChannelDraw& d, const SystemParams& p) { return sinr_eve_f(d, derive(p)); }
inline double sinr_internal_f_to_n(const ChannelDraw& d, const SystemParams& p)
{
    return sinr_internal_f_to_n(d, derive(p));
}

}  // namespace arisnoma
