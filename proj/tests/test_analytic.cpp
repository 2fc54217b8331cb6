#include "arisnoma/analytic.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace {

using namespace arisnoma;

constexpr double kPsPlusDc = 2e-10;  // -70 dBm each

SystemParams aris_at(double p_tot_dbm)
{
    SystemParams p;
    const double p_tot = dbm_to_watts(p_tot_dbm);
    p.p_bs = 0.8 * p_tot - p.Q * kPsPlusDc;
    return p;
}

SystemParams pris_at(double p_tot_dbm)
{
    SystemParams p;
    p.kappa = 1.0;
    p.sigma2_t = 0.0;
    p.p_bs = dbm_to_watts(p_tot_dbm) - p.M * 1e-10;
    return p;
}

/// E over Exp(1) by adaptive integration, independent of the Gauss-Laguerre tables.
double expect_exp(const std::function<double(double)>& f)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double z) { return std::exp(-z) * f(z); }, 1e-12);
}

TEST(Sop, FrozenValuesAtTwentyDbm)
{
    const auto p = aris_at(20.0);
    EXPECT_NEAR(sop(p, Scenario::external_n, Sic::ipsic).value, 0.420431, 5e-6);
    EXPECT_NEAR(sop(p, Scenario::external_n, Sic::psic).value, 0.414818, 5e-6);
    EXPECT_NEAR(sop(p, Scenario::external_f, Sic::psic).value, 0.722239, 5e-6);
    EXPECT_NEAR(sop(p, Scenario::internal, Sic::ipsic).value, 0.458940, 5e-6);
    EXPECT_NEAR(sop(p, Scenario::internal, Sic::psic).value, 0.414818, 5e-6);
}

TEST(Sop, ExternalNearIpsicMatchesAdaptiveDoubleIntegral)
{
    for (double dbm : {10.0, 20.0, 26.0})
    {
        const auto p = aris_at(dbm);
        const auto k = derive(p);
        const double oracle = expect_exp([&](double zs) {
            const double eps = eps_n1(p, k, zs);
            return expect_exp([&](double zd) { return specfun::cascade_cdf(xi_n(p, k, zd) * eps, p.Q); });
        });
        EXPECT_NEAR(sop(p, Scenario::external_n, Sic::ipsic).value, oracle, 1e-8) << dbm << " dBm";
    }
}

TEST(Sop, InternalIpsicMatchesAdaptiveIntegral)
{
    for (double dbm : {10.0, 20.0, 26.0})
    {
        const auto p = aris_at(dbm);
        const auto k = derive(p);
        const double eps = eps_f_to_n(p, k);
        const double oracle =
            expect_exp([&](double z) { return specfun::cascade_cdf(xi_e5(p, k, z) * eps, p.Q); });
        EXPECT_NEAR(sop(p, Scenario::internal, Sic::ipsic).value, oracle, 1e-8) << dbm << " dBm";
    }
}

TEST(Sop, PerfectSicClosedFormsByHand)
{
    const auto p = aris_at(25.0);
    const auto k = derive(p);
    const double snr_e = p.kappa * p.kappa * k.rho_e * p.Q * k.omega_br * k.omega_re;
    const double t = p.kappa * p.kappa * p.sigma2_t * p.Q * k.omega_re / p.sigma2_e;
    const double eps_n = std::exp2(p.R_n) * (1 + p.a_n * snr_e / (t + 1)) - 1;
    const double u_n = eps_n * k.v_n / (k.c_n * k.omega_br * k.omega_rn);
    EXPECT_NEAR(sop(p, Scenario::external_n, Sic::psic).value, specfun::cascade_cdf(u_n, p.Q), 1e-15);

    const double eps_f = std::exp2(p.R_f) * (1 + p.a_f * snr_e / (t + p.a_n * snr_e + 1)) - 1;
    const double u_f = eps_f * k.v_f / (k.omega_br * k.omega_rf * (k.c_f - eps_f * k.c_n));
    EXPECT_NEAR(sop(p, Scenario::external_f, Sic::psic).value, specfun::cascade_cdf(u_f, p.Q), 1e-15);
}

TEST(Sop, FarUserPastCeilingIsCertainOutage)
{
    SystemParams p = aris_at(40.0);
    p.R_f = 3.0;  // 2^R - 1 = 7 > a_f / a_n
    EXPECT_EQ(sop(p, Scenario::external_f, Sic::psic).value, 1.0);
    EXPECT_EQ(cdf_user_f(p.a_f / p.a_n, p), 1.0);
}

TEST(Cdf, LegitimateAndEveCdfsAreMonotoneAndBounded)
{
    const auto p = aris_at(20.0);
    const auto pp = with_sic(p, Sic::psic);
    const std::vector<std::function<double(double)>> cdfs = {
        [&](double x) { return cdf_user_n_ipsic(x, p); },  [&](double x) { return cdf_user_n_psic(x, pp); },
        [&](double x) { return cdf_user_f(x, pp); },       [&](double x) { return cdf_eve_n_ipsic(x, p); },
        [&](double x) { return cdf_eve_n_psic(x, pp); },   [&](double x) { return cdf_eve_f(x, pp); },
        [&](double x) { return cdf_internal_f_to_n(x, pp); },
    };
    for (std::size_t i = 0; i < cdfs.size(); ++i)
    {
        EXPECT_EQ(cdfs[i](0.0), 0.0);
        double prev = 0;
        for (double x = 1e-4; x < 1e4; x *= 1.5)
        {
            const double c = cdfs[i](x);
            EXPECT_GE(c, prev - 1e-15) << "cdf " << i << " at " << x;
            EXPECT_LE(c, 1.0);
            prev = c;
        }
        EXPECT_GT(prev, 0.999) << "cdf " << i;
        EXPECT_THROW(cdfs[i](-1.0), std::domain_error);
    }
}

TEST(Pdf, NormalizeAndMatchCdfSlope)
{
    const auto p = aris_at(20.0);
    const auto pp = with_sic(p, Sic::psic);
    struct Pair
    {
        const char* name;
        std::function<double(double)> pdf, cdf;
    };
    const std::vector<Pair> pairs = {
        {"eve_n/ipsic", [&](double x) { return pdf_eve_n_ipsic(x, p); }, [&](double x) { return cdf_eve_n_ipsic(x, p); }},
        {"eve_n/psic", [&](double x) { return pdf_eve_n_psic(x, pp); }, [&](double x) { return cdf_eve_n_psic(x, pp); }},
        {"eve_f", [&](double x) { return pdf_eve_f(x, pp); }, [&](double x) { return cdf_eve_f(x, pp); }},
        {"internal", [&](double x) { return pdf_internal_f_to_n(x, pp); },
         [&](double x) { return cdf_internal_f_to_n(x, pp); }},
    };
    const auto k = derive(pp);
    for (const auto& pair : pairs)
    {
        // The far-user Eve SINR lives on (0, c_f / c_n); the others on (0, inf).
        double mass;
        if (std::string(pair.name) == "eve_f")
            mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(pair.pdf, 0.0, k.c_f_e / k.c_n_e, 15,
                                                                                 1e-12);
        else
            mass = boost::math::quadrature::exp_sinh<double>().integrate(pair.pdf, 1e-12);
        EXPECT_NEAR(mass, 1.0, 1e-6) << pair.name;
        for (double level : {0.1, 0.5, 0.9})
        {
            double lo = 1e-9, hi = 1e9;
            for (int i = 0; i < 200; ++i)
            {
                const double mid = std::sqrt(lo * hi);
                (pair.cdf(mid) < level ? lo : hi) = mid;
            }
            const double h = 1e-5 * hi;
            const double slope = (pair.cdf(hi + h) - pair.cdf(hi - h)) / (2 * h);
            EXPECT_NEAR(pair.pdf(hi) / slope, 1.0, 1e-6) << pair.name << " at quantile " << level;
        }
    }
}

TEST(Sic, ZeroVarpiCollapsesToPerfectSic)
{
    for (double dbm : {5.0, 20.0, 35.0})
    {
        auto p = aris_at(dbm);
        p.varpi = 0.0;
        for (auto s : {Scenario::external_n, Scenario::internal})
            EXPECT_NEAR(sop(p, s, Sic::ipsic).value, sop(p, s, Sic::psic).value, 1e-9);
        for (double x : {0.1, 1.0, 10.0})
        {
            EXPECT_NEAR(cdf_user_n_ipsic(x, p), cdf_user_n_psic(x, p), 1e-9);
            EXPECT_NEAR(cdf_eve_n_ipsic(x, p), cdf_eve_n_psic(x, p), 1e-9);
            EXPECT_NEAR(pdf_eve_n_ipsic(x, p), pdf_eve_n_psic(x, p), 1e-9 * pdf_eve_n_psic(x, p) + 1e-300);
        }
    }
}

TEST(Sic, ImperfectNeverHelpsAgainstInternalEve)
{
    for (double dbm = 0; dbm <= 40; dbm += 5)
    {
        const auto p = aris_at(dbm);
        EXPECT_GE(sop(p, Scenario::internal, Sic::ipsic).value, sop(p, Scenario::internal, Sic::psic).value - 1e-12);
    }
}

TEST(Sic, ImperfectHurtsExternalNearUserWhenEveResidualIsSmall)
{
    for (double dbm = 10; dbm <= 40; dbm += 5)
    {
        auto p = aris_at(dbm);
        p.omega_ipe = 1e-14;
        EXPECT_GE(sop(p, Scenario::external_n, Sic::ipsic).value,
                  sop(p, Scenario::external_n, Sic::psic).value - 1e-12);
    }
}

TEST(Sop, DecreasesWithBudgetWhenEveIsHeldFixed)
{
    for (auto s : {Scenario::external_n, Scenario::external_f, Scenario::internal})
    {
        double prev = 1.0;
        for (double dbm = 10; dbm <= 60; dbm += 5)
        {
            auto p = aris_at(dbm);
            p.p_bs_eve = aris_at(20.0).p_bs;
            const double v = sop(p, s, Sic::psic).value;
            EXPECT_LE(v, prev + 1e-15) << to_string(s) << " " << dbm;
            prev = v;
        }
    }
}

TEST(Quadrature, SixtyFourNodesConvergeAtModerateBudgets)
{
    for (double dbm : {-40.0, -20.0, 10.0, 20.0})
    {
        const auto p = aris_at(dbm);
        for (auto s : {Scenario::external_n, Scenario::internal})
        {
            EXPECT_LT(quadrature_sensitivity(p, s, Sic::ipsic), kQuadratureTolerance) << dbm;
            EXPECT_FALSE(sop_checked(p, s, Sic::ipsic).quadrature_unconverged);
        }
    }
}

TEST(Quadrature, CacheReturnsStableTables)
{
    const auto* a = &quadrature(64);
    const auto* b = &quadrature(64);
    EXPECT_EQ(a, b);
    EXPECT_EQ(quadrature(17).order, 17);
}

TEST(Asymptote, ConvergesToExactAtHighSnr)
{
    // Eve held at the 20 dBm budget; legitimate power raised.
    for (double dbm : {60.0, 70.0})
    {
        auto p = aris_at(dbm);
        p.p_bs_eve = aris_at(20.0).p_bs;
        for (auto [s, sic] : {std::pair{Scenario::external_n, Sic::psic}, {Scenario::external_f, Sic::psic},
                              {Scenario::internal, Sic::psic}, {Scenario::external_n, Sic::ipsic}})
        {
            const auto exact = sop(p, s, sic);
            const auto asy = sop_asymptotic(p, s, sic);
            EXPECT_EQ(asy.provenance, Provenance::asymptotic);
            EXPECT_NEAR(asy.value / exact.value, 1.0, 0.05) << to_string(s) << "/" << to_string(sic) << " " << dbm;
            if (sic == Sic::psic)
            {
                EXPECT_TRUE(asy.regime_valid);
            }
        }
    }
}

TEST(Asymptote, InternalImperfectSicIsUnsupported)
{
    EXPECT_THROW(sop_asymptotic(aris_at(20.0), Scenario::internal, Sic::ipsic), UnsupportedScenario);
}

TEST(Asymptote, ValueStaysAProbabilityOutsideItsRegime)
{
    const auto a = sop_asymptotic(pris_at(0.0), Scenario::external_f, Sic::psic);
    EXPECT_LE(a.value, 1.0);
    EXPECT_FALSE(a.regime_valid);
}

TEST(Diversity, SlopeOfSyntheticCurves)
{
    EXPECT_NEAR(diversity_order({{10, 1e-2}, {100, 1e-3}}), 1.0, 1e-12);
    EXPECT_NEAR(diversity_order({{1, 0.5}, {10, 0.5}, {100, 0.5}}), 0.0, 1e-12);
    EXPECT_THROW(diversity_order({{1, 0.5}}), DegenerateCurve);
    EXPECT_THROW(diversity_order({{1, 0.5}, {10, 0.0}}), DegenerateCurve);
    EXPECT_THROW(diversity_order({{10, 0.5}, {1, 0.4}}), DegenerateCurve);
}

TEST(Throughput, IsOneMinusSopTimesRate)
{
    const auto p = aris_at(20.0);
    for (auto s : {Scenario::external_n, Scenario::external_f, Scenario::internal})
        for (auto sic : {Sic::ipsic, Sic::psic})
            EXPECT_EQ(secrecy_throughput(p, s, sic), (1.0 - sop(p, s, sic).value) * target_rate(p, s));
}

TEST(Fuzz, SopIsAProbability)
{
    std::mt19937_64 rng(20261016);
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    for (int i = 0; i < 200; ++i)
    {
        SystemParams p;
        p.P = 1 + static_cast<int>(uni(0, 4));
        p.Q = 1 + static_cast<int>(uni(0, 30));
        p.M = p.P * p.Q;
        p.kappa = uni(1, 30);
        p.a_f = uni(0.55, 0.95);
        p.a_n = 1 - p.a_f;
        p.R_n = uni(0, 2);
        p.R_f = uni(0, 2);
        p.varpi = uni(0, 1);
        p.omega_ipu = db_to_linear(uni(-100, -40));
        p.omega_ipe = db_to_linear(uni(-100, -40));
        p.sigma2_t = dbm_to_watts(uni(-80, -20));
        p.p_bs = dbm_to_watts(uni(-40, 50));
        for (auto s : {Scenario::external_n, Scenario::external_f, Scenario::internal})
            for (auto sic : {Sic::ipsic, Sic::psic})
            {
                const double v = sop(p, s, sic).value;
                ASSERT_TRUE(v >= 0.0 && v <= 1.0) << i;
            }
    }
}

}  // namespace
