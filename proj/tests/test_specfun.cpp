#include "arisnoma/specfun.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace {

using arisnoma::specfun::bessel_k;
using arisnoma::specfun::cascade_ccdf;
using arisnoma::specfun::cascade_cdf;
using arisnoma::specfun::gauss_laguerre;
using arisnoma::specfun::ln_gamma;
using arisnoma::specfun::log_bessel_k;
using arisnoma::specfun::log_cascade_ccdf;
using arisnoma::specfun::log_cascade_pdf;
using Big = boost::multiprecision::cpp_bin_float_50;

Big oracle_k(int order, double x) { return boost::math::cyl_bessel_k(Big(order), Big(x)); }

/// 1 - (2/Gamma(Q)) y^{Q/2} K_Q(2 sqrt y), carried in 50 digits.
Big oracle_cascade_cdf(double y, int q)
{
    const Big by(y);
    const Big two_sqrt = 2 * sqrt(by);
    return 1 - 2 / boost::math::tgamma(Big(q)) * pow(by, Big(q) / 2) * boost::math::cyl_bessel_k(Big(q), two_sqrt);
}

double rel_error(double value, const Big& truth)
{
    return static_cast<double>(abs((Big(value) - truth) / truth));
}

TEST(BesselK, FrozenValues)
{
    EXPECT_NEAR(bessel_k(0, 1.0), 0.42102443824070833, 1e-16);
    EXPECT_NEAR(bessel_k(1, 2.0), 0.13986588181652243, 1e-16);
    EXPECT_NEAR(bessel_k(2, 0.5), 7.5501835512408695, 1e-14);
}

TEST(BesselK, MatchesOracleOnGrid)
{
    // 31 orders x 7 arguments spanning the series and continued-fraction branches.
    const double xs[] = {0.01, 0.3, 1.0, 1.999, 2.001, 7.5, 40.0};
    double worst = 0;
    for (int order = 0; order <= 30; ++order)
        for (double x : xs)
        {
            const double err = rel_error(bessel_k(order, x), oracle_k(order, x));
            worst = std::max(worst, err);
            EXPECT_LT(err, 1e-10) << "K_" << order << "(" << x << ")";
        }
    RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(BesselK, LogFormSurvivesUnderflow)
{
    for (int order : {0, 1, 5, 30})
        for (double x : {800.0, 999.0, 1001.0, 5000.0, 1e8, 1e20})
        {
            EXPECT_TRUE(arisnoma::specfun::bessel_k_underflows(order, x));
            const double truth = static_cast<double>(log(oracle_k(order, x)));
            EXPECT_NEAR(log_bessel_k(order, x), truth, 1e-12 * std::abs(truth));
        }
}

TEST(BesselK, RejectsBadArguments)
{
    EXPECT_THROW(bessel_k(-1, 1.0), std::domain_error);
    EXPECT_THROW(bessel_k(1, 0.0), std::domain_error);
    EXPECT_THROW(bessel_k(1, std::nan("")), std::domain_error);
}

TEST(BesselK, RecurrenceHolds)
{
    // K_{n+1}(x) = K_{n-1}(x) + (2n/x) K_n(x)
    for (int n = 1; n < 30; ++n)
        for (double x : {0.2, 1.5, 3.0, 12.0})
        {
            const double lhs = bessel_k(n + 1, x);
            const double rhs = bessel_k(n - 1, x) + 2.0 * n / x * bessel_k(n, x);
            EXPECT_NEAR(lhs, rhs, 1e-12 * lhs);
        }
}

TEST(LnGamma, MatchesStdLgamma)
{
    for (int n = 1; n <= 200; ++n)
        EXPECT_NEAR(ln_gamma(n), std::lgamma(static_cast<double>(n)), 1e-12 * std::max(1.0, ln_gamma(n)));
    EXPECT_THROW(ln_gamma(0), std::domain_error);
}

TEST(GaussLaguerre, OrderTwoClosedForm)
{
    const auto t = gauss_laguerre(2);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_NEAR(t.nodes[0], 2.0 - std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(t.nodes[1], 2.0 + std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(t.weights[0], (2.0 + std::sqrt(2.0)) / 4.0, 1e-14);
    EXPECT_NEAR(t.weights[1], (2.0 - std::sqrt(2.0)) / 4.0, 1e-14);
}

TEST(GaussLaguerre, ExactThroughDegree2DMinus1)
{
    for (int d : {2, 16, 64})
    {
        const auto t = gauss_laguerre(d);
        for (int k = 0; k <= 2 * d - 1; ++k)
        {
            double sum = 0;
            for (std::size_t i = 0; i < t.size(); ++i)
                sum += t.weights[i] * std::pow(t.nodes[i], k);
            const double exact = std::exp(ln_gamma(k + 1));
            EXPECT_NEAR(sum / exact, 1.0, 1e-10) << "D=" << d << " degree " << k;
        }
    }
}

TEST(GaussLaguerre, InvariantsAcrossOrders)
{
    for (int d : {1, 3, 10, 64, 128, 200, 333, 512})
    {
        const auto t = gauss_laguerre(d);
        ASSERT_EQ(static_cast<int>(t.size()), d);
        double total = 0;
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            EXPECT_GT(t.nodes[i], 0.0);
            if (i > 0)
            {
                EXPECT_GT(t.nodes[i], t.nodes[i - 1]);
            }
            EXPECT_GE(t.weights[i], 0.0);
            EXPECT_TRUE(std::isfinite(t.log_weights[i]));
            if (t.weights[i] >= std::numeric_limits<double>::min())  // subnormals carry too few digits
            {
                EXPECT_NEAR(std::log(t.weights[i]), t.log_weights[i], 1e-9 * std::abs(t.log_weights[i]) + 1e-12);
            }
            total += t.weights[i];
        }
        // Round-off in sum w_i grows with D; the rule integrates 1 exactly in exact arithmetic.
        EXPECT_NEAR(total, 1.0, d <= 128 ? 1e-12 : 1e-10) << "D=" << d;
    }
}

TEST(GaussLaguerre, RejectsOutOfRangeOrder)
{
    EXPECT_THROW(gauss_laguerre(0), std::domain_error);
    EXPECT_THROW(gauss_laguerre(arisnoma::specfun::kMaxQuadratureOrder + 1), std::domain_error);
}

TEST(Cascade, CdfMatchesOracle)
{
    for (int q : {1, 2, 5, 10, 20, 30})
        for (double y : {1e-12, 1e-4, 0.01, 0.3, 0.49, 0.51, 2.0, 15.0, 60.0})
        {
            const Big truth = oracle_cascade_cdf(y, q);
            if (truth < Big(1e-30))
                continue;  // beyond the oracle's 50 digits after cancellation
            if (truth < Big(0.5))
                EXPECT_LT(rel_error(cascade_cdf(y, q), truth), 1e-10) << "Q=" << q << " y=" << y;
            else
                EXPECT_LT(rel_error(cascade_ccdf(y, q), 1 - truth), 1e-10) << "Q=" << q << " y=" << y;
        }
}

TEST(Cascade, SmallArgumentLeadingTerm)
{
    // F(y) = y / (Q - 1) + O(y^2 ln y) for Q >= 2; y ln(1/y) leads for Q = 1.
    for (int q : {2, 5, 20})
        EXPECT_NEAR(cascade_cdf(1e-12, q) * (q - 1) / 1e-12, 1.0, 1e-9) << "Q=" << q;
    const double y = 1e-12;
    EXPECT_NEAR(cascade_cdf(y, 1) / (-y * std::log(y)), 1.0, 0.1);
}

TEST(Cascade, CdfIsMonotoneAndBounded)
{
    for (int q : {1, 4, 20})
    {
        double prev = 0;
        for (double y = 1e-6; y < 500; y *= 1.3)
        {
            const double c = cascade_cdf(y, q);
            EXPECT_GE(c, prev);
            EXPECT_LE(c, 1.0);
            EXPECT_NEAR(c + cascade_ccdf(y, q), 1.0, 1e-14);
            prev = c;
        }
    }
    EXPECT_EQ(cascade_cdf(0.0, 3), 0.0);
    EXPECT_EQ(log_cascade_ccdf(0.0, 3), 0.0);
}

TEST(Cascade, PdfNormalizesAndMatchesCdfSlope)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    for (int q : {1, 2, 7, 20})
    {
        auto pdf = [q](double y) { return std::exp(log_cascade_pdf(y, q)); };
        EXPECT_NEAR(integrator.integrate(pdf), 1.0, 1e-10) << "Q=" << q;
        for (double y : {0.05, 0.7, 3.0, 25.0})
        {
            const double h = 1e-5 * y;
            const double slope = (cascade_cdf(y + h, q) - cascade_cdf(y - h, q)) / (2 * h);
            EXPECT_NEAR(slope / pdf(y), 1.0, 1e-6) << "Q=" << q << " y=" << y;
        }
    }
}

TEST(Cascade, PdfAtOrigin)
{
    EXPECT_EQ(log_cascade_pdf(0.0, 1), std::numeric_limits<double>::infinity());
    EXPECT_EQ(log_cascade_pdf(0.0, 2), 0.0);
    EXPECT_EQ(log_cascade_pdf(0.0, 3), -std::numeric_limits<double>::infinity());
}

}  // namespace
