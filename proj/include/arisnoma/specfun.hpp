#pragma once

// Special-function kernel: integer-order modified Bessel K, log-factorial,
// Gauss-Laguerre tables and the cascaded-Rayleigh distribution built on them.
// Everything here is a pure function; tables are immutable values.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arisnoma::specfun {

namespace detail {

inline constexpr double kEulerGamma = 0.57721566490153286061;

inline void require_bessel_arg(int order, double x)
{
    if (order < 0)
        throw std::domain_error("bessel_k: negative order " + std::to_string(order));
    if (!std::isfinite(x) || x <= 0.0)
        throw std::domain_error("bessel_k: argument must be finite and > 0, got " +
                                std::to_string(x));
}

// Ascending series around the origin, valid (and used) for 0 < x <= 2.
inline std::pair<double, double> bessel_k01_series(double x)
{
    const double t = 0.25 * x * x;
    const double log_half_x = std::log(0.5 * x);

    // K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k t^k / (k!)^2
    double i0 = 1.0;
    double s0 = 0.0;
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1) + psi(k+2)] t^k / (k! (k+1)!)
    double i1 = 1.0;
    double s1 = 1.0 - 2.0 * kEulerGamma;  // psi(1) + psi(2)

    double term0 = 1.0;  // t^k / (k!)^2
    double term1 = 1.0;  // t^k / (k! (k+1)!)
    double harmonic = 0.0;
    for (int k = 1; k < 64; ++k)
    {
        term0 *= t / (static_cast<double>(k) * k);
        term1 *= t / (static_cast<double>(k) * (k + 1));
        harmonic += 1.0 / k;
        const double harmonic_next = harmonic + 1.0 / (k + 1);
        i0 += term0;
        s0 += harmonic * term0;
        i1 += term1;
        s1 += (harmonic + harmonic_next - 2.0 * kEulerGamma) * term1;
        if (term0 < 1e-18 * i0 && term1 < 1e-18 * i1)
            break;
    }
    const double k0 = -(log_half_x + kEulerGamma) * i0 + s0;
    const double k1 = 1.0 / x + log_half_x * (0.5 * x * i1) - 0.25 * x * s1;
    return {std::log(k0), std::log(k1)};
}

// Steed's continued fraction (Temme's CF2) for x > 2, returned in log space so
// that arguments far beyond the exponential underflow threshold stay usable.
// Hankel expansion for large x, where the CF2 recurrence terms overflow.
// sum_k prod_{j<=k} (4 nu^2 - (2j-1)^2) / (j 8x); truncated well before divergence.
inline double log_hankel_k(double nu, double x)
{
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j < 30 && std::abs(term) > 1e-18; ++j)
    {
        term *= (mu - (2.0 * j - 1) * (2.0 * j - 1)) / (j * 8.0 * x);
        sum += term;
    }
    return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x + std::log(sum);
}

inline constexpr double kHankelThreshold = 1e3;

inline std::pair<double, double> bessel_k01_cf(double x)
{
    if (x > kHankelThreshold)
        return {log_hankel_k(0.0, x), log_hankel_k(1.0, x)};

    constexpr double kEps = 1e-17;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i < 10000; ++i)
    {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps)
            break;
    }
    h *= a1;
    const double log_k0 = 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x - std::log(s);
    const double log_k1 = log_k0 + std::log((x + 0.5 - h) / x);
    return {log_k0, log_k1};
}

}  // namespace detail

/// Natural log of Gamma(n) = (n-1)! for positive integer n.
inline double ln_gamma(int n)
{
    if (n < 1)
        throw std::domain_error("ln_gamma: n must be >= 1, got " + std::to_string(n));
    if (n <= 23)
    {
        double factorial = 1.0;  // exact in binary64 up to 22!
        for (int k = 2; k < n; ++k)
            factorial *= k;
        return std::log(factorial);
    }
    return std::lgamma(static_cast<double>(n));
}

/// ln K_Q(x). Finite for every x > 0, including arguments where K_Q itself
/// under- or overflows a double.
inline double log_bessel_k(int order, double x)
{
    detail::require_bessel_arg(order, x);
    const auto [log_k0, log_k1] =
        x <= 2.0 ? detail::bessel_k01_series(x) : detail::bessel_k01_cf(x);
    if (order == 0)
        return log_k0;
    // Upward recurrence on the ratio r_n = K_n / K_{n-1}:
    //   r_{n+1} = 1 / r_n + 2n / x, all terms positive.
    double ratio = std::exp(log_k1 - log_k0);
    double log_k = log_k1;
    for (int n = 1; n < order; ++n)
    {
        ratio = 1.0 / ratio + 2.0 * n / x;
        log_k += std::log(ratio);
    }
    return log_k;
}

/// K_Q(x) for integer Q >= 0 and x > 0. Returns 0 where the value underflows;
/// see bessel_k_underflows().
inline double bessel_k(int order, double x)
{
    return std::exp(log_bessel_k(order, x));
}

inline bool bessel_k_underflows(int order, double x)
{
    return log_bessel_k(order, x) < std::log(std::numeric_limits<double>::min());
}

// ---------------------------------------------------------------------------
// Gauss-Laguerre quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of the D-point rule for integral_0^inf e^{-t} f(t) dt.
///
/// Weights of the largest nodes fall below the double range once D exceeds
/// about 175; `log_weights` always holds the exact values and `weights` the
/// (possibly underflowed) exponentials.
struct QuadratureTable
{
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> log_weights;

    std::size_t size() const { return nodes.size(); }
};

inline constexpr int kMaxQuadratureOrder = 512;

/// Roots of the degree-D Laguerre polynomial (normalized L_D(0) = 1) by
/// Newton iteration, with weights 1 / (t [L'_D(t)]^2).
inline QuadratureTable gauss_laguerre(int order)
{
    if (order < 1 || order > kMaxQuadratureOrder)
        throw std::domain_error("gauss_laguerre: order must be in [1, " +
                                std::to_string(kMaxQuadratureOrder) + "], got " +
                                std::to_string(order));
    const double n = order;
    QuadratureTable table;
    table.order = order;
    table.nodes.resize(order);
    table.weights.resize(order);
    table.log_weights.resize(order);

    constexpr double kRescale = 1e150;
    const double log_rescale = std::log(kRescale);

    double z = 0.0;
    for (int i = 0; i < order; ++i)
    {
        if (i == 0)
            z = 3.0 / (1.0 + 2.4 * n);
        else if (i == 1)
            z += 15.0 / (1.0 + 2.5 * n);
        else
        {
            const double ai = i - 1;
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - table.nodes[i - 2]);
        }

        double p_prev = 0.0;  // L_{D-1}(z), scaled by exp(-log_scale)
        double log_scale = 0.0;
        double derivative = 0.0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p1 = 1.0;
            double p2 = 0.0;
            log_scale = 0.0;
            for (int j = 1; j <= order; ++j)
            {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0 - z) * p2 - (j - 1.0) * p3) / j;
                if (std::abs(p1) > kRescale)
                {
                    p1 /= kRescale;
                    p2 /= kRescale;
                    log_scale += log_rescale;
                }
            }
            derivative = (n * p1 - n * p2) / z;
            p_prev = p2;
            const double z_old = z;
            z = z_old - p1 / derivative;
            if (std::abs(z - z_old) <= 1e-14 * z)
                break;
        }
        table.nodes[i] = z;
        // At a root L_D = 0, so L'_D(z) = -D L_{D-1}(z) / z.
        table.log_weights[i] =
            std::log(z) - 2.0 * std::log(n) - 2.0 * (std::log(std::abs(p_prev)) + log_scale);
        table.weights[i] = std::exp(table.log_weights[i]);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Cascaded Rayleigh distribution
// ---------------------------------------------------------------------------
//
// For Z = |sum_{q=1..Q} a_q b_q|^2 with a_q ~ CN(0, Om1), b_q ~ CN(0, Om2)
// independent, Y = Z / (Om1 Om2) has
//   P(Y > y) = (2 / Gamma(Q)) y^{Q/2} K_Q(2 sqrt(y))
//   f_Y(y)   = (2 / Gamma(Q)) y^{(Q-1)/2} K_{Q-1}(2 sqrt(y)).

namespace detail {

inline void require_cascade_arg(double y, int q)
{
    if (q < 1)
        throw std::domain_error("cascade distribution: Q must be >= 1, got " +
                                std::to_string(q));
    if (std::isnan(y) || y < 0.0)
        throw std::domain_error("cascade distribution: argument must be >= 0");
}

// 1 - (2/Gamma(Q)) y^{Q/2} K_Q(2 sqrt y) from the ascending series of K_Q,
// with the leading 1 cancelled analytically. Used for small y.
inline double cascade_cdf_series(double y, int q)
{
    // -sum_{k=1}^{Q-1} c_k (-y)^k,  c_k = (Q-k-1)! / ((Q-1)! k!)
    double finite = 0.0;
    double coeff = q > 1 ? 1.0 / (q - 1) : 0.0;
    double power = 1.0;
    for (int k = 1; k < q; ++k)
    {
        power *= -y;
        finite -= coeff * power;
        coeff /= static_cast<double>(q - k - 1 > 0 ? q - k - 1 : 1) * (k + 1);
    }

    // -((-1)^Q y^Q / (Q-1)!) sum_k [psi(k+1) + psi(Q+k+1) - ln y] y^k / (k! (Q+k)!)
    const double log_y = std::log(y);
    double psi_a = -kEulerGamma;  // psi(k+1)
    double psi_b = -kEulerGamma;  // psi(Q+k+1)
    for (int j = 1; j <= q; ++j)
        psi_b += 1.0 / j;
    double term = std::exp(q * log_y - ln_gamma(q) - ln_gamma(q + 1));
    double log_part = 0.0;
    for (int k = 0; k < 200; ++k)
    {
        const double contrib = (psi_a + psi_b - log_y) * term;
        log_part += contrib;
        if (k > 2 && std::abs(contrib) <= 1e-18 * std::abs(log_part))
            break;
        psi_a += 1.0 / (k + 1);
        psi_b += 1.0 / (q + k + 1);
        term *= y / ((k + 1.0) * (q + k + 1.0));
    }
    const double sign = (q % 2 == 0) ? 1.0 : -1.0;
    return finite - sign * log_part;
}

inline constexpr double kSeriesCutoff = 0.5;

}  // namespace detail

/// ln P(Y > y). Equals 0 at y = 0.
inline double log_cascade_ccdf(double y, int q)
{
    detail::require_cascade_arg(y, q);
    if (y == 0.0)
        return 0.0;
    if (std::isinf(y))
        return -std::numeric_limits<double>::infinity();
    if (y < detail::kSeriesCutoff)
        return std::log1p(-detail::cascade_cdf_series(y, q));
    return std::numbers::ln2 - ln_gamma(q) + 0.5 * q * std::log(y) +
           log_bessel_k(q, 2.0 * std::sqrt(y));
}

/// P(Y > y): the survival probability of the normalized cascade.
inline double cascade_ccdf(double y, int q)
{
    return std::exp(log_cascade_ccdf(y, q));
}

/// P(Y <= y), accurate in both tails.
inline double cascade_cdf(double y, int q)
{
    detail::require_cascade_arg(y, q);
    if (y == 0.0)
        return 0.0;
    if (y < detail::kSeriesCutoff)
        return detail::cascade_cdf_series(y, q);
    return -std::expm1(log_cascade_ccdf(y, q));
}

/// ln f_Y(y) for y > 0.
inline double log_cascade_pdf(double y, int q)
{
    detail::require_cascade_arg(y, q);
    if (y == 0.0)
        return q == 1 ? std::numeric_limits<double>::infinity()
                      : (q == 2 ? 0.0 : -std::numeric_limits<double>::infinity());
    return std::numbers::ln2 - ln_gamma(q) + 0.5 * (q - 1) * std::log(y) +
           log_bessel_k(q - 1, 2.0 * std::sqrt(y));
}

}  // namespace arisnoma::specfun
