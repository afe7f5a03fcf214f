#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace lro {

namespace detail {

/// Series expansion of the regularized lower incomplete gamma, valid and
/// fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * eps)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("gamma_p: series did not converge");
}

/// Continued fraction (modified Lentz) for the regularized upper
/// incomplete gamma, used for x >= a + 1.
inline double gamma_q_contfrac(double a, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps)
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
    throw std::runtime_error("gamma_p: continued fraction did not converge");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("gamma_p: shape must be positive");
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_contfrac(a, x);
}

/// CDF of the gamma distribution with the given shape and scale; 0 for y <= 0.
inline double gamma_cdf(double y, double shape, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("gamma_cdf: scale must be positive");
    if (y <= 0.0) return 0.0;
    return gamma_p(shape, y / scale);
}

/// Density of the same distribution.
inline double gamma_pdf(double y, double shape, double scale) {
    if (y <= 0.0) return 0.0;
    return std::exp((shape - 1.0) * std::log(y) - y / scale - std::lgamma(shape) -
                    shape * std::log(scale));
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// Gamma quantile by bisection.  Only used for tail truncation, so plain
/// bisection at ~1 ulp resolution is plenty.
inline double gamma_quantile(double p, double shape, double scale) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("gamma_quantile: p in (0,1)");
    double hi = scale * (shape + 10.0 * std::sqrt(shape) + 10.0);
    while (gamma_cdf(hi, shape, scale) < p) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (gamma_cdf(mid, shape, scale) < p ? lo : hi) = mid;
    }
    return hi;
}

/// Conditional model y | x ~ Gamma(shape(x), scale(x)) on [x_min, x_max].
/// The family is ordered in likelihood ratio whenever both functions are
/// non-decreasing.
struct GammaModel {
    std::function<double(double)> shape;
    std::function<double(double)> scale;
    double x_min = 1.0;
    double x_max = 4.0;

    /// Shape 2 + (x+1)^2 and scale 1 - exp(-10x) on [1, 4].
    static GammaModel simulation_default() {
        GammaModel m;
        m.shape = [](double x) { return 2.0 + (x + 1.0) * (x + 1.0); };
        m.scale = [](double x) { return 1.0 - 1.0 / std::exp(10.0 * x); };
        m.x_min = 1.0;
        m.x_max = 4.0;
        return m;
    }
};

}  // namespace lro
