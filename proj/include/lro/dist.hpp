#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "lro/gamma.hpp"
#include "lro/quadrature.hpp"
#include "lro/step_cdf.hpp"

namespace lro {

/// Per-covariate family of step distribution functions.
struct ConditionalFamily {
    std::vector<double> xs;      // strictly increasing
    std::vector<StepCdf> dists;  // one per covariate
};

/// Distribution at an arbitrary covariate: constant extension outside the
/// covariate range, convex mixture of the two bracketing distributions
/// inside.  Mixtures of ordered families stay ordered.
inline StepCdf interpolate_at(const ConditionalFamily& fam, double x) {
    if (fam.dists.empty()) throw std::invalid_argument("interpolate_at: empty family");
    if (x <= fam.xs.front()) return fam.dists.front();
    if (x >= fam.xs.back()) return fam.dists.back();
    const std::size_t j =
        static_cast<std::size_t>(std::upper_bound(fam.xs.begin(), fam.xs.end(), x) -
                                 fam.xs.begin()) - 1;
    if (fam.xs[j] == x) return fam.dists[j];
    const double lambda = (x - fam.xs[j]) / (fam.xs[j + 1] - fam.xs[j]);

    const StepCdf& f0 = fam.dists[j];
    const StepCdf& f1 = fam.dists[j + 1];
    std::vector<double> jumps;
    jumps.reserve(f0.jumps.size() + f1.jumps.size());
    std::merge(f0.jumps.begin(), f0.jumps.end(), f1.jumps.begin(), f1.jumps.end(),
               std::back_inserter(jumps));
    jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
    std::vector<double> cum(jumps.size());
    for (std::size_t i = 0; i < jumps.size(); ++i)
        cum[i] = (1.0 - lambda) * f0(jumps[i]) + lambda * f1(jumps[i]);
    cum.back() = 1.0;
    return StepCdf(std::move(jumps), std::move(cum));
}

/// Continuous ranked probability score of a step forecast against the
/// outcome y, via the exact segment sum: between consecutive breakpoints
/// (jumps and y) both the forecast and the indicator are constant.
inline double crps(const StepCdf& g, double y) {
    std::vector<double> brk = g.jumps;
    brk.insert(std::lower_bound(brk.begin(), brk.end(), y), y);
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
        const double val = g(brk[i]) - (y <= brk[i] ? 1.0 : 0.0);
        total += val * val * (brk[i + 1] - brk[i]);
    }
    return total;
}

namespace detail {

/// Tail truncation points of the true conditional law at mass 1e-12.
struct GammaTails {
    double lo, hi;
};

inline GammaTails gamma_tails(double shape, double scale) {
    return {gamma_quantile(1e-12, shape, scale), gamma_quantile(1.0 - 1e-12, shape, scale)};
}

}  // namespace detail

/// Expected CRPS of a step forecast under the true conditional law at x:
///     sum_j  int_{[y_j, y_{j+1})} (Gp(y_j) - G_x(z))^2 dz  +  b(x) / B(1/2, a(x)).
/// Segment integrals by adaptive Simpson; the two unbounded end segments
/// are truncated where the true CDF is within 1e-12 of 0 or 1.
inline double expected_crps(const StepCdf& gp, double x, const GammaModel& model,
                            double quad_tol = 1e-9) {
    const double a = model.shape(x), b = model.scale(x);
    const auto true_cdf = [&](double z) { return gamma_cdf(z, a, b); };
    const auto tails = detail::gamma_tails(a, b);

    const std::size_t m = gp.jumps.size();
    const double span = std::max(tails.hi, gp.jumps.back()) - std::min(tails.lo, gp.jumps.front());
    // Tolerance budget proportional to segment length, with a small floor
    // so that no segment is starved.
    const auto seg_tol = [&](double len) {
        return quad_tol * (len / span + 0.125 / static_cast<double>(m + 1));
    };
    double total = 0.0;
    // Left end: forecast value 0 below the first jump.
    if (tails.lo < gp.jumps.front())
        total += adaptive_simpson([&](double z) { const double d = true_cdf(z); return d * d; },
                                  tails.lo, gp.jumps.front(),
                                  seg_tol(gp.jumps.front() - tails.lo));
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double c = gp.cum[i];
        total += adaptive_simpson(
            [&](double z) { const double d = c - true_cdf(z); return d * d; },
            gp.jumps[i], gp.jumps[i + 1], seg_tol(gp.jumps[i + 1] - gp.jumps[i]));
    }
    // Right end: forecast value 1 from the last jump on.
    if (gp.jumps.back() < tails.hi)
        total += adaptive_simpson(
            [&](double z) { const double d = 1.0 - true_cdf(z); return d * d; },
            gp.jumps.back(), tails.hi, seg_tol(tails.hi - gp.jumps.back()));

    return total + std::exp(std::log(b) - log_beta(0.5, a));
}

/// Mean absolute CDF error weighted by the true conditional law:
///     int |Gp(y) - G_x(y)| dQ_x(y).
inline double simple_score(const StepCdf& gp, double x, const GammaModel& model,
                           double quad_tol = 1e-9) {
    const double a = model.shape(x), b = model.scale(x);
    const auto tails = detail::gamma_tails(a, b);

    std::vector<double> brk;
    brk.push_back(tails.lo);
    for (double j : gp.jumps)
        if (j > tails.lo && j < tails.hi) brk.push_back(j);
    brk.push_back(tails.hi);

    const double span = tails.hi - tails.lo;
    const double nseg = static_cast<double>(brk.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
        const double len = brk[i + 1] - brk[i];
        total += adaptive_simpson(
            [&](double z) {
                return std::fabs(gp(z) - gamma_cdf(z, a, b)) * gamma_pdf(z, a, b);
            },
            brk[i], brk[i + 1], quad_tol * (len / span + 0.125 / nseg));
    }
    return total;
}

/// Bivariate Kuiper distance between two mass matrices on a common grid:
/// the largest absolute signed mass difference over grid-aligned
/// rectangles, via 2-D prefix sums.
inline double kuiper_distance(std::span<const double> a, std::span<const double> b,
                              std::size_t l, std::size_t m) {
    if (a.size() != l * m || b.size() != l * m)
        throw std::invalid_argument("kuiper_distance: size mismatch");
    // prefix(j,k) = signed mass of the leading j x k block.
    std::vector<double> prefix((l + 1) * (m + 1), 0.0);
    const auto at = [&](std::size_t j, std::size_t k) -> double& {
        return prefix[j * (m + 1) + k];
    };
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t k = 0; k < m; ++k)
            at(j + 1, k + 1) = a[j * m + k] - b[j * m + k] + at(j, k + 1) + at(j + 1, k) -
                               at(j, k);
    double best = 0.0;
    for (std::size_t j1 = 0; j1 < l; ++j1)
        for (std::size_t j2 = j1 + 1; j2 <= l; ++j2)
            for (std::size_t k1 = 0; k1 < m; ++k1)
                for (std::size_t k2 = k1 + 1; k2 <= m; ++k2) {
                    const double s = at(j2, k2) - at(j1, k2) - at(j2, k1) + at(j1, k1);
                    best = std::max(best, std::fabs(s));
                }
    return best;
}

}  // namespace lro
