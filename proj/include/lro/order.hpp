#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lro/step_cdf.hpp"

namespace lro {

/// Finitely supported distribution on the real line.  Zero probabilities
/// are allowed so that two distributions can live on a merged support.
struct DiscreteDist {
    std::vector<double> support;  // strictly increasing
    std::vector<double> probs;    // nonnegative, sums to 1 within 1e-12

    DiscreteDist() = default;
    DiscreteDist(std::vector<double> s, std::vector<double> p)
        : support(std::move(s)), probs(std::move(p)) {
        if (support.size() != probs.size() || support.empty())
            throw std::invalid_argument("DiscreteDist: bad sizes");
        double sum = 0.0;
        for (double q : probs) {
            if (q < 0.0) throw std::invalid_argument("DiscreteDist: negative probability");
            sum += q;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("DiscreteDist: probabilities do not sum to 1");
    }
};

/// ROC point set of a pair (P,Q), listed from (1,1) down to (0,0).
/// Consecutive points are non-increasing in both coordinates.
struct RocCurve {
    std::vector<std::pair<double, double>> points;
};

namespace detail {

/// Re-express both distributions on the union of their supports,
/// zero-padding missing atoms.
inline void merge_support(const DiscreteDist& p, const DiscreteDist& q,
                          std::vector<double>& support,
                          std::vector<double>& f, std::vector<double>& g) {
    support.clear();
    support.reserve(p.support.size() + q.support.size());
    std::merge(p.support.begin(), p.support.end(), q.support.begin(), q.support.end(),
               std::back_inserter(support));
    support.erase(std::unique(support.begin(), support.end()), support.end());
    f.assign(support.size(), 0.0);
    g.assign(support.size(), 0.0);
    for (std::size_t i = 0; i < p.support.size(); ++i) {
        auto it = std::lower_bound(support.begin(), support.end(), p.support[i]);
        f[static_cast<std::size_t>(it - support.begin())] = p.probs[i];
    }
    for (std::size_t i = 0; i < q.support.size(); ++i) {
        auto it = std::lower_bound(support.begin(), support.end(), q.support[i]);
        g[static_cast<std::size_t>(it - support.begin())] = q.probs[i];
    }
}

}  // namespace detail

inline constexpr double kOrderTol = 1e-10;

/// Likelihood ratio order P <=_lr Q: on the merged support, for every
/// pair of atoms x < y the product inequality f(y)g(x) <= f(x)g(y) must
/// hold.  The tolerance is absolute, on products of probabilities.
inline bool is_lr_less_equal(const DiscreteDist& p, const DiscreteDist& q,
                             double tol = kOrderTol) {
    if (tol < 0.0) throw std::invalid_argument("is_lr_less_equal: tol < 0");
    std::vector<double> support, f, g;
    detail::merge_support(p, q, support, f, g);
    const std::size_t k = support.size();
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            if (f[b] * g[a] > f[a] * g[b] + tol) return false;
    return true;
}

/// Usual stochastic order P <=_st Q: the CDF of P dominates the CDF of Q
/// pointwise on the merged support.
inline bool is_st_less_equal(const DiscreteDist& p, const DiscreteDist& q,
                             double tol = kOrderTol) {
    if (tol < 0.0) throw std::invalid_argument("is_st_less_equal: tol < 0");
    std::vector<double> support, f, g;
    detail::merge_support(p, q, support, f, g);
    double fp = 0.0, gq = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        fp += f[i];
        gq += g[i];
        if (fp < gq - tol) return false;
    }
    return true;
}

/// Points (1 - F(x), 1 - G(x)) over the extended line.  For purely atomic
/// distributions the left-limit points coincide with the value at the
/// previous atom, so evaluating at -inf and at each merged atom captures
/// the whole set.  Duplicates are removed.
inline RocCurve roc_curve(const DiscreteDist& p, const DiscreteDist& q) {
    std::vector<double> support, f, g;
    detail::merge_support(p, q, support, f, g);
    RocCurve roc;
    roc.points.emplace_back(1.0, 1.0);
    double fp = 0.0, gq = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        fp += f[i];
        gq += g[i];
        std::pair<double, double> pt{1.0 - fp, 1.0 - gq};
        if (pt != roc.points.back()) roc.points.push_back(pt);
    }
    if (roc.points.back() != std::pair<double, double>{0.0, 0.0})
        roc.points.emplace_back(0.0, 0.0);
    return roc;
}

/// Concavity of the ROC point set: for any three points, ordered
/// component-wise, the chord slopes must be non-increasing.  Checked in
/// cross-product form, which keeps the comparison on the scale of
/// probability products and treats vertical segments as infinite slope.
inline bool is_roc_concave(const RocCurve& roc, double tol = kOrderTol) {
    std::vector<std::pair<double, double>> pts = roc.points;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t k = pts.size();
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            for (std::size_t r = j + 1; r < k; ++r) {
                const auto& [a0, b0] = pts[i];
                const auto& [a1, b1] = pts[j];
                const auto& [a2, b2] = pts[r];
                // slope(p0,p1) >= slope(p1,p2), i.e.
                // (b1-b0)(a2-a1) >= (b2-b1)(a1-a0).
                if ((b1 - b0) * (a2 - a1) < (b2 - b1) * (a1 - a0) - tol) return false;
            }
    return true;
}

/// Ordinal dominance curve alpha -> G(F^{-1}(alpha)), with the quantile
/// taken on the extended line (G(-inf) := 0, G(+inf) := 1).
inline std::vector<double> ordinal_dominance(const StepCdf& F, const StepCdf& G,
                                             const std::vector<double>& alphas) {
    std::vector<double> out;
    out.reserve(alphas.size());
    for (double a : alphas) {
        if (a < 0.0 || a > 1.0)
            throw std::invalid_argument("ordinal_dominance: alpha outside [0,1]");
        const double x = F.quantile(a);
        if (x == -std::numeric_limits<double>::infinity()) {
            out.push_back(0.0);
        } else if (x == std::numeric_limits<double>::infinity()) {
            out.push_back(1.0);
        } else {
            out.push_back(G(x));
        }
    }
    return out;
}

}  // namespace lro
