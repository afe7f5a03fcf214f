// Shared test utilities: deterministic generators for random instances
// and independent oracles the implementation is checked against.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "lro/grid.hpp"
#include "lro/order.hpp"

namespace testutil {

using Prng = std::mt19937_64;

inline double runif(Prng& g, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline std::size_t rint(Prng& g, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

/// Random probability vector of the given length; optionally with some
/// exact zero entries (at least one positive entry is kept).
inline std::vector<double> random_probs(Prng& g, std::size_t len, bool allow_zeros) {
    std::vector<double> p(len);
    double total = 0.0;
    for (double& v : p) {
        v = allow_zeros && runif(g) < 0.3 ? 0.0 : runif(g, 0.05, 1.0);
        total += v;
    }
    if (total == 0.0) {
        p[rint(g, 0, len - 1)] = 1.0;
        total = 1.0;
    }
    for (double& v : p) v /= total;
    return p;
}

inline std::vector<double> random_support(Prng& g, std::size_t len) {
    std::vector<double> s(len);
    double cur = runif(g, -2.0, 0.0);
    for (double& v : s) {
        v = cur;
        cur += runif(g, 0.1, 1.0);
    }
    return s;
}

inline lro::DiscreteDist random_dist(Prng& g, std::size_t max_atoms, bool allow_zeros = true) {
    const std::size_t len = rint(g, 1, max_atoms);
    return lro::DiscreteDist(random_support(g, len), random_probs(g, len, allow_zeros));
}

/// A pair P <= Q in likelihood ratio order by construction: Q is P tilted
/// by a non-decreasing positive factor on a common support.
inline std::pair<lro::DiscreteDist, lro::DiscreteDist> random_lr_pair(Prng& g,
                                                                      std::size_t max_atoms) {
    const std::size_t len = rint(g, 1, max_atoms);
    const std::vector<double> support = random_support(g, len);
    std::vector<double> base = random_probs(g, len, true);
    std::vector<double> ratio(len);
    double r = runif(g, 0.2, 1.0);
    for (std::size_t i = 0; i < len; ++i) {
        ratio[i] = r;
        r += runif(g, 0.0, 1.0);
    }
    std::vector<double> tilted(len);
    double total = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        tilted[i] = base[i] * ratio[i];
        total += tilted[i];
    }
    for (double& v : tilted) v /= total;
    return {lro::DiscreteDist(support, base), lro::DiscreteDist(support, tilted)};
}

/// Random aggregated grid: n points dropped on a rough l x m lattice,
/// empty rows/columns compacted away.
inline lro::AggregatedGrid random_grid(Prng& g, std::size_t max_l, std::size_t max_m,
                                       std::size_t max_n) {
    const std::size_t n = rint(g, 1, max_n);
    lro::ObservationSet obs;
    for (std::size_t i = 0; i < n; ++i)
        obs.pairs.emplace_back(static_cast<double>(rint(g, 1, max_l)),
                               static_cast<double>(rint(g, 1, max_m)));
    return lro::aggregate(obs);
}

/// Quadruple-loop evaluation of the index-set definition: (j,k) is a
/// member iff some support point lies weakly northwest and some support
/// point weakly southeast of it.
inline std::vector<char> index_set_brute_force(const lro::AggregatedGrid& grid) {
    const std::size_t l = grid.rows(), m = grid.cols();
    std::vector<char> member(l * m, 0);
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            bool nw = false, se = false;
            for (std::size_t j1 = 0; j1 <= j; ++j1)
                for (std::size_t k2 = k; k2 < m; ++k2)
                    if (grid.at(j1, k2) > 0) nw = true;
            for (std::size_t j2 = j; j2 < l; ++j2)
                for (std::size_t k1 = 0; k1 <= k; ++k1)
                    if (grid.at(j2, k1) > 0) se = true;
            member[j * m + k] = nw && se;
        }
    return member;
}

/// Exhaustive isotonic least-squares: enumerate all partitions into
/// consecutive blocks, keep those with non-decreasing block means and
/// return the fitted vector of the best one.
inline std::vector<double> isotonic_oracle(const std::vector<double>& values,
                                           const std::vector<double>& weights) {
    const std::size_t d = values.size();
    std::vector<double> best;
    double best_sse = std::numeric_limits<double>::infinity();
    const std::uint32_t masks = 1u << (d - 1);
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
        std::vector<double> fit(d);
        bool feasible = true;
        double prev_mean = -std::numeric_limits<double>::infinity();
        std::size_t start = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const bool boundary = (i + 1 == d) || ((mask >> i) & 1u);
            if (!boundary) continue;
            double sw = 0.0, sv = 0.0;
            for (std::size_t t = start; t <= i; ++t) {
                sw += weights[t];
                sv += weights[t] * values[t];
            }
            const double mean = sv / sw;
            if (mean < prev_mean) {
                feasible = false;
                break;
            }
            for (std::size_t t = start; t <= i; ++t) fit[t] = mean;
            prev_mean = mean;
            start = i + 1;
        }
        if (!feasible) continue;
        double sse = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            sse += weights[i] * (fit[i] - values[i]) * (fit[i] - values[i]);
        if (sse < best_sse - 1e-15) {
            best_sse = sse;
            best = fit;
        }
    }
    return best;
}

/// Min-max representation of the antitonic weighted least-squares fit.
inline std::vector<double> antitonic_minmax_oracle(const std::vector<double>& values,
                                                   const std::vector<double>& weights) {
    const std::size_t d = values.size();
    std::vector<double> fit(d);
    for (std::size_t j = 0; j < d; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t u = j; u < d; ++u) {
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s <= j; ++s) {
                double sw = 0.0, sv = 0.0;
                for (std::size_t t = s; t <= u; ++t) {
                    sw += weights[t];
                    sv += weights[t] * values[t];
                }
                worst = std::min(worst, sv / sw);
            }
            best = std::max(best, worst);
        }
        fit[j] = best;
    }
    return fit;
}

}  // namespace testutil
