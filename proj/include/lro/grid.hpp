#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace lro {

/// Raw bivariate observations (x_i, y_i).
struct ObservationSet {
    std::vector<std::pair<double, double>> pairs;

    std::size_t size() const { return pairs.size(); }
};

/// Observations aggregated onto the grid of unique covariate and response
/// values.  w is the row-major l x m matrix of tie counts, n the total
/// number of observations.  Every row and every column carries at least
/// one positive count by construction.
struct AggregatedGrid {
    std::vector<double> xs;  // strictly increasing, length l
    std::vector<double> ys;  // strictly increasing, length m
    std::vector<std::int64_t> w;  // row-major counts, size l*m
    std::int64_t n = 0;
    std::vector<std::int64_t> row_sums;  // w_{j+}
    std::vector<std::int64_t> col_sums;  // w_{+k}

    std::size_t rows() const { return xs.size(); }
    std::size_t cols() const { return ys.size(); }
    std::int64_t at(std::size_t j, std::size_t k) const { return w[j * cols() + k]; }
};

/// The index set of cells that can carry positive mass in the order
/// constrained fit: (j,k) belongs iff the data contain a support point
/// weakly northwest and one weakly southeast of it.  Stored via the
/// per-row envelopes [m_lo[j], m_hi[j]] and the equivalent per-column
/// envelopes [l_lo[k], l_hi[k]] (all 0-based, inclusive).
struct IndexSetP {
    std::size_t l = 0, m = 0;
    std::vector<std::size_t> m_lo, m_hi;  // per row j
    std::vector<std::size_t> l_lo, l_hi;  // per column k
    std::size_t count = 0;

    bool contains(std::size_t j, std::size_t k) const {
        return m_lo[j] <= k && k <= m_hi[j];
    }
};

/// Aggregate raw observations to the unique-value grid.  Equality of
/// coordinates is exact; pass round_decimals to pre-round noisy data.
inline AggregatedGrid aggregate(const ObservationSet& obs,
                                std::optional<int> round_decimals = std::nullopt) {
    if (obs.pairs.empty()) throw std::invalid_argument("no observations");

    std::vector<std::pair<double, double>> pts = obs.pairs;
    if (round_decimals) {
        const double scale = std::pow(10.0, *round_decimals);
        for (auto& [x, y] : pts) {
            x = std::round(x * scale) / scale;
            y = std::round(y * scale) / scale;
        }
    }
    for (const auto& [x, y] : pts)
        if (!std::isfinite(x) || !std::isfinite(y))
            throw std::invalid_argument("non-finite observation");

    AggregatedGrid g;
    g.xs.reserve(pts.size());
    g.ys.reserve(pts.size());
    for (const auto& [x, y] : pts) {
        g.xs.push_back(x);
        g.ys.push_back(y);
    }
    auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(g.xs);
    uniq(g.ys);

    const std::size_t l = g.xs.size(), m = g.ys.size();
    g.w.assign(l * m, 0);
    for (const auto& [x, y] : pts) {
        const std::size_t j = std::lower_bound(g.xs.begin(), g.xs.end(), x) - g.xs.begin();
        const std::size_t k = std::lower_bound(g.ys.begin(), g.ys.end(), y) - g.ys.begin();
        ++g.w[j * m + k];
    }
    g.n = static_cast<std::int64_t>(pts.size());
    g.row_sums.assign(l, 0);
    g.col_sums.assign(m, 0);
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            g.row_sums[j] += g.w[j * m + k];
            g.col_sums[k] += g.w[j * m + k];
        }
    return g;
}

/// Build the index set from the count matrix with four monotone sweeps,
/// O(l*m).  m_lo[j] is the smallest column with support at or below row j
/// (rows with larger covariate), m_hi[j] the largest column with support
/// at or above; columns mirror this with rows and columns exchanged.
inline IndexSetP compute_index_set(const AggregatedGrid& grid) {
    const std::size_t l = grid.rows(), m = grid.cols();
    IndexSetP p;
    p.l = l;
    p.m = m;
    p.m_lo.assign(l, m);
    p.m_hi.assign(l, 0);
    p.l_lo.assign(m, l);
    p.l_hi.assign(m, 0);

    std::vector<std::size_t> row_min(l, m), row_max(l, 0), col_min(m, l), col_max(m, 0);
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t k = 0; k < m; ++k)
            if (grid.w[j * m + k] > 0) {
                row_min[j] = std::min(row_min[j], k);
                row_max[j] = std::max(row_max[j], k);
                col_min[k] = std::min(col_min[k], j);
                col_max[k] = std::max(col_max[k], j);
            }

    // m_lo[j] = min over j' >= j of row_min[j'];  m_hi[j] = max over j' <= j.
    std::size_t acc = m;
    for (std::size_t j = l; j-- > 0;) {
        acc = std::min(acc, row_min[j]);
        p.m_lo[j] = acc;
    }
    acc = 0;
    for (std::size_t j = 0; j < l; ++j) {
        acc = std::max(acc, row_max[j]);
        p.m_hi[j] = acc;
    }
    // l_lo[k] = min over k' >= k of col_min[k'];  l_hi[k] = max over k' <= k.
    acc = l;
    for (std::size_t k = m; k-- > 0;) {
        acc = std::min(acc, col_min[k]);
        p.l_lo[k] = acc;
    }
    acc = 0;
    for (std::size_t k = 0; k < m; ++k) {
        acc = std::max(acc, col_max[k]);
        p.l_hi[k] = acc;
    }

    p.count = 0;
    for (std::size_t j = 0; j < l; ++j) p.count += p.m_hi[j] - p.m_lo[j] + 1;
    return p;
}

}  // namespace lro
