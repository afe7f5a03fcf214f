#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lro/grid.hpp"
#include "lro/pava.hpp"
#include "lro/step_cdf.hpp"

namespace lro {

/// Family of conditional CDFs on the aggregation grid: entry (j,k) is the
/// estimated probability of {Y <= y_k} given X = x_j.  Rows are
/// non-decreasing and end at 1; under the stochastic order constraint the
/// columns are non-increasing.
struct CdfFamily {
    std::vector<double> xs, ys;
    std::vector<double> cdf;  // row-major, rows() x cols()

    std::size_t rows() const { return xs.size(); }
    std::size_t cols() const { return ys.size(); }
    double at(std::size_t j, std::size_t k) const { return cdf[j * cols() + k]; }

    StepCdf row(std::size_t j) const {
        std::vector<double> cum(cdf.begin() + static_cast<std::ptrdiff_t>(j * cols()),
                                cdf.begin() + static_cast<std::ptrdiff_t>((j + 1) * cols()));
        cum.back() = 1.0;
        return StepCdf(ys, std::move(cum));
    }
};

/// Per-covariate empirical CDFs, no pooling.
inline CdfFamily empirical_family(const AggregatedGrid& grid) {
    const std::size_t l = grid.rows(), m = grid.cols();
    CdfFamily fam;
    fam.xs = grid.xs;
    fam.ys = grid.ys;
    fam.cdf.assign(l * m, 0.0);
    for (std::size_t j = 0; j < l; ++j) {
        double run = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            run += static_cast<double>(grid.at(j, k));
            fam.cdf[j * m + k] = run / static_cast<double>(grid.row_sums[j]);
        }
        fam.cdf[j * m + m - 1] = 1.0;
    }
    return fam;
}

/// Isotonic distributional regression: for every threshold y_k, the column
/// of CDF values is the antitonic weighted least-squares fit of the
/// empirical exceedance indicators, with the per-covariate counts as
/// weights.  Larger covariates get stochastically larger distributions.
inline CdfFamily fit_stochastic_order(const AggregatedGrid& grid) {
    const std::size_t l = grid.rows(), m = grid.cols();
    const CdfFamily emp = empirical_family(grid);
    CdfFamily fam;
    fam.xs = grid.xs;
    fam.ys = grid.ys;
    fam.cdf.assign(l * m, 0.0);

    std::vector<double> weights(l), column(l);
    for (std::size_t j = 0; j < l; ++j) weights[j] = static_cast<double>(grid.row_sums[j]);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j < l; ++j) column[j] = emp.at(j, k);
        const std::vector<double> fitted = pava::antitonic_fit(column, weights);
        for (std::size_t j = 0; j < l; ++j) fam.cdf[j * m + k] = fitted[j];
    }
    for (std::size_t j = 0; j < l; ++j) fam.cdf[j * m + m - 1] = 1.0;
    return fam;
}

}  // namespace lro
