#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lro {

/// Right-continuous step distribution function: value at y is cum[i] for
/// the largest jumps[i] <= y, and 0 before the first jump.  cum is
/// non-decreasing and ends at 1; flat steps (zero-mass jump points) are
/// allowed so that families can share a common grid.
struct StepCdf {
    std::vector<double> jumps;  // strictly increasing
    std::vector<double> cum;    // same length, non-decreasing, back() == 1

    StepCdf() = default;
    StepCdf(std::vector<double> j, std::vector<double> c)
        : jumps(std::move(j)), cum(std::move(c)) {
        if (jumps.size() != cum.size() || jumps.empty())
            throw std::invalid_argument("StepCdf: bad sizes");
    }

    double operator()(double y) const {
        auto it = std::upper_bound(jumps.begin(), jumps.end(), y);
        if (it == jumps.begin()) return 0.0;
        return cum[static_cast<std::size_t>(it - jumps.begin()) - 1];
    }

    /// Generalized inverse min{ x : F(x) >= alpha } on the extended line.
    /// Returns -inf for alpha <= 0.
    double quantile(double alpha) const {
        if (alpha <= 0.0) return -std::numeric_limits<double>::infinity();
        auto it = std::lower_bound(cum.begin(), cum.end(), alpha);
        if (it == cum.end()) return std::numeric_limits<double>::infinity();
        return jumps[static_cast<std::size_t>(it - cum.begin())];
    }

    double min_support() const { return jumps.front(); }
    double max_support() const { return jumps.back(); }
};

/// Step CDF of the probability vector probs on the given support.
/// The final cumulative value is forced to exactly 1 by normalizing
/// against the full running sum.
inline StepCdf step_cdf_from_masses(const std::vector<double>& support,
                                    const std::vector<double>& probs) {
    if (support.size() != probs.size() || support.empty())
        throw std::invalid_argument("step_cdf_from_masses: bad sizes");
    std::vector<double> cum(probs.size());
    double run = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        run += probs[i];
        cum[i] = run;
    }
    if (!(run > 0.0)) throw std::invalid_argument("step_cdf_from_masses: zero mass");
    for (double& c : cum) c /= run;
    cum.back() = 1.0;
    return StepCdf(support, std::move(cum));
}

}  // namespace lro
