#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lro::pava {

/// Weighted least-squares regression target: values with strictly positive
/// weights, fitted subject to a total-order constraint on the indices.
struct WeightedSeq {
    std::vector<double> values;
    std::vector<double> weights;

    std::size_t size() const { return values.size(); }
};

/// Pool-adjacent-violators for the non-decreasing fit.
///
/// Minimizes sum_i weights[i] * (out[i] - values[i])^2 subject to
/// out[0] <= out[1] <= ... <= out[d-1].  Single pass with back-pooling,
/// O(d).  Blocks are merged only on strict violation, so ties keep their
/// block structure; the minimizer is unique either way.
inline std::vector<double> isotonic_fit(std::span<const double> values,
                                        std::span<const double> weights) {
    const std::size_t d = values.size();
    if (weights.size() != d)
        throw std::invalid_argument("isotonic_fit: values/weights length mismatch");
    if (d == 0) return {};
    for (double w : weights)
        if (!(w > 0.0))
            throw std::invalid_argument("isotonic_fit: weights must be positive");

    // Block stack: level (weighted mean), total weight, number of members.
    std::vector<double> level(d), wsum(d);
    std::vector<std::size_t> count(d);
    std::size_t top = 0;
    for (std::size_t i = 0; i < d; ++i) {
        level[top] = values[i];
        wsum[top] = weights[i];
        count[top] = 1;
        ++top;
        while (top > 1 && level[top - 2] > level[top - 1]) {
            const double w = wsum[top - 2] + wsum[top - 1];
            level[top - 2] = (wsum[top - 2] * level[top - 2] +
                              wsum[top - 1] * level[top - 1]) / w;
            wsum[top - 2] = w;
            count[top - 2] += count[top - 1];
            --top;
        }
    }

    std::vector<double> out(d);
    std::size_t pos = 0;
    for (std::size_t b = 0; b < top; ++b)
        for (std::size_t r = 0; r < count[b]; ++r) out[pos++] = level[b];
    return out;
}

inline std::vector<double> isotonic_fit(const WeightedSeq& seq) {
    return isotonic_fit(seq.values, seq.weights);
}

/// Non-increasing fit, by sign flip.
inline std::vector<double> antitonic_fit(std::span<const double> values,
                                         std::span<const double> weights) {
    std::vector<double> neg(values.begin(), values.end());
    for (double& v : neg) v = -v;
    std::vector<double> out = isotonic_fit(neg, weights);
    for (double& v : out) v = -v;
    return out;
}

}  // namespace lro::pava
