#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lro/grid.hpp"
#include "lro/pava.hpp"

namespace lro {

/// Stopping and safety knobs for the order constrained fit.
struct FitConfig {
    double delta_tol = 1e-8;        // stop once both proposal gaps fall below
    std::size_t max_iter = 10000;
    int calibration_sweeps = 2;     // row/column sweep pairs per iteration
    double feas_tol = 1e-12;        // tolerated rounding in the cone constraints

    void validate() const {
        if (!(delta_tol > 0.0)) throw std::invalid_argument("FitConfig: delta_tol must be > 0");
        if (max_iter < 1) throw std::invalid_argument("FitConfig: max_iter must be >= 1");
        if (calibration_sweeps < 0) throw std::invalid_argument("FitConfig: negative sweeps");
    }
};

struct FitReport {
    std::vector<double> theta;            // log-weights on the index set cells
    std::vector<double> h;                // dense l*m joint weights, zero off the set
    std::vector<double> q;                // dense l*m conditional rows h_jk / h_{j+}
    std::vector<double> objective_trace;  // non-increasing
    double final_delta = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

struct LineSearchResult {
    double t_star = 0.0;          // step in units of the original proposal
    std::vector<double> next;
    double objective_change = 0.0;  // f(next) - f(theta), never positive
};

/// Step size selection along theta -> psi.  Halves the proposal toward
/// theta until the objective no longer increases, then places the step at
/// the maximum of the Hermite interpolation of the gain function.
///
/// `f_diff(a, b)` must return f(b) - f(a).  Working with differences
/// instead of raw objective values keeps the halving test scale
/// invariant: the rounding noise of the difference shrinks together with
/// the step, so tiny steps near the optimum still resolve their sign.
/// `delta` is the (positive) directional gap <grad f(theta), theta - psi>.
template <class FDiff>
LineSearchResult line_search(FDiff&& f_diff, const std::vector<double>& theta,
                             std::vector<double> psi, double delta, int max_halvings = 60) {
    const std::size_t d = theta.size();
    double rho_prime = delta;  // derivative of the gain at 0, in current units
    double change = f_diff(theta, psi);
    double scale = 1.0;
    int halvings = 0;
    while (change > 0.0) {
        if (++halvings > max_halvings) throw std::runtime_error("line search stalled");
        for (std::size_t i = 0; i < d; ++i) psi[i] = 0.5 * (theta[i] + psi[i]);
        rho_prime *= 0.5;
        scale *= 0.5;
        change = f_diff(theta, psi);
    }
    // gain(t) interpolated by rho'(0) t - c t^2 through gain(1) = -change.
    const double denom = rho_prime + change;
    const double t = denom > 0.0 ? std::min(1.0, 0.5 * rho_prime / denom) : 1.0;

    LineSearchResult res;
    res.next.resize(d);
    for (std::size_t i = 0; i < d; ++i) res.next[i] = (1.0 - t) * theta[i] + t * psi[i];
    res.objective_change = f_diff(theta, res.next);
    res.t_star = t * scale;
    if (res.objective_change > 0.0) {  // fall back to the certified point
        res.next = std::move(psi);
        res.objective_change = change;
        res.t_star = scale;
    }
    return res;
}

/// The empirical likelihood problem in log-parametrization: minimize
///     f(theta) = sum_{cells} ( -w_jk theta_jk + n exp(theta_jk) )
/// over the cone of parameters with nonnegative adjacent second
/// differences.  Cells are the index-set members, stored row-major and
/// contiguous within each row.
class FitProblem {
public:
    FitProblem(const AggregatedGrid& grid, const IndexSetP& p)
        : l_(p.l), m_(p.m), n_(grid.n),
          m_lo_(p.m_lo), m_hi_(p.m_hi), l_lo_(p.l_lo), l_hi_(p.l_hi),
          row_sums_(grid.row_sums), col_sums_(grid.col_sums) {
        if (grid.rows() != p.l || grid.cols() != p.m)
            throw std::invalid_argument("FitProblem: grid and index set disagree");
        row_offset_.resize(l_ + 1);
        row_offset_[0] = 0;
        for (std::size_t j = 0; j < l_; ++j)
            row_offset_[j + 1] = row_offset_[j] + (m_hi_[j] - m_lo_[j] + 1);
        dim_ = row_offset_[l_];
        w_.resize(dim_);
        for (std::size_t j = 0; j < l_; ++j)
            for (std::size_t k = m_lo_[j]; k <= m_hi_[j]; ++k)
                w_[cell(j, k)] = static_cast<double>(grid.at(j, k));
    }

    std::size_t dim() const { return dim_; }
    std::size_t rows() const { return l_; }
    std::size_t cols() const { return m_; }
    std::size_t cell(std::size_t j, std::size_t k) const {
        return row_offset_[j] + (k - m_lo_[j]);
    }
    bool contains(std::size_t j, std::size_t k) const {
        return m_lo_[j] <= k && k <= m_hi_[j];
    }

    std::vector<double> initial_theta() const {
        return std::vector<double>(dim_, -std::log(static_cast<double>(dim_)));
    }

    double objective(const std::vector<double>& theta) const {
        double f = 0.0;
        for (std::size_t i = 0; i < dim_; ++i)
            f += -w_[i] * theta[i] + n_ * safe_exp(theta[i]);
        return f;
    }

    /// f(psi) - f(theta), accumulated cell-wise so that small differences
    /// are not swamped by the magnitude of the objective itself.
    double objective_diff(const std::vector<double>& theta,
                          const std::vector<double>& psi) const {
        double d = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double step = psi[i] - theta[i];
            d += -w_[i] * step + n_ * safe_exp(theta[i]) * std::expm1(step);
        }
        return d;
    }

    std::vector<double> gradient(const std::vector<double>& theta) const {
        std::vector<double> g(dim_);
        for (std::size_t i = 0; i < dim_; ++i) g[i] = -w_[i] + n_ * safe_exp(theta[i]);
        return g;
    }

    /// <grad f(theta), theta - psi>; positive away from the minimizer.
    double delta_gap(const std::vector<double>& theta, const std::vector<double>& psi) const {
        double d = 0.0;
        for (std::size_t i = 0; i < dim_; ++i)
            d += (-w_[i] + n_ * safe_exp(theta[i])) * (theta[i] - psi[i]);
        return d;
    }

    /// Shift each row by a constant so that the row sums of exp(theta)
    /// match the empirical row weights.  Does not increase the objective
    /// and leaves the cone constraints untouched.
    void calibrate_rows(std::vector<double>& theta) const {
        for (std::size_t j = 0; j < l_; ++j) {
            const std::size_t lo = row_offset_[j], hi = row_offset_[j + 1];
            const double shift = std::log(row_sums_[j] / static_cast<double>(n_)) -
                                 log_sum_exp(theta, lo, hi);
            for (std::size_t i = lo; i < hi; ++i) theta[i] += shift;
        }
    }

    void calibrate_cols(std::vector<double>& theta) const {
        std::vector<double> shift(m_);
        for (std::size_t k = 0; k < m_; ++k) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = l_lo_[k]; j <= l_hi_[k]; ++j)
                mx = std::max(mx, theta[cell(j, k)]);
            double s = 0.0;
            for (std::size_t j = l_lo_[k]; j <= l_hi_[k]; ++j)
                s += std::exp(theta[cell(j, k)] - mx);
            shift[k] = std::log(col_sums_[k] / static_cast<double>(n_)) - (mx + std::log(s));
        }
        for (std::size_t k = 0; k < m_; ++k)
            for (std::size_t j = l_lo_[k]; j <= l_hi_[k]; ++j)
                theta[cell(j, k)] += shift[k];
    }

    /// Quasi-Newton proposal in row-increment coordinates.  The first cell
    /// of each row is unconstrained; the remaining increments form, per
    /// column, a chain solved by weighted isotonic regression.
    std::vector<double> proposal_row(const std::vector<double>& theta) const {
        std::vector<double> target(dim_), weight(dim_);
        for (std::size_t j = 0; j < l_; ++j) {
            const std::size_t base = row_offset_[j];
            const std::size_t len = m_hi_[j] - m_lo_[j] + 1;
            double s_exp = 0.0, s_w = 0.0;
            for (std::size_t t = len; t-- > 0;) {
                s_exp += safe_exp(theta[base + t]);
                s_w += w_[base + t];
                const double v = std::max(n_ * s_exp, kTinyWeight);
                const double tilde = t == 0 ? theta[base] : theta[base + t] - theta[base + t - 1];
                weight[base + t] = v;
                target[base + t] = tilde + s_w / v - 1.0;
            }
        }
        // Column chains couple the increment coordinates.
        std::vector<double> vals, wts, fitted;
        for (std::size_t k = 1; k < m_; ++k) {
            if (l_hi_[k - 1] < l_lo_[k]) continue;
            const std::size_t lo = l_lo_[k], hi = l_hi_[k - 1];
            if (hi == lo) continue;  // single increment, unconstrained
            vals.clear();
            wts.clear();
            for (std::size_t j = lo; j <= hi; ++j) {
                vals.push_back(target[cell(j, k)]);
                wts.push_back(weight[cell(j, k)]);
            }
            fitted = pava::isotonic_fit(vals, wts);
            for (std::size_t j = lo; j <= hi; ++j) target[cell(j, k)] = fitted[j - lo];
        }
        // Back to plain coordinates: prefix sums within rows.
        std::vector<double> out(dim_);
        for (std::size_t j = 0; j < l_; ++j) {
            const std::size_t base = row_offset_[j];
            const std::size_t len = m_hi_[j] - m_lo_[j] + 1;
            double run = 0.0;
            for (std::size_t t = 0; t < len; ++t) {
                run += target[base + t];
                out[base + t] = run;
            }
        }
        return out;
    }

    /// Same scheme with rows and columns exchanged: first cell of each
    /// column unconstrained, column increments chained within rows.
    std::vector<double> proposal_col(const std::vector<double>& theta) const {
        std::vector<double> target(dim_), weight(dim_);
        for (std::size_t k = 0; k < m_; ++k) {
            double s_exp = 0.0, s_w = 0.0;
            for (std::size_t j = l_hi_[k] + 1; j-- > l_lo_[k];) {
                const std::size_t i = cell(j, k);
                s_exp += safe_exp(theta[i]);
                s_w += w_[i];
                const double v = std::max(n_ * s_exp, kTinyWeight);
                const double tilde = j == l_lo_[k] ? theta[i] : theta[i] - theta[cell(j - 1, k)];
                weight[i] = v;
                target[i] = tilde + s_w / v - 1.0;
            }
        }
        std::vector<double> vals, wts, fitted;
        for (std::size_t j = 1; j < l_; ++j) {
            if (m_hi_[j - 1] < m_lo_[j]) continue;
            const std::size_t lo = m_lo_[j], hi = m_hi_[j - 1];
            if (hi == lo) continue;
            vals.clear();
            wts.clear();
            for (std::size_t k = lo; k <= hi; ++k) {
                vals.push_back(target[cell(j, k)]);
                wts.push_back(weight[cell(j, k)]);
            }
            fitted = pava::isotonic_fit(vals, wts);
            for (std::size_t k = lo; k <= hi; ++k) target[cell(j, k)] = fitted[k - lo];
        }
        std::vector<double> out(dim_);
        for (std::size_t k = 0; k < m_; ++k) {
            double run = 0.0;
            for (std::size_t j = l_lo_[k]; j <= l_hi_[k]; ++j) {
                run += target[cell(j, k)];
                out[cell(j, k)] = run;
            }
        }
        return out;
    }

    /// Largest violation of the adjacent second-difference constraints;
    /// 0 for a feasible parameter.
    double max_constraint_violation(const std::vector<double>& theta) const {
        double worst = 0.0;
        for (std::size_t j = 1; j < l_; ++j)
            for (std::size_t k = m_lo_[j] + 1; k <= m_hi_[j]; ++k) {
                if (!contains(j - 1, k) || !contains(j, k - 1)) continue;
                const double c = theta[cell(j - 1, k - 1)] + theta[cell(j, k)] -
                                 theta[cell(j - 1, k)] - theta[cell(j, k - 1)];
                worst = std::max(worst, -c);
            }
        return worst;
    }

    void check_feasible(const std::vector<double>& theta, double feas_tol) const {
        const double v = max_constraint_violation(theta);
        if (v > feas_tol)
            throw std::runtime_error("infeasible parameter: constraint violation " +
                                     std::to_string(v));
    }

    /// Alternate row/column calibrations until the marginals of
    /// exp(theta) match the empirical marginal weights to 1e-12.
    void pin_marginals(std::vector<double>& theta) const {
        for (int c = 0; c < 500 && marginal_error(theta) > 1e-12; ++c) {
            calibrate_rows(theta);
            calibrate_cols(theta);
        }
    }

    /// Max deviation of the row/column sums of exp(theta) from the
    /// empirical marginal weights.
    double marginal_error(const std::vector<double>& theta) const {
        double err = 0.0;
        std::vector<double> col_acc(m_, 0.0);
        for (std::size_t j = 0; j < l_; ++j) {
            double row_acc = 0.0;
            for (std::size_t k = m_lo_[j]; k <= m_hi_[j]; ++k) {
                const double e = safe_exp(theta[cell(j, k)]);
                row_acc += e;
                col_acc[k] += e;
            }
            err = std::max(err, std::fabs(row_acc - row_sums_[j] / static_cast<double>(n_)));
        }
        for (std::size_t k = 0; k < m_; ++k)
            err = std::max(err, std::fabs(col_acc[k] - col_sums_[k] / static_cast<double>(n_)));
        return err;
    }

    /// Alternating quasi-Newton descent: calibrate, propose (rows on even
    /// steps, columns on odd), line search, repeat until both proposal
    /// gaps fall below the threshold.
    FitReport fit(const FitConfig& config = {}) const {
        config.validate();
        FitReport rep;
        std::vector<double> theta = initial_theta();
        const auto f_diff = [this](const std::vector<double>& a,
                                   const std::vector<double>& b) {
            return objective_diff(a, b);
        };
        // The running objective is advanced by exact-by-construction
        // non-positive increments, so the reported trace is monotone.
        double f_cur = objective(theta);
        rep.objective_trace.push_back(f_cur);

        bool certified = false;
        std::vector<double> before;
        for (std::size_t s = 0; s < config.max_iter && !certified; ++s) {
            before = theta;
            for (int c = 0; c < config.calibration_sweeps; ++c) {
                calibrate_rows(theta);
                calibrate_cols(theta);
            }
            f_cur += std::min(0.0, objective_diff(before, theta));

            const bool row_first = (s % 2 == 0);
            std::vector<double> psi = row_first ? proposal_row(theta) : proposal_col(theta);
            double delta = delta_gap(theta, psi);
            if (delta < config.delta_tol) {
                std::vector<double> psi2 = row_first ? proposal_col(theta) : proposal_row(theta);
                double delta2 = delta_gap(theta, psi2);
                if (delta2 < config.delta_tol) {
                    // Both gaps are small: pin the marginals exactly and
                    // re-certify on the calibrated parameter.  If the
                    // pinning nudged a gap back over the threshold, keep
                    // iterating from the pinned point.
                    before = theta;
                    pin_marginals(theta);
                    f_cur += std::min(0.0, objective_diff(before, theta));
                    std::vector<double> psi_row = proposal_row(theta);
                    std::vector<double> psi_col = proposal_col(theta);
                    const double d_row = delta_gap(theta, psi_row);
                    const double d_col = delta_gap(theta, psi_col);
                    rep.final_delta = std::max(d_row, d_col);
                    if (rep.final_delta < config.delta_tol) {
                        certified = true;
                        break;
                    }
                    psi = d_row >= d_col ? std::move(psi_row) : std::move(psi_col);
                    delta = std::max(d_row, d_col);
                } else {
                    psi = std::move(psi2);
                    delta = delta2;
                }
            }
            LineSearchResult ls = line_search(f_diff, theta, std::move(psi), delta);
            theta = std::move(ls.next);
            check_feasible(theta, config.feas_tol);
            f_cur += ls.objective_change;
            rep.objective_trace.push_back(f_cur);
            rep.iterations = s + 1;
        }

        if (!certified) {  // iteration budget exhausted
            before = theta;
            pin_marginals(theta);
            f_cur += std::min(0.0, objective_diff(before, theta));
            rep.final_delta = std::max(delta_gap(theta, proposal_row(theta)),
                                       delta_gap(theta, proposal_col(theta)));
        }
        if (f_cur < rep.objective_trace.back()) rep.objective_trace.push_back(f_cur);
        rep.converged = rep.final_delta < config.delta_tol;
        rep.theta = std::move(theta);

        rep.h.assign(l_ * m_, 0.0);
        rep.q.assign(l_ * m_, 0.0);
        for (std::size_t j = 0; j < l_; ++j) {
            double row = 0.0;
            for (std::size_t k = m_lo_[j]; k <= m_hi_[j]; ++k) {
                rep.h[j * m_ + k] = safe_exp(rep.theta[cell(j, k)]);
                row += rep.h[j * m_ + k];
            }
            for (std::size_t k = m_lo_[j]; k <= m_hi_[j]; ++k)
                rep.q[j * m_ + k] = rep.h[j * m_ + k] / row;
        }
        return rep;
    }

private:
    static constexpr double kTinyWeight = 1e-300;

    static double safe_exp(double t) { return std::exp(std::clamp(t, -745.0, 709.0)); }

    static double log_sum_exp(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = lo; i < hi; ++i) mx = std::max(mx, v[i]);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += std::exp(v[i] - mx);
        return mx + std::log(s);
    }

    std::size_t l_, m_;
    std::int64_t n_;
    std::vector<std::size_t> m_lo_, m_hi_, l_lo_, l_hi_;
    std::vector<std::int64_t> row_sums_, col_sums_;
    std::vector<std::size_t> row_offset_;
    std::size_t dim_ = 0;
    std::vector<double> w_;
};

/// Convenience wrapper: aggregate -> index set -> fit.
inline FitReport fit_lr_order(const AggregatedGrid& grid, const FitConfig& config = {}) {
    const IndexSetP p = compute_index_set(grid);
    return FitProblem(grid, p).fit(config);
}

}  // namespace lro
