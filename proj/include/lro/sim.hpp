#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lro/dist.hpp"
#include "lro/gamma.hpp"
#include "lro/grid.hpp"
#include "lro/idr.hpp"
#include "lro/lrfit.hpp"
#include "lro/rng.hpp"

namespace lro {

struct SimConfig {
    std::size_t ell_o = 50;    // covariate grid resolution
    std::size_t n = 50;        // sample size per replication
    std::size_t mc_reps = 200;
    std::uint64_t seed = 1;
    std::size_t train_size = 0;  // cross-validation splits only

    void validate() const {
        if (ell_o < 1 || n < 1 || mc_reps < 1)
            throw std::invalid_argument("SimConfig: counts must be >= 1");
    }
};

enum class ScoreKind { simple, crps };

/// Per-covariate Monte-Carlo summary for the three estimators and the
/// relative change (percent) of the likelihood-ratio fit against the
/// stochastic-order baseline.  Negative relative change favours the
/// stronger constraint.
struct ScoreTable {
    std::vector<double> xs;
    std::vector<double> score_lr, score_st, score_emp;
    std::vector<double> rel_mean, rel_q25, rel_q75;
    std::size_t replications = 0;  // contributing replications / splits
    std::size_t flagged = 0;       // excluded for non-convergence
};

/// Equispaced covariate grid x_min + (x_max - x_min) * k / ell_o, k = 1..ell_o.
inline std::vector<double> covariate_grid(const GammaModel& model, std::size_t ell_o) {
    std::vector<double> xs(ell_o);
    for (std::size_t k = 0; k < ell_o; ++k)
        xs[k] = model.x_min +
                (model.x_max - model.x_min) * static_cast<double>(k + 1) /
                    static_cast<double>(ell_o);
    return xs;
}

/// Conditional family of the likelihood-ratio fit: row j of q as a step
/// CDF on the response grid.
inline ConditionalFamily family_from_fit(const AggregatedGrid& grid, const FitReport& rep) {
    ConditionalFamily fam;
    fam.xs = grid.xs;
    const std::size_t m = grid.cols();
    fam.dists.reserve(grid.rows());
    for (std::size_t j = 0; j < grid.rows(); ++j) {
        std::vector<double> cum(m);
        double run = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            run += rep.q[j * m + k];
            cum[k] = run;
        }
        cum.back() = 1.0;
        fam.dists.emplace_back(grid.ys, std::move(cum));
    }
    return fam;
}

inline ConditionalFamily family_from_cdf(const CdfFamily& cf) {
    ConditionalFamily fam;
    fam.xs = cf.xs;
    fam.dists.reserve(cf.rows());
    for (std::size_t j = 0; j < cf.rows(); ++j) fam.dists.push_back(cf.row(j));
    return fam;
}

namespace detail {

/// Type-7 sample quantile (linear interpolation between order statistics).
inline double quantile7(std::vector<double> v, double p) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] + frac * (v[i + 1] - v[i]);
}

/// Run fn(rep) for rep in [0, reps) on the requested number of threads.
/// Results must be written to per-rep slots; aggregation stays ordered.
template <class Fn>
void parallel_reps(std::size_t reps, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, reps));
    if (threads == 1) {
        for (std::size_t r = 0; r < reps; ++r) fn(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= reps) return;
                try {
                    fn(r);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct RepScores {
    bool ok = false;
    std::vector<double> lr, st, emp;  // one score per covariate grid point
};

/// Aggregate per-replication scores into the output table.
inline ScoreTable summarize(const std::vector<double>& xs,
                            const std::vector<RepScores>& reps) {
    const std::size_t nx = xs.size();
    ScoreTable tab;
    tab.xs = xs;
    tab.score_lr.assign(nx, 0.0);
    tab.score_st.assign(nx, 0.0);
    tab.score_emp.assign(nx, 0.0);
    tab.rel_mean.assign(nx, 0.0);
    tab.rel_q25.assign(nx, 0.0);
    tab.rel_q75.assign(nx, 0.0);
    std::vector<std::vector<double>> rel(nx);
    for (const RepScores& r : reps) {
        if (!r.ok) {
            ++tab.flagged;
            continue;
        }
        ++tab.replications;
        for (std::size_t i = 0; i < nx; ++i) {
            tab.score_lr[i] += r.lr[i];
            tab.score_st[i] += r.st[i];
            tab.score_emp[i] += r.emp[i];
            if (r.st[i] > 0.0) rel[i].push_back(100.0 * (r.lr[i] - r.st[i]) / r.st[i]);
        }
    }
    if (tab.replications == 0) throw std::runtime_error("all replications failed to converge");
    for (std::size_t i = 0; i < nx; ++i) {
        const double denom = static_cast<double>(tab.replications);
        tab.score_lr[i] /= denom;
        tab.score_st[i] /= denom;
        tab.score_emp[i] /= denom;
        double mean = 0.0;
        for (double v : rel[i]) mean += v;
        tab.rel_mean[i] = rel[i].empty() ? 0.0 : mean / static_cast<double>(rel[i].size());
        tab.rel_q25[i] = quantile7(rel[i], 0.25);
        tab.rel_q75[i] = quantile7(rel[i], 0.75);
    }
    return tab;
}

inline ScoreTable run_study(const SimConfig& cfg, const GammaModel& model, ScoreKind kind,
                            std::size_t threads) {
    cfg.validate();
    const std::vector<double> xo = covariate_grid(model, cfg.ell_o);
    std::vector<RepScores> results(cfg.mc_reps);

    parallel_reps(cfg.mc_reps, threads, [&](std::size_t rep) {
        Rng rng = Rng::substream(cfg.seed, rep);
        ObservationSet obs;
        obs.pairs.reserve(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const std::size_t idx = std::min<std::size_t>(
                cfg.ell_o - 1,
                static_cast<std::size_t>(rng.uniform() * static_cast<double>(cfg.ell_o)));
            const double x = xo[idx];
            obs.pairs.emplace_back(x, sample_gamma(rng, model.shape(x), model.scale(x)));
        }
        const AggregatedGrid grid = aggregate(obs);
        const FitReport fit = fit_lr_order(grid);
        RepScores& out = results[rep];
        if (!fit.converged) return;  // flagged replication
        const ConditionalFamily fam_lr = family_from_fit(grid, fit);
        const ConditionalFamily fam_st = family_from_cdf(fit_stochastic_order(grid));
        const ConditionalFamily fam_emp = family_from_cdf(empirical_family(grid));
        out.lr.resize(xo.size());
        out.st.resize(xo.size());
        out.emp.resize(xo.size());
        for (std::size_t i = 0; i < xo.size(); ++i) {
            const auto score = [&](const ConditionalFamily& fam) {
                const StepCdf g = interpolate_at(fam, xo[i]);
                return kind == ScoreKind::simple ? simple_score(g, xo[i], model)
                                                 : expected_crps(g, xo[i], model);
            };
            out.lr[i] = score(fam_lr);
            out.st[i] = score(fam_st);
            out.emp[i] = score(fam_emp);
        }
        out.ok = true;
    });

    return summarize(xo, results);
}

}  // namespace detail

/// Monte-Carlo comparison of the three estimators under the mean absolute
/// CDF error against the true model.
inline ScoreTable run_estimation_study(const SimConfig& cfg,
                                       const GammaModel& model = GammaModel::simulation_default(),
                                       std::size_t threads = 1) {
    return detail::run_study(cfg, model, ScoreKind::simple, threads);
}

/// Same comparison under the expected CRPS.
inline ScoreTable run_crps_study(const SimConfig& cfg,
                                 const GammaModel& model = GammaModel::simulation_default(),
                                 std::size_t threads = 1) {
    return detail::run_study(cfg, model, ScoreKind::crps, threads);
}

/// Mean empirical CRPS of a family per covariate of a dataset, with the
/// per-covariate observation counts.
struct CovariateScore {
    double x;
    std::size_t count;
    double mean_crps;
};

inline std::vector<CovariateScore> crps_by_covariate(const ConditionalFamily& fam,
                                                     const ObservationSet& data) {
    std::vector<std::pair<double, double>> pts = data.pairs;
    std::sort(pts.begin(), pts.end());
    std::vector<CovariateScore> out;
    std::size_t i = 0;
    while (i < pts.size()) {
        const double x = pts[i].first;
        const StepCdf g = interpolate_at(fam, x);
        std::size_t count = 0;
        double sum = 0.0;
        while (i < pts.size() && pts[i].first == x) {
            sum += crps(g, pts[i].second);
            ++count;
            ++i;
        }
        out.push_back({x, count, sum / static_cast<double>(count)});
    }
    return out;
}

/// Leave-train-size-out cross-validation on a fixed dataset: random
/// train/test splits, estimators fitted on the training part, empirical
/// CRPS averaged per covariate over the test part.  Covariates absent
/// from a split's test part are omitted from that split.
inline ScoreTable run_cross_validation(const ObservationSet& data, const SimConfig& cfg,
                                       std::size_t threads = 1) {
    cfg.validate();
    const std::size_t n = data.size();
    if (cfg.train_size < 1 || cfg.train_size >= n)
        throw std::invalid_argument("run_cross_validation: train_size must be in [1, n)");

    std::vector<double> xs_all;
    xs_all.reserve(n);
    for (const auto& [x, y] : data.pairs) xs_all.push_back(x);
    std::sort(xs_all.begin(), xs_all.end());
    xs_all.erase(std::unique(xs_all.begin(), xs_all.end()), xs_all.end());
    const std::size_t nx = xs_all.size();

    struct SplitScores {
        bool ok = false;
        std::vector<double> lr, st, emp;  // NaN where the covariate is absent
    };
    std::vector<SplitScores> results(cfg.mc_reps);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    detail::parallel_reps(cfg.mc_reps, threads, [&](std::size_t rep) {
        Rng rng = Rng::substream(cfg.seed, rep);
        // Partial Fisher-Yates: the first train_size entries become the split.
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < cfg.train_size; ++i) {
            const std::size_t j =
                i + std::min<std::size_t>(n - i - 1,
                                          static_cast<std::size_t>(
                                              rng.uniform() * static_cast<double>(n - i)));
            std::swap(idx[i], idx[j]);
        }
        ObservationSet train;
        train.pairs.reserve(cfg.train_size);
        for (std::size_t i = 0; i < cfg.train_size; ++i)
            train.pairs.push_back(data.pairs[idx[i]]);

        const AggregatedGrid grid = aggregate(train);
        const FitReport fit = fit_lr_order(grid);
        SplitScores& out = results[rep];
        if (!fit.converged) return;
        const ConditionalFamily fam_lr = family_from_fit(grid, fit);
        const ConditionalFamily fam_st = family_from_cdf(fit_stochastic_order(grid));
        const ConditionalFamily fam_emp = family_from_cdf(empirical_family(grid));

        // Group the test responses by covariate.
        std::vector<std::vector<double>> test_ys(nx);
        for (std::size_t i = cfg.train_size; i < n; ++i) {
            const auto& [x, y] = data.pairs[idx[i]];
            const std::size_t pos = static_cast<std::size_t>(
                std::lower_bound(xs_all.begin(), xs_all.end(), x) - xs_all.begin());
            test_ys[pos].push_back(y);
        }
        out.lr.assign(nx, nan);
        out.st.assign(nx, nan);
        out.emp.assign(nx, nan);
        for (std::size_t i = 0; i < nx; ++i) {
            if (test_ys[i].empty()) continue;
            const auto mean_crps = [&](const ConditionalFamily& fam) {
                const StepCdf g = interpolate_at(fam, xs_all[i]);
                double s = 0.0;
                for (double y : test_ys[i]) s += crps(g, y);
                return s / static_cast<double>(test_ys[i].size());
            };
            out.lr[i] = mean_crps(fam_lr);
            out.st[i] = mean_crps(fam_st);
            out.emp[i] = mean_crps(fam_emp);
        }
        out.ok = true;
    });

    ScoreTable tab;
    tab.xs = xs_all;
    tab.score_lr.assign(nx, 0.0);
    tab.score_st.assign(nx, 0.0);
    tab.score_emp.assign(nx, 0.0);
    tab.rel_mean.assign(nx, 0.0);
    tab.rel_q25.assign(nx, 0.0);
    tab.rel_q75.assign(nx, 0.0);
    std::vector<std::size_t> present(nx, 0);
    std::vector<std::vector<double>> rel(nx);
    for (const SplitScores& r : results) {
        if (!r.ok) {
            ++tab.flagged;
            continue;
        }
        ++tab.replications;
        for (std::size_t i = 0; i < nx; ++i) {
            if (std::isnan(r.lr[i])) continue;
            ++present[i];
            tab.score_lr[i] += r.lr[i];
            tab.score_st[i] += r.st[i];
            tab.score_emp[i] += r.emp[i];
            if (r.st[i] > 0.0) rel[i].push_back(100.0 * (r.lr[i] - r.st[i]) / r.st[i]);
        }
    }
    if (tab.replications == 0) throw std::runtime_error("all splits failed to converge");
    for (std::size_t i = 0; i < nx; ++i) {
        if (present[i] > 0) {
            tab.score_lr[i] /= static_cast<double>(present[i]);
            tab.score_st[i] /= static_cast<double>(present[i]);
            tab.score_emp[i] /= static_cast<double>(present[i]);
        } else {
            tab.score_lr[i] = tab.score_st[i] = tab.score_emp[i] = nan;
        }
        double mean = 0.0;
        for (double v : rel[i]) mean += v;
        tab.rel_mean[i] = rel[i].empty() ? nan : mean / static_cast<double>(rel[i].size());
        tab.rel_q25[i] = detail::quantile7(rel[i], 0.25);
        tab.rel_q75[i] = detail::quantile7(rel[i], 0.75);
    }
    return tab;
}

}  // namespace lro
