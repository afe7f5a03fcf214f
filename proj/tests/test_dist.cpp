#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lro/dist.hpp"
#include "lro/order.hpp"
#include "lro/rng.hpp"

using lro::ConditionalFamily;
using lro::crps;
using lro::DiscreteDist;
using lro::expected_crps;
using lro::GammaModel;
using lro::interpolate_at;
using lro::kuiper_distance;
using lro::simple_score;
using lro::StepCdf;
using testutil::Prng;

namespace {

StepCdf random_step_cdf(Prng& g, std::size_t max_atoms) {
    const DiscreteDist d = testutil::random_dist(g, max_atoms, false);
    return lro::step_cdf_from_masses(d.support, d.probs);
}

// Midpoint rule on a uniform grid refined by the discontinuity points;
// the integrand is piecewise constant, so each refined cell is evaluated
// away from any jump.
double crps_quadrature(const StepCdf& g, double y, std::size_t points = 100000) {
    const double lo = std::min(g.min_support(), y) - 1.0;
    const double hi = std::max(g.max_support(), y) + 1.0;
    std::vector<double> knots;
    knots.reserve(points + g.jumps.size() + 2);
    for (std::size_t i = 0; i <= points; ++i)
        knots.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points));
    for (double j : g.jumps) knots.push_back(j);
    knots.push_back(y);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto f = [&](double z) {
        const double d = g(z) - (y <= z ? 1.0 : 0.0);
        return d * d;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        total += f(0.5 * (knots[i] + knots[i + 1])) * (knots[i + 1] - knots[i]);
    return total;
}

}  // namespace

TEST_CASE("step cdf evaluation and quantiles") {
    const StepCdf f({0.0, 2.0}, {0.5, 1.0});
    CHECK(f(-1.0) == 0.0);
    CHECK(f(0.0) == 0.5);
    CHECK(f(1.9) == 0.5);
    CHECK(f(2.0) == 1.0);
    CHECK(f(9.0) == 1.0);
    CHECK(f.quantile(0.5) == 0.0);
    CHECK(f.quantile(0.500001) == 2.0);
    CHECK(f.quantile(1.0) == 2.0);
    CHECK(f.quantile(0.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("interpolation returns the family members at grid points") {
    ConditionalFamily fam;
    fam.xs = {1.0, 2.0};
    fam.dists.push_back(StepCdf({0.0, 1.0}, {0.5, 1.0}));
    fam.dists.push_back(StepCdf({0.0, 1.0}, {0.25, 1.0}));

    CHECK(interpolate_at(fam, 1.0)(0.0) == 0.5);
    CHECK(interpolate_at(fam, 0.5)(0.0) == 0.5);   // constant extension below
    CHECK(interpolate_at(fam, 3.0)(0.0) == 0.25);  // constant extension above
    const StepCdf mid = interpolate_at(fam, 1.5);
    CHECK(mid(0.0) == Catch::Approx(0.375).margin(1e-15));
    CHECK(mid(1.0) == 1.0);
}

TEST_CASE("interpolation merges distinct jump sets") {
    ConditionalFamily fam;
    fam.xs = {0.0, 1.0};
    fam.dists.push_back(StepCdf({0.0}, {1.0}));
    fam.dists.push_back(StepCdf({1.0}, {1.0}));
    const StepCdf mid = interpolate_at(fam, 0.25);
    CHECK(mid(0.0) == Catch::Approx(0.75).margin(1e-15));
    CHECK(mid(0.5) == Catch::Approx(0.75).margin(1e-15));
    CHECK(mid(1.0) == 1.0);
}

TEST_CASE("interpolation preserves lr order along the family") {
    Prng g(404);
    for (int trial = 0; trial < 100; ++trial) {
        auto [p, q] = testutil::random_lr_pair(g, 6);
        ConditionalFamily fam;
        fam.xs = {0.0, 1.0};
        fam.dists.push_back(lro::step_cdf_from_masses(p.support, p.probs));
        fam.dists.push_back(lro::step_cdf_from_masses(q.support, q.probs));
        const double a = testutil::runif(g, -0.2, 1.0);
        const double b = testutil::runif(g, a + 0.01, 1.2);
        const StepCdf fa = interpolate_at(fam, a);
        const StepCdf fb = interpolate_at(fam, b);
        // Convert back to atoms on the common support for the order check.
        auto masses = [&](const StepCdf& f) {
            std::vector<double> m(f.cum.size());
            double prev = 0.0;
            for (std::size_t i = 0; i < f.cum.size(); ++i) {
                m[i] = f.cum[i] - prev;
                prev = f.cum[i];
                if (m[i] < 0.0) m[i] = 0.0;
            }
            return DiscreteDist(f.jumps, m);
        };
        CHECK(lro::is_lr_less_equal(masses(fa), masses(fb), 1e-9));
    }
}

TEST_CASE("crps of a point mass at the outcome is zero") {
    const StepCdf point({3.0}, {1.0});
    CHECK(crps(point, 3.0) == 0.0);
}

TEST_CASE("crps segment formula on a hand-worked example") {
    const StepCdf g({0.0, 1.0}, {0.5, 1.0});
    CHECK(crps(g, 0.0) == Catch::Approx(0.25).margin(1e-15));
    // outcome below the support: an extra unit-length (0-1)^2 segment
    CHECK(crps(g, -1.0) == Catch::Approx(1.0 + 0.25).margin(1e-15));
}

TEST_CASE("crps closed form matches trapezoid quadrature") {
    Prng g(515);
    for (int trial = 0; trial < 60; ++trial) {
        const StepCdf f = random_step_cdf(g, 7);
        const double y = testutil::runif(g, f.min_support() - 0.5, f.max_support() + 0.5);
        CHECK(crps(f, y) == Catch::Approx(crps_quadrature(f, y)).margin(1e-6));
        CHECK(crps(f, y) >= 0.0);
    }
}

TEST_CASE("expected crps of a fine discretization approaches the irreducible term") {
    const GammaModel model = GammaModel::simulation_default();
    const double x = 2.0;
    const double a = model.shape(x), b = model.scale(x);
    const double irreducible = std::exp(std::log(b) - lro::log_beta(0.5, a));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t points : {25, 50, 100, 200}) {
        std::vector<double> jumps(points), cum(points);
        for (std::size_t i = 0; i < points; ++i) {
            const double alpha = static_cast<double>(i + 1) / static_cast<double>(points + 1);
            jumps[i] = lro::gamma_quantile(alpha, a, b);
            cum[i] = alpha;
        }
        cum.back() = 1.0;
        const double s = expected_crps(StepCdf(jumps, cum), x, model);
        const double residual = s - irreducible;
        CHECK(residual > 0.0);
        CHECK(residual < prev);
        prev = residual;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("expected crps additive term for the unit-exponential case") {
    // B(1/2, 1) = 2, so shape 1 and scale 1 contribute exactly 0.5.
    GammaModel unit;
    unit.shape = [](double) { return 1.0; };
    unit.scale = [](double) { return 1.0; };
    unit.x_min = 0.0;
    unit.x_max = 1.0;
    CHECK(std::exp(std::log(unit.scale(0.5)) - lro::log_beta(0.5, unit.shape(0.5))) ==
          Catch::Approx(0.5).margin(1e-14));
    // A forecast equal to a coarse discretization still dominates 0.5.
    const StepCdf coarse({0.2, 0.7, 1.6, 3.0}, {0.18, 0.5, 0.8, 1.0});
    CHECK(expected_crps(coarse, 0.5, unit) > 0.5);
}

TEST_CASE("simple score vanishes for a dense discretization of the truth") {
    const GammaModel model = GammaModel::simulation_default();
    const double x = 3.0;
    const double a = model.shape(x), b = model.scale(x);
    std::vector<double> jumps(400), cum(400);
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        const double alpha = static_cast<double>(i + 1) / static_cast<double>(jumps.size() + 1);
        jumps[i] = lro::gamma_quantile(alpha, a, b);
        cum[i] = alpha;
    }
    cum.back() = 1.0;
    CHECK(simple_score(StepCdf(jumps, cum), x, model) < 5e-3);
}

TEST_CASE("simple score of an all-mass-at-infinity forecast is one half") {
    // A jump far beyond the truncated support acts as the zero CDF.
    const GammaModel model = GammaModel::simulation_default();
    const StepCdf far({1e15}, {1.0});
    CHECK(simple_score(far, 2.5, model) == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("simple score matches a Monte-Carlo estimate") {
    const GammaModel model = GammaModel::simulation_default();
    const double x = 2.0;
    const double a = model.shape(x), b = model.scale(x);
    Prng g(99331);
    const StepCdf f = [&] {
        std::vector<double> jumps{a * b * 0.6, a * b * 0.9, a * b * 1.2};
        std::vector<double> cum{0.3, 0.55, 1.0};
        return StepCdf(jumps, cum);
    }();
    const double exact = simple_score(f, x, model);
    lro::Rng rng(42);
    const std::size_t draws = 1000000;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double y = lro::sample_gamma(rng, a, b);
        const double v = std::fabs(f(y) - lro::gamma_cdf(y, a, b));
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(draws);
    const double se = std::sqrt((sumsq / static_cast<double>(draws) - mean * mean) /
                                static_cast<double>(draws));
    CHECK(std::fabs(exact - mean) <= 3.0 * se + 1e-9);
}

TEST_CASE("kuiper distance basics") {
    const std::vector<double> a{1.0, 0.0, 0.0, 0.0};
    const std::vector<double> b{0.0, 0.0, 0.0, 1.0};
    CHECK(kuiper_distance(a, a, 2, 2) == 0.0);
    CHECK(kuiper_distance(a, b, 2, 2) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("kuiper distance is a norm on cell-mass differences") {
    Prng g(777);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t l = testutil::rint(g, 1, 4), m = testutil::rint(g, 1, 4);
        auto rand_cells = [&] {
            std::vector<double> v(l * m);
            for (double& x : v) x = testutil::runif(g, 0.0, 1.0);
            return v;
        };
        const auto a = rand_cells(), b = rand_cells(), c = rand_cells();
        const double dab = kuiper_distance(a, b, l, m);
        const double dba = kuiper_distance(b, a, l, m);
        const double dac = kuiper_distance(a, c, l, m);
        const double dcb = kuiper_distance(c, b, l, m);
        CHECK(dab == Catch::Approx(dba).margin(1e-14));
        CHECK(dab <= dac + dcb + 1e-12);
        if (a != b) CHECK(dab > 0.0);
    }
}
