#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "lro/order.hpp"

using lro::DiscreteDist;
using lro::is_lr_less_equal;
using lro::is_roc_concave;
using lro::is_st_less_equal;
using lro::ordinal_dominance;
using lro::roc_curve;
using lro::StepCdf;
using testutil::Prng;

namespace {
DiscreteDist two_atoms(double p0, double p1) {
    return DiscreteDist({0.0, 1.0}, {p0, p1});
}
}  // namespace

TEST_CASE("lr order on two-atom pairs") {
    CHECK(is_lr_less_equal(two_atoms(0.5, 0.5), two_atoms(0.25, 0.75)));
    CHECK_FALSE(is_lr_less_equal(two_atoms(0.25, 0.75), two_atoms(0.5, 0.5)));
}

TEST_CASE("lr order is reflexive") {
    Prng g(11);
    for (int trial = 0; trial < 50; ++trial) {
        const DiscreteDist p = testutil::random_dist(g, 8);
        CHECK(is_lr_less_equal(p, p));
    }
}

TEST_CASE("st order on two-atom pairs and point masses") {
    CHECK(is_st_less_equal(two_atoms(0.5, 0.5), two_atoms(0.25, 0.75)));
    const DiscreteDist d0({0.0}, {1.0});
    const DiscreteDist d1({1.0}, {1.0});
    CHECK(is_st_less_equal(d0, d1));
    CHECK_FALSE(is_st_less_equal(d1, d0));
    Prng g(12);
    const DiscreteDist p = testutil::random_dist(g, 6);
    CHECK(is_st_less_equal(p, p));
}

TEST_CASE("roc curve of a shared point mass degenerates to the two corners") {
    const DiscreteDist d0({0.0}, {1.0});
    const auto roc = roc_curve(d0, d0);
    REQUIRE(roc.points.size() == 2);
    CHECK(roc.points.front() == std::pair<double, double>{1.0, 1.0});
    CHECK(roc.points.back() == std::pair<double, double>{0.0, 0.0});
}

TEST_CASE("roc curve contains the interior evaluation point") {
    const auto roc = roc_curve(two_atoms(0.5, 0.5), two_atoms(0.25, 0.75));
    bool found = false;
    for (const auto& [a, b] : roc.points)
        if (a == Catch::Approx(0.5).margin(1e-15) && b == Catch::Approx(0.75).margin(1e-15))
            found = true;
    CHECK(found);
}

TEST_CASE("roc curve of identical distributions lies on the diagonal") {
    const DiscreteDist u({0.0, 1.0}, {0.5, 0.5});
    for (const auto& [a, b] : roc_curve(u, u).points)
        CHECK(a == Catch::Approx(b).margin(1e-15));
}

TEST_CASE("roc concavity matches the order verdicts on the examples") {
    CHECK(is_roc_concave(roc_curve(two_atoms(0.5, 0.5), two_atoms(0.25, 0.75))));
    CHECK(is_roc_concave(roc_curve(two_atoms(0.5, 0.5), two_atoms(0.5, 0.5))));
    CHECK_FALSE(is_roc_concave(roc_curve(two_atoms(0.25, 0.75), two_atoms(0.5, 0.5))));
}

TEST_CASE("ordinal dominance curve basics") {
    const StepCdf f({0.0, 1.0}, {0.5, 1.0});
    const StepCdf gsame({0.0, 1.0}, {0.5, 1.0});
    const StepCdf gother({0.0, 1.0}, {0.25, 1.0});

    const auto identity = ordinal_dominance(f, gsame, {0.0, 0.5, 1.0});
    CHECK(identity[0] == 0.0);
    CHECK(identity[1] == 0.5);
    CHECK(identity[2] == 1.0);

    CHECK(ordinal_dominance(f, gother, {1.0})[0] == 1.0);
    CHECK(ordinal_dominance(f, gother, {0.5})[0] == 0.25);
    CHECK_THROWS_AS(ordinal_dominance(f, gother, {1.5}), std::invalid_argument);
}

TEST_CASE("lr order is equivalent to roc concavity on random pairs") {
    Prng g(2024);
    for (int trial = 0; trial < 600; ++trial) {
        DiscreteDist p = testutil::random_dist(g, 8);
        DiscreteDist q = testutil::random_dist(g, 8);
        if (trial % 2 == 0) std::tie(p, q) = testutil::random_lr_pair(g, 8);
        const bool lr = is_lr_less_equal(p, q);
        const bool concave = is_roc_concave(roc_curve(p, q));
        REQUIRE(lr == concave);
        if (lr) CHECK(is_st_less_equal(p, q));
    }
}

TEST_CASE("lr order is antisymmetric up to equality") {
    Prng g(5150);
    for (int trial = 0; trial < 300; ++trial) {
        auto [p, q] = testutil::random_lr_pair(g, 6);
        if (is_lr_less_equal(q, p)) {
            REQUIRE(p.support.size() == q.support.size());
            for (std::size_t i = 0; i < p.support.size(); ++i) {
                REQUIRE(p.support[i] == q.support[i]);
                REQUIRE(p.probs[i] == Catch::Approx(q.probs[i]).margin(1e-7));
            }
        }
    }
}

TEST_CASE("lr order is transitive along constructed chains") {
    Prng g(31337);
    for (int trial = 0; trial < 300; ++trial) {
        // One base density tilted twice by non-decreasing factors.
        const std::size_t len = testutil::rint(g, 2, 8);
        const std::vector<double> support = testutil::random_support(g, len);
        const std::vector<double> base = testutil::random_probs(g, len, true);
        auto tilt = [&](const std::vector<double>& from) {
            std::vector<double> out(len);
            double r = testutil::runif(g, 0.2, 1.0), total = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                out[i] = from[i] * r;
                total += out[i];
                r += testutil::runif(g, 0.0, 1.0);
            }
            if (total == 0.0) return from;
            for (double& v : out) v /= total;
            return out;
        };
        const std::vector<double> mid = tilt(base);
        const std::vector<double> top = tilt(mid);
        const DiscreteDist p(support, base), q(support, mid), r(support, top);
        REQUIRE(is_lr_less_equal(p, q));
        REQUIRE(is_lr_less_equal(q, r));
        CHECK(is_lr_less_equal(p, r));
    }
}

TEST_CASE("mixtures of an lr pair stay ordered in the mixture weight") {
    Prng g(808);
    for (int trial = 0; trial < 200; ++trial) {
        auto [p, q] = testutil::random_lr_pair(g, 6);
        const double s = testutil::runif(g, 0.0, 0.98);
        const double t = testutil::runif(g, s + 0.01, 1.0);
        std::vector<double> ps(p.probs.size()), pt(p.probs.size());
        for (std::size_t i = 0; i < p.probs.size(); ++i) {
            ps[i] = (1.0 - s) * p.probs[i] + s * q.probs[i];
            pt[i] = (1.0 - t) * p.probs[i] + t * q.probs[i];
        }
        double sum_s = 0.0, sum_t = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            sum_s += ps[i];
            sum_t += pt[i];
        }
        for (std::size_t i = 0; i < ps.size(); ++i) {
            ps[i] /= sum_s;
            pt[i] /= sum_t;
        }
        CHECK(is_lr_less_equal(DiscreteDist(p.support, ps), DiscreteDist(p.support, pt)));
    }
}
