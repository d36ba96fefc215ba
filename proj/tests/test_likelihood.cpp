#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aggnet/likelihood.hpp"
#include "aggnet/simulate.hpp"
#include "oracle.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace aggnet;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();


constexpr double kFrozenFixtureLogLikelihood = -30.991781654748365;

GroupConfig fixture_config() {
    GroupConfig cfg;
    cfg.sizes = {12, 20, 9};
    cfg.centres = Matrix(3, 2);
    cfg.centres << 0.0, 0.0, 1.5, 0.0, 0.4, 1.2;
    cfg.scales = Vector(3);
    cfg.scales << 0.8, 1.1, 0.6;
    return cfg;
}

AggregateMatrix fixture_counts() {
    const GroupConfig cfg = fixture_config();
    const auto net = simulate_network(cfg, {0.7, 2}, NetworkKind{true, false}, 2024);
    return aggregate(net, 3);
}

}  // namespace

TEST_CASE("log rising factorial") {
    CHECK(log_rising_factorial(10.0, 1.0) == doctest::Approx(std::log(10.0)).epsilon(1e-13));
    CHECK(log_rising_factorial(3.5, 4.0) == doctest::Approx(std::log(3.5 * 4.5 * 5.5 * 6.5)).epsilon(1e-14));
    CHECK(log_rising_factorial(7.0, 0.0) == 0.0);
    for (const double x : {10.0, 25.0, 1e3, 1e8, 4.5e9}) {
        for (const double k : {1.0, 3.0, 17.0, 200.0}) {
            double direct = 0.0;
            for (int i = 0; i < static_cast<int>(k); ++i) {
                direct += std::log(x + i);
            }
            CHECK(log_rising_factorial(x, k) == doctest::Approx(direct).epsilon(1e-13));
        }
    }
}

TEST_CASE("beta-binomial matching") {
    SUBCASE("binomial variance sends the concentration to its cap") {
        const auto p = match_beta_binomial(5.0, 2.5, 10);
        CHECK(p.concentration() == doctest::Approx(9.0 / kStabilityEpsilon));
        for (std::int64_t y = 0; y <= 10; ++y) {
            CHECK(std::abs(beta_binomial_log_pmf(y, p) - binomial_log_pmf(y, 10, 0.5)) < 1e-6);
        }
    }
    SUBCASE("f = 2") {
        const auto p = match_beta_binomial(5.0, 5.0, 10);
        CHECK(p.alpha == doctest::Approx(4.0));
        CHECK(p.beta == doctest::Approx(4.0));
        const double phi = p.alpha + p.beta;
        const double mean = 10 * p.alpha / phi;
        const double var = mean * p.beta * (phi + 10) / (phi * (phi + 1));
        CHECK(mean == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(var == doctest::Approx(5.0).epsilon(1e-15));
    }
    SUBCASE("domain errors carry the offending moments") {
        CHECK_THROWS_AS(match_beta_binomial(0.0, 1.0, 10), MomentMatchingError);
        CHECK_THROWS_AS(match_beta_binomial(10.0, 1.0, 10), MomentMatchingError);
        CHECK_THROWS_AS(match_beta_binomial(5.0, 0.0, 10), MomentMatchingError);
        try {
            match_beta_binomial(11.0, 2.0, 10);
        } catch (const MomentMatchingError& e) {
            CHECK(e.mean() == 11.0);
            CHECK(e.variance() == 2.0);
            CHECK(e.trials() == 10);
        }
    }
    SUBCASE("underdispersion is clamped to the binomial limit") {
        const auto p = match_beta_binomial(5.0, 1.0, 10);
        CHECK(std::abs(beta_binomial_log_pmf(3, p) - binomial_log_pmf(3, 10, 0.5)) < 1e-6);
    }
}

TEST_CASE("moment fidelity of matched beta-binomials") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::int64_t t = 2 + static_cast<std::int64_t>(u(rng) * 5000);
        const double rho = 0.001 + 0.998 * u(rng);
        const double f = 1.0 + 10 * kStabilityEpsilon + (static_cast<double>(t) - 1.0) * u(rng) * 0.999;
        const double mean = rho * static_cast<double>(t);
        const double var = f * static_cast<double>(t) * rho * (1 - rho);
        const auto p = match_beta_binomial(mean, var, t);
        const double phi = p.alpha + p.beta;
        const double got_mean = static_cast<double>(t) * p.alpha / phi;
        const double got_var = got_mean * p.beta * (phi + static_cast<double>(t)) / (phi * (phi + 1));
        CHECK(got_mean == doctest::Approx(mean).epsilon(1e-9));
        CHECK(got_var == doctest::Approx(var).epsilon(1e-9));
    }
}

TEST_CASE("negative-binomial matching") {
    const auto a = match_negative_binomial(4.0, 8.0);
    CHECK(a.prob == doctest::Approx(0.5));
    CHECK(a.size == doctest::Approx(4.0));
    CHECK(a.size * (1 - a.prob) / a.prob == doctest::Approx(4.0));
    CHECK(a.size * (1 - a.prob) / (a.prob * a.prob) == doctest::Approx(8.0));

    const auto g = match_negative_binomial(2.0, 6.0);
    CHECK(g.prob == doctest::Approx(1.0 / 3.0));
    CHECK(g.size == doctest::Approx(1.0));

    const auto poisson = match_negative_binomial(4.0, 4.0);
    for (std::int64_t y = 0; y <= 30; ++y) {
        CHECK(std::abs(negative_binomial_log_pmf(y, poisson) - poisson_log_pmf(y, 4.0)) < 1e-6);
    }
    CHECK_THROWS_AS(match_negative_binomial(0.0, 1.0), MomentMatchingError);
    CHECK_THROWS_AS(match_negative_binomial(1.0, -1.0), MomentMatchingError);

    double total = 0.0;
    for (std::int64_t y = 0; y < 400; ++y) {
        total += std::exp(negative_binomial_log_pmf(y, a));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("negative-binomial moment fidelity") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double mean = 0.01 + 50 * u(rng);
        const double var = mean * (1.0 + 1e-6 + 10 * u(rng));
        const auto p = match_negative_binomial(mean, var);
        CHECK(p.size * (1 - p.prob) / p.prob == doctest::Approx(mean).epsilon(1e-9));
        CHECK(p.size * (1 - p.prob) / (p.prob * p.prob) == doctest::Approx(var).epsilon(1e-9));
    }
}

TEST_CASE("beta-binomial pmf") {
    CHECK(beta_binomial_log_pmf(0, {0, 2.0, 3.0}) == 0.0);
    CHECK(beta_binomial_log_pmf(0, {1, 1.0, 1.0}) == doctest::Approx(std::log(0.5)));
    CHECK(beta_binomial_log_pmf(1, {1, 1.0, 1.0}) == doctest::Approx(std::log(0.5)));
    CHECK(beta_binomial_log_pmf(-1, {4, 1.0, 1.0}) == kNegInf);
    CHECK(beta_binomial_log_pmf(5, {4, 1.0, 1.0}) == kNegInf);

    double total = 0.0;
    for (std::int64_t y = 0; y <= 10; ++y) {
        total += std::exp(beta_binomial_log_pmf(y, {10, 4.0, 4.0}));
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("matched pmfs normalise") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const std::int64_t t : {1, 7, 90, 1000, 10000}) {
        for (int rep = 0; rep < 4; ++rep) {
            const double rho = 0.01 + 0.98 * u(rng);
            const double f = rep == 0 ? 1.0 : 1.0 + (static_cast<double>(t) - 1.0) * 0.5 * u(rng);
            const auto p = match_beta_binomial(rho * static_cast<double>(t),
                                               f * static_cast<double>(t) * rho * (1 - rho), t);
            double total = 0.0;
            for (std::int64_t y = 0; y <= t; ++y) {
                total += std::exp(beta_binomial_log_pmf(y, p));
            }
            INFO("t=" << t << " rho=" << rho << " f=" << f);
            CHECK(std::abs(total - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("continuity at the binomial boundary") {
    const std::int64_t t = 40;
    const double rho = 0.3;
    double previous_gap = std::numeric_limits<double>::infinity();
    for (const double excess : {0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const auto p = match_beta_binomial(rho * t, (1 + excess) * t * rho * (1 - rho), t);
        double gap = 0.0;
        for (std::int64_t y = 0; y <= t; ++y) {
            gap = std::max(gap, std::abs(beta_binomial_log_pmf(y, p) - binomial_log_pmf(y, t, rho)));
        }
        CHECK(gap < previous_gap);
        previous_gap = gap;
    }
    CHECK(previous_gap < 1e-4);
}

TEST_CASE("approximate log likelihood") {
    SUBCASE("single group of two in the binomial limit") {
        GroupConfig cfg{{2}, Matrix::Zero(1, 2), Vector::Zero(1)};
        AggregateMatrix y{CountMatrix::Constant(1, 1, 1), NetworkKind{true, false}, {2}};
        CHECK(approximate_log_likelihood(y, cfg, {0.5, 2}) == doctest::Approx(std::log(0.5)).epsilon(1e-8));
    }
    SUBCASE("entries sum to the total") {
        const GroupConfig cfg = fixture_config();
        const AggregateMatrix y = fixture_counts();
        const auto report = approximate_log_likelihood_report(y, cfg, {0.7, 2});
        double total = 0.0;
        for (const auto& entry : report.entries) {
            const auto bb = match_beta_binomial(entry.moments.mean, entry.moments.variance, entry.moments.trials);
            CHECK(entry.log_probability == doctest::Approx(beta_binomial_log_pmf(entry.observed, bb)));
            total += entry.log_probability;
        }
        CHECK(report.entries.size() == 9);
        CHECK(report.diagnostics.empty());
        CHECK(approximate_log_likelihood(y, cfg, {0.7, 2}) == doctest::Approx(total).epsilon(1e-14));
    }
    SUBCASE("independent reimplementation and frozen value") {
        const GroupConfig cfg = fixture_config();
        const AggregateMatrix y = fixture_counts();
        const double value = approximate_log_likelihood(y, cfg, {0.7, 2});
        CHECK(value == doctest::Approx(oracle::log_likelihood(y.counts, cfg, 0.7)).epsilon(1e-10));
        CHECK(value == doctest::Approx(kFrozenFixtureLogLikelihood).epsilon(1e-10));
    }
    SUBCASE("impossible counts") {
        GroupConfig cfg{{3}, Matrix::Zero(1, 2), Vector::Constant(1, 0.5)};
        AggregateMatrix y{CountMatrix::Constant(1, 1, 7), NetworkKind{true, false}, {3}};
        CHECK(approximate_log_likelihood(y, cfg, {0.5, 2}) == kNegInf);
        const auto report = approximate_log_likelihood_report(y, cfg, {0.5, 2});
        REQUIRE(report.diagnostics.size() == 1);
        CHECK(report.diagnostics[0].find("exceeds trials 6") != std::string::npos);

        AggregateMatrix any_edge{CountMatrix::Constant(1, 1, 1), NetworkKind{true, false}, {3}};
        CHECK(approximate_log_likelihood(any_edge, cfg, {0.0, 2}) == kNegInf);
    }
    SUBCASE("size mismatch") {
        const GroupConfig cfg = fixture_config();
        AggregateMatrix y = fixture_counts();
        y.sizes[0] += 1;
        CHECK_THROWS_AS(approximate_log_likelihood(y, cfg, {0.7, 2}), std::invalid_argument);
    }
    SUBCASE("undirected sums the upper triangle") {
        const GroupConfig cfg = fixture_config();
        const auto net = simulate_network(cfg, {0.7, 2}, NetworkKind{false, false}, 5);
        const AggregateMatrix y = aggregate(net, 3);
        CHECK(approximate_log_likelihood_report(y, cfg, {0.7, 2}).entries.size() == 6);
    }
    SUBCASE("weighted networks use the negative binomial") {
        const GroupConfig cfg = fixture_config();
        const auto net = simulate_network(cfg, {0.7, 2}, NetworkKind{true, true}, 6);
        const AggregateMatrix y = aggregate(net, 3);
        const auto report = approximate_log_likelihood_report(y, cfg, {0.7, 2});
        for (const auto& entry : report.entries) {
            const auto nb = match_negative_binomial(entry.moments.mean, entry.moments.variance);
            CHECK(entry.log_probability == doctest::Approx(negative_binomial_log_pmf(entry.observed, nb)));
        }
        CHECK(std::isfinite(report.total));
    }
}

TEST_CASE("raising theta raises every expected volume") {
    const GroupConfig cfg = fixture_config();
    const auto low = aggregate_moments(cfg, {0.3, 2}, NetworkKind{true, false});
    const auto high = aggregate_moments(cfg, {0.31, 2}, NetworkKind{true, false});
    CHECK((high.mean.array() > low.mean.array()).all());
}

TEST_CASE("matched pmf tracks the simulated volume distribution") {
    GroupConfig cfg{{10, 15}, Matrix(2, 2), Vector::Constant(2, 5.0)};
    cfg.centres << 0.0, 0.0, 1.0, 0.0;
    const KernelParams kp{1.0, 2};
    const NetworkKind kind{true, false};
    const auto samples = simulate_volumes(cfg, kp, kind, 0, 1, 100000, 77);
    const auto m = aggregate_moments(cfg, kp, kind);
    const auto bb = match_beta_binomial(m.mean(0, 1), m.variance(0, 1), m.trials(0, 1));
    std::vector<double> pmf;
    for (std::int64_t y = 0; y <= bb.trials; ++y) {
        pmf.push_back(std::exp(beta_binomial_log_pmf(y, bb)));
    }
    const double tv = total_variation_distance(samples, pmf);
    MESSAGE("total variation distance " << tv);
    CHECK(tv < 0.02);
}
