#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aggnet/moments.hpp"
#include "aggnet/simulate.hpp"

#include <cmath>
#include <random>

using namespace aggnet;

namespace {

constexpr NetworkKind kDirected{true, false};
constexpr NetworkKind kUndirected{false, false};

GroupConfig two_groups(std::int64_t n_a, std::int64_t n_b, double delta, double sd_a, double sd_b, int q = 2) {
    GroupConfig cfg;
    cfg.sizes = {n_a, n_b};
    cfg.centres = Matrix::Zero(2, q);
    cfg.centres(1, 0) = delta;
    cfg.scales = Vector(2);
    cfg.scales << sd_a, sd_b;
    return cfg;
}

}  // namespace

TEST_CASE("term coefficient examples") {
    const auto directed3 = term_coefficients(3, std::nullopt, kDirected);
    CHECK(directed3.prefactor == 6);
    const std::array<std::int64_t, 7> expected3{6, 6, 6, 6, 6, 6, 0};
    CHECK(directed3.counts == expected3);
    CHECK(directed3.total() == 36);

    const auto between = term_coefficients(2, 3, kDirected);
    CHECK(between.prefactor == 6);
    const std::array<std::int64_t, 7> expected_between{6, 0, 12, 6, 0, 0, 12};
    CHECK(between.counts == expected_between);
    CHECK(between.total() == 36);

    CHECK(term_coefficients(4, std::nullopt, kUndirected).total() == 36);
    CHECK(term_coefficients(1, std::nullopt, kDirected).empty());
    CHECK(term_coefficients(0, std::nullopt, kUndirected).empty());

    const auto undirected5 = term_coefficients(5, std::nullopt, kUndirected);
    CHECK(undirected5.per_prefactor(TermClass::shared_row) == doctest::Approx(2.0 * 3 / 3));
    CHECK(undirected5.per_prefactor(TermClass::column_meets_row) == doctest::Approx(1.0));
    CHECK(undirected5.per_prefactor(TermClass::disjoint) == doctest::Approx(3.0));
}

TEST_CASE("term coefficients equal brute-force enumeration") {
    for (const NetworkKind kind : {kDirected, kUndirected}) {
        for (std::int64_t n_a = 1; n_a <= 6; ++n_a) {
            CHECK(term_coefficients(n_a, std::nullopt, kind) == enumerate_second_moment(n_a, std::nullopt, kind));
            const std::int64_t within_total =
                kind.directed ? n_a * n_a * (n_a - 1) * (n_a - 1) : n_a * n_a * (n_a - 1) * (n_a - 1) / 4;
            CHECK(term_coefficients(n_a, std::nullopt, kind).total() == within_total);
            for (std::int64_t n_b = 1; n_b <= 6; ++n_b) {
                CHECK(term_coefficients(n_a, n_b, kind) == enumerate_second_moment(n_a, n_b, kind));
                CHECK(term_coefficients(n_a, n_b, kind).total() == n_a * n_a * n_b * n_b);
            }
        }
    }
}

TEST_CASE("aggregate mean") {
    const GroupConfig coincident = two_groups(10, 15, 0.0, 0.0, 0.0);
    CHECK(aggregate_mean(coincident, {1.0, 2}, kDirected, 0, 0) == doctest::Approx(90.0));
    CHECK(aggregate_mean(coincident, {1.0, 2}, kUndirected, 0, 0) == doctest::Approx(45.0));
    CHECK(aggregate_mean(coincident, {0.01, 2}, kDirected, 0, 1) == doctest::Approx(1.5));
    CHECK_THROWS_AS(aggregate_mean(coincident, {1.0, 2}, kDirected, 0, 2), std::out_of_range);
}

TEST_CASE("point masses give binomial volumes") {
    const GroupConfig pair = two_groups(2, 1, 0.0, 0.0, 0.0);
    CHECK(within_group_variance(pair, {0.5, 2}, kDirected, 0) == doctest::Approx(0.5));
    CHECK(within_group_variance(pair, {0.5, 2}, kDirected, 1) == 0.0);

    const GroupConfig single = two_groups(1, 1, 0.0, 0.0, 0.0);
    CHECK(between_group_variance(single, {0.3, 2}, kDirected, 0, 1) == doctest::Approx(0.21));
    CHECK_THROWS_AS(between_group_variance(single, {0.3, 2}, kDirected, 0, 0), std::invalid_argument);

    const GroupConfig apart = two_groups(4, 7, 1.2, 0.0, 0.0);
    const double rho = 0.8 * std::exp(-0.5 * 1.2 * 1.2);
    CHECK(between_group_variance(apart, {0.8, 2}, kDirected, 0, 1) ==
          doctest::Approx(28.0 * rho * (1.0 - rho)).epsilon(1e-12));
}

TEST_CASE("directed within variance matches the closed form") {
    const GroupConfig cfg = two_groups(9, 4, 0.5, 1.3, 0.7);
    const KernelParams kp{0.8, 2};
    const KernelMoments m = kernel_moments(ClusterPair::from_groups(cfg, 0, 0), kp);
    const double n = 9;
    const double expected = n * (n - 1) *
                            (m.mean * (1 - m.mean) + (m.second - m.mean * m.mean) +
                             4 * (n - 2) * (m.cross_common_a - m.mean * m.mean));
    CHECK(within_group_variance(cfg, kp, kDirected, 0) == doctest::Approx(expected).epsilon(1e-12));

    const KernelMoments mb = kernel_moments(ClusterPair::from_groups(cfg, 0, 1), kp);
    const double between = 36.0 * (mb.mean * (1 - mb.mean) + 3 * (mb.cross_common_a - mb.mean * mb.mean) +
                                   8 * (mb.cross_common_b - mb.mean * mb.mean));
    CHECK(between_group_variance(cfg, kp, kDirected, 0, 1) == doctest::Approx(between).epsilon(1e-12));
}

TEST_CASE("Monte Carlo agreement at wide clusters") {
    const GroupConfig cfg = two_groups(10, 15, 1.0, 5.0, 5.0);
    const KernelParams kp{1.0, 2};

    const auto between = mc_moments(cfg, kp, kDirected, 0, 1, 100000, 21);
    CHECK(std::abs(between.mean_hat - aggregate_mean(cfg, kp, kDirected, 0, 1)) <= 3 * between.std_error_mean);
    CHECK(std::abs(between.var_hat - between_group_variance(cfg, kp, kDirected, 0, 1)) <= 3 * between.std_error_var);

    const auto within = mc_moments(cfg, kp, kDirected, 0, 0, 100000, 22);
    CHECK(std::abs(within.mean_hat - aggregate_mean(cfg, kp, kDirected, 0, 0)) <= 3 * within.std_error_mean);
    CHECK(std::abs(within.var_hat - within_group_variance(cfg, kp, kDirected, 0)) <= 3 * within.std_error_var);
}

TEST_CASE("analytic moments agree with simulation across kinds") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int point = 0;
    for (const NetworkKind kind : {NetworkKind{true, false}, NetworkKind{false, false}, NetworkKind{true, true},
                                   NetworkKind{false, true}}) {
        for (int rep = 0; rep < 5; ++rep, ++point) {
            const int q = 1 + rep % 3;
            const GroupConfig cfg = two_groups(2 + static_cast<std::int64_t>(u(rng) * 8),
                                               1 + static_cast<std::int64_t>(u(rng) * 8), 3.0 * u(rng),
                                               2.0 * u(rng), 2.0 * u(rng), q);
            const KernelParams kp{0.2 + 0.8 * u(rng), q};
            for (const auto& [a, b] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 1}}) {
                const auto est = mc_moments(cfg, kp, kind, a, b, 20000, 100 + static_cast<std::uint64_t>(point));
                const double mean = aggregate_mean(cfg, kp, kind, a, b);
                const double var =
                    a == b ? within_group_variance(cfg, kp, kind, a) : between_group_variance(cfg, kp, kind, a, b);
                INFO("kind directed=" << kind.directed << " weighted=" << kind.weighted << " a=" << a << " b=" << b);
                CHECK(std::abs(est.mean_hat - mean) <= 4 * est.std_error_mean + 1e-12);
                CHECK(std::abs(est.var_hat - var) <= 4 * est.std_error_var + 1e-12);
            }
        }
    }
}

TEST_CASE("moment properties on a random grid") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int q = 1 + trial % 3;
        const auto n_a = 1 + static_cast<std::int64_t>(u(rng) * 30);
        const auto n_b = 1 + static_cast<std::int64_t>(u(rng) * 30);
        const GroupConfig cfg = two_groups(n_a, n_b, 4.0 * u(rng), 3.0 * u(rng), 3.0 * u(rng), q);
        const KernelParams kp{u(rng), q};
        for (const NetworkKind kind : {kDirected, kUndirected, NetworkKind{true, true}}) {
            CHECK(within_group_variance(cfg, kp, kind, 0) >= 0.0);
            CHECK(between_group_variance(cfg, kp, kind, 0, 1) >= 0.0);
            CHECK(aggregate_mean(cfg, kp, kind, 0, 0) <= static_cast<double>(trials(cfg, kind, 0, 0)));
            // exchange of group labels
            CHECK(aggregate_mean(cfg, kp, kind, 0, 1) ==
                  doctest::Approx(aggregate_mean(cfg, kp, kind, 1, 0)).epsilon(1e-14));
            CHECK(between_group_variance(cfg, kp, kind, 0, 1) ==
                  doctest::Approx(between_group_variance(cfg, kp, kind, 1, 0)).epsilon(1e-12));
        }
        // weighted and unweighted means coincide; variances differ by O(theta^2)
        const KernelParams small{1e-3 * u(rng), q};
        CHECK(aggregate_mean(cfg, small, NetworkKind{true, true}, 0, 1) ==
              doctest::Approx(aggregate_mean(cfg, small, kDirected, 0, 1)).epsilon(1e-14));
        const double weighted_var = between_group_variance(cfg, small, NetworkKind{true, true}, 0, 1);
        const double plain_var = between_group_variance(cfg, small, kDirected, 0, 1);
        const double mean = aggregate_mean(cfg, small, kDirected, 0, 1);
        CHECK(std::abs(weighted_var - plain_var) <= 4.0 * small.theta * mean + 1e-300);
    }
}

TEST_CASE("aggregate moments assemble the full matrix") {
    GroupConfig cfg = two_groups(5, 8, 1.0, 0.5, 1.0);
    const auto m = aggregate_moments(cfg, {0.6, 2}, kUndirected);
    CHECK(m.trials(0, 0) == 10);
    CHECK(m.trials(1, 1) == 28);
    CHECK(m.trials(0, 1) == 40);
    CHECK(m.mean(0, 1) == doctest::Approx(m.mean(1, 0)));
    CHECK((m.variance.array() >= 0.0).all());
}
