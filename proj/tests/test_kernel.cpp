#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aggnet/kernel.hpp"
#include "aggnet/simulate.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <random>

using namespace aggnet;

namespace {

ClusterPair pair_at(int q, double delta, double sd_a, double sd_b) {
    Vector mu_a = Vector::Zero(q);
    Vector mu_b = Vector::Zero(q);
    mu_b[0] = delta;
    return ClusterPair{mu_a, mu_b, sd_a * sd_a, sd_b * sd_b};
}

void check_within(const ScalarEstimate& est, double analytic, double n_se) {
    INFO("mc=" << est.value << " se=" << est.std_error << " analytic=" << analytic);
    CHECK(std::abs(est.value - analytic) <= n_se * est.std_error + 1e-15);
}

}  // namespace

TEST_CASE("expected kernel closed form") {
    CHECK(expected_kernel(pair_at(2, 0.0, 0.0, 0.0), {1.0, 2}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(expected_kernel(pair_at(2, std::sqrt(2.0), 0.0, 0.0), {0.5, 2}) ==
          doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(expected_kernel(pair_at(2, 0.0, 0.0, 0.0), {0.5, 2}) == doctest::Approx(0.5));
}

TEST_CASE("expected kernel matches Monte Carlo at wide clusters") {
    const ClusterPair pair = pair_at(2, 1.0, 5.0, 5.0);
    const KernelParams kp{1.0, 2};
    const auto est = mc_kernel_moments(pair, kp, 100000, 11);
    check_within(est.mean, expected_kernel(pair, kp), 3.0);
}

TEST_CASE("second moment") {
    CHECK(kernel_second_moment(pair_at(2, 0.0, 0.0, 0.0), {1.0, 2}) == doctest::Approx(1.0));
    CHECK(kernel_second_moment(pair_at(2, 1.0, 0.0, 0.0), {0.5, 2}) ==
          doctest::Approx(0.25 * std::exp(-1.0)).epsilon(1e-14));
    const ClusterPair pair = pair_at(2, 1.0, 1.0, 2.0);
    const KernelParams kp{1.0, 2};
    check_within(mc_kernel_moments(pair, kp, 100000, 12).second, kernel_second_moment(pair, kp), 3.0);
}

TEST_CASE("cross moment") {
    const KernelParams kp{0.7, 2};
    SUBCASE("point masses make shared-node factors independent") {
        const ClusterPair pair = pair_at(2, 1.3, 0.0, 0.0);
        const double m = expected_kernel(pair, kp);
        CHECK(kernel_cross_moment(pair, kp, SharedSide::a) == doctest::Approx(m * m).epsilon(1e-14));
        CHECK(kernel_cross_moment(pair, kp, SharedSide::b) == doctest::Approx(m * m).epsilon(1e-14));
    }
    SUBCASE("equal scales make the shared side irrelevant") {
        const ClusterPair pair = pair_at(2, 0.8, 1.5, 1.5);
        CHECK(kernel_cross_moment(pair, kp, SharedSide::a) ==
              doctest::Approx(kernel_cross_moment(pair, kp, SharedSide::b)).epsilon(1e-15));
    }
    SUBCASE("Monte Carlo with a shared node in a") {
        const ClusterPair pair = pair_at(2, 1.0, 1.0, 2.0);
        const KernelParams unit{1.0, 2};
        const auto est = mc_kernel_moments(pair, unit, 100000, 13);
        check_within(est.cross_common_a, kernel_cross_moment(pair, unit, SharedSide::a), 3.0);
        check_within(est.cross_common_b, kernel_cross_moment(pair, unit, SharedSide::b), 3.0);
    }
}

TEST_CASE("dimension mismatch is rejected") {
    ClusterPair pair{Vector::Zero(2), Vector::Zero(3), 1.0, 1.0};
    CHECK_THROWS_AS(expected_kernel(pair, {1.0, 2}), std::invalid_argument);
    ClusterPair negative = pair_at(2, 1.0, 1.0, 1.0);
    negative.var_a = -1.0;
    CHECK_THROWS_AS(expected_kernel(negative, {1.0, 2}), std::invalid_argument);
}

TEST_CASE("optimal scale") {
    CHECK(optimal_scale_sq(1.0, 2) == 0.0);
    CHECK(optimal_scale_sq(2.0, 2) == doctest::Approx(0.5));
    CHECK(optimal_scale_sq(3.0, 1) == doctest::Approx(4.0));

    // Independent check: maximise the expected kernel numerically over the common variance.
    for (const auto& point : {std::pair{2.0, 2}, std::pair{3.0, 1}, std::pair{4.0, 3}}) {
        const double delta = point.first;
        const int q = point.second;
        auto negative_kernel = [&](double v) {
            return -expected_kernel(pair_at(q, delta, std::sqrt(v), std::sqrt(v)), {1.0, q});
        };
        const auto [argmin, value] = boost::math::tools::brent_find_minima(negative_kernel, 0.0, 20.0, 50);
        CHECK(argmin == doctest::Approx(optimal_scale_sq(delta, q)).epsilon(1e-6));
    }
}

TEST_CASE("gaussian exp identity") {
    CHECK(gaussian_exp_identity(0.0, 0.0) == 1.0);
    CHECK(gaussian_exp_identity(1.0, 0.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(gaussian_exp_identity(2.0, 3.0) == doctest::Approx(quadrature_gaussian_exp(2.0, 3.0)).epsilon(1e-8));
}

TEST_CASE("kernel properties on random inputs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int q = 1 + static_cast<int>(u(rng) * 3);
        const double delta = 5.0 * u(rng);
        const double sa = 3.0 * u(rng);
        const double sb = 3.0 * u(rng);
        const double theta = 0.05 + 0.95 * u(rng);
        const ClusterPair pair = pair_at(q, delta, sa, sb);
        const KernelParams kp{theta, q};
        const KernelMoments m = kernel_moments(pair, kp);
        const KernelMoments unit = kernel_moments(pair, {1.0, q});

        // linearity in theta
        CHECK(m.mean == doctest::Approx(theta * unit.mean).epsilon(1e-12));
        CHECK(m.second == doctest::Approx(theta * theta * unit.second).epsilon(1e-12));
        CHECK(m.cross_common_a == doctest::Approx(theta * theta * unit.cross_common_a).epsilon(1e-12));

        // Jensen and non-negative shared-node covariance
        CHECK(m.second >= m.mean * m.mean * (1.0 - 1e-12));
        CHECK(m.cross_common_a >= m.mean * m.mean * (1.0 - 1e-12));
        CHECK(m.cross_common_b >= m.mean * m.mean * (1.0 - 1e-12));
        CHECK(m.mean <= theta);

        // exchange symmetry
        const ClusterPair swapped{pair.mu_b, pair.mu_a, pair.var_b, pair.var_a};
        const KernelMoments s = kernel_moments(swapped, kp);
        CHECK(s.mean == doctest::Approx(m.mean).epsilon(1e-14));
        CHECK(s.cross_common_a == doctest::Approx(m.cross_common_b).epsilon(1e-14));
        CHECK(s.cross_common_b == doctest::Approx(m.cross_common_a).epsilon(1e-14));

        // monotone in separation
        const KernelMoments farther = kernel_moments(pair_at(q, delta + 0.1, sa, sb), kp);
        CHECK(farther.mean < m.mean);
    }
}

TEST_CASE("point-mass degeneracy") {
    for (int q = 1; q <= 3; ++q) {
        const KernelMoments m = kernel_moments(pair_at(q, 0.7, 0.0, 0.0), {0.6, q});
        CHECK(m.second == doctest::Approx(m.mean * m.mean).epsilon(1e-15));
        CHECK(m.cross_common_a == doctest::Approx(m.mean * m.mean).epsilon(1e-15));
        CHECK(m.cross_common_b == doctest::Approx(m.mean * m.mean).epsilon(1e-15));
    }
}

TEST_CASE("derivative vanishes at the optimal scale") {
    for (int q = 1; q <= 3; ++q) {
        const double delta = std::sqrt(q) + 1.5;
        const double v = optimal_scale_sq(delta, q);
        auto k = [&](double var) { return expected_kernel(pair_at(q, delta, std::sqrt(var), std::sqrt(var)), {1.0, q}); };
        const double h = 1e-5;
        const double slope = (k(v + h) - k(v - h)) / (2 * h);
        CHECK(std::abs(slope) <= 1e-6 * k(v));
    }
}

TEST_CASE("log-space evaluation survives large separations") {
    const KernelMoments m = kernel_moments(pair_at(2, 30.0, 0.1, 0.1), {1.0, 2});
    CHECK(m.mean > 0.0);
    CHECK(std::isfinite(std::log(m.mean)));
    CHECK(log_expected_kernel(1e6, 0.0, 0.0, 1.0, 2) == doctest::Approx(-5e5));
}
