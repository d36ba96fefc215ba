#include "aggnet/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aggnet {

namespace {

double log_theta(double theta) {
    return theta > 0.0 ? std::log(theta) : -std::numeric_limits<double>::infinity();
}

void check_variances(double var_a, double var_b) {
    if (!(var_a >= 0.0) || !(var_b >= 0.0)) {
        throw std::invalid_argument("cluster variances must be non-negative");
    }
}

}  // namespace

ClusterPair ClusterPair::from_groups(const GroupConfig& cfg, std::size_t a, std::size_t b) {
    if (a >= cfg.groups() || b >= cfg.groups()) {
        throw std::out_of_range("group index out of range");
    }
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    return ClusterPair{cfg.centres.row(ia).transpose(), cfg.centres.row(ib).transpose(),
                       cfg.scales[ia] * cfg.scales[ia], cfg.scales[ib] * cfg.scales[ib]};
}

double ClusterPair::separation_sq() const {
    return (mu_a - mu_b).squaredNorm();
}

void ClusterPair::validate() const {
    if (mu_a.size() != mu_b.size()) {
        throw std::invalid_argument("cluster centres have different dimensions (" + std::to_string(mu_a.size()) +
                                    " vs " + std::to_string(mu_b.size()) + ")");
    }
    check_variances(var_a, var_b);
}

double log_expected_kernel(double separation_sq, double var_a, double var_b, double theta, int q) {
    const double spread = 1.0 + var_a + var_b;
    return log_theta(theta) - 0.5 * q * std::log(spread) - separation_sq / (2.0 * spread);
}

double log_kernel_second_moment(double separation_sq, double var_a, double var_b, double theta, int q) {
    const double spread = 1.0 + 2.0 * var_a + 2.0 * var_b;
    return 2.0 * log_theta(theta) - 0.5 * q * std::log(spread) - separation_sq / spread;
}

double log_kernel_cross_moment(double separation_sq, double var_shared, double var_other, double theta, int q) {
    // |z_i - z_j|^2 + |z_i - z_l|^2 splits into two independent Gaussian
    // quadratics with variances 2 var_shared + var_other and var_other.
    const double spread = 1.0 + 2.0 * var_shared + var_other;
    return 2.0 * log_theta(theta) - 0.5 * q * (std::log(spread) + std::log1p(var_other)) - separation_sq / spread;
}

KernelMoments kernel_moments(double separation_sq, double var_a, double var_b, const KernelParams& kp) {
    return KernelMoments{
        std::exp(log_expected_kernel(separation_sq, var_a, var_b, kp.theta, kp.q)),
        std::exp(log_kernel_second_moment(separation_sq, var_a, var_b, kp.theta, kp.q)),
        std::exp(log_kernel_cross_moment(separation_sq, var_a, var_b, kp.theta, kp.q)),
        std::exp(log_kernel_cross_moment(separation_sq, var_b, var_a, kp.theta, kp.q)),
    };
}

KernelMoments kernel_moments(const ClusterPair& pair, const KernelParams& kp) {
    pair.validate();
    kp.validate();
    if (pair.mu_a.size() != kp.q) {
        throw std::invalid_argument("cluster centres do not match latent dimension q");
    }
    return kernel_moments(pair.separation_sq(), pair.var_a, pair.var_b, kp);
}

double expected_kernel(const ClusterPair& pair, const KernelParams& kp) {
    return kernel_moments(pair, kp).mean;
}

double kernel_second_moment(const ClusterPair& pair, const KernelParams& kp) {
    return kernel_moments(pair, kp).second;
}

double kernel_cross_moment(const ClusterPair& pair, const KernelParams& kp, SharedSide shared_side) {
    const KernelMoments m = kernel_moments(pair, kp);
    return shared_side == SharedSide::a ? m.cross_common_a : m.cross_common_b;
}

double optimal_scale_sq(double delta, int q) {
    if (!(delta >= 0.0)) {
        throw std::invalid_argument("separation must be non-negative");
    }
    if (q < 1) {
        throw std::invalid_argument("latent dimension q must be positive");
    }
    return std::max(delta * delta - q, 0.0) / (2.0 * q);
}

double gaussian_exp_identity(double mu, double var) {
    if (!(var >= 0.0)) {
        throw std::invalid_argument("variance must be non-negative");
    }
    return std::exp(-0.5 * std::log1p(var) - mu * mu / (2.0 * (1.0 + var)));
}

}  // namespace aggnet
