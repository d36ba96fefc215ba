#pragma once

#include "aggnet/types.hpp"

namespace aggnet {

// Two Gaussian clusters; var_a and var_b are variances (sigma^2), not scales.
struct ClusterPair {
    Vector mu_a;
    Vector mu_b;
    double var_a = 0.0;
    double var_b = 0.0;

    static ClusterPair from_groups(const GroupConfig& cfg, std::size_t a, std::size_t b);

    double separation_sq() const;
    void validate() const;
};

// Which cluster holds the node shared by the two kernel factors.
enum class SharedSide { a, b };

struct KernelMoments {
    double mean = 0.0;            // E[lambda_ij]
    double second = 0.0;          // E[lambda_ij^2]
    double cross_common_a = 0.0;  // E[lambda_ij lambda_il], i in a; j != l in b
    double cross_common_b = 0.0;  // E[lambda_ij lambda_kj], j in b; i != k in a
};

double expected_kernel(const ClusterPair& pair, const KernelParams& kp);
double kernel_second_moment(const ClusterPair& pair, const KernelParams& kp);
double kernel_cross_moment(const ClusterPair& pair, const KernelParams& kp, SharedSide shared_side);

/// All four kernel moments from the squared centre separation and the two
/// cluster variances. Evaluated in log space and exponentiated once per moment.
KernelMoments kernel_moments(double separation_sq, double var_a, double var_b, const KernelParams& kp);
KernelMoments kernel_moments(const ClusterPair& pair, const KernelParams& kp);

/// Log-space counterparts; log(0) = -inf when theta = 0.
double log_expected_kernel(double separation_sq, double var_a, double var_b, double theta, int q);
double log_kernel_second_moment(double separation_sq, double var_a, double var_b, double theta, int q);
double log_kernel_cross_moment(double separation_sq, double var_shared, double var_other, double theta, int q);

/// Common cluster variance maximising the expected kernel at separation delta.
double optimal_scale_sq(double delta, int q);

/// E[exp(-x^2 / 2)] for x ~ Normal(mu, var).
double gaussian_exp_identity(double mu, double var);

}  // namespace aggnet
