#pragma once

#include "aggnet/kernel.hpp"
#include "aggnet/likelihood.hpp"
#include "aggnet/moments.hpp"
#include "aggnet/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace aggnet {

/// Stream splitting used for every per-chain or per-replication RNG:
/// splitmix64(seed + 0x9e3779b97f4a7c15 * (stream + 1)).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// adjacency(i, j) is y_ij: the edge from node j to node i.
struct NetworkRealization {
    Matrix coords;
    std::vector<std::size_t> labels;
    CountMatrix adjacency;
    NetworkKind kind;

    std::size_t nodes() const { return labels.size(); }
};

NetworkRealization simulate_network(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind,
                                    std::uint64_t seed);

/// Group-level volumes Y_ab = sum_{i != j} [g_i = a][g_j = b] y_ij. Undirected
/// networks count each unordered edge once and store Y symmetrically.
AggregateMatrix aggregate(const NetworkRealization& net, std::size_t groups);
AggregateMatrix aggregate(const NetworkRealization& net);

struct MomentEstimate {
    double mean_hat = 0.0;
    double var_hat = 0.0;
    double std_error_mean = 0.0;
    double std_error_var = 0.0;
    std::size_t n_sims = 0;
};

/// Sample mean and variance with jackknife standard errors.
MomentEstimate estimate_moments(std::span<const std::int64_t> samples);

/// Independent node-level draws of Y_ab. Only groups a and b are simulated;
/// the other groups do not influence Y_ab.
std::vector<std::int64_t> simulate_volumes(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind,
                                           std::size_t a, std::size_t b, std::size_t n_sims, std::uint64_t seed);

MomentEstimate mc_moments(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a,
                          std::size_t b, std::size_t n_sims, std::uint64_t seed);

struct ScalarEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct KernelMomentEstimate {
    ScalarEstimate mean;
    ScalarEstimate second;
    ScalarEstimate cross_common_a;
    ScalarEstimate cross_common_b;
};

/// Monte Carlo estimates of the kernel moments from coordinate draws.
KernelMomentEstimate mc_kernel_moments(const ClusterPair& pair, const KernelParams& kp, std::size_t n_draws,
                                       std::uint64_t seed);

inline constexpr std::int64_t kMaxEnumerationSize = 8;

/// Brute-force occurrence table: walks every (ij, kl) index tuple.
TermCoefficients enumerate_second_moment(std::int64_t n_a, std::optional<std::int64_t> n_b, NetworkKind kind);

/// E[exp(-x^2/2)] for x ~ Normal(mu, var) by adaptive Gauss-Kronrod quadrature.
double quadrature_gaussian_exp(double mu, double var);

/// Total-variation distance between an empirical sample and a pmf on 0..max.
double total_variation_distance(std::span<const std::int64_t> samples, const std::vector<double>& pmf);

}  // namespace aggnet
