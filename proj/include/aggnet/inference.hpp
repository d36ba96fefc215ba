#pragma once

#include "aggnet/likelihood.hpp"
#include "aggnet/model.hpp"
#include "aggnet/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aggnet {

struct SamplerConfig {
    std::size_t n_chains = 10;
    std::size_t n_warmup = 2000;
    std::size_t n_samples = 2000;
    std::uint64_t seed = 0;
    // Per-block initial random-walk scales; blocks beyond the list use default_step_scale.
    std::vector<double> initial_step_scales;
    double default_step_scale = 0.1;
    double adapt_target = 0.3;
    // Standard deviation of the Normal(0, .) initial draw in unconstrained space.
    double init_scale = 0.1;
    std::size_t max_init_attempts = 100;
    bool parallel = true;

    void validate() const;
};

class InitialisationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A target density over R^dimension, updated one block of coordinates at a time.
struct SamplingProblem {
    std::size_t dimension = 0;
    std::vector<std::vector<std::size_t>> blocks;
    std::function<double(std::span<const double>)> log_density;
};

struct RawChain {
    Matrix draws;  // n_samples x dimension
    std::vector<double> log_densities;
    double acceptance_rate = 0.0;
    std::vector<double> block_acceptance;
    std::vector<double> step_sizes;
    std::uint64_t seed = 0;
    // Hash of the proposal kernel at the first and last sampling iteration.
    std::uint64_t kernel_checksum_begin = 0;
    std::uint64_t kernel_checksum_end = 0;
};

/// Blockwise random-walk Metropolis. During warmup each block's step size
/// follows a Robbins-Monro recursion towards adapt_target, and halfway
/// through warmup the block proposal shape switches to the empirical
/// covariance of the preceding quarter. The kernel is frozen afterwards.
RawChain sample_adaptive_metropolis(const SamplingProblem& problem, std::span<const double> initial,
                                    const SamplerConfig& cfg, std::uint64_t chain_seed);

// Flattening of UnconstrainedParams into sampler coordinates:
// [free gamma entries row by row | nu | eta | log tau | logit theta].
class ParameterLayout {
public:
    ParameterLayout(std::size_t groups, int q);

    std::size_t groups() const { return groups_; }
    int dimension_q() const { return q_; }
    std::size_t size() const;
    std::vector<std::vector<std::size_t>> blocks() const;

    std::vector<double> flatten(const UnconstrainedParams& u) const;
    UnconstrainedParams unflatten(std::span<const double> x) const;

private:
    std::size_t groups_;
    int q_;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> free_gamma_;
};

struct PosteriorChain {
    std::vector<UnconstrainedParams> draws;
    std::vector<double> log_densities;
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;
    std::size_t chain_id = 0;
    std::vector<double> step_sizes;
    std::uint64_t kernel_checksum_begin = 0;
    std::uint64_t kernel_checksum_end = 0;

    double median_log_density() const;
};

/// One chain targeting log_posterior. Starts from `initial` when given,
/// otherwise from Normal(0, init_scale) draws (eta through a logistic map),
/// redrawn until the density is finite.
PosteriorChain run_chain(const AggregateMatrix& y, int q, const SamplerConfig& cfg, const PriorConfig& pc,
                         std::uint64_t seed, const std::optional<UnconstrainedParams>& initial = std::nullopt);

struct ChainSelection {
    std::size_t best = 0;
    std::optional<double> gap;  // best median minus runner-up median, in nats
};

ChainSelection select_by_median(std::span<const double> median_log_densities);

struct FitResult {
    std::vector<PosteriorChain> chains;
    std::vector<std::string> failures;
    std::size_t best = 0;  // index into chains
    std::optional<double> gap;

    const PosteriorChain& best_chain() const { return chains.at(best); }
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs cfg.n_chains chains with seeds derive_seed(cfg.seed, k) and keeps
/// the chain with the highest median log density. initial_points[k], when
/// present, starts chain k.
FitResult fit(const AggregateMatrix& y, int q, const SamplerConfig& cfg, const PriorConfig& pc,
              const std::vector<UnconstrainedParams>& initial_points = {});

struct RigidAlignment {
    Matrix aligned;
    Matrix rotation;  // q x q, applied as (x - centroid) * rotation
    bool degenerate = false;
};

/// Least-squares rigid motion of `sample` onto `reference` (rows are points).
/// Proper rotations only unless allow_reflection is set.
RigidAlignment rigid_procrustes(const Matrix& sample, const Matrix& reference, bool allow_reflection = false);

struct AlignedPosterior {
    std::vector<Matrix> mu;
    std::vector<Vector> sigma;
    std::vector<double> tau;
    std::vector<double> theta;
    std::vector<double> log_densities;
    Matrix reference;
    std::size_t degenerate_alignments = 0;

    std::size_t size() const { return mu.size(); }
};

AlignedPosterior procrustes_align(const std::vector<Matrix>& samples, const Matrix& reference,
                                  bool allow_reflection = false);

/// Aligns every draw onto the chain's highest-density draw.
AlignedPosterior align_chain(const PosteriorChain& chain);

struct ParameterSummary {
    std::string name;
    double mean = 0.0;
    double median = 0.0;
    double lower = 0.0;  // 2.5% quantile
    double upper = 0.0;  // 97.5% quantile
};

struct PosteriorSummary {
    std::vector<ParameterSummary> parameters;
    std::size_t map_draw = 0;
    Matrix map_centres;
    Vector radius_2sigma;  // twice the posterior mean of sigma

    const ParameterSummary& find(const std::string& name) const;
};

/// Quantile with linear interpolation between order statistics, h = (n - 1) p.
double quantile(std::vector<double> values, double p);

ParameterSummary summarize_values(std::string name, const std::vector<double>& values);
PosteriorSummary summarize(const AlignedPosterior& aligned);

/// (theta, tau) pairs with theta / (1 + 2 tau^2)^(q/2) = edge_density.
std::vector<std::pair<double, double>> degeneracy_contour(double edge_density, int q,
                                                          const std::vector<double>& theta_grid);

/// Observed volume divided by available trials over the entries the
/// likelihood uses.
double empirical_edge_density(const AggregateMatrix& y);

}  // namespace aggnet
