#pragma once

#include "aggnet/moments.hpp"
#include "aggnet/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace aggnet {

// Floor on the overdispersion excess f - 1 (and on var - mean for the
// negative binomial). Keeps the concentration below ~1e10 so log-gamma
// differences stay well conditioned.
inline constexpr double kStabilityEpsilon = 1e-9;

class MomentMatchingError : public std::domain_error {
public:
    MomentMatchingError(const std::string& what, double mean, double variance, std::int64_t trials)
        : std::domain_error(what), mean_(mean), variance_(variance), trials_(trials) {}

    double mean() const { return mean_; }
    double variance() const { return variance_; }
    std::int64_t trials() const { return trials_; }

private:
    double mean_;
    double variance_;
    std::int64_t trials_;
};

struct BetaBinomialParams {
    std::int64_t trials = 0;
    double alpha = 1.0;
    double beta = 1.0;

    double concentration() const { return alpha + beta; }
};

// Counts of failures before `size` successes with success probability prob.
// The mean is kept alongside so that 1 - prob never has to be formed.
struct NegBinomialParams {
    double size = 1.0;
    double prob = 1.0;
    double mean = 0.0;
};

BetaBinomialParams match_beta_binomial(double mean, double variance, std::int64_t trials);
NegBinomialParams match_negative_binomial(double mean, double variance);

/// log Gamma(x + k) - log Gamma(x), accurate when x is large relative to k.
double log_rising_factorial(double x, double k);

double log_binomial_coefficient(std::int64_t n, std::int64_t k);
double binomial_log_pmf(std::int64_t y, std::int64_t trials, double prob);
double poisson_log_pmf(std::int64_t y, double mean);
double beta_binomial_log_pmf(std::int64_t y, const BetaBinomialParams& p);
double negative_binomial_log_pmf(std::int64_t y, const NegBinomialParams& p);

struct AggregateMatrix {
    CountMatrix counts;
    NetworkKind kind;
    std::vector<std::int64_t> sizes;

    std::size_t groups() const { return sizes.size(); }
    std::int64_t trials(std::size_t a, std::size_t b) const;
    /// Entries that enter the likelihood: all ordered pairs when directed,
    /// a <= b otherwise.
    bool counted(std::size_t a, std::size_t b) const { return kind.directed || a <= b; }
    /// Throws std::invalid_argument on shape/sign/symmetry problems. Counts
    /// exceeding trials are not an error here; they give -inf likelihood.
    void validate() const;
};

/// Log probability of one observed volume under the moment-matched family.
/// Degenerate laws (no trials, mean 0, mean == trials) are point masses.
double volume_log_probability(std::int64_t y, const PairMoments& moments, NetworkKind kind);

double approximate_log_likelihood(const AggregateMatrix& y, const GroupConfig& cfg, const KernelParams& kp);

struct LikelihoodEntry {
    std::size_t a = 0;
    std::size_t b = 0;
    std::int64_t observed = 0;
    PairMoments moments;
    double log_probability = 0.0;
};

struct LikelihoodReport {
    double total = 0.0;
    std::vector<LikelihoodEntry> entries;
    std::vector<std::string> diagnostics;
};

LikelihoodReport approximate_log_likelihood_report(const AggregateMatrix& y, const GroupConfig& cfg,
                                                   const KernelParams& kp);

}  // namespace aggnet
