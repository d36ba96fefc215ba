#include "aggnet/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aggnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Tail of the Stirling series for log Gamma beyond (y - 1/2) log y - y + log(2 pi)/2.
double stirling_tail(double y) {
    const double inv = 1.0 / y;
    const double inv2 = inv * inv;
    return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
}

double point_mass_log_pmf(std::int64_t y, std::int64_t support) {
    return y == support ? 0.0 : kNegInf;
}

}  // namespace

double log_rising_factorial(double x, double k) {
    if (k == 0.0) {
        return 0.0;
    }
    if (x < 20.0) {
        return std::lgamma(x + k) - std::lgamma(x);
    }
    // Difference of Stirling expansions, arranged so that nothing of size
    // x log x is ever cancelled.
    return (x - 0.5) * std::log1p(k / x) + k * std::log(x + k) - k + stirling_tail(x + k) - stirling_tail(x);
}

double log_binomial_coefficient(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) {
        return kNegInf;
    }
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double binomial_log_pmf(std::int64_t y, std::int64_t trials, double prob) {
    if (y < 0 || y > trials) {
        return kNegInf;
    }
    if (prob <= 0.0) {
        return point_mass_log_pmf(y, 0);
    }
    if (prob >= 1.0) {
        return point_mass_log_pmf(y, trials);
    }
    return log_binomial_coefficient(trials, y) + static_cast<double>(y) * std::log(prob) +
           static_cast<double>(trials - y) * std::log1p(-prob);
}

double poisson_log_pmf(std::int64_t y, double mean) {
    if (y < 0) {
        return kNegInf;
    }
    if (mean <= 0.0) {
        return point_mass_log_pmf(y, 0);
    }
    const auto yd = static_cast<double>(y);
    return yd * std::log(mean) - mean - std::lgamma(yd + 1.0);
}

BetaBinomialParams match_beta_binomial(double mean, double variance, std::int64_t trials) {
    if (!(mean > 0.0) || !(mean < static_cast<double>(trials)) || !(variance > 0.0)) {
        std::ostringstream msg;
        msg << "cannot match beta-binomial: mean=" << mean << " variance=" << variance << " trials=" << trials
            << " (need 0 < mean < trials and variance > 0)";
        throw MomentMatchingError(msg.str(), mean, variance, trials);
    }
    const auto t = static_cast<double>(trials);
    const double rho = mean / t;
    const double overdispersion = variance / (t * rho * (1.0 - rho));
    // f <= 1 (binomial or underdispersed) lands on the epsilon floor: phi ~ 1e10.
    double phi = (t - overdispersion) / std::max(overdispersion - 1.0, kStabilityEpsilon);
    // f reaches t only in the single-trial case, where any phi gives Bernoulli(rho).
    phi = std::max(phi, kStabilityEpsilon);
    return BetaBinomialParams{trials, rho * phi, (1.0 - rho) * phi};
}

NegBinomialParams match_negative_binomial(double mean, double variance) {
    if (!(mean > 0.0) || !(variance > 0.0)) {
        std::ostringstream msg;
        msg << "cannot match negative binomial: mean=" << mean << " variance=" << variance;
        throw MomentMatchingError(msg.str(), mean, variance, 0);
    }
    const double size = mean * mean / std::max(variance - mean, kStabilityEpsilon);
    // size / (size + mean) equals mean / variance whenever variance > mean + eps
    // and keeps the mean exact in the Poisson limit.
    return NegBinomialParams{size, size / (size + mean), mean};
}

double beta_binomial_log_pmf(std::int64_t y, const BetaBinomialParams& p) {
    if (y < 0 || y > p.trials) {
        return kNegInf;
    }
    const auto yd = static_cast<double>(y);
    const auto td = static_cast<double>(p.trials);
    return log_binomial_coefficient(p.trials, y) + log_rising_factorial(p.alpha, yd) +
           log_rising_factorial(p.beta, td - yd) - log_rising_factorial(p.alpha + p.beta, td);
}

double negative_binomial_log_pmf(std::int64_t y, const NegBinomialParams& p) {
    if (y < 0) {
        return kNegInf;
    }
    if (p.mean <= 0.0) {
        return point_mass_log_pmf(y, 0);
    }
    const auto yd = static_cast<double>(y);
    const double log_prob = -std::log1p(p.mean / p.size);
    const double log_fail = std::log(p.mean) - std::log(p.size + p.mean);
    return log_rising_factorial(p.size, yd) - std::lgamma(yd + 1.0) + p.size * log_prob + yd * log_fail;
}

std::int64_t AggregateMatrix::trials(std::size_t a, std::size_t b) const {
    return pair_trials(sizes.at(a), sizes.at(b), a == b, kind);
}

void AggregateMatrix::validate() const {
    const auto r = static_cast<Eigen::Index>(sizes.size());
    if (r == 0) {
        throw std::invalid_argument("aggregate matrix has no groups");
    }
    if (counts.rows() != r || counts.cols() != r) {
        std::ostringstream msg;
        msg << "aggregate matrix is " << counts.rows() << "x" << counts.cols() << " but there are " << r
            << " group sizes";
        throw std::invalid_argument(msg.str());
    }
    for (Eigen::Index a = 0; a < r; ++a) {
        if (sizes[static_cast<std::size_t>(a)] < 1) {
            throw std::invalid_argument("group sizes must be positive");
        }
        for (Eigen::Index b = 0; b < r; ++b) {
            if (counts(a, b) < 0) {
                throw std::invalid_argument("aggregate counts must be non-negative");
            }
            if (!kind.directed && counts(a, b) != counts(b, a)) {
                throw std::invalid_argument("undirected aggregate matrix must be symmetric");
            }
        }
    }
}

double volume_log_probability(std::int64_t y, const PairMoments& moments, NetworkKind kind) {
    if (y < 0) {
        return kNegInf;
    }
    if (kind.weighted) {
        if (moments.trials == 0 || moments.mean <= 0.0) {
            return point_mass_log_pmf(y, 0);
        }
        return negative_binomial_log_pmf(y, match_negative_binomial(moments.mean, std::max(moments.variance,
                                                                                            moments.mean)));
    }
    const std::int64_t t = moments.trials;
    if (y > t) {
        return kNegInf;
    }
    if (t == 0 || moments.mean <= 0.0) {
        return point_mass_log_pmf(y, 0);
    }
    if (moments.mean >= static_cast<double>(t)) {
        return point_mass_log_pmf(y, t);
    }
    if (!(moments.variance > 0.0)) {
        return binomial_log_pmf(y, t, moments.mean / static_cast<double>(t));
    }
    return beta_binomial_log_pmf(y, match_beta_binomial(moments.mean, moments.variance, t));
}

namespace {

void check_shapes(const AggregateMatrix& y, const GroupConfig& cfg, const KernelParams& kp) {
    y.validate();
    if (y.sizes != cfg.sizes) {
        throw std::invalid_argument("aggregate matrix group sizes do not match the group config");
    }
    if (cfg.dimension() != kp.q) {
        throw std::invalid_argument("group centres do not match latent dimension q");
    }
}

PairMoments entry_moments(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, Eigen::Index a,
                          Eigen::Index b) {
    const double sep = (cfg.centres.row(a) - cfg.centres.row(b)).squaredNorm();
    const double va = cfg.scales[a] * cfg.scales[a];
    const double vb = cfg.scales[b] * cfg.scales[b];
    return volume_moments(cfg.sizes[static_cast<std::size_t>(a)], cfg.sizes[static_cast<std::size_t>(b)], a == b,
                          kernel_moments(sep, va, vb, kp), kind);
}

}  // namespace

double approximate_log_likelihood(const AggregateMatrix& y, const GroupConfig& cfg, const KernelParams& kp) {
    check_shapes(y, cfg, kp);
    const auto r = static_cast<Eigen::Index>(cfg.groups());
    double total = 0.0;
    // Row-major fixed order keeps the sum reproducible.
    for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index b = 0; b < r; ++b) {
            if (!y.counted(static_cast<std::size_t>(a), static_cast<std::size_t>(b))) {
                continue;
            }
            total += volume_log_probability(y.counts(a, b), entry_moments(cfg, kp, y.kind, a, b), y.kind);
            if (total == kNegInf) {
                return total;
            }
        }
    }
    return total;
}

LikelihoodReport approximate_log_likelihood_report(const AggregateMatrix& y, const GroupConfig& cfg,
                                                   const KernelParams& kp) {
    check_shapes(y, cfg, kp);
    LikelihoodReport report;
    const auto r = static_cast<Eigen::Index>(cfg.groups());
    for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index b = 0; b < r; ++b) {
            const auto ua = static_cast<std::size_t>(a);
            const auto ub = static_cast<std::size_t>(b);
            if (!y.counted(ua, ub)) {
                continue;
            }
            LikelihoodEntry entry{ua, ub, y.counts(a, b), entry_moments(cfg, kp, y.kind, a, b), 0.0};
            entry.log_probability = volume_log_probability(entry.observed, entry.moments, y.kind);
            if (!y.kind.weighted && entry.observed > entry.moments.trials) {
                std::ostringstream msg;
                msg << "Y[" << a << "][" << b << "] = " << entry.observed << " exceeds trials "
                    << entry.moments.trials;
                report.diagnostics.push_back(msg.str());
            } else if (entry.log_probability == kNegInf) {
                std::ostringstream msg;
                msg << "Y[" << a << "][" << b << "] = " << entry.observed << " is impossible under mean "
                    << entry.moments.mean;
                report.diagnostics.push_back(msg.str());
            }
            report.total += entry.log_probability;
            report.entries.push_back(entry);
        }
    }
    return report;
}

}  // namespace aggnet
