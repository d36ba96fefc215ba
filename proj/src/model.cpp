#include "aggnet/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aggnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_eta(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::domain_error("eta must lie in the open interval (0, 1), got " + std::to_string(eta));
    }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

void ModelParams::validate() const {
    if (mu.rows() < 1 || mu.cols() < 1) {
        throw std::invalid_argument("model needs at least one group and one dimension");
    }
    if (sigma.size() != mu.rows()) {
        throw std::invalid_argument("sigma length must equal the number of groups");
    }
    if (!((sigma.array() > 0.0).all())) {
        throw std::invalid_argument("group scales sigma must be positive");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("population scale tau must be positive");
    }
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("propensity theta must lie in [0, 1]");
    }
}

GroupConfig ModelParams::group_config(const std::vector<std::int64_t>& sizes) const {
    return GroupConfig{sizes, mu, sigma};
}

void UnconstrainedParams::validate() const {
    const Eigen::Index r = gamma.rows();
    const Eigen::Index q = gamma.cols();
    if (r < 1 || q < 1) {
        throw std::invalid_argument("gamma must be at least 1x1");
    }
    if (r < q) {
        throw std::invalid_argument("need at least q groups to pin rotations (r=" + std::to_string(r) +
                                    ", q=" + std::to_string(q) + ")");
    }
    if (nu.size() != q || eta.size() != r) {
        throw std::invalid_argument("nu must have q entries and eta r entries");
    }
    for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index s = 0; s < q; ++s) {
            if (is_structural_zero(a, s) && gamma(a, s) != 0.0) {
                throw std::invalid_argument("gamma violates its structural zero pattern");
            }
        }
    }
}

void PriorConfig::validate() const {
    if (!(cauchy_scale_sigma > 0.0) || !(cauchy_scale_tau > 0.0)) {
        throw std::invalid_argument("half-Cauchy scales must be positive");
    }
}

std::size_t free_gamma_count(std::size_t r, int q) {
    const auto uq = static_cast<std::size_t>(q);
    return r * uq - uq * (uq + 1) / 2;
}

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double logit(double p) {
    return std::log(p) - std::log1p(-p);
}

double sigma_from_eta(double eta, int q) {
    check_eta(eta);
    // eta^(-2/q) - 1 via expm1 keeps precision as eta -> 1.
    return std::sqrt(0.5 * std::expm1(-2.0 / q * std::log(eta)));
}

double eta_from_sigma(double sigma, int q) {
    return std::exp(-0.5 * q * std::log1p(2.0 * sigma * sigma));
}

double log_jacobian_eta(double eta, int q) {
    const double sigma = sigma_from_eta(eta, q);
    return (-2.0 / q - 1.0) * std::log(eta) - std::log(2.0 * q) - std::log(sigma);
}

ModelParams to_natural(const UnconstrainedParams& u, int q) {
    if (u.dimension() != q) {
        throw std::invalid_argument("gamma column count does not match q");
    }
    return to_natural(u);
}

ModelParams to_natural(const UnconstrainedParams& u) {
    const int q = u.dimension();
    ModelParams p;
    p.mu = u.gamma.rowwise() + u.nu.transpose();
    p.sigma.resize(u.eta.size());
    for (Eigen::Index g = 0; g < u.eta.size(); ++g) {
        p.sigma[g] = sigma_from_eta(u.eta[g], q);
    }
    p.tau = std::exp(u.log_tau);
    p.theta = logistic(u.logit_theta);
    return p;
}

UnconstrainedParams to_unconstrained(const ModelParams& p) {
    p.validate();
    const int q = p.dimension();
    UnconstrainedParams u;
    u.nu = p.mu.row(0).transpose();
    u.gamma = p.mu.rowwise() - u.nu.transpose();
    const double scale = 1.0 + p.mu.cwiseAbs().maxCoeff();
    for (Eigen::Index a = 0; a < u.gamma.rows(); ++a) {
        for (Eigen::Index s = 0; s < u.gamma.cols(); ++s) {
            if (!is_structural_zero(a, s)) {
                continue;
            }
            if (std::abs(u.gamma(a, s)) > 1e-9 * scale) {
                throw std::invalid_argument("centres are not in canonical orientation; apply canonical_orientation");
            }
            u.gamma(a, s) = 0.0;
        }
    }
    u.eta.resize(p.sigma.size());
    for (Eigen::Index g = 0; g < p.sigma.size(); ++g) {
        u.eta[g] = eta_from_sigma(p.sigma[g], q);
    }
    u.log_tau = std::log(p.tau);
    u.logit_theta = logit(p.theta);
    return u;
}

Matrix canonical_orientation(const Matrix& mu) {
    const Eigen::Index r = mu.rows();
    const Eigen::Index q = mu.cols();
    if (r < q) {
        throw std::invalid_argument("need at least q groups for a canonical orientation");
    }
    const Matrix offsets = mu.rowwise() - mu.row(0);
    if (q == 1) {
        return mu;
    }
    // Rotating about the origin keeps |mu| and hence the population prior.
    // offsets rows 1..q-1 times Q must be lower trapezoidal: QR of their transpose.
    const Matrix leading = offsets.middleRows(1, q - 1).transpose();
    Eigen::HouseholderQR<Matrix> qr(leading);
    Matrix rotation = qr.householderQ() * Matrix::Identity(q, q);
    if (rotation.determinant() < 0.0) {
        rotation.col(q - 1) *= -1.0;
    }
    return mu * rotation;
}

double half_cauchy_log_pdf(double x, double scale) {
    if (x < 0.0) {
        return kNegInf;
    }
    const double z = x / scale;
    return std::log(2.0 / (std::numbers::pi * scale)) - std::log1p(z * z);
}

double normal_log_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * z * z;
}

PriorTerms log_prior_terms(const ModelParams& p, const UnconstrainedParams& u, const PriorConfig& pc) {
    const int q = u.dimension();
    PriorTerms terms;
    const double n_entries = static_cast<double>(p.mu.size());
    terms.centres = n_entries * (-0.5 * std::log(2.0 * std::numbers::pi) - std::log(p.tau)) -
                    0.5 * p.mu.squaredNorm() / (p.tau * p.tau);
    for (Eigen::Index g = 0; g < p.sigma.size(); ++g) {
        terms.group_scales += half_cauchy_log_pdf(p.sigma[g], pc.cauchy_scale_sigma);
        terms.jacobian += log_jacobian_eta(u.eta[g], q);
    }
    terms.population_scale = half_cauchy_log_pdf(p.tau, pc.cauchy_scale_tau);
    terms.propensity = 0.0;
    // d tau / d log tau = tau; d theta / d logit theta = theta (1 - theta).
    terms.jacobian += u.log_tau;
    terms.jacobian += -softplus(-u.logit_theta) - softplus(u.logit_theta);
    return terms;
}

double log_prior(const ModelParams& p, const UnconstrainedParams& u, const PriorConfig& pc) {
    return log_prior_terms(p, u, pc).total();
}

double log_posterior(const UnconstrainedParams& u, const AggregateMatrix& y, const PriorConfig& pc) {
    for (Eigen::Index g = 0; g < u.eta.size(); ++g) {
        if (!(u.eta[g] > 0.0 && u.eta[g] < 1.0)) {
            return kNegInf;
        }
    }
    const ModelParams p = to_natural(u);
    if (!(p.tau > 0.0) || !std::isfinite(p.tau) || !(p.sigma.array() > 0.0).all()) {
        return kNegInf;
    }
    const double prior = log_prior(p, u, pc);
    if (!std::isfinite(prior)) {
        return kNegInf;
    }
    const KernelParams kp{p.theta, u.dimension()};
    const double likelihood = approximate_log_likelihood(y, p.group_config(y.sizes), kp);
    return prior + likelihood;
}

}  // namespace aggnet
