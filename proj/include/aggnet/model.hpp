#pragma once

#include "aggnet/likelihood.hpp"
#include "aggnet/types.hpp"

namespace aggnet {

struct ModelParams {
    Matrix mu;     // r x q centres
    Vector sigma;  // r group scales
    double tau = 1.0;
    double theta = 0.5;

    std::size_t groups() const { return static_cast<std::size_t>(mu.rows()); }
    int dimension() const { return static_cast<int>(mu.cols()); }
    void validate() const;
    GroupConfig group_config(const std::vector<std::int64_t>& sizes) const;
};

// Sampling coordinates. gamma has structural zeros gamma(a, s) = 0 for a <= s,
// which removes rotations and translations; nu restores a free translation.
// eta_g = (1 + 2 sigma_g^2)^(-q/2) is the fraction of the maximal
// within-group edge density that group g realises.
struct UnconstrainedParams {
    Matrix gamma;
    Vector nu;
    Vector eta;
    double log_tau = 0.0;
    double logit_theta = 0.0;

    std::size_t groups() const { return static_cast<std::size_t>(gamma.rows()); }
    int dimension() const { return static_cast<int>(gamma.cols()); }
    void validate() const;
};

struct PriorConfig {
    double cauchy_scale_sigma = 1.0;
    double cauchy_scale_tau = 1.0;

    void validate() const;
};

inline bool is_structural_zero(Eigen::Index row, Eigen::Index col) { return row <= col; }
std::size_t free_gamma_count(std::size_t r, int q);

double logistic(double x);
double logit(double p);

double sigma_from_eta(double eta, int q);
double eta_from_sigma(double sigma, int q);
/// log |d sigma / d eta| = log(eta^(-2/q - 1) / (2 q sigma)).
double log_jacobian_eta(double eta, int q);

ModelParams to_natural(const UnconstrainedParams& u);
ModelParams to_natural(const UnconstrainedParams& u, int q);
/// Requires mu in canonical orientation (see canonical_orientation); the
/// translation nu is taken from the first centre.
UnconstrainedParams to_unconstrained(const ModelParams& p);

/// Rotation of mu about the origin (det +1) after which the offsets from the
/// first centre satisfy the gamma zero pattern.
Matrix canonical_orientation(const Matrix& mu);

double half_cauchy_log_pdf(double x, double scale);
double normal_log_pdf(double x, double mean, double sd);

struct PriorTerms {
    double centres = 0.0;           // Normal(mu | 0, tau^2)
    double group_scales = 0.0;      // half-Cauchy on sigma
    double population_scale = 0.0;  // half-Cauchy on tau
    double propensity = 0.0;        // uniform theta
    double jacobian = 0.0;          // eta, log tau, logit theta
    double total() const { return centres + group_scales + population_scale + propensity + jacobian; }
};

PriorTerms log_prior_terms(const ModelParams& p, const UnconstrainedParams& u, const PriorConfig& pc);
double log_prior(const ModelParams& p, const UnconstrainedParams& u, const PriorConfig& pc);

/// Unnormalised log density over (gamma, nu, eta, log tau, logit theta).
/// Returns -inf outside the support (eta not in (0, 1)).
double log_posterior(const UnconstrainedParams& u, const AggregateMatrix& y, const PriorConfig& pc);

}  // namespace aggnet
