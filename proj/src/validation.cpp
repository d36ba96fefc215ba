#include "aggnet/validation.hpp"

#include "aggnet/kernel.hpp"
#include "aggnet/likelihood.hpp"
#include "aggnet/simulate.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace aggnet {

namespace {

std::string describe(NetworkKind kind) {
    return std::string(kind.directed ? "directed" : "undirected") + (kind.weighted ? " weighted" : " unweighted");
}

}  // namespace

bool ValidationReport::passed() const {
    for (const auto& c : checks) {
        if (!c.passed) {
            return false;
        }
    }
    return true;
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        for (const auto& f : c.failures) {
            out << "  - " << f << '\n';
        }
    }
    out << (passed() ? "overall: PASS" : "overall: FAIL") << '\n';
    return out.str();
}

CheckResult check_moment_grid(const ValidationOptions& opts) {
    CheckResult result{"moment-grid", true, "", {}};
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const NetworkKind kinds[] = {{true, false}, {false, false}, {true, true}, {false, true}};
    double worst = 0.0;
    std::size_t comparisons = 0;
    for (std::size_t point = 0; point < opts.grid_points; ++point) {
        const NetworkKind kind = kinds[point % 4];
        const int q = 1 + static_cast<int>(point % 3);
        GroupConfig cfg;
        cfg.sizes = {2 + static_cast<std::int64_t>(u(rng) * 8), 1 + static_cast<std::int64_t>(u(rng) * 8)};
        cfg.centres = Matrix::Zero(2, q);
        cfg.centres(1, 0) = 3.0 * u(rng);
        cfg.scales = Vector(2);
        cfg.scales << 2.0 * u(rng), 2.0 * u(rng);
        const KernelParams kp{0.2 + 0.8 * u(rng), q};
        for (const auto& [a, b] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 1}}) {
            const auto est = mc_moments(cfg, kp, kind, a, b, opts.grid_sims, derive_seed(opts.seed, point * 2 + b));
            const double mean = aggregate_mean(cfg, kp, kind, a, b);
            const double var =
                a == b ? within_group_variance(cfg, kp, kind, a) : between_group_variance(cfg, kp, kind, a, b);
            const double z_mean = std::abs(est.mean_hat - mean) / std::max(est.std_error_mean, 1e-300);
            const double z_var = std::abs(est.var_hat - var) / std::max(est.std_error_var, 1e-300);
            comparisons += 2;
            for (const auto& [label, z, analytic, empirical] :
                 {std::tuple{"mean", z_mean, mean, est.mean_hat}, std::tuple{"variance", z_var, var, est.var_hat}}) {
                const double zz = std::abs(analytic - empirical) < 1e-12 ? 0.0 : z;
                worst = std::max(worst, zz);
                if (zz > opts.se_tolerance) {
                    std::ostringstream msg;
                    msg << "point " << point << " (" << describe(kind) << ", Y_" << a << b << ") " << label
                        << ": analytic " << analytic << ", simulated " << empirical << " (" << zz << " SE)";
                    result.failures.push_back(msg.str());
                }
            }
        }
    }
    result.passed = result.failures.empty();
    std::ostringstream detail;
    detail << comparisons << " analytic/simulated comparisons over " << opts.grid_points
           << " parameter points, largest deviation " << worst << " SE (tolerance " << opts.se_tolerance << ")";
    result.detail = detail.str();
    return result;
}

CheckResult check_enumeration(const ValidationOptions& opts) {
    CheckResult result{"enumeration", true, "", {}};
    std::size_t tables = 0;
    auto compare = [&](std::int64_t n_a, std::optional<std::int64_t> n_b, NetworkKind kind) {
        TermCoefficients analytic = term_coefficients(n_a, n_b, kind);
        if (opts.coefficient_hook) {
            analytic = opts.coefficient_hook(analytic);
        }
        const TermCoefficients brute = enumerate_second_moment(n_a, n_b, kind);
        ++tables;
        for (std::size_t c = 0; c < kTermClassCount; ++c) {
            const auto cls = static_cast<TermClass>(c);
            if (analytic[cls] != brute[cls]) {
                std::ostringstream msg;
                msg << describe(kind) << " n_a=" << n_a;
                if (n_b) {
                    msg << " n_b=" << *n_b;
                }
                msg << " class " << term_class_name(cls) << ": table " << analytic[cls] << ", enumeration "
                    << brute[cls];
                result.failures.push_back(msg.str());
            }
        }
    };
    for (std::int64_t n_a = 1; n_a <= opts.max_enumeration_size; ++n_a) {
        compare(n_a, std::nullopt, NetworkKind{true, false});
        compare(n_a, std::nullopt, NetworkKind{false, false});
        for (std::int64_t n_b = 1; n_b <= opts.max_enumeration_size; ++n_b) {
            compare(n_a, n_b, NetworkKind{true, false});
            compare(n_a, n_b, NetworkKind{false, false});
        }
    }
    result.passed = result.failures.empty();
    result.detail = std::to_string(tables) + " coefficient tables compared with brute-force enumeration";
    return result;
}

CheckResult check_quadrature(const ValidationOptions& opts) {
    CheckResult result{"quadrature", true, "", {}};
    std::mt19937_64 rng(derive_seed(opts.seed, 0x9a));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double mu = -4.0 + 8.0 * u(rng);
        const double var = 10.0 * u(rng);
        const double diff = std::abs(quadrature_gaussian_exp(mu, var) - gaussian_exp_identity(mu, var));
        worst = std::max(worst, diff);
        if (diff > 1e-8) {
            std::ostringstream msg;
            msg << "mu=" << mu << " var=" << var << ": difference " << diff;
            result.failures.push_back(msg.str());
        }
    }
    result.passed = result.failures.empty();
    std::ostringstream detail;
    detail << "50 closed-form Gaussian integrals against adaptive quadrature, largest difference " << worst;
    result.detail = detail.str();
    return result;
}

CheckResult check_total_variation(const ValidationOptions& opts) {
    CheckResult result{"total-variation", true, "", {}};
    GroupConfig cfg{{10, 15}, Matrix::Zero(2, 2), Vector::Constant(2, 5.0)};
    cfg.centres(1, 0) = 1.0;
    const KernelParams kp{1.0, 2};
    const NetworkKind kind{true, false};
    const auto samples = simulate_volumes(cfg, kp, kind, 0, 1, opts.tv_sims, derive_seed(opts.seed, 0x2b));
    const auto bb =
        match_beta_binomial(aggregate_mean(cfg, kp, kind, 0, 1), between_group_variance(cfg, kp, kind, 0, 1),
                            trials(cfg, kind, 0, 1));
    std::vector<double> pmf;
    for (std::int64_t y = 0; y <= bb.trials; ++y) {
        pmf.push_back(std::exp(beta_binomial_log_pmf(y, bb)));
    }
    const double tv = total_variation_distance(samples, pmf);
    result.passed = tv < opts.tv_tolerance;
    std::ostringstream detail;
    detail << "n=(10,15), delta=1, sigma=5, q=2, theta=1: total variation distance " << tv << " over "
           << opts.tv_sims << " simulations (tolerance " << opts.tv_tolerance << ")";
    result.detail = detail.str();
    if (!result.passed) {
        result.failures.push_back(detail.str());
    }
    return result;
}

ValidationReport run_validation(const ValidationOptions& opts) {
    ValidationReport report;
    report.checks.push_back(check_moment_grid(opts));
    report.checks.push_back(check_enumeration(opts));
    report.checks.push_back(check_quadrature(opts));
    report.checks.push_back(check_total_variation(opts));
    return report;
}

}  // namespace aggnet
