#include "aggnet/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aggnet {

double quantile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

ParameterSummary summarize_values(std::string name, const std::vector<double>& values) {
    ParameterSummary s;
    s.name = std::move(name);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.median = quantile(values, 0.5);
    s.lower = quantile(values, 0.025);
    s.upper = quantile(values, 0.975);
    return s;
}

const ParameterSummary& PosteriorSummary::find(const std::string& name) const {
    for (const auto& p : parameters) {
        if (p.name == name) {
            return p;
        }
    }
    throw std::out_of_range("no parameter named " + name);
}

PosteriorSummary summarize(const AlignedPosterior& aligned) {
    const std::size_t n = aligned.size();
    if (n == 0) {
        throw std::invalid_argument("cannot summarise an empty posterior");
    }
    const Eigen::Index r = aligned.mu.front().rows();
    const Eigen::Index q = aligned.mu.front().cols();
    PosteriorSummary out;
    std::vector<double> values(n);
    for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index s = 0; s < q; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = aligned.mu[i](a, s);
            }
            out.parameters.push_back(summarize_values("mu_" + std::to_string(a) + "_" + std::to_string(s), values));
        }
    }
    out.radius_2sigma = Vector::Zero(r);
    if (aligned.sigma.size() == n) {
        for (Eigen::Index a = 0; a < r; ++a) {
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = aligned.sigma[i][a];
            }
            out.parameters.push_back(summarize_values("sigma_" + std::to_string(a), values));
            out.radius_2sigma[a] = 2.0 * out.parameters.back().mean;
        }
    }
    if (aligned.tau.size() == n) {
        out.parameters.push_back(summarize_values("tau", aligned.tau));
    }
    if (aligned.theta.size() == n) {
        out.parameters.push_back(summarize_values("theta", aligned.theta));
    }
    if (aligned.log_densities.size() == n) {
        out.map_draw = static_cast<std::size_t>(
            std::max_element(aligned.log_densities.begin(), aligned.log_densities.end()) -
            aligned.log_densities.begin());
    }
    out.map_centres = aligned.mu[out.map_draw];
    return out;
}

std::vector<std::pair<double, double>> degeneracy_contour(double edge_density, int q,
                                                          const std::vector<double>& theta_grid) {
    if (!(edge_density > 0.0 && edge_density < 1.0)) {
        throw std::invalid_argument("edge density must lie in (0, 1)");
    }
    if (q < 1) {
        throw std::invalid_argument("latent dimension q must be positive");
    }
    std::vector<std::pair<double, double>> out;
    for (const double theta : theta_grid) {
        if (theta < edge_density) {
            continue;
        }
        const double ratio = std::pow(theta / edge_density, 2.0 / q);
        out.emplace_back(theta, std::sqrt(std::max(ratio - 1.0, 0.0) / 2.0));
    }
    return out;
}

double empirical_edge_density(const AggregateMatrix& y) {
    double volume = 0.0;
    double trials = 0.0;
    for (std::size_t a = 0; a < y.groups(); ++a) {
        for (std::size_t b = 0; b < y.groups(); ++b) {
            if (!y.counted(a, b)) {
                continue;
            }
            volume += static_cast<double>(y.counts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
            trials += static_cast<double>(y.trials(a, b));
        }
    }
    return trials > 0.0 ? volume / trials : 0.0;
}

}  // namespace aggnet
