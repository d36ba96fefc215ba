#include "aggnet/simulate.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace aggnet {

namespace {

using Rng = std::mt19937_64;

double kernel_value(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y, double theta) {
    return theta * std::exp(-0.5 * (x - y).squaredNorm());
}

Matrix draw_coordinates(const GroupConfig& cfg, Rng& rng, std::vector<std::size_t>& labels) {
    const auto n = static_cast<Eigen::Index>(cfg.total_nodes());
    const Eigen::Index q = cfg.centres.cols();
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix coords(n, q);
    labels.clear();
    labels.reserve(static_cast<std::size_t>(n));
    Eigen::Index row = 0;
    for (std::size_t g = 0; g < cfg.groups(); ++g) {
        const auto ig = static_cast<Eigen::Index>(g);
        for (std::int64_t k = 0; k < cfg.sizes[g]; ++k, ++row) {
            for (Eigen::Index s = 0; s < q; ++s) {
                coords(row, s) = cfg.centres(ig, s) + cfg.scales[ig] * normal(rng);
            }
            labels.push_back(g);
        }
    }
    return coords;
}

std::int64_t draw_edge(double rate, bool weighted, Rng& rng) {
    if (weighted) {
        if (rate <= 0.0) {
            return 0;
        }
        std::poisson_distribution<std::int64_t> poisson(rate);
        return poisson(rng);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return unit(rng) < rate ? 1 : 0;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

template <typename Fn>
void parallel_over(std::size_t count, Fn&& fn) {
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), count / 256 + 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                fn(i);
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

NetworkRealization simulate_network(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind,
                                    std::uint64_t seed) {
    cfg.validate();
    kp.validate();
    if (cfg.dimension() != kp.q) {
        throw std::invalid_argument("group centres do not match latent dimension q");
    }
    Rng rng(seed);
    NetworkRealization net;
    net.kind = kind;
    net.coords = draw_coordinates(cfg, rng, net.labels);
    const auto n = static_cast<Eigen::Index>(net.labels.size());
    net.adjacency = CountMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = kind.directed ? 0 : i + 1; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double rate = kernel_value(net.coords.row(i).transpose(), net.coords.row(j).transpose(), kp.theta);
            net.adjacency(i, j) = draw_edge(rate, kind.weighted, rng);
            if (!kind.directed) {
                net.adjacency(j, i) = net.adjacency(i, j);
            }
        }
    }
    return net;
}

AggregateMatrix aggregate(const NetworkRealization& net, std::size_t groups) {
    AggregateMatrix out;
    out.kind = net.kind;
    out.sizes.assign(groups, 0);
    for (const std::size_t g : net.labels) {
        if (g >= groups) {
            throw std::out_of_range("node label exceeds the number of groups");
        }
        ++out.sizes[g];
    }
    const auto r = static_cast<Eigen::Index>(groups);
    out.counts = CountMatrix::Zero(r, r);
    const auto n = static_cast<Eigen::Index>(net.labels.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto a = static_cast<Eigen::Index>(net.labels[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = net.kind.directed ? 0 : i + 1; j < n; ++j) {
            if (i == j || net.adjacency(i, j) == 0) {
                continue;
            }
            const auto b = static_cast<Eigen::Index>(net.labels[static_cast<std::size_t>(j)]);
            if (net.kind.directed) {
                out.counts(a, b) += net.adjacency(i, j);
            } else {
                out.counts(std::min(a, b), std::max(a, b)) += net.adjacency(i, j);
            }
        }
    }
    if (!net.kind.directed) {
        for (Eigen::Index a = 0; a < r; ++a) {
            for (Eigen::Index b = a + 1; b < r; ++b) {
                out.counts(b, a) = out.counts(a, b);
            }
        }
    }
    return out;
}

AggregateMatrix aggregate(const NetworkRealization& net) {
    std::size_t groups = 0;
    for (const std::size_t g : net.labels) {
        groups = std::max(groups, g + 1);
    }
    return aggregate(net, groups);
}

MomentEstimate estimate_moments(std::span<const std::int64_t> samples) {
    MomentEstimate est;
    est.n_sims = samples.size();
    const auto n = static_cast<double>(samples.size());
    if (samples.size() < 2) {
        est.mean_hat = samples.empty() ? 0.0 : static_cast<double>(samples[0]);
        return est;
    }
    double s1 = 0.0;
    for (const auto x : samples) {
        s1 += static_cast<double>(x);
    }
    est.mean_hat = s1 / n;
    double ss = 0.0;
    for (const auto x : samples) {
        const double d = static_cast<double>(x) - est.mean_hat;
        ss += d * d;
    }
    est.var_hat = ss / (n - 1.0);
    est.std_error_mean = std::sqrt(est.var_hat / n);
    if (samples.size() < 3) {
        return est;
    }
    // Leave-one-out variances in closed form from the centred sum of squares.
    std::vector<double> loo(samples.size());
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = static_cast<double>(samples[i]) - est.mean_hat;
        loo[i] = (ss - n / (n - 1.0) * d * d) / (n - 2.0);
        loo_mean += loo[i];
    }
    loo_mean /= n;
    double spread = 0.0;
    for (const double v : loo) {
        spread += (v - loo_mean) * (v - loo_mean);
    }
    est.std_error_var = std::sqrt((n - 1.0) / n * spread);
    return est;
}

std::vector<std::int64_t> simulate_volumes(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind,
                                           std::size_t a, std::size_t b, std::size_t n_sims, std::uint64_t seed) {
    cfg.validate();
    kp.validate();
    if (a >= cfg.groups() || b >= cfg.groups()) {
        throw std::out_of_range("group index out of range");
    }
    const auto q = static_cast<Eigen::Index>(kp.q);
    const std::int64_t n_a = cfg.sizes[a];
    const std::int64_t n_b = cfg.sizes[b];
    const Vector mu_a = cfg.centres.row(static_cast<Eigen::Index>(a)).transpose();
    const Vector mu_b = cfg.centres.row(static_cast<Eigen::Index>(b)).transpose();
    const double sd_a = cfg.scales[static_cast<Eigen::Index>(a)];
    const double sd_b = cfg.scales[static_cast<Eigen::Index>(b)];
    const bool same = a == b;

    std::vector<std::int64_t> out(n_sims, 0);
    parallel_over(n_sims, [&](std::size_t rep) {
        Rng rng(derive_seed(seed, rep));
        std::normal_distribution<double> normal(0.0, 1.0);
        Matrix za(n_a, q);
        for (Eigen::Index i = 0; i < n_a; ++i) {
            for (Eigen::Index s = 0; s < q; ++s) {
                za(i, s) = mu_a[s] + sd_a * normal(rng);
            }
        }
        Matrix zb;
        if (!same) {
            zb.resize(n_b, q);
            for (Eigen::Index j = 0; j < n_b; ++j) {
                for (Eigen::Index s = 0; s < q; ++s) {
                    zb(j, s) = mu_b[s] + sd_b * normal(rng);
                }
            }
        }
        const Matrix& targets = same ? za : zb;
        std::int64_t total = 0;
        for (Eigen::Index i = 0; i < n_a; ++i) {
            const Eigen::Index j0 = same && !kind.directed ? i + 1 : 0;
            for (Eigen::Index j = j0; j < targets.rows(); ++j) {
                if (same && i == j) {
                    continue;
                }
                const double rate = kernel_value(za.row(i).transpose(), targets.row(j).transpose(), kp.theta);
                total += draw_edge(rate, kind.weighted, rng);
            }
        }
        out[rep] = total;
    });
    return out;
}

MomentEstimate mc_moments(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a,
                          std::size_t b, std::size_t n_sims, std::uint64_t seed) {
    if (n_sims < 100) {
        throw std::invalid_argument("mc_moments needs at least 100 simulations");
    }
    const auto samples = simulate_volumes(cfg, kp, kind, a, b, n_sims, seed);
    return estimate_moments(samples);
}

KernelMomentEstimate mc_kernel_moments(const ClusterPair& pair, const KernelParams& kp, std::size_t n_draws,
                                       std::uint64_t seed) {
    pair.validate();
    kp.validate();
    if (n_draws < 2) {
        throw std::invalid_argument("need at least two draws");
    }
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index q = pair.mu_a.size();
    const double sd_a = std::sqrt(pair.var_a);
    const double sd_b = std::sqrt(pair.var_b);
    auto draw = [&](const Vector& mu, double sd) {
        Vector z(q);
        for (Eigen::Index s = 0; s < q; ++s) {
            z[s] = mu[s] + sd * normal(rng);
        }
        return z;
    };
    std::array<double, 4> sum{};
    std::array<double, 4> sum_sq{};
    for (std::size_t k = 0; k < n_draws; ++k) {
        const Vector zi = draw(pair.mu_a, sd_a);
        const Vector zk = draw(pair.mu_a, sd_a);
        const Vector zj = draw(pair.mu_b, sd_b);
        const Vector zl = draw(pair.mu_b, sd_b);
        const double ij = kernel_value(zi, zj, kp.theta);
        const double il = kernel_value(zi, zl, kp.theta);
        const double kj = kernel_value(zk, zj, kp.theta);
        const std::array<double, 4> values{ij, ij * ij, ij * il, ij * kj};
        for (std::size_t m = 0; m < 4; ++m) {
            sum[m] += values[m];
            sum_sq[m] += values[m] * values[m];
        }
    }
    const auto n = static_cast<double>(n_draws);
    auto finish = [&](std::size_t m) {
        const double mean = sum[m] / n;
        const double var = std::max(sum_sq[m] / n - mean * mean, 0.0) * n / (n - 1.0);
        return ScalarEstimate{mean, std::sqrt(var / n)};
    };
    return KernelMomentEstimate{finish(0), finish(1), finish(2), finish(3)};
}

TermCoefficients enumerate_second_moment(std::int64_t n_a, std::optional<std::int64_t> n_b, NetworkKind kind) {
    if (n_a < 0 || (n_b && *n_b < 0)) {
        throw std::invalid_argument("group sizes must be non-negative");
    }
    if (n_a > kMaxEnumerationSize || (n_b && *n_b > kMaxEnumerationSize)) {
        throw std::invalid_argument("enumeration refused: group sizes above " +
                                    std::to_string(kMaxEnumerationSize));
    }
    // Nodes 0..n_a-1 form group a; group b (if any) is n_a..n_a+n_b-1.
    struct Edge {
        std::int64_t i;
        std::int64_t j;
    };
    std::vector<Edge> edges;
    if (n_b) {
        for (std::int64_t i = 0; i < n_a; ++i) {
            for (std::int64_t j = 0; j < *n_b; ++j) {
                edges.push_back({i, n_a + j});
            }
        }
    } else {
        for (std::int64_t i = 0; i < n_a; ++i) {
            for (std::int64_t j = 0; j < n_a; ++j) {
                if (i != j && (kind.directed || i < j)) {
                    edges.push_back({i, j});
                }
            }
        }
    }
    TermCoefficients table;
    table.prefactor = static_cast<std::int64_t>(edges.size());
    for (const Edge& e : edges) {
        for (const Edge& f : edges) {
            TermClass c = TermClass::disjoint;
            if (e.i == f.i && e.j == f.j) {
                c = TermClass::identical;
            } else if (e.i == f.j && e.j == f.i) {
                c = TermClass::reversed;
            } else if (e.i == f.i) {
                c = TermClass::shared_row;
            } else if (e.j == f.j) {
                c = TermClass::shared_column;
            } else if (f.j == e.i) {
                c = TermClass::column_meets_row;
            } else if (f.i == e.j) {
                c = TermClass::row_meets_column;
            }
            ++table[c];
        }
    }
    return table;
}

double quadrature_gaussian_exp(double mu, double var) {
    if (!(var >= 0.0)) {
        throw std::invalid_argument("variance must be non-negative");
    }
    if (var == 0.0) {
        return std::exp(-0.5 * mu * mu);
    }
    const double sd = std::sqrt(var);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto integrand = [&](double u) {
        const double x = mu + sd * u;
        return norm * std::exp(-0.5 * u * u - 0.5 * x * x);
    };
    double error = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -inf, inf, 20, 1e-14, &error);
    if (!(error <= 1e-10)) {
        throw std::runtime_error("quadrature did not reach absolute tolerance 1e-10 (estimate " +
                                 std::to_string(error) + ")");
    }
    return value;
}

double total_variation_distance(std::span<const std::int64_t> samples, const std::vector<double>& pmf) {
    if (samples.empty()) {
        throw std::invalid_argument("no samples");
    }
    std::map<std::int64_t, double> empirical;
    for (const auto x : samples) {
        empirical[x] += 1.0;
    }
    const auto n = static_cast<double>(samples.size());
    double distance = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        const auto it = empirical.find(static_cast<std::int64_t>(k));
        const double p_hat = it == empirical.end() ? 0.0 : it->second / n;
        distance += std::abs(p_hat - pmf[k]);
    }
    for (const auto& [value, count] : empirical) {
        if (value < 0 || value >= static_cast<std::int64_t>(pmf.size())) {
            distance += count / n;
        }
    }
    return 0.5 * distance;
}

}  // namespace aggnet
