#include "aggnet/inference.hpp"
#include "aggnet/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace aggnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct BlockKernel {
    std::vector<std::size_t> indices;
    double log_step = 0.0;
    Matrix shape;  // lower Cholesky factor of the proposal covariance (unit scale)
    std::size_t proposals = 0;
    std::size_t accepted = 0;
};

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t kernel_checksum(const std::vector<BlockKernel>& kernels) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const auto& k : kernels) {
        hash = fnv1a(hash, &k.log_step, sizeof(double));
        hash = fnv1a(hash, k.shape.data(), sizeof(double) * static_cast<std::size_t>(k.shape.size()));
    }
    return hash;
}

double safe_density(const SamplingProblem& problem, std::span<const double> x) {
    const double lp = problem.log_density(x);
    return std::isnan(lp) ? kNegInf : lp;
}

}  // namespace

void SamplerConfig::validate() const {
    if (n_chains < 1) {
        throw std::invalid_argument("need at least one chain");
    }
    if (n_samples < 1) {
        throw std::invalid_argument("need at least one post-warmup draw");
    }
    if (!(adapt_target > 0.1 && adapt_target < 0.9)) {
        throw std::invalid_argument("adapt_target must lie in (0.1, 0.9)");
    }
    if (!(default_step_scale > 0.0) || !(init_scale > 0.0)) {
        throw std::invalid_argument("step and initialisation scales must be positive");
    }
    for (const double s : initial_step_scales) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("initial step scales must be positive");
        }
    }
}

RawChain sample_adaptive_metropolis(const SamplingProblem& problem, std::span<const double> initial,
                                    const SamplerConfig& cfg, std::uint64_t chain_seed) {
    cfg.validate();
    if (initial.size() != problem.dimension) {
        throw std::invalid_argument("initial point has the wrong dimension");
    }
    std::mt19937_64 rng(chain_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<BlockKernel> kernels;
    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
        BlockKernel k;
        k.indices = problem.blocks[b];
        const double scale = b < cfg.initial_step_scales.size() ? cfg.initial_step_scales[b] : cfg.default_step_scale;
        k.log_step = std::log(scale);
        const auto d = static_cast<Eigen::Index>(k.indices.size());
        k.shape = Matrix::Identity(d, d);
        kernels.push_back(std::move(k));
    }

    std::vector<double> x(initial.begin(), initial.end());
    double lp = safe_density(problem, x);
    if (!std::isfinite(lp)) {
        throw InitialisationError("log density is not finite at the initial point");
    }

    const std::size_t total = cfg.n_warmup + cfg.n_samples;
    const std::size_t shape_window_begin = cfg.n_warmup / 4;
    const std::size_t shape_update_at = cfg.n_warmup / 2;
    const bool learn_shape = cfg.n_warmup >= 200;
    std::vector<std::vector<double>> window;

    RawChain chain;
    chain.seed = chain_seed;
    chain.draws.resize(static_cast<Eigen::Index>(cfg.n_samples), static_cast<Eigen::Index>(problem.dimension));
    chain.log_densities.reserve(cfg.n_samples);
    std::vector<double> proposal(x.size());
    Vector noise;

    for (std::size_t iter = 0; iter < total; ++iter) {
        const bool warmup = iter < cfg.n_warmup;
        if (iter == cfg.n_warmup) {
            chain.kernel_checksum_begin = kernel_checksum(kernels);
            for (auto& k : kernels) {
                k.proposals = 0;
                k.accepted = 0;
            }
        }
        if (learn_shape && iter == shape_update_at && window.size() > 10) {
            for (auto& k : kernels) {
                const auto d = static_cast<Eigen::Index>(k.indices.size());
                Vector mean = Vector::Zero(d);
                for (const auto& w : window) {
                    for (Eigen::Index c = 0; c < d; ++c) {
                        mean[c] += w[k.indices[static_cast<std::size_t>(c)]];
                    }
                }
                mean /= static_cast<double>(window.size());
                Matrix cov = Matrix::Zero(d, d);
                for (const auto& w : window) {
                    Vector v(d);
                    for (Eigen::Index c = 0; c < d; ++c) {
                        v[c] = w[k.indices[static_cast<std::size_t>(c)]] - mean[c];
                    }
                    cov.noalias() += v * v.transpose();
                }
                cov /= static_cast<double>(window.size() - 1);
                cov.diagonal().array() += 1e-10;
                Eigen::LLT<Matrix> llt(cov);
                if (llt.info() == Eigen::Success && cov.allFinite()) {
                    k.shape = llt.matrixL();
                    k.log_step = std::log(2.38 / std::sqrt(static_cast<double>(d)));
                }
            }
            window.clear();
        }

        for (auto& k : kernels) {
            const auto d = static_cast<Eigen::Index>(k.indices.size());
            noise.resize(d);
            for (Eigen::Index c = 0; c < d; ++c) {
                noise[c] = normal(rng);
            }
            const Vector step = std::exp(k.log_step) * (k.shape * noise);
            proposal = x;
            for (Eigen::Index c = 0; c < d; ++c) {
                proposal[k.indices[static_cast<std::size_t>(c)]] += step[c];
            }
            const double lp_new = safe_density(problem, proposal);
            const double log_ratio = lp_new - lp;
            const double accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
            const bool accept = unit(rng) < accept_prob;
            ++k.proposals;
            if (accept) {
                x.swap(proposal);
                lp = lp_new;
                ++k.accepted;
            }
            if (warmup) {
                const double rate = std::pow(static_cast<double>(iter) + 1.0, -0.6);
                k.log_step += rate * (accept_prob - cfg.adapt_target);
            }
        }

        if (warmup) {
            if (learn_shape && iter >= shape_window_begin && iter < shape_update_at) {
                window.push_back(x);
            }
        } else {
            const auto row = static_cast<Eigen::Index>(iter - cfg.n_warmup);
            for (std::size_t c = 0; c < x.size(); ++c) {
                chain.draws(row, static_cast<Eigen::Index>(c)) = x[c];
            }
            chain.log_densities.push_back(lp);
        }
    }
    if (cfg.n_warmup == 0) {
        chain.kernel_checksum_begin = kernel_checksum(kernels);
    }
    chain.kernel_checksum_end = kernel_checksum(kernels);

    std::size_t proposals = 0;
    std::size_t accepted = 0;
    for (const auto& k : kernels) {
        proposals += k.proposals;
        accepted += k.accepted;
        chain.block_acceptance.push_back(k.proposals ? static_cast<double>(k.accepted) / k.proposals : 0.0);
        chain.step_sizes.push_back(std::exp(k.log_step));
    }
    chain.acceptance_rate = proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
    return chain;
}

ParameterLayout::ParameterLayout(std::size_t groups, int q) : groups_(groups), q_(q) {
    if (q < 1 || groups < static_cast<std::size_t>(q)) {
        throw std::invalid_argument("parameter layout needs q >= 1 and at least q groups");
    }
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(groups); ++a) {
        for (Eigen::Index s = 0; s < q; ++s) {
            if (!is_structural_zero(a, s)) {
                free_gamma_.emplace_back(a, s);
            }
        }
    }
}

std::size_t ParameterLayout::size() const {
    return free_gamma_.size() + static_cast<std::size_t>(q_) + groups_ + 2;
}

std::vector<std::vector<std::size_t>> ParameterLayout::blocks() const {
    std::vector<std::vector<std::size_t>> out;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < free_gamma_.size();) {
        std::vector<std::size_t> row_block;
        const Eigen::Index row = free_gamma_[k].first;
        while (k < free_gamma_.size() && free_gamma_[k].first == row) {
            row_block.push_back(offset++);
            ++k;
        }
        out.push_back(std::move(row_block));
    }
    std::vector<std::size_t> nu_block;
    for (int s = 0; s < q_; ++s) {
        nu_block.push_back(offset++);
    }
    out.push_back(std::move(nu_block));
    std::vector<std::size_t> eta_block;
    for (std::size_t g = 0; g < groups_; ++g) {
        eta_block.push_back(offset++);
    }
    out.push_back(std::move(eta_block));
    out.push_back({offset++});
    out.push_back({offset++});
    return out;
}

std::vector<double> ParameterLayout::flatten(const UnconstrainedParams& u) const {
    std::vector<double> x;
    x.reserve(size());
    for (const auto& [a, s] : free_gamma_) {
        x.push_back(u.gamma(a, s));
    }
    for (int s = 0; s < q_; ++s) {
        x.push_back(u.nu[s]);
    }
    for (std::size_t g = 0; g < groups_; ++g) {
        x.push_back(u.eta[static_cast<Eigen::Index>(g)]);
    }
    x.push_back(u.log_tau);
    x.push_back(u.logit_theta);
    return x;
}

UnconstrainedParams ParameterLayout::unflatten(std::span<const double> x) const {
    if (x.size() != size()) {
        throw std::invalid_argument("flattened parameter vector has the wrong length");
    }
    const auto r = static_cast<Eigen::Index>(groups_);
    UnconstrainedParams u;
    u.gamma = Matrix::Zero(r, q_);
    u.nu.resize(q_);
    u.eta.resize(r);
    std::size_t k = 0;
    for (const auto& [a, s] : free_gamma_) {
        u.gamma(a, s) = x[k++];
    }
    for (int s = 0; s < q_; ++s) {
        u.nu[s] = x[k++];
    }
    for (Eigen::Index g = 0; g < r; ++g) {
        u.eta[g] = x[k++];
    }
    u.log_tau = x[k++];
    u.logit_theta = x[k];
    return u;
}

double PosteriorChain::median_log_density() const {
    if (log_densities.empty()) {
        return kNegInf;
    }
    std::vector<double> sorted = log_densities;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

PosteriorChain run_chain(const AggregateMatrix& y, int q, const SamplerConfig& cfg, const PriorConfig& pc,
                         std::uint64_t seed, const std::optional<UnconstrainedParams>& initial) {
    cfg.validate();
    pc.validate();
    y.validate();
    const ParameterLayout layout(y.groups(), q);
    SamplingProblem problem;
    problem.dimension = layout.size();
    problem.blocks = layout.blocks();
    problem.log_density = [&](std::span<const double> x) { return log_posterior(layout.unflatten(x), y, pc); };

    std::mt19937_64 init_rng(derive_seed(seed, 0xfeed));
    std::vector<double> start;
    if (initial) {
        initial->validate();
        start = layout.flatten(*initial);
        if (!std::isfinite(problem.log_density(start))) {
            throw InitialisationError("log posterior is not finite at the supplied initial point");
        }
    } else {
        std::normal_distribution<double> normal(0.0, cfg.init_scale);
        bool found = false;
        for (std::size_t attempt = 0; attempt < cfg.max_init_attempts && !found; ++attempt) {
            UnconstrainedParams u;
            u.gamma = Matrix::Zero(static_cast<Eigen::Index>(y.groups()), q);
            for (Eigen::Index a = 0; a < u.gamma.rows(); ++a) {
                for (Eigen::Index s = 0; s < q; ++s) {
                    if (!is_structural_zero(a, s)) {
                        u.gamma(a, s) = normal(init_rng);
                    }
                }
            }
            u.nu.resize(q);
            for (Eigen::Index s = 0; s < q; ++s) {
                u.nu[s] = normal(init_rng);
            }
            u.eta.resize(u.gamma.rows());
            for (Eigen::Index g = 0; g < u.eta.size(); ++g) {
                u.eta[g] = logistic(normal(init_rng));
            }
            u.log_tau = normal(init_rng);
            u.logit_theta = normal(init_rng);
            start = layout.flatten(u);
            found = std::isfinite(problem.log_density(start));
        }
        if (!found) {
            throw InitialisationError("no finite log posterior after " + std::to_string(cfg.max_init_attempts) +
                                      " initial draws");
        }
    }

    const RawChain raw = sample_adaptive_metropolis(problem, start, cfg, seed);
    PosteriorChain chain;
    chain.seed = seed;
    chain.log_densities = raw.log_densities;
    chain.acceptance_rate = raw.acceptance_rate;
    chain.step_sizes = raw.step_sizes;
    chain.kernel_checksum_begin = raw.kernel_checksum_begin;
    chain.kernel_checksum_end = raw.kernel_checksum_end;
    chain.draws.reserve(static_cast<std::size_t>(raw.draws.rows()));
    std::vector<double> row(layout.size());
    for (Eigen::Index i = 0; i < raw.draws.rows(); ++i) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = raw.draws(i, static_cast<Eigen::Index>(c));
        }
        chain.draws.push_back(layout.unflatten(row));
    }
    return chain;
}

ChainSelection select_by_median(std::span<const double> median_log_densities) {
    if (median_log_densities.empty()) {
        throw std::invalid_argument("no chains to select from");
    }
    ChainSelection sel;
    for (std::size_t k = 1; k < median_log_densities.size(); ++k) {
        if (median_log_densities[k] > median_log_densities[sel.best]) {
            sel.best = k;
        }
    }
    if (median_log_densities.size() > 1) {
        double runner_up = kNegInf;
        for (std::size_t k = 0; k < median_log_densities.size(); ++k) {
            if (k != sel.best) {
                runner_up = std::max(runner_up, median_log_densities[k]);
            }
        }
        sel.gap = median_log_densities[sel.best] - runner_up;
    }
    return sel;
}

FitResult fit(const AggregateMatrix& y, int q, const SamplerConfig& cfg, const PriorConfig& pc,
              const std::vector<UnconstrainedParams>& initial_points) {
    cfg.validate();
    std::vector<std::optional<PosteriorChain>> slots(cfg.n_chains);
    std::vector<std::string> errors(cfg.n_chains);

    auto work = [&](std::size_t k) {
        try {
            std::optional<UnconstrainedParams> start;
            if (k < initial_points.size()) {
                start = initial_points[k];
            }
            PosteriorChain chain = run_chain(y, q, cfg, pc, derive_seed(cfg.seed, k), start);
            chain.chain_id = k;
            slots[k] = std::move(chain);
        } catch (const InitialisationError& e) {
            errors[k] = "chain " + std::to_string(k) + ": " + e.what();
        }
    };

    const std::size_t workers = cfg.parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1;
    if (workers == 1 || cfg.n_chains == 1) {
        for (std::size_t k = 0; k < cfg.n_chains; ++k) {
            work(k);
        }
    } else {
        std::vector<std::thread> threads;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (std::size_t w = 0; w < std::min(workers, cfg.n_chains); ++w) {
            threads.emplace_back([&, w] {
                for (std::size_t k = w; k < cfg.n_chains; k += workers) {
                    try {
                        work(k);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    FitResult result;
    for (std::size_t k = 0; k < cfg.n_chains; ++k) {
        if (slots[k]) {
            result.chains.push_back(std::move(*slots[k]));
        } else if (!errors[k].empty()) {
            result.failures.push_back(errors[k]);
        }
    }
    if (result.chains.empty()) {
        throw FitError("every chain failed to initialise");
    }
    std::vector<double> medians;
    for (const auto& c : result.chains) {
        medians.push_back(c.median_log_density());
    }
    const ChainSelection sel = select_by_median(medians);
    result.best = sel.best;
    result.gap = sel.gap;
    return result;
}

}  // namespace aggnet
