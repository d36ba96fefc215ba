#include "aggnet/moments.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aggnet {

std::string_view term_class_name(TermClass c) {
    switch (c) {
        case TermClass::identical: return "y_ij y_ij";
        case TermClass::reversed: return "y_ij y_ji";
        case TermClass::shared_row: return "y_ij y_il";
        case TermClass::shared_column: return "y_ij y_kj";
        case TermClass::column_meets_row: return "y_ij y_ki";
        case TermClass::row_meets_column: return "y_ij y_jl";
        case TermClass::disjoint: return "y_ij y_kl";
    }
    return "?";
}

double TermCoefficients::per_prefactor(TermClass c) const {
    return prefactor == 0 ? 0.0 : static_cast<double>((*this)[c]) / static_cast<double>(prefactor);
}

std::int64_t TermCoefficients::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

TermCoefficients term_coefficients(std::int64_t n_a, std::optional<std::int64_t> n_b, NetworkKind kind) {
    if (n_a < 0 || (n_b && *n_b < 0)) {
        throw std::invalid_argument("group sizes must be non-negative");
    }
    TermCoefficients table;
    if (n_b) {
        const std::int64_t p = n_a * *n_b;
        table.prefactor = p;
        table[TermClass::identical] = p;
        table[TermClass::shared_row] = p * (*n_b - 1);
        table[TermClass::shared_column] = p * (n_a - 1);
        table[TermClass::disjoint] = p * (n_a - 1) * (*n_b - 1);
        if (p == 0) {
            table = TermCoefficients{};
        }
        return table;
    }
    if (n_a < 2) {
        return table;
    }
    const std::int64_t n = n_a;
    if (kind.directed) {
        const std::int64_t p = n * (n - 1);
        table.prefactor = p;
        table[TermClass::identical] = p;
        table[TermClass::reversed] = p;
        table[TermClass::shared_row] = p * (n - 2);
        table[TermClass::shared_column] = p * (n - 2);
        table[TermClass::column_meets_row] = p * (n - 2);
        table[TermClass::row_meets_column] = p * (n - 2);
        table[TermClass::disjoint] = p * (n - 2) * (n - 3);
    } else {
        // prefactor n(n-1)/2 times (1, 0, 2(n-2)/3, 2(n-2)/3, (n-2)/3, (n-2)/3, (n-2)(n-3)/2)
        const std::int64_t p = n * (n - 1) / 2;
        const std::int64_t triples = n * (n - 1) * (n - 2) / 6;
        table.prefactor = p;
        table[TermClass::identical] = p;
        table[TermClass::shared_row] = 2 * triples;
        table[TermClass::shared_column] = 2 * triples;
        table[TermClass::column_meets_row] = triples;
        table[TermClass::row_meets_column] = triples;
        table[TermClass::disjoint] = n * (n - 1) * (n - 2) * (n - 3) / 4;
    }
    return table;
}

std::int64_t pair_trials(std::int64_t n_a, std::int64_t n_b, bool same_group, NetworkKind kind) {
    if (!same_group) {
        return n_a * n_b;
    }
    const std::int64_t ordered = n_a * (n_a - 1);
    return kind.directed ? ordered : ordered / 2;
}

std::int64_t trials(const GroupConfig& cfg, NetworkKind kind, std::size_t a, std::size_t b) {
    if (a >= cfg.groups() || b >= cfg.groups()) {
        throw std::out_of_range("group index out of range");
    }
    return pair_trials(cfg.sizes[a], cfg.sizes[b], a == b, kind);
}

PairMoments volume_moments(std::int64_t n_a, std::int64_t n_b, bool same_group, const KernelMoments& km,
                           NetworkKind kind) {
    PairMoments out;
    out.trials = pair_trials(n_a, n_b, same_group, kind);
    if (out.trials == 0) {
        return out;
    }
    const double m = km.mean;
    const double m2 = m * m;
    out.mean = static_cast<double>(out.trials) * m;

    const TermCoefficients table =
        same_group ? term_coefficients(n_a, std::nullopt, kind) : term_coefficients(n_a, n_b, kind);

    // Poisson weights: E[y^2 | z] = lambda + lambda^2.
    const double matched = kind.weighted ? m + km.second : m;
    auto weight = [&](TermClass c) { return static_cast<double>(table[c]); };

    double variance = weight(TermClass::identical) * (matched - m2) + weight(TermClass::reversed) * (km.second - m2) +
                      weight(TermClass::shared_row) * (km.cross_common_a - m2) +
                      weight(TermClass::shared_column) * (km.cross_common_b - m2);
    if (same_group) {
        // Within a group every single-shared-node pattern has the same expectation.
        variance += (weight(TermClass::column_meets_row) + weight(TermClass::row_meets_column)) *
                    (km.cross_common_a - m2);
    }
    out.variance = std::max(variance, 0.0);
    return out;
}

namespace {

PairMoments pair_moments(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a,
                         std::size_t b) {
    if (a >= cfg.groups() || b >= cfg.groups()) {
        throw std::out_of_range("group index out of range");
    }
    const KernelMoments km = kernel_moments(ClusterPair::from_groups(cfg, a, b), kp);
    return volume_moments(cfg.sizes[a], cfg.sizes[b], a == b, km, kind);
}

}  // namespace

double aggregate_mean(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a, std::size_t b) {
    return pair_moments(cfg, kp, kind, a, b).mean;
}

double within_group_variance(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a) {
    return pair_moments(cfg, kp, kind, a, a).variance;
}

double between_group_variance(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a,
                              std::size_t b) {
    if (a == b) {
        throw std::invalid_argument("between_group_variance needs distinct groups; use within_group_variance");
    }
    return pair_moments(cfg, kp, kind, a, b).variance;
}

AggregateMoments aggregate_moments(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind) {
    cfg.validate();
    kp.validate();
    const auto r = static_cast<Eigen::Index>(cfg.groups());
    AggregateMoments out{Matrix::Zero(r, r), Matrix::Zero(r, r), CountMatrix::Zero(r, r)};
    for (Eigen::Index a = 0; a < r; ++a) {
        for (Eigen::Index b = 0; b < r; ++b) {
            const PairMoments pm =
                pair_moments(cfg, kp, kind, static_cast<std::size_t>(a), static_cast<std::size_t>(b));
            out.mean(a, b) = pm.mean;
            out.variance(a, b) = pm.variance;
            out.trials(a, b) = pm.trials;
        }
    }
    return out;
}

}  // namespace aggnet
