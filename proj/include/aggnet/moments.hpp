#pragma once

#include "aggnet/kernel.hpp"
#include "aggnet/types.hpp"

#include <array>
#include <optional>
#include <string_view>

namespace aggnet {

// Classes of products y_ij y_kl in the second moment of an aggregate volume.
// Indices name the shared node pattern relative to the first factor y_ij.
enum class TermClass : std::size_t {
    identical = 0,      // y_ij y_ij
    reversed,           // y_ij y_ji
    shared_row,         // y_ij y_il
    shared_column,      // y_ij y_kj
    column_meets_row,   // y_ij y_ki
    row_meets_column,   // y_ij y_jl
    disjoint,           // y_ij y_kl
};

inline constexpr std::size_t kTermClassCount = 7;

std::string_view term_class_name(TermClass c);

// Occurrence counts of each term class. counts[c] is the absolute number of
// (ij, kl) index tuples; prefactor is the number of admissible (ij) pairs.
struct TermCoefficients {
    std::int64_t prefactor = 0;
    std::array<std::int64_t, kTermClassCount> counts{};

    std::int64_t operator[](TermClass c) const { return counts[static_cast<std::size_t>(c)]; }
    std::int64_t& operator[](TermClass c) { return counts[static_cast<std::size_t>(c)]; }
    double per_prefactor(TermClass c) const;
    std::int64_t total() const;
    bool empty() const { return prefactor == 0; }

    friend bool operator==(const TermCoefficients&, const TermCoefficients&) = default;
};

/// Closed-form occurrence table. n_b empty selects the within-group columns;
/// within-group tables for n_a < 2 are empty.
TermCoefficients term_coefficients(std::int64_t n_a, std::optional<std::int64_t> n_b, NetworkKind kind);

/// Number of admissible edges (trials) between groups of the given sizes.
std::int64_t pair_trials(std::int64_t n_a, std::int64_t n_b, bool same_group, NetworkKind kind);
std::int64_t trials(const GroupConfig& cfg, NetworkKind kind, std::size_t a, std::size_t b);

struct PairMoments {
    double mean = 0.0;
    double variance = 0.0;
    std::int64_t trials = 0;
};

/// Mean and variance of one aggregate volume assembled from the occurrence
/// table: Var = sum_c count_c (E[y y]_c - E[lambda]^2).
PairMoments volume_moments(std::int64_t n_a, std::int64_t n_b, bool same_group, const KernelMoments& km,
                           NetworkKind kind);

double aggregate_mean(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a, std::size_t b);
double within_group_variance(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a);
double between_group_variance(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind, std::size_t a,
                              std::size_t b);

struct AggregateMoments {
    Matrix mean;
    Matrix variance;
    CountMatrix trials;
};

AggregateMoments aggregate_moments(const GroupConfig& cfg, const KernelParams& kp, NetworkKind kind);

}  // namespace aggnet
