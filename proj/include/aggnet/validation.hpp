#pragma once

#include "aggnet/moments.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aggnet {

struct ValidationOptions {
    std::uint64_t seed = 20240601;
    std::size_t grid_points = 20;
    std::size_t grid_sims = 20000;
    std::size_t tv_sims = 100000;
    double se_tolerance = 4.0;
    double tv_tolerance = 0.02;
    std::int64_t max_enumeration_size = 6;
    // Fault-injection hook applied to each analytic coefficient table before
    // it is compared with the enumeration.
    std::function<TermCoefficients(TermCoefficients)> coefficient_hook;
};

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
    std::vector<std::string> failures;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool passed() const;
    std::string to_text() const;
};

CheckResult check_moment_grid(const ValidationOptions& opts);
CheckResult check_enumeration(const ValidationOptions& opts);
CheckResult check_quadrature(const ValidationOptions& opts);
/// Beta-binomial fit to simulated volumes at n = (10, 15), delta = 1,
/// sigma = 5, q = 2, theta = 1.
CheckResult check_total_variation(const ValidationOptions& opts);

ValidationReport run_validation(const ValidationOptions& opts);

}  // namespace aggnet
