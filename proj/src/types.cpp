#include "aggnet/types.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aggnet {

void KernelParams::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("propensity theta must lie in [0, 1], got " + std::to_string(theta));
    }
    if (q < 1) {
        throw std::invalid_argument("latent dimension q must be positive, got " + std::to_string(q));
    }
}

std::int64_t GroupConfig::total_nodes() const {
    return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
}

void GroupConfig::validate() const {
    if (sizes.empty()) {
        throw std::invalid_argument("group config needs at least one group");
    }
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        if (sizes[g] < 1) {
            throw std::invalid_argument("group " + std::to_string(g) + " has non-positive size");
        }
    }
    if (static_cast<std::size_t>(centres.rows()) != sizes.size() ||
        static_cast<std::size_t>(scales.size()) != sizes.size()) {
        throw std::invalid_argument("group config: sizes, centres and scales disagree on the number of groups");
    }
    if (centres.cols() < 1) {
        throw std::invalid_argument("group config: centres need at least one column");
    }
    for (Eigen::Index g = 0; g < scales.size(); ++g) {
        if (!(scales[g] >= 0.0) || !std::isfinite(scales[g])) {
            throw std::invalid_argument("group " + std::to_string(g) + " has an invalid scale");
        }
    }
    if (!centres.allFinite()) {
        throw std::invalid_argument("group config: centres must be finite");
    }
}

}  // namespace aggnet
