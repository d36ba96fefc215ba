#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace aggnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct NetworkKind {
    bool directed = true;
    bool weighted = false;

    friend bool operator==(const NetworkKind&, const NetworkKind&) = default;
};

// Gaussian kernel lambda(x, y) = theta * exp(-|x - y|^2 / 2) in q dimensions.
struct KernelParams {
    double theta = 1.0;
    int q = 2;

    void validate() const;
};

// Cluster layout: group sizes, r x q centres and per-group standard deviations.
struct GroupConfig {
    std::vector<std::int64_t> sizes;
    Matrix centres;
    Vector scales;

    std::size_t groups() const { return sizes.size(); }
    int dimension() const { return static_cast<int>(centres.cols()); }
    std::int64_t total_nodes() const;

    void validate() const;
};

}  // namespace aggnet
