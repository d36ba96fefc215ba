#include "aggnet/inference.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <stdexcept>

namespace aggnet {

RigidAlignment rigid_procrustes(const Matrix& sample, const Matrix& reference, bool allow_reflection) {
    if (sample.rows() != reference.rows() || sample.cols() != reference.cols()) {
        throw std::invalid_argument("procrustes: sample and reference shapes differ");
    }
    const Eigen::Index q = sample.cols();
    const Eigen::RowVectorXd sample_centroid = sample.colwise().mean();
    const Eigen::RowVectorXd reference_centroid = reference.colwise().mean();
    const Matrix x = sample.rowwise() - sample_centroid;
    const Matrix y = reference.rowwise() - reference_centroid;

    RigidAlignment out;
    out.rotation = Matrix::Identity(q, q);
    const Matrix cross = x.transpose() * y;
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    const double tol = 1e-12 * std::max(1.0, s.size() ? s[0] : 0.0);
    // Rotation is unique when at most one singular value vanishes.
    const bool unique = s.size() > 0 && s[0] > tol && (q < 2 || s[q - 2] > tol);
    if (q == 1) {
        if (allow_reflection && cross(0, 0) < 0.0) {
            out.rotation(0, 0) = -1.0;
        }
        out.degenerate = !unique;
    } else if (!unique) {
        out.degenerate = true;
    } else {
        Matrix u = svd.matrixU();
        const Matrix& v = svd.matrixV();
        if (!allow_reflection && (u * v.transpose()).determinant() < 0.0) {
            u.col(q - 1) *= -1.0;
        }
        out.rotation = u * v.transpose();
    }
    out.aligned = (x * out.rotation).rowwise() + reference_centroid;
    return out;
}

AlignedPosterior procrustes_align(const std::vector<Matrix>& samples, const Matrix& reference, bool allow_reflection) {
    AlignedPosterior out;
    out.reference = reference;
    out.mu.reserve(samples.size());
    for (const Matrix& sample : samples) {
        RigidAlignment fit = rigid_procrustes(sample, reference, allow_reflection);
        if (fit.degenerate) {
            ++out.degenerate_alignments;
        }
        out.mu.push_back(std::move(fit.aligned));
    }
    return out;
}

AlignedPosterior align_chain(const PosteriorChain& chain) {
    if (chain.draws.empty()) {
        throw std::invalid_argument("cannot align an empty chain");
    }
    const auto best = static_cast<std::size_t>(
        std::max_element(chain.log_densities.begin(), chain.log_densities.end()) - chain.log_densities.begin());
    std::vector<Matrix> mu;
    std::vector<Vector> sigma;
    std::vector<double> tau;
    std::vector<double> theta;
    for (const auto& u : chain.draws) {
        ModelParams p = to_natural(u);
        mu.push_back(std::move(p.mu));
        sigma.push_back(std::move(p.sigma));
        tau.push_back(p.tau);
        theta.push_back(p.theta);
    }
    AlignedPosterior out = procrustes_align(mu, mu[best]);
    out.sigma = std::move(sigma);
    out.tau = std::move(tau);
    out.theta = std::move(theta);
    out.log_densities = chain.log_densities;
    return out;
}

}  // namespace aggnet
