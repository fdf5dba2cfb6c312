#include "cvxbandit/estimation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace cvxbandit {

double rho_factor(double tau, double safe_cost_level) {
    const double margin = tau - safe_cost_level;
    if (margin <= 0.0)
        throw std::invalid_argument("rho_factor: safe action must have cost margin");
    return 1.0 + 2.0 / margin;
}

double confidence_radius(const ConfidenceParams& params, int dim, int t) {
    const double L = params.action_bound;
    const double arg = (1.0 + static_cast<double>(t - 1) * L * L / params.lambda) / params.delta;
    return params.noise_scale * std::sqrt(dim * std::log(arg)) +
           std::sqrt(params.lambda) * params.param_bound;
}

ConfidenceState::ConfidenceState(int dim, int cost_dim, ConfidenceParams params)
    : dim_(dim), cost_dim_(cost_dim), params_(std::move(params)) {
    if (dim <= 0 || cost_dim <= 0)
        throw std::invalid_argument("ConfidenceState: dimensions must be positive");
    if (params_.lambda <= 0.0)
        throw std::invalid_argument("ConfidenceState: lambda must be positive");
    if (params_.delta <= 0.0 || params_.delta >= 1.0)
        throw std::invalid_argument("ConfidenceState: delta must be in (0,1)");
    if (params_.tau.size() != cost_dim)
        throw std::invalid_argument("ConfidenceState: tau size mismatch");
    sigma_ = params_.lambda * Mat::Identity(dim, dim);
    reward_moment_ = Vec::Zero(dim);
    cost_moment_ = Mat::Zero(cost_dim, dim);
}

void ConfidenceState::update(const Vec& x, double reward, const Vec& cost) {
    if (x.size() != dim_ || cost.size() != cost_dim_)
        throw std::invalid_argument("ConfidenceState::update: size mismatch");
    sigma_ += x * x.transpose();
    reward_moment_ += reward * x;
    cost_moment_ += cost * x.transpose();
    ++t_;
}

double ConfidenceState::beta() const { return confidence_radius(params_, dim_, t_); }

Vec ConfidenceState::theta_hat() const {
    return sigma_.llt().solve(reward_moment_);
}

Mat ConfidenceState::mu_hat() const {
    return sigma_.llt().solve(cost_moment_.transpose()).transpose();
}

ConfidenceGeometry ConfidenceState::geometry() const {
    ConfidenceGeometry g;
    g.theta_hat = theta_hat();
    g.mu_hat = mu_hat();
    g.beta = beta();
    g.rho = rho_factor(params_.tau.minCoeff(), params_.safe_cost_level);
    g.sigma = sigma_;
    Eigen::SelfAdjointEigenSolver<Mat> eig(sigma_);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("ConfidenceState: Gram eigendecomposition failed");
    const Vec ev = eig.eigenvalues();
    const Mat& U = eig.eigenvectors();
    g.sigma_inv = U * ev.cwiseInverse().asDiagonal() * U.transpose();
    g.sigma_sqrt = U * ev.cwiseSqrt().asDiagonal() * U.transpose();
    g.sigma_inv_sqrt = U * ev.cwiseSqrt().cwiseInverse().asDiagonal() * U.transpose();
    g.tau = params_.tau;
    g.use_literal_gram_norm = params_.use_literal_gram_norm;
    return g;
}

std::vector<Vec> l1_vertices(const ConfidenceGeometry& geom) {
    const int d = geom.dim();
    const double radius = geom.rho * std::sqrt(static_cast<double>(d)) * geom.beta;
    std::vector<Vec> out;
    out.reserve(2 * d);
    for (int j = 0; j < d; ++j) {
        const Vec dir = radius * geom.sigma_inv_sqrt.col(j);
        out.push_back(geom.theta_hat + dir);
        out.push_back(geom.theta_hat - dir);
    }
    return out;
}

double pessimistic_cost_bound(const ConfidenceGeometry& geom, const Vec& z, int row) {
    const Mat& Q = geom.use_literal_gram_norm ? geom.sigma : geom.sigma_inv;
    return geom.mu_hat.row(row).dot(z) + geom.beta * std::sqrt(z.dot(Q * z));
}

Mat pessimistic_norm_matrix(const ConfidenceGeometry& geom) {
    return geom.beta * (geom.use_literal_gram_norm ? geom.sigma_sqrt : geom.sigma_inv_sqrt);
}

} // namespace cvxbandit
