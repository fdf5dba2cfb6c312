#pragma once

#include <vector>

#include "cvxbandit/types.hpp"

namespace cvxbandit {

/// Fixed inputs of the confidence construction: regularizer, sub-Gaussian
/// noise scale, a-priori parameter norm bound, failure probability, action
/// norm bound, cost thresholds and the safe action's known cost level.
struct ConfidenceParams {
    double lambda = 1.0;
    double noise_scale = 1.0;
    double param_bound = 1.0;
    double delta = 0.05;
    double action_bound = 1.0;
    Vec tau;
    double safe_cost_level = 0.0;
    bool use_literal_gram_norm = false;
};

/// Snapshot of everything a planning step needs: regularized least-squares
/// estimates, confidence radius, pessimism inflation factor and the Gram
/// matrix with its inverse and principal square roots.
struct ConfidenceGeometry {
    Vec theta_hat;
    Mat mu_hat;        // one row per cost dimension
    double beta = 0.0;
    double rho = 1.0;
    Mat sigma;
    Mat sigma_inv;
    Mat sigma_sqrt;
    Mat sigma_inv_sqrt;
    Vec tau;
    bool use_literal_gram_norm = false;

    int dim() const { return static_cast<int>(theta_hat.size()); }
    int cost_dim() const { return static_cast<int>(mu_hat.rows()); }
};

/// Pessimism inflation factor 1 + 2 / (tau - c0). Requires tau > c0.
double rho_factor(double tau, double safe_cost_level);

/// Confidence radius at round t (t = 1 before any observation).
double confidence_radius(const ConfidenceParams& params, int dim, int t);

/// Running sufficient statistics for the shared-design ridge estimates of
/// the reward and cost parameters. Value type: copy to branch.
class ConfidenceState {
public:
    ConfidenceState(int dim, int cost_dim, ConfidenceParams params);

    /// Record one round (played action, observed reward and cost vector).
    void update(const Vec& x, double reward, const Vec& cost);

    int round() const { return t_; }
    int dim() const { return dim_; }
    int cost_dim() const { return cost_dim_; }
    const Mat& gram() const { return sigma_; }
    const ConfidenceParams& params() const { return params_; }

    double beta() const;
    Vec theta_hat() const;
    Mat mu_hat() const;
    ConfidenceGeometry geometry() const;

private:
    int dim_;
    int cost_dim_;
    int t_ = 1;
    ConfidenceParams params_;
    Mat sigma_;
    Vec reward_moment_;
    Mat cost_moment_;  // cost_dim x dim
};

/// Vertices theta_hat +/- rho*sqrt(d)*beta * Sigma^{-1/2} e_j of the
/// box-shaped reward confidence set, ordered (+e_0, -e_0, +e_1, -e_1, ...).
std::vector<Vec> l1_vertices(const ConfidenceGeometry& geom);

/// Largest cost row r value consistent with the confidence set at z:
/// mu_hat_r.z + beta * ||z|| in the Gram-induced norm (inverse by default,
/// literal Gram if the geometry says so).
double pessimistic_cost_bound(const ConfidenceGeometry& geom, const Vec& z, int row);

/// Matrix M with ||M z|| equal to the norm term of pessimistic_cost_bound;
/// lets cost pessimism enter conic programs as a second-order cone cap.
Mat pessimistic_norm_matrix(const ConfidenceGeometry& geom);

} // namespace cvxbandit
