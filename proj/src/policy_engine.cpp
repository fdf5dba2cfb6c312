#include "cvxbandit/policy_engine.hpp"

#include <cmath>
#include <stdexcept>

namespace cvxbandit {

const char* to_string(StepBranch branch) {
    switch (branch) {
    case StepBranch::L1: return "l1";
    case StepBranch::UbmExact: return "ubm_exact";
    case StepBranch::SafeFallback: return "safe_fallback";
    case StepBranch::Oracle: return "oracle";
    }
    return "unknown";
}

Policy make_policy(std::vector<WeightedPoint> points) {
    std::vector<WeightedPoint> kept;
    double total = 0.0;
    for (auto& wp : points) {
        if (wp.weight <= 0.0) continue;
        total += wp.weight;
        kept.push_back(std::move(wp));
    }
    if (kept.empty() || total <= 0.0)
        throw std::invalid_argument("make_policy: no positive-weight points");
    Vec mean = Vec::Zero(kept.front().point.size());
    for (auto& wp : kept) {
        wp.weight /= total;
        mean += wp.weight * wp.point;
    }
    Policy pi;
    pi.support = std::move(kept);
    pi.mean = std::move(mean);
    return pi;
}

namespace {

Policy safe_point_policy(const DecisionSet& set) {
    return make_policy({{set.safe_action(), 1.0}});
}

std::vector<LinearCap> mean_cost_caps(const Mat& gamma, const Vec& tau) {
    std::vector<LinearCap> caps;
    caps.reserve(gamma.rows());
    for (int r = 0; r < gamma.rows(); ++r)
        caps.push_back({gamma.row(r).transpose(), tau(r)});
    return caps;
}

} // namespace

Policy reduce_support(const std::vector<Vec>& points, const Vec& weights,
                      const Vec& theta, const Mat& gamma, const Vec& tau) {
    const int n = static_cast<int>(points.size());
    const int m = static_cast<int>(gamma.rows());
    if (weights.size() != n || n == 0)
        throw std::invalid_argument("reduce_support: empty or mismatched input");

    // Distribution program in standard form over (weights, slacks):
    // gamma Z w + s = tau, sum w = 1, all variables nonnegative. A basic
    // feasible point has at most m + 1 nonzero variables in total.
    Mat A = Mat::Zero(m + 1, n + m);
    Vec b(m + 1);
    Vec c = Vec::Zero(n + m);
    for (int j = 0; j < n; ++j) {
        const Vec cost = gamma * points[j];
        A.block(0, j, m, 1) = cost;
        A(m, j) = 1.0;
        c(j) = theta.dot(points[j]);
    }
    A.block(0, n, m, m).setIdentity();
    b.head(m) = tau;
    b(m) = 1.0;

    Vec w0 = Vec::Zero(n + m);
    w0.head(n) = weights;
    w0.tail(m) = tau - A.block(0, 0, m, n) * weights;

    const Vec w = purify_to_bfs(A, b, c, w0);

    std::vector<WeightedPoint> kept;
    for (int j = 0; j < n; ++j)
        if (w(j) > 1e-12) kept.push_back({points[j], w(j)});
    return make_policy(std::move(kept));
}

Policy oracle_policy(const Vec& theta, const Mat& gamma, const Vec& tau,
                     const DecisionSet& set) {
    if (gamma.cols() != set.ambient_dim() || tau.size() != gamma.rows())
        throw std::invalid_argument("oracle_policy: shape mismatch");
    const Vec safe_cost = gamma * set.safe_action();
    for (int r = 0; r < tau.size(); ++r)
        if (safe_cost(r) > tau(r) + 1e-9)
            throw std::invalid_argument("oracle_policy: safe action violates a threshold");

    const HullLift lift = hull_lift(set, theta, mean_cost_caps(gamma, tau));
    const ConicSolution sol = solve_conic(lift.program);
    if (sol.status != SolveStatus::Optimal)
        throw std::runtime_error(std::string("oracle_policy: hull solve ") + to_string(sol.status));

    const auto mixture = extract_mixture(set, lift, sol);
    std::vector<Vec> points;
    Vec weights(mixture.size());
    for (std::size_t i = 0; i < mixture.size(); ++i) {
        points.push_back(mixture[i].point);
        weights(static_cast<int>(i)) = mixture[i].weight;
    }
    return reduce_support(points, weights, theta, gamma, tau);
}

CandidateValue evaluate_candidate(const Vec& theta_candidate, const ConfidenceGeometry& geom,
                                  const DecisionSet& set) {
    const Mat M = pessimistic_norm_matrix(geom);
    std::vector<SocLinearCap> caps;
    caps.reserve(geom.cost_dim());
    for (int r = 0; r < geom.cost_dim(); ++r)
        caps.push_back({M, geom.mu_hat.row(r).transpose(), geom.tau(r)});

    const HullLift lift = hull_lift(set, theta_candidate, {}, caps);
    const ConicSolution sol = solve_conic(lift.program);

    CandidateValue out;
    out.status = sol.status;
    if (sol.status == SolveStatus::Optimal) {
        out.value = sol.objective_value;
        out.z = sol.point.head(set.ambient_dim());
        out.mixture = extract_mixture(set, lift, sol);
    }
    return out;
}

StepOutcome l1_oplb_step(const ConfidenceGeometry& geom, const DecisionSet& set) {
    const std::vector<Vec> vertices = l1_vertices(geom);
    bool found = false;
    CandidateValue best;
    for (const Vec& v : vertices) {
        CandidateValue cand = evaluate_candidate(v, geom, set);
        if (cand.status != SolveStatus::Optimal) continue;
        if (!found || cand.value > best.value) {
            best = std::move(cand);
            found = true;
        }
    }

    StepOutcome out;
    if (!found) {
        out.policy = safe_point_policy(set);
        out.z_star = out.policy.mean;
        out.branch = StepBranch::SafeFallback;
        out.objective_value = geom.theta_hat.dot(out.z_star);
        return out;
    }
    out.policy = make_policy(best.mixture);
    out.z_star = best.z;
    out.branch = StepBranch::L1;
    out.objective_value = best.value;
    return out;
}

double default_activity_tol(const Vec& tau) {
    return 1e-6 * (1.0 + std::abs(tau.minCoeff()));
}

StepOutcome ubm_step(const ConfidenceGeometry& geom, const DecisionSet& set,
                     double activity_tol) {
    if (geom.cost_dim() != 1)
        throw std::invalid_argument("ubm_step: requires a single cost dimension");

    const Vec mu = geom.mu_hat.row(0).transpose();
    const Vec surrogate = geom.theta_hat - geom.rho * mu;
    const Mat M = pessimistic_norm_matrix(geom);
    const HullLift lift = hull_lift(set, surrogate, {}, {{M, mu, geom.tau(0)}});
    const ConicSolution sol = solve_conic(lift.program);

    if (sol.status == SolveStatus::Infeasible) {
        StepOutcome out;
        out.policy = safe_point_policy(set);
        out.z_star = out.policy.mean;
        out.branch = StepBranch::SafeFallback;
        out.objective_value = geom.theta_hat.dot(out.z_star);
        return out;
    }
    if (sol.status == SolveStatus::Optimal) {
        const Vec z = sol.point.head(set.ambient_dim());
        const double slack = geom.tau(0) - pessimistic_cost_bound(geom, z, 0);
        if (slack <= activity_tol) {
            StepOutcome out;
            out.policy = make_policy(extract_mixture(set, lift, sol));
            out.z_star = z;
            out.branch = StepBranch::UbmExact;
            // On the cap boundary the surrogate value equals the optimistic
            // objective theta_hat.z + rho*beta*||z||; report the latter.
            out.objective_value = geom.theta_hat.dot(z) + (M * z).norm() * geom.rho;
            return out;
        }
    }
    return l1_oplb_step(geom, set);
}

} // namespace cvxbandit
