#pragma once

#include <vector>

#include "cvxbandit/decision_set.hpp"
#include "cvxbandit/estimation.hpp"
#include "cvxbandit/types.hpp"

namespace cvxbandit {

/// A finite-support randomized action: points with positive weights summing
/// to one, plus the cached mean.
struct Policy {
    std::vector<WeightedPoint> support;
    Vec mean;
};

/// Builds a Policy from raw weighted points: drops nonpositive weights,
/// renormalizes, computes the mean. Throws if nothing remains.
Policy make_policy(std::vector<WeightedPoint> points);

/// Which path produced a round's policy. Oracle marks rounds played by the
/// omniscient policy rather than a learning step.
enum class StepBranch { L1, UbmExact, SafeFallback, Oracle };
const char* to_string(StepBranch branch);

struct StepOutcome {
    Policy policy;
    Vec z_star;              // optimizer of the planning objective
    StepBranch branch = StepBranch::SafeFallback;
    double objective_value = 0.0;
};

/// Best policy under known parameters: maximizes expected reward over hull
/// members whose expected cost meets every threshold, then prunes the
/// support to at most cost_dim + 1 points. Requires the safe action to be
/// feasible.
Policy oracle_policy(const Vec& theta, const Mat& gamma, const Vec& tau,
                     const DecisionSet& set);

/// Shrinks a feasible mixture over fixed points to a basic solution of the
/// distribution program (weights on points plus threshold slacks), keeping
/// the expected-reward value. Support size ends at most cost_dim + 1.
Policy reduce_support(const std::vector<Vec>& points, const Vec& weights,
                      const Vec& theta, const Mat& gamma, const Vec& tau);

/// Value of one candidate reward vector against the pessimistic cost caps.
struct CandidateValue {
    SolveStatus status = SolveStatus::NumericalFailure;
    double value = 0.0;
    Vec z;
    std::vector<WeightedPoint> mixture;
};

CandidateValue evaluate_candidate(const Vec& theta_candidate, const ConfidenceGeometry& geom,
                                  const DecisionSet& set);

/// One planning step maximizing over the box-shaped reward confidence set:
/// evaluates all 2d vertices, keeps the best (lowest index wins ties).
/// Falls back to a point mass at the safe action if no vertex is feasible.
StepOutcome l1_oplb_step(const ConfidenceGeometry& geom, const DecisionSet& set);

/// Activity tolerance used to decide whether the pessimistic cap binds.
double default_activity_tol(const Vec& tau);

/// Planning step for a single cost dimension that first tries the
/// surrogate objective rho*tau + (theta_hat - rho*mu_hat).z; its optimum is
/// exact for the optimistic objective whenever the cost cap binds there.
/// Otherwise delegates to l1_oplb_step.
StepOutcome ubm_step(const ConfidenceGeometry& geom, const DecisionSet& set,
                     double activity_tol);

} // namespace cvxbandit
