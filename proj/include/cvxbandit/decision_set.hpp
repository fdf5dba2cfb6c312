#pragma once

#include <vector>

#include "cvxbandit/conic_program.hpp"
#include "cvxbandit/types.hpp"

namespace cvxbandit {

/// One convex piece of a decision set: {x : A x + b in K}, with K a product
/// of the cones in `cones` (rows of A stacked in the same order). Covers
/// polytopes (orthant rows), balls/ellipsoids (SOC blocks) and single points
/// (zero rows).
struct ConicPiece {
    Mat A;
    Vec b;
    std::vector<Cone> cones;

    static ConicPiece ball(const Vec& center, double radius);
    static ConicPiece box(const Vec& lower, const Vec& upper);
    static ConicPiece polytope(const Mat& P, const Vec& q);  // P x <= q
    static ConicPiece point(const Vec& location);

    int dim() const { return static_cast<int>(A.cols()); }
    /// Largest constraint violation of x over all cone blocks (<= 0 inside).
    double violation(const Vec& x) const;
    bool contains(const Vec& x, double tol) const { return violation(x) <= tol; }
    /// Euclidean projection of x onto the piece (conic solve).
    Vec project(const Vec& x) const;
};

/// A decision set D = union of conic pieces, with the known safe action.
/// Construction verifies each piece is nonempty and bounded (per-coordinate
/// support-function solves) and that the safe action belongs to the set.
class DecisionSet {
public:
    DecisionSet(std::vector<ConicPiece> pieces, Vec safe_action);

    const std::vector<ConicPiece>& pieces() const { return pieces_; }
    int ambient_dim() const { return dim_; }
    const Vec& safe_action() const { return safe_action_; }
    /// Radius L of a ball certainly containing every piece.
    double radius_bound() const { return radius_; }
    /// Componentwise bounding box of piece i.
    const std::pair<Vec, Vec>& piece_bounds(int i) const { return bounds_[i]; }

    bool contains(const Vec& x, double tol) const;

private:
    std::vector<ConicPiece> pieces_;
    Vec safe_action_;
    int dim_;
    double radius_;
    std::vector<std::pair<Vec, Vec>> bounds_;
};

struct LinearCap { Vec a; double t; };                // a.z <= t
struct SocLinearCap { Mat M; Vec g; double t; };      // ||M z||_2 + g.z <= t

/// The lifted program for optimizing a linear objective over the convex hull
/// of the union: variables (z, x_1..x_k, alpha), with z = sum x_i,
/// sum alpha = 1, alpha >= 0, and each piece's constraints in perspective
/// form A_i x_i + alpha_i b_i in K_i. Extra caps act on z.
struct HullLift {
    ConicProgram program;
    int dim = 0;
    int num_pieces = 0;

    int z_offset() const { return 0; }
    int x_offset(int i) const { return dim + i * dim; }
    int alpha_offset(int i) const { return dim + num_pieces * dim + i; }
};

HullLift hull_lift(const DecisionSet& set, const Vec& objective,
                   const std::vector<LinearCap>& extra_linear = {},
                   const std::vector<SocLinearCap>& extra_soc = {});

struct WeightedPoint {
    Vec point;
    double weight;
};

/// Recovers the finite-support decomposition z* = sum alpha_i (x_i / alpha_i)
/// from an optimal lift solution. Pieces with alpha_i <= eps_alpha are
/// dropped and the remaining weights renormalized; recovered points whose
/// residual exceeds the solver tolerance are snapped back onto their piece.
/// Throws std::runtime_error if every weight is below eps_alpha.
std::vector<WeightedPoint> extract_mixture(const DecisionSet& set, const HullLift& lift,
                                           const ConicSolution& solution,
                                           double eps_alpha = 1e-9);

} // namespace cvxbandit
