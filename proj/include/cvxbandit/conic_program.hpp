#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "cvxbandit/types.hpp"

namespace cvxbandit {

/// Cone kinds supported by the embedded solver.
/// A second-order cone of dimension q is {(t, u) : t >= ||u||_2}, so q >= 2.
/// The zero cone encodes equality constraints A x + b = 0.
enum class ConeKind { NonnegativeOrthant, SecondOrderCone, ZeroCone };

struct Cone {
    ConeKind kind = ConeKind::NonnegativeOrthant;
    int dim = 1;
};

/// One affine-conic constraint block: A x + b in K.
struct ConicBlock {
    Mat A;
    Vec b;
    Cone cone;
};

/// maximize objective . x  subject to  A_i x + b_i in K_i for every block.
struct ConicProgram {
    int num_vars = 0;
    Vec objective;
    std::vector<ConicBlock> constraints;

    void add_block(Mat A, Vec b, Cone cone) {
        constraints.push_back({std::move(A), std::move(b), cone});
    }
    // Throws std::invalid_argument on dimension mismatches.
    void validate() const;
};

struct SolverTolerances {
    double feas = 1e-8;    // primal/dual feasibility
    double gap = 1e-8;     // relative duality gap
    int max_iters = 200;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Vec point;                   // primal point, valid iff status == Optimal
    double objective_value = 0;  // objective . point, iff Optimal
    double duality_gap = 0;      // diagnostic, iff Optimal
    int iterations = 0;
};

const char* to_string(SolveStatus s);

/// Solves the program with a homogeneous self-dual interior-point method
/// over products of orthant and second-order cones (zero cones become
/// equality rows). Infeasibility and unboundedness are reported through
/// Farkas-type certificates found by the embedding.
ConicSolution solve_conic(const ConicProgram& prog, const SolverTolerances& tol = {});

/// Total number of solve_conic calls in this process. Used by tests that pin
/// per-step subproblem counts.
std::int64_t solve_conic_call_count();

/// Moves a feasible weight vector of the standard-form LP
///     maximize c.w  s.t.  A w = b, w >= 0     (A is p x q, full row rank)
/// to a basic feasible solution: at most p nonzero entries, objective not
/// decreased, feasibility preserved. Mass is pivoted along null-space
/// directions of the active columns until those columns are independent.
/// When a pivot admits several blocking indices the smallest index is
/// dropped. Throws std::invalid_argument if w violates A w = b or w >= 0 by
/// more than feas_tol.
Vec purify_to_bfs(const Mat& A, const Vec& b, const Vec& c, Vec w,
                  double feas_tol = 1e-8);

} // namespace cvxbandit
