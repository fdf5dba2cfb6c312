#include "cvxbandit/decision_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cvxbandit {

ConicPiece ConicPiece::ball(const Vec& center, double radius) {
    if (radius < 0.0) throw std::invalid_argument("ball: negative radius");
    const int d = static_cast<int>(center.size());
    ConicPiece p;
    p.A = Mat::Zero(d + 1, d);
    p.A.bottomRows(d).setIdentity();
    p.b = Vec(d + 1);
    p.b(0) = radius;
    p.b.tail(d) = -center;
    p.cones.push_back({ConeKind::SecondOrderCone, d + 1});
    return p;
}

ConicPiece ConicPiece::box(const Vec& lower, const Vec& upper) {
    const int d = static_cast<int>(lower.size());
    if (upper.size() != d) throw std::invalid_argument("box: bound size mismatch");
    for (int j = 0; j < d; ++j)
        if (lower(j) > upper(j)) throw std::invalid_argument("box: lower > upper");
    ConicPiece p;
    p.A = Mat::Zero(2 * d, d);
    p.A.topRows(d).setIdentity();
    p.A.bottomRows(d) = -Mat::Identity(d, d);
    p.b = Vec(2 * d);
    p.b.head(d) = -lower;
    p.b.tail(d) = upper;
    p.cones.push_back({ConeKind::NonnegativeOrthant, 2 * d});
    return p;
}

ConicPiece ConicPiece::polytope(const Mat& P, const Vec& q) {
    if (P.rows() != q.size()) throw std::invalid_argument("polytope: row mismatch");
    ConicPiece p;
    p.A = -P;
    p.b = q;
    p.cones.push_back({ConeKind::NonnegativeOrthant, static_cast<int>(P.rows())});
    return p;
}

ConicPiece ConicPiece::point(const Vec& location) {
    const int d = static_cast<int>(location.size());
    ConicPiece p;
    p.A = Mat::Identity(d, d);
    p.b = -location;
    p.cones.push_back({ConeKind::ZeroCone, d});
    return p;
}

double ConicPiece::violation(const Vec& x) const {
    const Vec v = A * x + b;
    double worst = -std::numeric_limits<double>::infinity();
    int row = 0;
    for (const Cone& cone : cones) {
        const auto seg = v.segment(row, cone.dim);
        switch (cone.kind) {
        case ConeKind::NonnegativeOrthant:
            worst = std::max(worst, -seg.minCoeff());
            break;
        case ConeKind::SecondOrderCone:
            worst = std::max(worst, seg.tail(cone.dim - 1).norm() - seg(0));
            break;
        case ConeKind::ZeroCone:
            worst = std::max(worst, seg.cwiseAbs().maxCoeff());
            break;
        }
        row += cone.dim;
    }
    return worst;
}

Vec ConicPiece::project(const Vec& x) const {
    // min ||p - x|| over the piece: variables (p, t), maximize -t with
    // (t, p - x) in a second-order cone.
    const int d = dim();
    ConicProgram prog;
    prog.num_vars = d + 1;
    prog.objective = Vec::Zero(d + 1);
    prog.objective(d) = -1.0;

    Mat As(d + 1, d + 1);
    As.setZero();
    As(0, d) = 1.0;
    As.block(1, 0, d, d).setIdentity();
    Vec bs = Vec::Zero(d + 1);
    bs.tail(d) = -x;
    prog.add_block(As, bs, {ConeKind::SecondOrderCone, d + 1});

    Mat Ap(A.rows(), d + 1);
    Ap.setZero();
    Ap.leftCols(d) = A;
    int row = 0;
    for (const Cone& cone : cones) {
        prog.add_block(Ap.middleRows(row, cone.dim), b.segment(row, cone.dim), cone);
        row += cone.dim;
    }

    const ConicSolution sol = solve_conic(prog);
    if (sol.status != SolveStatus::Optimal)
        throw std::runtime_error(std::string("piece projection failed: ") + to_string(sol.status));
    return sol.point.head(d);
}

namespace {

// Support-function solve max dir.x over one piece; used to certify
// boundedness at construction time.
double piece_support(const ConicPiece& piece, const Vec& dir) {
    ConicProgram prog;
    prog.num_vars = piece.dim();
    prog.objective = dir;
    int row = 0;
    for (const Cone& cone : piece.cones) {
        prog.add_block(piece.A.middleRows(row, cone.dim), piece.b.segment(row, cone.dim), cone);
        row += cone.dim;
    }
    const ConicSolution sol = solve_conic(prog);
    switch (sol.status) {
    case SolveStatus::Optimal:
        return sol.objective_value;
    case SolveStatus::Infeasible:
        throw std::invalid_argument("decision set piece is empty");
    case SolveStatus::Unbounded:
        throw std::invalid_argument("decision set piece is unbounded");
    default:
        throw std::runtime_error("piece support solve failed");
    }
}

} // namespace

DecisionSet::DecisionSet(std::vector<ConicPiece> pieces, Vec safe_action)
    : pieces_(std::move(pieces)), safe_action_(std::move(safe_action)) {
    if (pieces_.empty()) throw std::invalid_argument("decision set has no pieces");
    dim_ = pieces_.front().dim();
    if (dim_ <= 0) throw std::invalid_argument("decision set dimension must be positive");
    for (const ConicPiece& p : pieces_)
        if (p.dim() != dim_) throw std::invalid_argument("piece dimension mismatch");
    if (safe_action_.size() != dim_)
        throw std::invalid_argument("safe action dimension mismatch");

    radius_ = 0.0;
    bounds_.reserve(pieces_.size());
    for (const ConicPiece& p : pieces_) {
        Vec lo(dim_), hi(dim_);
        double sq = 0.0;
        for (int j = 0; j < dim_; ++j) {
            Vec dir = Vec::Zero(dim_);
            dir(j) = 1.0;
            hi(j) = piece_support(p, dir);
            dir(j) = -1.0;
            lo(j) = -piece_support(p, dir);
            sq += std::max(lo(j) * lo(j), hi(j) * hi(j));
        }
        bounds_.emplace_back(std::move(lo), std::move(hi));
        radius_ = std::max(radius_, std::sqrt(sq));
    }

    if (!contains(safe_action_, 1e-6))
        throw std::invalid_argument("safe action is not in the decision set");
}

bool DecisionSet::contains(const Vec& x, double tol) const {
    for (const ConicPiece& p : pieces_)
        if (p.contains(x, tol)) return true;
    return false;
}

HullLift hull_lift(const DecisionSet& set, const Vec& objective,
                   const std::vector<LinearCap>& extra_linear,
                   const std::vector<SocLinearCap>& extra_soc) {
    const int d = set.ambient_dim();
    const int k = static_cast<int>(set.pieces().size());
    if (objective.size() != d) throw std::invalid_argument("hull_lift: objective size mismatch");

    HullLift lift;
    lift.dim = d;
    lift.num_pieces = k;
    const int n = d + k * d + k;
    lift.program.num_vars = n;
    lift.program.objective = Vec::Zero(n);
    lift.program.objective.head(d) = objective;

    // z - sum_i x_i = 0
    Mat Az = Mat::Zero(d, n);
    Az.leftCols(d).setIdentity();
    for (int i = 0; i < k; ++i)
        Az.block(0, lift.x_offset(i), d, d) = -Mat::Identity(d, d);
    lift.program.add_block(Az, Vec::Zero(d), {ConeKind::ZeroCone, d});

    // sum alpha = 1
    Mat Aa = Mat::Zero(1, n);
    for (int i = 0; i < k; ++i) Aa(0, lift.alpha_offset(i)) = 1.0;
    lift.program.add_block(Aa, -Vec::Ones(1), {ConeKind::ZeroCone, 1});

    // alpha >= 0
    Mat Ann = Mat::Zero(k, n);
    for (int i = 0; i < k; ++i) Ann(i, lift.alpha_offset(i)) = 1.0;
    lift.program.add_block(Ann, Vec::Zero(k), {ConeKind::NonnegativeOrthant, k});

    // perspective of each piece: A_i x_i + alpha_i b_i in K_i
    for (int i = 0; i < k; ++i) {
        const ConicPiece& p = set.pieces()[i];
        int row = 0;
        for (const Cone& cone : p.cones) {
            Mat Ap = Mat::Zero(cone.dim, n);
            Ap.block(0, lift.x_offset(i), cone.dim, d) = p.A.middleRows(row, cone.dim);
            Ap.col(lift.alpha_offset(i)) = p.b.segment(row, cone.dim);
            lift.program.add_block(Ap, Vec::Zero(cone.dim), cone);
            row += cone.dim;
        }
    }

    // linear caps t_r - a_r.z >= 0, merged into one orthant block
    if (!extra_linear.empty()) {
        const int r = static_cast<int>(extra_linear.size());
        Mat Al = Mat::Zero(r, n);
        Vec bl(r);
        for (int j = 0; j < r; ++j) {
            if (extra_linear[j].a.size() != d)
                throw std::invalid_argument("hull_lift: linear cap size mismatch");
            Al.block(j, 0, 1, d) = -extra_linear[j].a.transpose();
            bl(j) = extra_linear[j].t;
        }
        lift.program.add_block(Al, bl, {ConeKind::NonnegativeOrthant, r});
    }

    // soc caps (t - g.z, M z) in SOC
    for (const SocLinearCap& cap : extra_soc) {
        if (cap.g.size() != d || cap.M.cols() != d)
            throw std::invalid_argument("hull_lift: soc cap size mismatch");
        const int mr = static_cast<int>(cap.M.rows());
        Mat As = Mat::Zero(mr + 1, n);
        As.block(0, 0, 1, d) = -cap.g.transpose();
        As.block(1, 0, mr, d) = cap.M;
        Vec bs = Vec::Zero(mr + 1);
        bs(0) = cap.t;
        lift.program.add_block(As, bs, {ConeKind::SecondOrderCone, mr + 1});
    }

    return lift;
}

std::vector<WeightedPoint> extract_mixture(const DecisionSet& set, const HullLift& lift,
                                           const ConicSolution& solution, double eps_alpha) {
    if (solution.status != SolveStatus::Optimal)
        throw std::invalid_argument("extract_mixture: solution is not optimal");
    const int d = lift.dim;
    const int k = lift.num_pieces;

    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        const double a = solution.point(lift.alpha_offset(i));
        if (a > eps_alpha) total += a;
    }
    if (total <= 0.0)
        throw std::runtime_error("extract_mixture: all mixture weights below threshold");

    std::vector<WeightedPoint> out;
    for (int i = 0; i < k; ++i) {
        const double a = solution.point(lift.alpha_offset(i));
        if (a <= eps_alpha) continue;
        Vec p = solution.point.segment(lift.x_offset(i), d) / a;
        // Division by a small alpha can amplify solver residual; snap the
        // point back onto its piece when that happens. The threshold sits
        // above the solver feasibility tolerance so clean solves skip the
        // projection, and below the membership tolerance promised to callers.
        if (!set.pieces()[i].contains(p, 1e-7)) p = set.pieces()[i].project(p);
        out.push_back({std::move(p), a / total});
    }
    return out;
}

} // namespace cvxbandit
