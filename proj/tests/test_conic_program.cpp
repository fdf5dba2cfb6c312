#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cvxbandit/conic_program.hpp"
#include "support/grid_oracle.hpp"
#include "support/lp_oracle.hpp"

using namespace cvxbandit;

namespace {

// A z <= q as an orthant block
void add_leq(ConicProgram& p, const Mat& A, const Vec& q) {
    p.add_block(-A, q, {ConeKind::NonnegativeOrthant, static_cast<int>(A.rows())});
}

// ||z - c|| <= r
void add_ball(ConicProgram& p, const Vec& c, double r) {
    const int d = static_cast<int>(c.size());
    Mat A(d + 1, d);
    A.setZero();
    A.bottomRows(d).setIdentity();
    Vec b(d + 1);
    b(0) = r;
    b.tail(d) = -c;
    p.add_block(A, b, {ConeKind::SecondOrderCone, d + 1});
}

// ||M z|| + g.z <= t
void add_soc_cap(ConicProgram& p, const Mat& M, const Vec& g, double t) {
    Mat A(M.rows() + 1, M.cols());
    A.row(0) = -g.transpose();
    A.bottomRows(M.rows()) = M;
    Vec b = Vec::Zero(M.rows() + 1);
    b(0) = t;
    p.add_block(A, b, {ConeKind::SecondOrderCone, static_cast<int>(M.rows()) + 1});
}

double max_violation(const ConicProgram& prog, const Vec& x) {
    double worst = 0.0;
    for (const ConicBlock& blk : prog.constraints) {
        const Vec v = blk.A * x + blk.b;
        switch (blk.cone.kind) {
            case ConeKind::NonnegativeOrthant:
                worst = std::max(worst, -v.minCoeff());
                break;
            case ConeKind::ZeroCone:
                worst = std::max(worst, v.cwiseAbs().maxCoeff());
                break;
            case ConeKind::SecondOrderCone:
                worst = std::max(worst, v.tail(v.size() - 1).norm() - v(0));
                break;
        }
    }
    return worst;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_CASE("orthant lp with a unique vertex optimum") {
    ConicProgram p;
    p.num_vars = 2;
    p.objective = vec2(2.0, 1.0);
    Mat A(3, 2);
    A << -1, 0, 0, -1, 1, 1;  // x >= 0, y >= 0, x + y <= 1
    Vec q(3);
    q << 0, 0, 1;
    add_leq(p, A, q);
    ConicSolution s = solve_conic(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(s.point(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.point(1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("box lp hits the right corner") {
    ConicProgram p;
    p.num_vars = 2;
    p.objective = vec2(3.0, -1.0);
    Mat A(4, 2);
    A << 1, 0, -1, 0, 0, 1, 0, -1;  // x <= 2, -x <= 0, y <= 4, -y <= -1
    Vec q(4);
    q << 2, 0, 4, -1;
    add_leq(p, A, q);
    ConicSolution s = solve_conic(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(s.point(0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(s.point(1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("zero cone encodes equality rows") {
    ConicProgram p;
    p.num_vars = 3;
    p.objective = Vec::Zero(3);
    p.objective(0) = 1.0;
    p.objective(1) = 1.0;
    Mat E(1, 3);
    E << 1, 1, 1;
    Vec be(1);
    be << -1.0;  // x + y + z = 1
    p.add_block(E, be, {ConeKind::ZeroCone, 1});
    add_leq(p, -Mat::Identity(3, 3), Vec::Zero(3));
    ConicSolution s = solve_conic(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(s.point.sum() == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(s.point.minCoeff() >= -1e-7);
}

TEST_CASE("unit ball maximization lands on the sphere") {
    ConicProgram p;
    p.num_vars = 2;
    p.objective = vec2(3.0, 4.0);
    add_ball(p, Vec::Zero(2), 1.0);
    ConicSolution s = solve_conic(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(5.0).epsilon(1e-7));
    CHECK(s.point(0) == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(s.point(1) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("shifted ball support value is offset plus radius term") {
    const Vec c = vec2(2.0, -1.0);
    const Vec d = vec2(1.0, 2.0);
    ConicProgram p;
    p.num_vars = 2;
    p.objective = d;
    add_ball(p, c, 0.5);
    ConicSolution s = solve_conic(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(d.dot(c) + 0.5 * d.norm()).epsilon(1e-7));
}

TEST_CASE("infeasible program is certified") {
    ConicProgram p;
    p.num_vars = 1;
    p.objective = Vec::Ones(1);
    Mat A(2, 1);
    A << -1, 1;  // x >= 0 and x <= -1
    Vec q(2);
    q << 0, -1;
    add_leq(p, A, q);
    CHECK(solve_conic(p).status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded program is certified") {
    ConicProgram p;
    p.num_vars = 1;
    p.objective = Vec::Ones(1);
    add_leq(p, -Mat::Identity(1, 1), Vec::Zero(1));  // only x >= 0
    CHECK(solve_conic(p).status == SolveStatus::Unbounded);
}

TEST_CASE("validate rejects malformed blocks") {
    ConicProgram p;
    p.num_vars = 2;
    p.objective = vec2(1.0, 0.0);
    add_leq(p, Mat::Identity(3, 3), Vec::Zero(3));
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    ConicProgram q;
    q.num_vars = 2;
    q.objective = vec2(1.0, 0.0);
    q.add_block(Mat::Identity(2, 2), Vec::Zero(2), {ConeKind::SecondOrderCone, 3});
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("random polytopes agree with the enumeration and simplex oracles") {
    std::mt19937 rng(20240517);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 3;
        const int extra = 8;
        Mat A(2 * d + extra, d);
        Vec q(2 * d + extra);
        A.topRows(d).setIdentity();
        A.middleRows(d, d) = -Mat::Identity(d, d);
        q.head(2 * d).setOnes();
        Vec interior(d);
        for (int i = 0; i < d; ++i) interior(i) = 0.3 * unit(rng);
        for (int r = 0; r < extra; ++r) {
            for (int i = 0; i < d; ++i) A(2 * d + r, i) = unit(rng);
            q(2 * d + r) = A.row(2 * d + r).dot(interior) + 0.2 + 0.8 * std::abs(unit(rng));
        }
        Vec c(d);
        for (int i = 0; i < d; ++i) c(i) = unit(rng);

        testsupport::LpResult byvertex = testsupport::enumerate_polytope_lp(A, q, c);
        REQUIRE(byvertex.status == testsupport::LpResult::Status::Optimal);

        // same polytope in standard form: x = u - v, slack s
        Mat As(A.rows(), 2 * d + A.rows());
        As << A, -A, Mat::Identity(A.rows(), A.rows());
        Vec cs = Vec::Zero(2 * d + A.rows());
        cs.head(d) = c;
        cs.segment(d, d) = -c;
        testsupport::LpResult bysimplex = testsupport::solve_standard_lp(As, q, cs);
        REQUIRE(bysimplex.status == testsupport::LpResult::Status::Optimal);
        CHECK(bysimplex.value == doctest::Approx(byvertex.value).epsilon(1e-8));

        ConicProgram p;
        p.num_vars = d;
        p.objective = c;
        add_leq(p, A, q);
        ConicSolution s = solve_conic(p);
        REQUIRE(s.status == SolveStatus::Optimal);
        CHECK(s.objective_value == doctest::Approx(byvertex.value).epsilon(1e-6));
        CHECK(max_violation(p, s.point) <= 1e-6);
    }
}

TEST_CASE("ball with a second order cap agrees with the sweep oracle") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Vec center = vec2(unit(rng), unit(rng));
        const double radius = 0.5 + 0.5 * std::abs(unit(rng));
        Mat M(2, 2);
        M << unit(rng), unit(rng), unit(rng), unit(rng);
        const Vec g = vec2(0.3 * unit(rng), 0.3 * unit(rng));
        const double t = (M * center).norm() + g.dot(center) + 0.5 + std::abs(unit(rng));
        const Vec theta = vec2(unit(rng) + 0.1, unit(rng) - 0.1);

        ConicProgram p;
        p.num_vars = 2;
        p.objective = theta;
        add_ball(p, center, radius);
        add_soc_cap(p, M, g, t);
        ConicSolution s = solve_conic(p);
        REQUIRE(s.status == SolveStatus::Optimal);
        CHECK(s.duality_gap <= 1e-6);
        CHECK(max_violation(p, s.point) <= 1e-6);

        testsupport::HullSpec spec;
        spec.disks.push_back({center, radius});
        testsupport::SweepCaps caps;
        Eigen::Matrix2d M2 = M;
        caps.socs.push_back({M2, g, t});
        auto obj = [&](const Eigen::Vector2d& z) { return theta.dot(z); };
        testsupport::SweepResult ref = testsupport::sweep_max(spec, caps, obj);
        REQUIRE(ref.feasible);
        CHECK(s.objective_value == doctest::Approx(ref.value).scale(1.0).epsilon(2e-3));
    }
}

TEST_CASE("solve counter advances once per call") {
    const std::int64_t before = solve_conic_call_count();
    ConicProgram p;
    p.num_vars = 1;
    p.objective = Vec::Ones(1);
    Mat A(2, 1);
    A << 1, -1;
    Vec q(2);
    q << 1, 0;
    add_leq(p, A, q);
    for (int i = 0; i < 3; ++i) solve_conic(p);
    CHECK(solve_conic_call_count() == before + 3);
}

TEST_CASE("purify collapses a spread distribution onto one column") {
    Mat A(1, 3);
    A << 1, 1, 1;
    Vec b(1);
    b << 1.0;
    Vec c(3);
    c << 1.0, 0.0, 0.0;
    Vec w(3);
    w << 1.0 / 3, 1.0 / 3, 1.0 / 3;
    Vec out = purify_to_bfs(A, b, c, w);
    CHECK((A * out - b).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(out.minCoeff() >= -1e-12);
    CHECK(c.dot(out) >= c.dot(w) - 1e-9);
    CHECK((out.array() > 1e-9).count() <= 1);
}

TEST_CASE("purify leaves basic solutions alone") {
    Mat A = Mat::Identity(2, 2);
    Vec w = vec2(0.3, 0.7);
    Vec out = purify_to_bfs(A, A * w, vec2(1.0, -1.0), w);
    CHECK((out - w).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("purify pivots even when the objective is indifferent") {
    Mat A(1, 2);
    A << 1, 1;
    Vec b(1);
    b << 1.0;
    Vec out = purify_to_bfs(A, b, Vec::Zero(2), vec2(0.5, 0.5));
    CHECK((out.array() > 1e-9).count() == 1);
    CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("purify rejects infeasible starting points") {
    Mat A(1, 2);
    A << 1, 1;
    Vec b(1);
    b << 1.0;
    CHECK_THROWS_AS(purify_to_bfs(A, b, Vec::Zero(2), vec2(0.9, 0.9)), std::invalid_argument);
    CHECK_THROWS_AS(purify_to_bfs(A, b, Vec::Zero(2), vec2(1.5, -0.5)), std::invalid_argument);
}

TEST_CASE("purify random property: feasible, no worse, independent support") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        // a row of ones keeps total mass fixed, so no improving ray exists
        const int p = 4, q = 10;
        Mat A(p, q);
        A.row(0).setOnes();
        for (int i = 1; i < p; ++i)
            for (int j = 0; j < q; ++j) A(i, j) = unit(rng);
        Vec w(q);
        for (int j = 0; j < q; ++j) w(j) = 0.1 + std::abs(unit(rng));
        Vec b = A * w;
        Vec c(q);
        for (int j = 0; j < q; ++j) c(j) = unit(rng);

        Vec out = purify_to_bfs(A, b, c, w);
        CHECK((A * out - b).cwiseAbs().maxCoeff() <= 1e-7);
        CHECK(out.minCoeff() >= -1e-10);
        CHECK(c.dot(out) >= c.dot(w) - 1e-7);

        std::vector<int> active;
        for (int j = 0; j < q; ++j)
            if (out(j) > 1e-9) active.push_back(j);
        CHECK(active.size() <= static_cast<std::size_t>(p));
        Mat cols(p, active.size());
        for (std::size_t k = 0; k < active.size(); ++k) cols.col(k) = A.col(active[k]);
        Eigen::FullPivLU<Mat> lu(cols);
        lu.setThreshold(1e-8);
        CHECK(lu.rank() == static_cast<int>(active.size()));
    }
}
