#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cvxbandit/policy_engine.hpp"
#include "support/grid_oracle.hpp"
#include "support/lp_oracle.hpp"

using namespace cvxbandit;

namespace {

Vec vec1(double a) {
    Vec v(1);
    v << a;
    return v;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// geometry with an identity-scaled Gram matrix, built without touching
// ConfidenceState so the planning layer is tested in isolation
ConfidenceGeometry hand_geometry(const Vec& theta_hat, const Mat& mu_hat, double beta,
                                 double rho, const Vec& tau, double sigma_scale = 1.0) {
    ConfidenceGeometry g;
    g.theta_hat = theta_hat;
    g.mu_hat = mu_hat;
    g.beta = beta;
    g.rho = rho;
    g.tau = tau;
    const int d = static_cast<int>(theta_hat.size());
    g.sigma = sigma_scale * Mat::Identity(d, d);
    g.sigma_inv = (1.0 / sigma_scale) * Mat::Identity(d, d);
    g.sigma_sqrt = std::sqrt(sigma_scale) * Mat::Identity(d, d);
    g.sigma_inv_sqrt = (1.0 / std::sqrt(sigma_scale)) * Mat::Identity(d, d);
    return g;
}

DecisionSet unit_disk() {
    std::vector<ConicPiece> pieces;
    pieces.push_back(ConicPiece::ball(Vec::Zero(2), 1.0));
    return DecisionSet(std::move(pieces), Vec::Zero(2));
}

} // namespace

TEST_CASE("branch names") {
    CHECK(std::string(to_string(StepBranch::L1)) == "l1");
    CHECK(std::string(to_string(StepBranch::UbmExact)) == "ubm_exact");
    CHECK(std::string(to_string(StepBranch::SafeFallback)) == "safe_fallback");
    CHECK(std::string(to_string(StepBranch::Oracle)) == "oracle");
}

TEST_CASE("make_policy filters, renormalizes and averages") {
    std::vector<WeightedPoint> pts;
    pts.push_back({vec2(1.0, 0.0), 2.0});
    pts.push_back({vec2(0.0, 1.0), 6.0});
    pts.push_back({vec2(5.0, 5.0), 0.0});
    pts.push_back({vec2(-5.0, 5.0), -1.0});
    Policy pi = make_policy(std::move(pts));
    REQUIRE(pi.support.size() == 2);
    CHECK(pi.support[0].weight == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pi.support[1].weight == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(pi.mean(0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(pi.mean(1) == doctest::Approx(0.75).epsilon(1e-12));

    CHECK_THROWS_AS(make_policy({}), std::invalid_argument);
    CHECK_THROWS_AS(make_policy({{vec1(1.0), 0.0}}), std::invalid_argument);
}

TEST_CASE("reduce_support shrinks a spread mixture without losing value") {
    std::vector<Vec> points = {vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(0.5, 0.0)};
    Vec w(3);
    w << 0.25, 0.25, 0.5;
    Mat gamma(1, 2);
    gamma << 1.0, 0.0;
    const Vec theta = vec2(1.0, 0.0);
    const double before = 0.25 * 0.0 + 0.25 * 1.0 + 0.5 * 0.5;

    Policy pi = reduce_support(points, w, theta, gamma, vec1(10.0));
    CHECK(pi.support.size() <= 2);
    double wsum = 0.0;
    for (const auto& wp : pi.support) wsum += wp.weight;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(theta.dot(pi.mean) >= before - 1e-9);
    CHECK((gamma * pi.mean)(0) <= 10.0 + 1e-9);

    CHECK_THROWS_AS(reduce_support({}, Vec(), theta, gamma, vec1(1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(reduce_support(points, Vec::Ones(2), theta, gamma, vec1(1.0)),
                    std::invalid_argument);
}

TEST_CASE("reduce_support random property") {
    std::mt19937 rng(606);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 6, d = 3, m = 2;
        std::vector<Vec> points;
        for (int j = 0; j < n; ++j) {
            Vec p(d);
            for (int i = 0; i < d; ++i) p(i) = unit(rng);
            points.push_back(p);
        }
        Vec w(n);
        for (int j = 0; j < n; ++j) w(j) = 0.05 + std::abs(unit(rng));
        w /= w.sum();
        Mat gamma(m, d);
        for (int r = 0; r < m; ++r)
            for (int i = 0; i < d; ++i) gamma(r, i) = unit(rng);
        Vec theta(d);
        for (int i = 0; i < d; ++i) theta(i) = unit(rng);
        Vec mean = Vec::Zero(d);
        for (int j = 0; j < n; ++j) mean += w(j) * points[j];
        // alternate binding and slack thresholds
        Vec tau = gamma * mean;
        if (trial % 2 == 0) tau.array() += 0.1;

        Policy pi = reduce_support(points, w, theta, gamma, tau);
        CHECK(pi.support.size() <= static_cast<std::size_t>(m + 1));
        CHECK(theta.dot(pi.mean) >= theta.dot(mean) - 1e-8);
        CHECK(((gamma * pi.mean) - tau).maxCoeff() <= 1e-8);
        double wsum = 0.0;
        for (const auto& wp : pi.support) wsum += wp.weight;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("omniscient policy on the capped disk") {
    DecisionSet set = unit_disk();
    Mat gamma(1, 2);
    gamma << 1.0, 0.0;
    Policy pi = oracle_policy(vec2(3.0, 4.0), gamma, vec1(0.6), set);
    // unconstrained maximizer (0.6, 0.8) sits exactly on the cost cap; the
    // value is sharp but the argmax is only accurate to sqrt(gap) because
    // the objective is flat to second order along the circle there
    CHECK(vec2(3.0, 4.0).dot(pi.mean) == doctest::Approx(5.0).epsilon(1e-7));
    CHECK((pi.mean - vec2(0.6, 0.8)).norm() <= 1e-3);
    CHECK(pi.support.size() <= 2);
}

TEST_CASE("omniscient policy mixes two points to meet a binding threshold") {
    std::vector<ConicPiece> pieces;
    pieces.push_back(ConicPiece::point(vec2(0.0, 0.0)));
    pieces.push_back(ConicPiece::point(vec2(1.0, 0.0)));
    DecisionSet set(std::move(pieces), vec2(0.0, 0.0));
    Mat gamma(1, 2);
    gamma << 1.0, 0.0;
    Policy pi = oracle_policy(vec2(1.0, 0.0), gamma, vec1(0.5), set);
    CHECK(pi.mean(0) == doctest::Approx(0.5).epsilon(1e-5));
    REQUIRE(pi.support.size() == 2);
    CHECK(std::min(pi.support[0].weight, pi.support[1].weight) ==
          doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("omniscient policy rejects an unsafe safe action") {
    std::vector<ConicPiece> pieces;
    pieces.push_back(ConicPiece::box(vec2(1.0, 1.0), vec2(2.0, 2.0)));
    DecisionSet set(std::move(pieces), vec2(1.0, 1.0));
    Mat gamma(1, 2);
    gamma << 1.0, 1.0;  // cost at the safe corner is 2
    CHECK_THROWS_AS(oracle_policy(vec2(1.0, 0.0), gamma, vec1(0.5), set),
                    std::invalid_argument);
}

TEST_CASE("omniscient policy matches the distribution simplex oracle on point sets") {
    std::mt19937 rng(1212);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 5, d = 3, m = 2;
        std::vector<Vec> pts;
        std::vector<ConicPiece> pieces;
        for (int j = 0; j < n; ++j) {
            Vec p(d);
            for (int i = 0; i < d; ++i) p(i) = unit(rng);
            pts.push_back(p);
            pieces.push_back(ConicPiece::point(p));
        }
        Mat gamma(m, d);
        for (int r = 0; r < m; ++r)
            for (int i = 0; i < d; ++i) gamma(r, i) = unit(rng);
        Vec theta(d);
        for (int i = 0; i < d; ++i) theta(i) = unit(rng);
        const Vec tau = gamma * pts[0] + Vec::Constant(m, 0.2);
        DecisionSet set(std::move(pieces), pts[0]);

        testsupport::LpResult ref = testsupport::solve_distribution_lp(pts, theta, gamma, tau);
        REQUIRE(ref.status == testsupport::LpResult::Status::Optimal);

        Policy pi = oracle_policy(theta, gamma, tau, set);
        CHECK(theta.dot(pi.mean) == doctest::Approx(ref.value).scale(1.0).epsilon(1e-5));
        CHECK(pi.support.size() <= static_cast<std::size_t>(m + 1));
        CHECK(((gamma * pi.mean) - tau).maxCoeff() <= 1e-6);
    }
}

TEST_CASE("omniscient policy value matches the sweep oracle on a disk box union") {
    std::vector<ConicPiece> pieces;
    pieces.push_back(ConicPiece::ball(Vec::Zero(2), 1.0));
    pieces.push_back(ConicPiece::box(vec2(1.0, 0.0), vec2(2.0, 1.0)));
    DecisionSet set(std::move(pieces), Vec::Zero(2));
    testsupport::HullSpec spec;
    spec.disks.push_back({{0.0, 0.0}, 1.0});
    spec.boxes.push_back({{1.0, 0.0}, {2.0, 1.0}});

    std::mt19937 rng(77);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        Vec g = vec2(unit(rng), unit(rng));
        const double tau = 0.3 + std::abs(unit(rng));
        Vec theta = vec2(unit(rng) + 0.2, unit(rng));
        if (theta.norm() < 0.2) theta = vec2(1.0, 0.5);
        Mat gamma(1, 2);
        gamma << g(0), g(1);

        Policy pi = oracle_policy(theta, gamma, vec1(tau), set);

        testsupport::SweepCaps caps;
        caps.linear.push_back({g, tau});
        auto obj = [&](const Eigen::Vector2d& z) { return theta.dot(z); };
        testsupport::SweepResult ref = testsupport::sweep_max(spec, caps, obj);
        REQUIRE(ref.feasible);
        CHECK(theta.dot(pi.mean) == doctest::Approx(ref.value).scale(1.0).epsilon(2e-3));
    }
}

TEST_CASE("candidate evaluation with an identity Gram matrix") {
    DecisionSet set = unit_disk();

    SUBCASE("slack cap leaves the disk optimum alone") {
        ConfidenceGeometry g =
            hand_geometry(Vec::Zero(2), Mat::Zero(1, 2), 0.25, 2.0, vec1(0.5));
        const std::int64_t before = solve_conic_call_count();
        CandidateValue cand = evaluate_candidate(vec2(3.0, 4.0), g, set);
        CHECK(solve_conic_call_count() == before + 1);
        REQUIRE(cand.status == SolveStatus::Optimal);
        CHECK(cand.value == doctest::Approx(5.0).epsilon(1e-6));
        CHECK((cand.z - vec2(0.6, 0.8)).norm() <= 1e-5);
        REQUIRE(!cand.mixture.empty());
    }

    SUBCASE("binding norm cap shrinks the reach") {
        // beta 0.5 and tau 0.4 cap ||z|| at 0.8
        ConfidenceGeometry g =
            hand_geometry(Vec::Zero(2), Mat::Zero(1, 2), 0.5, 2.0, vec1(0.4));
        CandidateValue cand = evaluate_candidate(vec2(3.0, 4.0), g, set);
        REQUIRE(cand.status == SolveStatus::Optimal);
        CHECK(cand.value == doctest::Approx(4.0).epsilon(1e-6));
        CHECK(cand.z.norm() == doctest::Approx(0.8).epsilon(1e-5));
    }

    SUBCASE("cap can exclude the whole set") {
        std::vector<ConicPiece> pieces;
        pieces.push_back(ConicPiece::box(vec2(1.0, 1.0), vec2(2.0, 2.0)));
        DecisionSet far(std::move(pieces), vec2(1.0, 1.0));
        ConfidenceGeometry g =
            hand_geometry(Vec::Zero(2), Mat::Zero(1, 2), 10.0, 2.0, vec1(0.5));
        CandidateValue cand = evaluate_candidate(vec2(1.0, 0.0), g, far);
        CHECK(cand.status == SolveStatus::Infeasible);
    }
}

TEST_CASE("planning step evaluates each box vertex once and keeps the first tie") {
    DecisionSet set = unit_disk();
    // fresh symmetric geometry: all four vertex values tie at the box reach
    ConfidenceGeometry g = hand_geometry(Vec::Zero(2), Mat::Zero(1, 2), 0.25, 3.0, vec1(1.0));

    const std::int64_t before = solve_conic_call_count();
    StepOutcome out = l1_oplb_step(g, set);
    CHECK(solve_conic_call_count() == before + 4);

    CHECK(out.branch == StepBranch::L1);
    const double reach = 3.0 * std::sqrt(2.0) * 0.25;
    CHECK(out.objective_value == doctest::Approx(reach).epsilon(1e-6));
    // ties resolve to the first vertex, which points along +e0
    CHECK((out.z_star - vec2(1.0, 0.0)).norm() <= 1e-5);
    CHECK((out.policy.mean - out.z_star).norm() <= 1e-6);
}

TEST_CASE("planning step falls back to the safe action when nothing is feasible") {
    std::vector<ConicPiece> pieces;
    pieces.push_back(ConicPiece::box(vec2(1.0, 1.0), vec2(2.0, 2.0)));
    DecisionSet set(std::move(pieces), vec2(1.0, 1.0));
    ConfidenceGeometry g = hand_geometry(Vec::Zero(2), Mat::Zero(1, 2), 10.0, 3.0, vec1(0.5));

    StepOutcome out = l1_oplb_step(g, set);
    CHECK(out.branch == StepBranch::SafeFallback);
    REQUIRE(out.policy.support.size() == 1);
    CHECK((out.policy.support[0].point - vec2(1.0, 1.0)).norm() <= 1e-12);
    CHECK((out.z_star - vec2(1.0, 1.0)).norm() <= 1e-12);
}

TEST_CASE("planning step value matches a barycentric brute force on three points") {
    std::vector<Vec> pts = {vec2(0.0, 0.0), vec2(1.0, 0.2), vec2(0.3, 1.0)};
    std::vector<ConicPiece> pieces;
    for (const Vec& p : pts) pieces.push_back(ConicPiece::point(p));
    DecisionSet set(std::move(pieces), pts[0]);

    Mat mu(1, 2);
    mu << 0.2, 0.1;
    ConfidenceGeometry g = hand_geometry(vec2(0.5, 0.3), mu, 0.15, 1.0 + 2.0 / 0.3, vec1(0.3));

    StepOutcome out = l1_oplb_step(g, set);
    REQUIRE(out.branch == StepBranch::L1);

    double brute = -1e300;
    const auto verts = l1_vertices(g);
    const int steps = 1000;
    for (const Vec& theta_c : verts) {
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; j <= steps - i; ++j) {
                const double a = static_cast<double>(i) / steps;
                const double b = static_cast<double>(j) / steps;
                const Vec z = a * pts[0] + b * pts[1] + (1.0 - a - b) * pts[2];
                if (mu.row(0).dot(z) + 0.15 * z.norm() > 0.3) continue;
                brute = std::max(brute, theta_c.dot(z));
            }
        }
    }
    CHECK(out.objective_value >= brute - 1e-6);
    CHECK(out.objective_value <= brute + 5e-3);
}

TEST_CASE("planning step dominates sampled ellipsoid candidates") {
    DecisionSet set = unit_disk();
    Mat mu(1, 2);
    mu << 0.3, -0.1;
    ConfidenceGeometry g = hand_geometry(vec2(0.8, 0.4), mu, 0.3, 4.0, vec1(0.6), 2.0);

    StepOutcome out = l1_oplb_step(g, set);
    REQUIRE(out.branch == StepBranch::L1);

    std::mt19937 rng(24);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec u(2);
        u << gauss(rng), gauss(rng);
        u *= g.rho * g.beta / u.norm();
        const Vec theta_c = g.theta_hat + g.sigma_inv_sqrt * u;
        CandidateValue cand = evaluate_candidate(theta_c, g, set);
        REQUIRE(cand.status == SolveStatus::Optimal);
        CHECK(cand.value <= out.objective_value + 1e-6);
    }
}

TEST_CASE("growing only the optimism radius cannot shrink the step value") {
    DecisionSet set = unit_disk();
    Mat mu(1, 2);
    mu << 0.25, 0.05;
    ConfidenceGeometry g = hand_geometry(vec2(0.6, -0.2), mu, 0.2, 5.0, vec1(0.5));

    StepOutcome base = l1_oplb_step(g, set);
    REQUIRE(base.branch == StepBranch::L1);

    // vertices of a twice-as-wide candidate box, evaluated under the
    // original pessimistic caps
    const double radius = 2.0 * g.rho * std::sqrt(2.0) * g.beta;
    double best = -1e300;
    for (int j = 0; j < 2; ++j) {
        for (double sign : {1.0, -1.0}) {
            const Vec v = g.theta_hat + sign * radius * g.sigma_inv_sqrt.col(j);
            CandidateValue cand = evaluate_candidate(v, g, set);
            REQUIRE(cand.status == SolveStatus::Optimal);
            best = std::max(best, cand.value);
        }
    }
    CHECK(best >= base.objective_value - 1e-9);
}

TEST_CASE("step policies respect their own pessimistic caps") {
    std::vector<ConicPiece> pieces;
    pieces.push_back(ConicPiece::ball(vec2(0.5, 0.0), 0.8));
    pieces.push_back(ConicPiece::box(vec2(-1.0, -1.0), vec2(0.0, 0.0)));
    DecisionSet set(std::move(pieces), vec2(0.0, 0.0));

    std::mt19937 rng(1777);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        Mat mu(1, 2);
        mu << 0.4 * unit(rng), 0.4 * unit(rng);
        ConfidenceGeometry g = hand_geometry(vec2(unit(rng), unit(rng)), mu,
                                             0.1 + 0.2 * std::abs(unit(rng)), 5.0, vec1(0.5));
        StepOutcome out = l1_oplb_step(g, set);
        if (out.branch != StepBranch::L1) continue;
        CHECK(pessimistic_cost_bound(g, out.policy.mean, 0) <= 0.5 + 1e-5);
        CHECK(set.contains(out.z_star, 1e-5));
    }
}

TEST_CASE("surrogate step on a frozen one dimensional instance") {
    std::vector<ConicPiece> pieces;
    pieces.push_back(ConicPiece::box(vec1(-3.0), vec1(3.0)));
    DecisionSet set(std::move(pieces), vec1(0.0));
    const double tol = default_activity_tol(vec1(0.4));

    SUBCASE("binding cap takes the exact branch") {
        Mat mu(1, 1);
        mu << 0.175;
        ConfidenceGeometry g = hand_geometry(vec1(1.25), mu, 0.125, 6.0, vec1(0.4));
        StepOutcome out = ubm_step(g, set, tol);
        CHECK(out.branch == StepBranch::UbmExact);
        CHECK(out.z_star(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
        CHECK(out.objective_value == doctest::Approx(8.0 / 3.0).epsilon(1e-5));
        CHECK((out.policy.mean - out.z_star).norm() <= 1e-6);
    }

    SUBCASE("inactive cap falls back to the vertex step") {
        Mat mu(1, 1);
        mu << 0.275;
        ConfidenceGeometry g = hand_geometry(vec1(1.25), mu, 0.125, 6.0, vec1(0.4));
        StepOutcome out = ubm_step(g, set, tol);
        CHECK(out.branch == StepBranch::L1);
        CHECK(out.z_star(0) == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(out.objective_value == doctest::Approx(2.0).epsilon(1e-5));
    }

    SUBCASE("infeasible cap falls back to the safe action") {
        std::vector<ConicPiece> far;
        far.push_back(ConicPiece::box(vec1(2.0), vec1(3.0)));
        DecisionSet far_set(std::move(far), vec1(2.0));
        Mat mu(1, 1);
        mu << 0.0;
        ConfidenceGeometry g = hand_geometry(vec1(1.0), mu, 1.0, 6.0, vec1(0.5));
        StepOutcome out = ubm_step(g, far_set, default_activity_tol(vec1(0.5)));
        CHECK(out.branch == StepBranch::SafeFallback);
        CHECK(out.z_star(0) == doctest::Approx(2.0));
    }

    SUBCASE("multiple cost rows are rejected") {
        ConfidenceGeometry g = hand_geometry(vec1(1.0), Mat::Zero(2, 1), 0.1, 2.0,
                                             Vec::Constant(2, 0.5));
        CHECK_THROWS_AS(ubm_step(g, set, 1e-6), std::invalid_argument);
    }
}

TEST_CASE("surrogate step exact branch matches the sweep oracle in the plane") {
    DecisionSet set = unit_disk();
    Mat mu(1, 2);
    mu << 0.5, 0.1;
    // surrogate direction is parallel to the cost row, so the cap binds
    ConfidenceGeometry g = hand_geometry(vec2(2.9, 0.58), mu, 0.3, 5.0, vec1(0.5));

    StepOutcome out = ubm_step(g, set, default_activity_tol(vec1(0.5)));
    REQUIRE(out.branch == StepBranch::UbmExact);

    testsupport::HullSpec spec;
    spec.disks.push_back({{0.0, 0.0}, 1.0});
    testsupport::SweepCaps caps;
    Eigen::Matrix2d M = 0.3 * Eigen::Matrix2d::Identity();
    caps.socs.push_back({M, vec2(0.5, 0.1), 0.5});
    auto obj = [&](const Eigen::Vector2d& z) {
        return g.theta_hat.dot(z) + g.rho * 0.3 * z.norm();
    };
    testsupport::SweepResult ref = testsupport::sweep_max(spec, caps, obj);
    REQUIRE(ref.feasible);
    CHECK(out.objective_value == doctest::Approx(ref.value).scale(1.0).epsilon(2e-3));
    CHECK(pessimistic_cost_bound(g, out.z_star, 0) ==
          doctest::Approx(0.5).scale(1.0).epsilon(1e-5));
}

TEST_CASE("activity tolerance scales with the tightest threshold") {
    CHECK(default_activity_tol(vec1(0.4)) == doctest::Approx(1.4e-6).epsilon(1e-12));
    Vec tau(2);
    tau << -2.0, 3.0;
    CHECK(default_activity_tol(tau) == doctest::Approx(3e-6).epsilon(1e-12));
}
