#include "cvxbandit/conic_program.hpp"

#include <stdexcept>
#include <vector>

namespace cvxbandit {

namespace {
constexpr double kSupportTol = 1e-11;  // entries at or below count as zero
}

Vec purify_to_bfs(const Mat& A, const Vec& b, const Vec& c, Vec w, double feas_tol) {
    const int p = static_cast<int>(A.rows());
    const int q = static_cast<int>(A.cols());
    if (b.size() != p || c.size() != q || w.size() != q)
        throw std::invalid_argument("purify_to_bfs: dimension mismatch");
    if (w.minCoeff() < -feas_tol)
        throw std::invalid_argument("purify_to_bfs: negative weight beyond tolerance");
    if ((A * w - b).lpNorm<Eigen::Infinity>() > feas_tol * (1 + b.lpNorm<Eigen::Infinity>()))
        throw std::invalid_argument("purify_to_bfs: A w != b beyond tolerance");

    w = w.cwiseMax(0.0);
    for (int j = 0; j < q; ++j)
        if (w(j) <= kSupportTol) w(j) = 0.0;

    for (;;) {
        std::vector<int> support;
        for (int j = 0; j < q; ++j)
            if (w(j) > 0.0) support.push_back(j);
        const int k = static_cast<int>(support.size());
        if (k == 0) break;

        Mat As(p, k);
        for (int j = 0; j < k; ++j) As.col(j) = A.col(support[j]);
        Eigen::FullPivLU<Mat> lu(As);
        lu.setThreshold(1e-9);
        if (lu.rank() == k) break;  // active columns independent: a vertex

        Vec v = lu.kernel().col(0);
        v /= v.lpNorm<Eigen::Infinity>();
        double cv = 0;
        for (int j = 0; j < k; ++j) cv += c(support[j]) * v(j);
        if (cv < 0) { v = -v; cv = -cv; }

        // Blocking ratio along +v; if none, the improving case is an unbounded
        // LP, the neutral case just flips direction.
        auto min_ratio = [&](const Vec& dir, int& drop) {
            double t = -1;
            drop = -1;
            for (int j = 0; j < k; ++j) {
                if (dir(j) < -1e-13) {
                    const double r = -w(support[j]) / dir(j);
                    if (drop < 0 || r < t - 1e-13) { t = r; drop = j; }
                    // ties keep the earlier (smaller) index
                }
            }
            return t;
        };
        int drop;
        double t = min_ratio(v, drop);
        if (drop < 0) {
            if (cv > 1e-12)
                throw std::invalid_argument("purify_to_bfs: unbounded improving direction");
            v = -v;
            t = min_ratio(v, drop);
            if (drop < 0)
                throw std::invalid_argument("purify_to_bfs: degenerate null direction");
        }
        for (int j = 0; j < k; ++j) {
            double nw = w(support[j]) + t * v(j);
            w(support[j]) = nw > kSupportTol ? nw : 0.0;
        }
        w(support[drop]) = 0.0;
    }
    return w;
}

} // namespace cvxbandit
