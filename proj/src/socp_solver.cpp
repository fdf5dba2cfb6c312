// Embedded conic solver: primal-dual interior-point method on the homogeneous
// self-dual embedding, Nesterov-Todd scaling, Mehrotra predictor-corrector.
// Dense linear algebra throughout; the target problems have a few dozen
// variables at most.
//
// Internally the program
//     maximize  obj.x   s.t.  A_i x + b_i in K_i
// is rewritten in the standard form
//     minimize  c.x     s.t.  Aeq x = beq,   G x + s = h,  s in K
// with c = -obj, zero-cone blocks folded into (Aeq, beq) and the remaining
// blocks stacked as G = -A, h = b (orthant rows first, then SOC blocks).

#include "cvxbandit/conic_program.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvxbandit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStaticReg = 1e-10;   // static regularization of the KKT matrix
constexpr double kStepScale = 0.98;    // fraction-to-boundary

std::atomic<std::int64_t> g_solve_calls{0};

struct StandardForm {
    int n = 0;                 // variables
    Mat Aeq; Vec beq;          // p equality rows
    Mat G; Vec h;              // m cone rows, s = h - Gx in K
    int num_orthant = 0;       // leading orthant rows of s
    std::vector<int> soc_dims; // trailing SOC block sizes
    Vec c;                     // minimization objective
};

StandardForm to_standard_form(const ConicProgram& prog) {
    StandardForm sf;
    sf.n = prog.num_vars;
    sf.c = -prog.objective;

    int p = 0, l = 0, q = 0;
    for (const auto& blk : prog.constraints) {
        switch (blk.cone.kind) {
        case ConeKind::ZeroCone: p += blk.cone.dim; break;
        case ConeKind::NonnegativeOrthant: l += blk.cone.dim; break;
        case ConeKind::SecondOrderCone: q += blk.cone.dim; break;
        }
    }
    sf.Aeq.setZero(p, sf.n); sf.beq.setZero(p);
    sf.G.setZero(l + q, sf.n); sf.h.setZero(l + q);
    sf.num_orthant = l;

    int ip = 0, il = 0, iq = l;
    for (const auto& blk : prog.constraints) {
        const int dim = blk.cone.dim;
        switch (blk.cone.kind) {
        case ConeKind::ZeroCone:
            // A x + b = 0  ->  Aeq x = -b
            sf.Aeq.middleRows(ip, dim) = blk.A;
            sf.beq.segment(ip, dim) = -blk.b;
            ip += dim;
            break;
        case ConeKind::NonnegativeOrthant:
            sf.G.middleRows(il, dim) = -blk.A;
            sf.h.segment(il, dim) = blk.b;
            il += dim;
            break;
        case ConeKind::SecondOrderCone:
            sf.G.middleRows(iq, dim) = -blk.A;
            sf.h.segment(iq, dim) = blk.b;
            sf.soc_dims.push_back(dim);
            iq += dim;
            break;
        }
    }
    return sf;
}

// Per-cone NT scaling state. For the orthant part everything is diagonal; for
// each SOC block the dense symmetric scaling matrix and its inverse are formed
// explicitly (blocks are small).
struct Scaling {
    Vec orth_w2;                  // s_i / z_i
    Vec orth_lambda;              // sqrt(s_i z_i)
    std::vector<Mat> soc_W;       // eta * Wbar
    std::vector<Mat> soc_Winv;
    std::vector<Mat> soc_W2;      // W * W
    std::vector<Vec> soc_lambda;  // W z
    bool ok = false;
};

// u o v in the SOC Jordan algebra.
Vec jordan_mul(const Vec& u, const Vec& v) {
    Vec r(u.size());
    r(0) = u.dot(v);
    r.tail(u.size() - 1) = u(0) * v.tail(v.size() - 1) + v(0) * u.tail(u.size() - 1);
    return r;
}

// Solves lambda o u = d.
Vec jordan_solve(const Vec& lam, const Vec& d) {
    const int q = static_cast<int>(lam.size());
    const double det = lam(0) * lam(0) - lam.tail(q - 1).squaredNorm();
    Vec u(q);
    u(0) = (lam(0) * d(0) - lam.tail(q - 1).dot(d.tail(q - 1))) / det;
    u.tail(q - 1) = (d.tail(q - 1) - u(0) * lam.tail(q - 1)) / lam(0);
    return u;
}

bool compute_scaling(const StandardForm& sf, const Vec& s, const Vec& z, Scaling& sc) {
    const int l = sf.num_orthant;
    sc.orth_w2.resize(l);
    sc.orth_lambda.resize(l);
    for (int i = 0; i < l; ++i) {
        if (s(i) <= 0 || z(i) <= 0) return false;
        sc.orth_w2(i) = s(i) / z(i);
        sc.orth_lambda(i) = std::sqrt(s(i) * z(i));
    }
    sc.soc_W.clear(); sc.soc_Winv.clear(); sc.soc_W2.clear(); sc.soc_lambda.clear();
    int off = l;
    for (int q : sf.soc_dims) {
        const Vec sb = s.segment(off, q), zb = z.segment(off, q);
        const double sres = sb(0) * sb(0) - sb.tail(q - 1).squaredNorm();
        const double zres = zb(0) * zb(0) - zb.tail(q - 1).squaredNorm();
        if (sres <= 0 || zres <= 0 || sb(0) <= 0 || zb(0) <= 0) return false;
        const double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
        const Vec sn = sb / snorm, zn = zb / znorm;
        const double gamma = std::sqrt((1.0 + sn.dot(zn)) / 2.0);
        // wbar = (sn + J zn) / (2 gamma), J = diag(1, -I); unit hyperbolic norm.
        Vec wbar(q);
        wbar(0) = (sn(0) + zn(0)) / (2 * gamma);
        wbar.tail(q - 1) = (sn.tail(q - 1) - zn.tail(q - 1)) / (2 * gamma);
        const double eta = std::sqrt(snorm / znorm);

        const Vec w1 = wbar.tail(q - 1);
        Mat Wb(q, q), Wbi(q, q);
        Wb(0, 0) = wbar(0);
        Wb.block(0, 1, 1, q - 1) = w1.transpose();
        Wb.block(1, 0, q - 1, 1) = w1;
        Wb.block(1, 1, q - 1, q - 1) =
            Mat::Identity(q - 1, q - 1) + w1 * w1.transpose() / (1.0 + wbar(0));
        Wbi = Wb;
        Wbi.block(0, 1, 1, q - 1) = -w1.transpose();
        Wbi.block(1, 0, q - 1, 1) = -w1;

        Mat W = eta * Wb;
        sc.soc_Winv.push_back(Wbi / eta);
        sc.soc_W2.push_back(W * W);
        sc.soc_lambda.push_back(W * zb);
        sc.soc_W.push_back(std::move(W));
        off += q;
    }
    sc.ok = true;
    return true;
}

// lambda \ d, blockwise.
Vec scaled_solve(const StandardForm& sf, const Scaling& sc, const Vec& d) {
    Vec r(d.size());
    const int l = sf.num_orthant;
    for (int i = 0; i < l; ++i) r(i) = d(i) / sc.orth_lambda(i);
    int off = l;
    for (size_t k = 0; k < sf.soc_dims.size(); ++k) {
        const int q = sf.soc_dims[k];
        r.segment(off, q) = jordan_solve(sc.soc_lambda[k], d.segment(off, q));
        off += q;
    }
    return r;
}

// W v (W symmetric, so this also serves as W^T v).
Vec apply_W(const StandardForm& sf, const Scaling& sc, const Vec& v) {
    Vec r(v.size());
    const int l = sf.num_orthant;
    for (int i = 0; i < l; ++i) r(i) = std::sqrt(sc.orth_w2(i)) * v(i);
    int off = l;
    for (size_t k = 0; k < sf.soc_dims.size(); ++k) {
        const int q = sf.soc_dims[k];
        r.segment(off, q) = sc.soc_W[k] * v.segment(off, q);
        off += q;
    }
    return r;
}

Vec apply_Winv(const StandardForm& sf, const Scaling& sc, const Vec& v) {
    Vec r(v.size());
    const int l = sf.num_orthant;
    for (int i = 0; i < l; ++i) r(i) = v(i) / std::sqrt(sc.orth_w2(i));
    int off = l;
    for (size_t k = 0; k < sf.soc_dims.size(); ++k) {
        const int q = sf.soc_dims[k];
        r.segment(off, q) = sc.soc_Winv[k] * v.segment(off, q);
        off += q;
    }
    return r;
}

// Jordan product of two already-scaled vectors, blockwise.
Vec cone_product(const StandardForm& sf, const Vec& u, const Vec& v) {
    Vec r(u.size());
    const int l = sf.num_orthant;
    for (int i = 0; i < l; ++i) r(i) = u(i) * v(i);
    int off = l;
    for (int q : sf.soc_dims) {
        r.segment(off, q) = jordan_mul(u.segment(off, q), v.segment(off, q));
        off += q;
    }
    return r;
}

// sigma*mu*e - lam o lam - corr, where e is the cone identity.
Vec centering_rhs(const StandardForm& sf, const Scaling& sc, double sigma_mu,
                  const Vec* corr) {
    const int l = sf.num_orthant;
    const int m = static_cast<int>(sf.G.rows());
    Vec d(m);
    for (int i = 0; i < l; ++i)
        d(i) = sigma_mu - sc.orth_lambda(i) * sc.orth_lambda(i);
    int off = l;
    for (size_t k = 0; k < sf.soc_dims.size(); ++k) {
        const int q = sf.soc_dims[k];
        Vec blk = -jordan_mul(sc.soc_lambda[k], sc.soc_lambda[k]);
        blk(0) += sigma_mu;
        d.segment(off, q) = blk;
        off += q;
    }
    if (corr) d -= *corr;
    return d;
}

// Largest step alpha with v + alpha*dv staying in the cone (inf if unbounded).
double step_to_boundary(const StandardForm& sf, const Vec& v, const Vec& dv) {
    double alpha = kInf;
    const int l = sf.num_orthant;
    for (int i = 0; i < l; ++i)
        if (dv(i) < 0) alpha = std::min(alpha, -v(i) / dv(i));
    int off = l;
    for (int q : sf.soc_dims) {
        const Vec vb = v.segment(off, q), db = dv.segment(off, q);
        // First positive root of det(v + t d) = a t^2 + b t + c, c > 0 interior.
        const double a = db(0) * db(0) - db.tail(q - 1).squaredNorm();
        const double b = 2.0 * (vb(0) * db(0) - vb.tail(q - 1).dot(db.tail(q - 1)));
        const double c = vb(0) * vb(0) - vb.tail(q - 1).squaredNorm();
        // v0 can only hit zero after det does, so the first positive det root
        // is the boundary crossing.
        double root = kInf;
        if (std::abs(a) < 1e-14) {
            if (b < 0) root = -c / b;
        } else {
            const double disc = b * b - 4 * a * c;
            if (disc >= 0) {
                const double sq = std::sqrt(disc);
                const double qq = -0.5 * (b + (b >= 0 ? sq : -sq));
                for (double t : {qq / a, (qq != 0 ? c / qq : kInf)})
                    if (t > 0 && t < root) root = t;
            }
        }
        alpha = std::min(alpha, root);
        off += q;
    }
    return alpha;
}

// Shifts v into the cone interior along the identity element when needed.
void bring_to_cone(const StandardForm& sf, Vec& v) {
    double margin = kInf;
    const int l = sf.num_orthant;
    for (int i = 0; i < l; ++i) margin = std::min(margin, v(i));
    int off = l;
    for (int q : sf.soc_dims) {
        margin = std::min(margin, v(off) - v.segment(off + 1, q - 1).norm());
        off += q;
    }
    if (!(margin > 0)) {
        const double shift = 1.0 - margin;
        for (int i = 0; i < l; ++i) v(i) += shift;
        off = l;
        for (int q : sf.soc_dims) {
            v(off) += shift;
            off += q;
        }
    }
}

struct KktSolver {
    int n, p, m;
    Mat K;
    Eigen::PartialPivLU<Mat> lu;

    void factor(const StandardForm& sf, const Scaling& sc) {
        n = sf.n; p = static_cast<int>(sf.Aeq.rows()); m = static_cast<int>(sf.G.rows());
        const int N = n + p + m;
        K.setZero(N, N);
        K.block(0, n, n, p) = sf.Aeq.transpose();
        K.block(0, n + p, n, m) = sf.G.transpose();
        K.block(n, 0, p, n) = sf.Aeq;
        K.block(n + p, 0, m, n) = sf.G;
        for (int i = 0; i < sf.num_orthant; ++i)
            K(n + p + i, n + p + i) = -sc.orth_w2(i);
        int off = sf.num_orthant;
        for (size_t k = 0; k < sf.soc_dims.size(); ++k) {
            const int q = sf.soc_dims[k];
            K.block(n + p + off, n + p + off, q, q) = -sc.soc_W2[k];
            off += q;
        }
        for (int i = 0; i < n; ++i) K(i, i) += kStaticReg;
        for (int i = n; i < N; ++i) K(i, i) -= kStaticReg;
        lu.compute(K);
    }

    // One step of iterative refinement; the static regularization perturbs K
    // by 1e-10 so a single correction restores full accuracy.
    Vec solve(const Vec& rhs) const {
        Vec x = lu.solve(rhs);
        x += lu.solve(rhs - K * x);
        return x;
    }
};

ConicSolution solve_standard(const StandardForm& sf, const SolverTolerances& tol,
                             const Vec& objective) {
    const int n = sf.n;
    const int p = static_cast<int>(sf.Aeq.rows());
    const int m = static_cast<int>(sf.G.rows());
    ConicSolution out;

    if (m == 0) {
        // Equality-only program: optimize over the affine set directly.
        Eigen::FullPivLU<Mat> lu(sf.Aeq);
        lu.setThreshold(1e-10);
        if (p > 0 && (sf.Aeq * lu.solve(sf.beq) - sf.beq).norm() > tol.feas * (1 + sf.beq.norm())) {
            out.status = SolveStatus::Infeasible;
            return out;
        }
        const Vec x0 = p > 0 ? Vec(lu.solve(sf.beq)) : Vec(Vec::Zero(n));
        const Mat null = p > 0 ? Mat(lu.kernel()) : Mat(Mat::Identity(n, n));
        if (null.cols() > 0 && (null.transpose() * sf.c).norm() > 1e-9) {
            out.status = SolveStatus::Unbounded;
            return out;
        }
        out.status = SolveStatus::Optimal;
        out.point = x0;
        out.objective_value = objective.dot(x0);
        out.duality_gap = 0;
        return out;
    }

    const double cnorm = sf.c.norm(), bnorm = sf.beq.norm(), hnorm = sf.h.norm();
    const int nu = sf.num_orthant + static_cast<int>(sf.soc_dims.size()) + 1;

    // Iterates.
    Vec x = Vec::Zero(n), y = Vec::Zero(p), z(m), s(m);
    double tau = 1.0, kappa = 1.0;

    Scaling sc;
    KktSolver kkt;

    double best_merit = kInf, best_gap = 0;
    Vec best_x;
    int best_iter = 0;

    // Initial point from two least-squares-style KKT solves with W = I,
    // shifted into the cone interior.
    {
        Scaling id;
        id.orth_w2 = Vec::Ones(sf.num_orthant);
        id.orth_lambda = Vec::Ones(sf.num_orthant);
        for (int q : sf.soc_dims) {
            id.soc_W.push_back(Mat::Identity(q, q));
            id.soc_Winv.push_back(Mat::Identity(q, q));
            id.soc_W2.push_back(Mat::Identity(q, q));
            Vec e = Vec::Zero(q); e(0) = 1;
            id.soc_lambda.push_back(e);
        }
        id.ok = true;
        kkt.factor(sf, id);
        Vec rhs = Vec::Zero(n + p + m);
        rhs.segment(n, p) = sf.beq;
        rhs.segment(n + p, m) = sf.h;
        Vec sol = kkt.solve(rhs);
        x = sol.head(n);
        s = -sol.segment(n + p, m);
        bring_to_cone(sf, s);

        rhs.setZero();
        rhs.head(n) = -sf.c;
        sol = kkt.solve(rhs);
        y = sol.segment(n, p);
        z = sol.segment(n + p, m);
        bring_to_cone(sf, z);
    }

    for (int iter = 0; iter < tol.max_iters; ++iter) {
        // Homogeneous residuals.
        const Vec hrx = sf.Aeq.transpose() * y + sf.G.transpose() * z + sf.c * tau;
        const Vec hry = sf.Aeq * x - sf.beq * tau;
        const Vec hrz = s + sf.G * x - sf.h * tau;
        const double cx = sf.c.dot(x), by = sf.beq.dot(y), hz = sf.h.dot(z);
        const double hrt = kappa + cx + by + hz;

        if (!std::isfinite(hrt) || !std::isfinite(hrx.sum())) break;

        // Convergence at the de-homogenized point.
        const double pres = std::max(hry.norm() / (1 + bnorm), hrz.norm() / (1 + hnorm)) / tau;
        const double dres = hrx.norm() / (1 + cnorm) / tau;
        const double gap = s.dot(z) / (tau * tau);
        const double pcost = cx / tau, dcost = -(by + hz) / tau;
        const double relgap = gap / std::max({1.0, std::abs(pcost), std::abs(dcost)});
        if (pres <= tol.feas && dres <= tol.feas && relgap <= tol.gap) {
            out.status = SolveStatus::Optimal;
            out.point = x / tau;
            out.objective_value = objective.dot(out.point);
            out.duality_gap = gap;
            out.iterations = iter;
            return out;
        }
        // Track the most converged iterate in case the iteration stalls later.
        const double merit =
            std::max({pres / tol.feas, dres / tol.feas, relgap / tol.gap});
        if (std::isfinite(merit) && merit < best_merit) {
            best_merit = merit;
            best_x = x / tau;
            best_gap = gap;
            best_iter = iter;
        }
        // Infeasibility certificates.
        const double neg_byhz = -(by + hz);
        if (neg_byhz > 1e-12 &&
            (sf.Aeq.transpose() * y + sf.G.transpose() * z).norm() <=
                tol.feas * (1 + cnorm) * neg_byhz) {
            out.status = SolveStatus::Infeasible;
            out.iterations = iter;
            return out;
        }
        const double neg_cx = -cx;
        if (neg_cx > 1e-12) {
            const double r = std::max((sf.Aeq * x).norm(), (sf.G * x + s).norm());
            if (r <= tol.feas * (1 + std::max(bnorm, hnorm)) * neg_cx) {
                out.status = SolveStatus::Unbounded;
                out.iterations = iter;
                return out;
            }
        }

        if (!compute_scaling(sf, s, z, sc)) break;
        kkt.factor(sf, sc);

        // Direction for the tau column.
        Vec rhs1(n + p + m);
        rhs1.head(n) = -sf.c;
        rhs1.segment(n, p) = sf.beq;
        rhs1.segment(n + p, m) = sf.h;
        const Vec u1 = kkt.solve(rhs1);
        const double dot1 = sf.c.dot(u1.head(n)) + sf.beq.dot(u1.segment(n, p)) +
                            sf.h.dot(u1.segment(n + p, m));

        const double mu = (s.dot(z) + tau * kappa) / nu;

        auto direction = [&](double eta, const Vec& ds_rhs, double dk_rhs,
                             Vec& dx, Vec& dy, Vec& dz, Vec& ds, double& dtau,
                             double& dkappa) {
            Vec rhs2(n + p + m);
            rhs2.head(n) = -eta * hrx;
            rhs2.segment(n, p) = -eta * hry;
            rhs2.segment(n + p, m) =
                -eta * hrz - apply_W(sf, sc, scaled_solve(sf, sc, ds_rhs));
            const Vec u2 = kkt.solve(rhs2);
            const double dot2 = sf.c.dot(u2.head(n)) + sf.beq.dot(u2.segment(n, p)) +
                                sf.h.dot(u2.segment(n + p, m));
            dtau = (eta * hrt + dk_rhs / tau + dot2) / (kappa / tau - dot1);
            dx = u2.head(n) + dtau * u1.head(n);
            dy = u2.segment(n, p) + dtau * u1.segment(n, p);
            dz = u2.segment(n + p, m) + dtau * u1.segment(n + p, m);
            ds = apply_W(sf, sc, scaled_solve(sf, sc, ds_rhs)) -
                 apply_W(sf, sc, apply_W(sf, sc, dz));
            dkappa = (dk_rhs - kappa * dtau) / tau;
        };

        // Predictor.
        Vec dxa, dya, dza, dsa;
        double dtaua, dkappaa;
        {
            const Vec ds_rhs = centering_rhs(sf, sc, 0.0, nullptr);
            direction(1.0, ds_rhs, -tau * kappa, dxa, dya, dza, dsa, dtaua, dkappaa);
        }
        double alpha = std::min(step_to_boundary(sf, s, dsa), step_to_boundary(sf, z, dza));
        if (dtaua < 0) alpha = std::min(alpha, -tau / dtaua);
        if (dkappaa < 0) alpha = std::min(alpha, -kappa / dkappaa);
        alpha = std::min(alpha, 1.0);
        const double mu_aff = ((s + alpha * dsa).dot(z + alpha * dza) +
                               (tau + alpha * dtaua) * (kappa + alpha * dkappaa)) / nu;
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::min(1.0, sigma);

        // Corrector.
        Vec dx, dy, dz, ds;
        double dtau, dkappa;
        {
            const Vec corr = cone_product(sf, apply_Winv(sf, sc, dsa), apply_W(sf, sc, dza));
            const Vec ds_rhs = centering_rhs(sf, sc, sigma * mu, &corr);
            const double dk_rhs = sigma * mu - tau * kappa - dtaua * dkappaa;
            direction(1.0 - sigma, ds_rhs, dk_rhs, dx, dy, dz, ds, dtau, dkappa);
        }
        double step = std::min(step_to_boundary(sf, s, ds), step_to_boundary(sf, z, dz));
        if (dtau < 0) step = std::min(step, -tau / dtau);
        if (dkappa < 0) step = std::min(step, -kappa / dkappa);
        step = std::min(kStepScale * step, 1.0);
        if (!(step > 0) || !std::isfinite(step)) break;

        x += step * dx; y += step * dy; z += step * dz; s += step * ds;
        tau += step * dtau; kappa += step * dkappa;
        if (tau < 1e-14 && kappa < 1e-14) break;
        out.iterations = iter + 1;
    }

    // Degenerate instances (duplicated cone boundaries, weakly active caps)
    // can stall the NT scaling just short of the target tolerances. An
    // iterate within two orders of the target is still a usable optimum.
    if (best_merit <= 100.0) {
        out.status = SolveStatus::Optimal;
        out.point = best_x;
        out.objective_value = objective.dot(best_x);
        out.duality_gap = best_gap;
        out.iterations = best_iter;
        return out;
    }
    out.status = SolveStatus::NumericalFailure;
    return out;
}

} // namespace

void ConicProgram::validate() const {
    if (num_vars < 0) throw std::invalid_argument("ConicProgram: negative num_vars");
    if (objective.size() != num_vars)
        throw std::invalid_argument("ConicProgram: objective size mismatch");
    for (const auto& blk : constraints) {
        if (blk.cone.dim < 1)
            throw std::invalid_argument("ConicProgram: cone dim must be >= 1");
        if (blk.cone.kind == ConeKind::SecondOrderCone && blk.cone.dim < 2)
            throw std::invalid_argument("ConicProgram: SOC dim must be >= 2");
        if (blk.A.rows() != blk.cone.dim || blk.b.size() != blk.cone.dim)
            throw std::invalid_argument("ConicProgram: block row count != cone dim");
        if (blk.A.cols() != num_vars)
            throw std::invalid_argument("ConicProgram: block column count != num_vars");
    }
}

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

std::int64_t solve_conic_call_count() { return g_solve_calls.load(); }

ConicSolution solve_conic(const ConicProgram& prog, const SolverTolerances& tol) {
    g_solve_calls.fetch_add(1, std::memory_order_relaxed);
    prog.validate();
    const StandardForm sf = to_standard_form(prog);
    return solve_standard(sf, tol, prog.objective);
}

} // namespace cvxbandit
