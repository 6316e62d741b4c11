#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "larvasim/errors.hpp"

namespace larvasim {

/// One linear constraint row, stored sparsely: sum_i terms[i] * x[i] (<=|==) rhs.
struct QpRow {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
};

/// Convex quadratic program
///   min 1/2 x'Qx + c'x   s.t.  eq rows hold with equality, ineq rows with <=.
struct QpProblem {
    Eigen::MatrixXd Q;
    Eigen::VectorXd c;
    std::vector<QpRow> ineq;
    std::vector<QpRow> eq;
};

struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;  // inequality multipliers (>= 0)
    Eigen::VectorXd nu;      // equality multipliers
    bool converged = false;
    int iters = 0;
    double mu = 0.0;
};

namespace detail {

inline double row_dot(const QpRow& r, const Eigen::VectorXd& x) {
    double s = 0.0;
    for (const auto& [i, v] : r.terms) s += v * x[i];
    return s;
}

inline void add_scaled_row(Eigen::VectorXd& out, const QpRow& r, double w) {
    for (const auto& [i, v] : r.terms) out[i] += w * v;
}

}  // namespace detail

/// Mehrotra-style primal-dual interior-point method for dense convex QPs.
/// Sized for a few thousand variables with mostly sparse constraint rows.
inline QpResult solve_qp(const QpProblem& qp, int max_iters = 100, double tol = 1e-10) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const int n = static_cast<int>(qp.Q.rows());
    const int mi = static_cast<int>(qp.ineq.size());
    const int me = static_cast<int>(qp.eq.size());

    QpResult res;
    res.x = VectorXd::Zero(n);
    res.lambda = VectorXd::Constant(mi, 1.0);
    res.nu = VectorXd::Zero(me);

    MatrixXd A_eq(me, n);
    VectorXd b_eq(me);
    A_eq.setZero();
    for (int r = 0; r < me; ++r) {
        for (const auto& [i, v] : qp.eq[r].terms) A_eq(r, i) += v;
        b_eq[r] = qp.eq[r].rhs;
    }

    VectorXd s(mi);
    for (int r = 0; r < mi; ++r)
        s[r] = std::max(1.0, detail::row_dot(qp.ineq[r], res.x) - qp.ineq[r].rhs + 2.0);

    const double obj_scale = 1.0 + qp.c.lpNorm<Eigen::Infinity>();
    double ridge = 1e-12 * (1.0 + qp.Q.diagonal().maxCoeff());

    for (res.iters = 0; res.iters < max_iters; ++res.iters) {
        // residuals
        VectorXd r_d = qp.Q * res.x + qp.c;
        if (me > 0) r_d += A_eq.transpose() * res.nu;
        for (int r = 0; r < mi; ++r) detail::add_scaled_row(r_d, qp.ineq[r], res.lambda[r]);
        VectorXd r_pe = me > 0 ? VectorXd(A_eq * res.x - b_eq) : VectorXd();
        VectorXd r_pi(mi);
        for (int r = 0; r < mi; ++r)
            r_pi[r] = detail::row_dot(qp.ineq[r], res.x) + s[r] - qp.ineq[r].rhs;
        const double mu = mi > 0 ? s.dot(res.lambda) / mi : 0.0;
        res.mu = mu;

        double feas = r_d.lpNorm<Eigen::Infinity>();
        if (me > 0) feas = std::max(feas, r_pe.lpNorm<Eigen::Infinity>());
        if (mi > 0) feas = std::max(feas, r_pi.lpNorm<Eigen::Infinity>());
        if (feas < tol * obj_scale && mu < tol * obj_scale) {
            res.converged = true;
            return res;
        }

        // normal matrix M = Q + ridge I + A_in' W A_in, W = lambda/s
        MatrixXd M = qp.Q;
        M.diagonal().array() += ridge;
        for (int r = 0; r < mi; ++r) {
            const double w = res.lambda[r] / s[r];
            for (const auto& [i, vi] : qp.ineq[r].terms)
                for (const auto& [j, vj] : qp.ineq[r].terms) M(i, j) += w * vi * vj;
        }
        Eigen::LLT<MatrixXd> llt(M);
        if (llt.info() != Eigen::Success) {
            ridge = std::max(ridge * 100.0, 1e-10);
            continue;
        }

        auto solve_kkt = [&](const VectorXd& rx, const VectorXd& re, VectorXd& dx,
                             VectorXd& dnu) {
            if (me == 0) {
                dx = llt.solve(rx);
                dnu.resize(0);
                return;
            }
            const MatrixXd MiAe = llt.solve(A_eq.transpose());
            const VectorXd Mirx = llt.solve(rx);
            const MatrixXd S = A_eq * MiAe;
            Eigen::LDLT<MatrixXd> sldlt(S);
            dnu = sldlt.solve(A_eq * Mirx - re);
            dx = Mirx - MiAe * dnu;
        };

        auto newton_step = [&](const VectorXd& comp_rhs, VectorXd& dx, VectorXd& dnu,
                               VectorXd& ds, VectorXd& dl) {
            // comp_rhs holds the desired value of (lambda.*s + correction terms)
            VectorXd rx = -r_d;
            for (int r = 0; r < mi; ++r) {
                const double coef = res.lambda[r] - comp_rhs[r] / s[r] -
                                    (res.lambda[r] / s[r]) * r_pi[r];
                detail::add_scaled_row(rx, qp.ineq[r], coef);
            }
            solve_kkt(rx, me > 0 ? VectorXd(-r_pe) : VectorXd(), dx, dnu);
            ds.resize(mi);
            dl.resize(mi);
            for (int r = 0; r < mi; ++r) {
                ds[r] = -r_pi[r] - detail::row_dot(qp.ineq[r], dx);
                dl[r] = (comp_rhs[r] - res.lambda[r] * s[r] - res.lambda[r] * ds[r]) / s[r];
            }
        };

        auto max_step = [&](const VectorXd& ds, const VectorXd& dl) {
            double a = 1.0;
            for (int r = 0; r < mi; ++r) {
                if (ds[r] < 0.0) a = std::min(a, -s[r] / ds[r]);
                if (dl[r] < 0.0) a = std::min(a, -res.lambda[r] / dl[r]);
            }
            return a;
        };

        VectorXd dx, dnu, ds, dl;
        double sigma = 0.0;
        VectorXd comp = VectorXd::Zero(std::max(mi, 1));
        if (mi > 0) {
            // affine predictor
            newton_step(VectorXd::Zero(mi), dx, dnu, ds, dl);
            const double a_aff = max_step(ds, dl);
            double mu_aff = 0.0;
            for (int r = 0; r < mi; ++r)
                mu_aff += (s[r] + a_aff * ds[r]) * (res.lambda[r] + a_aff * dl[r]);
            mu_aff /= mi;
            sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
            comp.resize(mi);
            for (int r = 0; r < mi; ++r) comp[r] = sigma * mu - ds[r] * dl[r];
        }
        newton_step(comp, dx, dnu, ds, dl);
        const double alpha = mi > 0 ? std::min(1.0, 0.995 * max_step(ds, dl)) : 1.0;

        res.x += alpha * dx;
        if (me > 0) res.nu += alpha * dnu;
        for (int r = 0; r < mi; ++r) {
            s[r] = std::max(1e-300, s[r] + alpha * ds[r]);
            res.lambda[r] = std::max(1e-300, res.lambda[r] + alpha * dl[r]);
        }
        if (mi == 0 && me >= 0) {
            // equality-constrained QP solves in one Newton step
            res.converged = true;
            ++res.iters;
            return res;
        }
    }
    return res;
}

}  // namespace larvasim
