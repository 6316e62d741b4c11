#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "larvasim/errors.hpp"
#include "larvasim/integrate.hpp"
#include "larvasim/qp.hpp"

namespace larvasim {

/// Continuous dynamics for an optimal-control problem: u is the control in
/// the problem's own units (a wrapper converts to actuator signals).
using OcpDynamics =
    std::function<void(double t, std::span<const double> x, std::span<const double> u,
                       std::span<double> dxdt)>;

/// Optimal-control problem over a uniform control grid with piecewise
/// constant inputs:
///   min  w'x(tf) + sum_k [u_k'Ru_k + du_k'Sdu_k] * dt_obj
///   s.t. dynamics, x(t0) = x0, x in [x_lo, x_hi] at shooting nodes,
///        u in [u_lo, u_hi], du in [du_lo, du_hi] per interval,
/// where du_k are the first differences of consecutive control values
/// divided by the interval length in objective time units.
struct OcpSpec {
    double t0 = 0.0;
    double tf = 0.0;
    double dt = 0.0;                   // control interval [s]
    int substeps = 1000;               // RK4 sub-steps per interval

    std::vector<double> x0;
    std::vector<double> terminal_weight;   // size nx
    std::vector<double> R, S;              // diagonal input / input-rate costs
    std::vector<double> u_lo, u_hi;
    std::vector<double> du_lo, du_hi;      // rate bounds per objective time unit
    std::vector<double> x_lo, x_hi;        // node bounds (+-inf allowed)
    std::vector<double> xN_lo, xN_hi;      // terminal overrides (empty: use x_lo/x_hi)
    std::vector<double> u_init;            // pre-horizon input for the first rate term (empty: skip)

    std::vector<double> x_scale, u_scale;  // positive scalings (empty: ones)
    double objective_time_unit = 3600.0;   // seconds per objective time unit

    int nx() const { return static_cast<int>(x0.size()); }
    int nu() const { return static_cast<int>(u_lo.size()); }
    int intervals() const { return static_cast<int>(std::llround((tf - t0) / dt)); }
};

/// Multiple-shooting transcription: node states at the N+1 shooting points
/// plus N piecewise-constant inputs, linked by RK4 defect constraints.
struct Nlp {
    OcpSpec spec;
    OcpDynamics dyn;
    int N = 0, nx = 0, nu = 0;

    /// Propagate one control interval with fixed input (RK4 sub-stepping).
    std::vector<double> propagate(int k, std::span<const double> xk,
                                  std::span<const double> uk) const {
        std::vector<double> x(xk.begin(), xk.end());
        std::vector<double> u(uk.begin(), uk.end());
        Rk4Stepper stepper(x.size());
        const double h = spec.dt / spec.substeps;
        const double t0k = spec.t0 + k * spec.dt;
        RhsFn rhs = [this, &u](double t, std::span<const double> xs, std::span<double> dx) {
            dyn(t, xs, u, dx);
        };
        for (int s = 0; s < spec.substeps; ++s) {
            stepper.step(rhs, t0k + s * h, x, h);
            for (double v : x)
                if (!std::isfinite(v))
                    throw SimulationError("ocp propagation diverged", t0k + (s + 1) * h, x);
        }
        return x;
    }

    double objective(const std::vector<std::vector<double>>& xs,
                     const std::vector<std::vector<double>>& us, double* terminal = nullptr,
                     double* input_cost = nullptr, double* rate_cost = nullptr) const {
        const double dth = spec.dt / spec.objective_time_unit;
        double j_term = 0.0;
        for (int i = 0; i < nx; ++i) j_term += spec.terminal_weight[i] * xs[N][i];
        double j_u = 0.0, j_du = 0.0;
        for (int k = 0; k < N; ++k) {
            for (int c = 0; c < nu; ++c) j_u += spec.R[c] * us[k][c] * us[k][c] * dth;
            const std::vector<double>* prev = nullptr;
            if (k > 0) prev = &us[k - 1];
            else if (!spec.u_init.empty()) prev = &spec.u_init;
            if (prev)
                for (int c = 0; c < nu; ++c) {
                    const double du = (us[k][c] - (*prev)[c]) / dth;
                    j_du += spec.S[c] * du * du * dth;
                }
        }
        if (terminal) *terminal = j_term;
        if (input_cost) *input_cost = j_u;
        if (rate_cost) *rate_cost = j_du;
        return j_term + j_u + j_du;
    }
};

/// Validates the spec and builds the transcription.
inline Nlp transcribe(OcpSpec spec, OcpDynamics dyn) {
    const int nx = spec.nx(), nu = spec.nu();
    if (nx == 0 || nu == 0) throw ConfigError("ocp: empty state or input");
    if (!(spec.dt > 0.0) || !(spec.tf > spec.t0)) throw ConfigError("ocp: bad horizon");
    const double ratio = (spec.tf - spec.t0) / spec.dt;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9)
        throw ConfigError("ocp: control interval must divide the horizon");
    auto fill = [&](std::vector<double>& v, std::size_t n, double value) {
        if (v.empty()) v.assign(n, value);
        if (v.size() != n) throw ConfigError("ocp: inconsistent spec vector sizes");
    };
    const double inf = std::numeric_limits<double>::infinity();
    fill(spec.terminal_weight, nx, 0.0);
    fill(spec.R, nu, 0.0);
    fill(spec.S, nu, 0.0);
    fill(spec.u_hi, nu, 0.0);
    fill(spec.du_lo, nu, -inf);
    fill(spec.du_hi, nu, inf);
    fill(spec.x_lo, nx, -inf);
    fill(spec.x_hi, nx, inf);
    fill(spec.x_scale, nx, 1.0);
    fill(spec.u_scale, nu, 1.0);
    for (int c = 0; c < nu; ++c) {
        if (spec.u_lo[c] > spec.u_hi[c]) throw ConfigError("ocp: infeasible input bounds");
        if (spec.du_lo[c] > spec.du_hi[c]) throw ConfigError("ocp: infeasible rate bounds");
        if (!(spec.u_scale[c] > 0.0)) throw ConfigError("ocp: input scale must be positive");
    }
    for (int i = 0; i < nx; ++i) {
        if (spec.x_lo[i] > spec.x_hi[i]) throw ConfigError("ocp: infeasible state bounds");
        if (!(spec.x_scale[i] > 0.0)) throw ConfigError("ocp: state scale must be positive");
    }
    if (!spec.xN_lo.empty() && (spec.xN_lo.size() != static_cast<std::size_t>(nx) ||
                                spec.xN_hi.size() != static_cast<std::size_t>(nx)))
        throw ConfigError("ocp: terminal bound size mismatch");
    if (!spec.xN_lo.empty())
        for (int i = 0; i < nx; ++i)
            if (spec.xN_lo[i] > spec.xN_hi[i]) throw ConfigError("ocp: infeasible terminal bounds");

    Nlp nlp;
    nlp.N = spec.intervals();
    nlp.nx = nx;
    nlp.nu = nu;
    nlp.spec = std::move(spec);
    nlp.dyn = std::move(dyn);
    return nlp;
}

/// Forward simulation of a control schedule through the transcription's own
/// propagator (used for re-simulation consistency checks and baselines).
inline std::vector<std::vector<double>> rollout(const Nlp& nlp,
                                                const std::vector<std::vector<double>>& u) {
    std::vector<std::vector<double>> xs(nlp.N + 1);
    xs[0] = nlp.spec.x0;
    for (int k = 0; k < nlp.N; ++k) xs[k + 1] = nlp.propagate(k, xs[k], u[k]);
    return xs;
}

struct SolveOptions {
    int max_iters = 80;
    double tol_step = 1e-6;       // scaled input step
    double tol_defect = 1e-8;     // scaled defect norm
    double fd_step = 1e-5;        // scaled finite-difference step
    bool bfgs = true;
    std::vector<std::vector<double>> u_guess;  // N x nu, problem units
    bool verbose = false;
};

struct OcpSolution {
    std::vector<std::vector<double>> u;        // N x nu
    std::vector<std::vector<double>> x;        // (N+1) x nx shooting nodes
    std::vector<std::vector<double>> u_rate;   // N x nu first differences / dt_obj
    double objective = 0.0;
    double terminal_cost = 0.0;
    double input_cost = 0.0;
    double rate_cost = 0.0;
    double max_defect = 0.0;                   // scaled
    int iterations = 0;
    bool converged = false;
    std::string status;
};

namespace ocp_detail {

struct Work {
    // scaled nodes (N+1 x nx) and inputs (N x nu)
    std::vector<Eigen::VectorXd> X, U;
    std::vector<Eigen::VectorXd> F;        // scaled propagated end states
    std::vector<Eigen::MatrixXd> A, B;     // interval sensitivities (scaled)
    std::vector<Eigen::VectorXd> defect;   // X[k+1] - F[k]
    double f = 0.0;
};

inline std::vector<double> unscale(const Eigen::VectorXd& v, const std::vector<double>& s) {
    std::vector<double> out(v.size());
    for (int i = 0; i < v.size(); ++i) out[i] = v[i] * s[i];
    return out;
}

}  // namespace ocp_detail

/// Reduced-space SQP on the multiple-shooting transcription. The objective's
/// input terms are an exact convex quadratic; the terminal term enters
/// through the condensed linearized dynamics, optionally sharpened by a
/// damped BFGS estimate of the reduced curvature. Box, rate, and active
/// state-bound constraints go to a primal-dual interior-point QP. Defects
/// are closed by the condensing step and kept small by an l1 merit line
/// search.
OcpSolution solve(const Nlp& nlp, const SolveOptions& opt = {});

inline OcpSolution solve(const Nlp& nlp, const SolveOptions& opt) {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const int N = nlp.N, nx = nlp.nx, nu = nlp.nu;
    const OcpSpec& sp = nlp.spec;
    const double dth = sp.dt / sp.objective_time_unit;

    // --- variable mapping: free input channels only ---------------------
    std::vector<int> varof(static_cast<std::size_t>(N) * nu, -1);
    std::vector<std::pair<int, int>> varix;  // var -> (k, c)
    for (int k = 0; k < N; ++k)
        for (int c = 0; c < nu; ++c)
            if (sp.u_lo[c] < sp.u_hi[c]) {
                varof[k * nu + c] = static_cast<int>(varix.size());
                varix.emplace_back(k, c);
            }
    const int nv = static_cast<int>(varix.size());
    if (nv == 0) throw ConfigError("ocp: no free input channels");

    auto scaled_x = [&](std::span<const double> x) {
        VectorXd v(nx);
        for (int i = 0; i < nx; ++i) v[i] = x[i] / sp.x_scale[i];
        return v;
    };

    // --- initialization: inputs from the guess, nodes from forward sim --
    ocp_detail::Work w;
    w.U.assign(N, VectorXd::Zero(nu));
    for (int k = 0; k < N; ++k)
        for (int c = 0; c < nu; ++c) {
            double u0 = sp.u_lo[c] < sp.u_hi[c]
                            ? (!opt.u_guess.empty() ? opt.u_guess[k][c]
                                                    : std::clamp(0.0, sp.u_lo[c], sp.u_hi[c]))
                            : sp.u_lo[c];
            u0 = std::clamp(u0, sp.u_lo[c], sp.u_hi[c]);
            w.U[k][c] = u0 / sp.u_scale[c];
        }
    w.X.assign(N + 1, VectorXd::Zero(nx));
    w.X[0] = scaled_x(sp.x0);
    for (int k = 0; k < N; ++k) {
        auto xk = ocp_detail::unscale(w.X[k], sp.x_scale);
        auto uk = ocp_detail::unscale(w.U[k], sp.u_scale);
        w.X[k + 1] = scaled_x(nlp.propagate(k, xk, uk));
    }
    w.F.assign(N, VectorXd::Zero(nx));
    w.defect.assign(N, VectorXd::Zero(nx));
    w.A.assign(N, MatrixXd::Zero(nx, nx));
    w.B.assign(N, MatrixXd::Zero(nx, nu));

    auto unscaled_states = [&]() {
        std::vector<std::vector<double>> xs(N + 1);
        for (int k = 0; k <= N; ++k) xs[k] = ocp_detail::unscale(w.X[k], sp.x_scale);
        return xs;
    };
    auto unscaled_inputs = [&]() {
        std::vector<std::vector<double>> us(N);
        for (int k = 0; k < N; ++k) us[k] = ocp_detail::unscale(w.U[k], sp.u_scale);
        return us;
    };

    auto propagate_all = [&](const std::vector<VectorXd>& X, const std::vector<VectorXd>& U,
                             std::vector<VectorXd>& F) {
        for (int k = 0; k < N; ++k) {
            auto xk = ocp_detail::unscale(X[k], sp.x_scale);
            auto uk = ocp_detail::unscale(U[k], sp.u_scale);
            F[k] = scaled_x(nlp.propagate(k, xk, uk));
        }
    };

    // state-bound violation measure (scaled l1 over nodes), used in the merit
    auto bound_violation = [&](const std::vector<VectorXd>& X) {
        double v = 0.0;
        for (int k = 1; k <= N; ++k) {
            const std::vector<double>& lo = (k == N && !sp.xN_lo.empty()) ? sp.xN_lo : sp.x_lo;
            const std::vector<double>& hi = (k == N && !sp.xN_hi.empty()) ? sp.xN_hi : sp.x_hi;
            for (int i = 0; i < nx; ++i) {
                const double xi = X[k][i] * sp.x_scale[i];
                if (std::isfinite(lo[i]) && xi < lo[i]) v += (lo[i] - xi) / sp.x_scale[i];
                if (std::isfinite(hi[i]) && xi > hi[i]) v += (xi - hi[i]) / sp.x_scale[i];
            }
        }
        return v;
    };

    auto objective_of = [&](const std::vector<VectorXd>& X, const std::vector<VectorXd>& U) {
        std::vector<std::vector<double>> xs(N + 1), us(N);
        for (int k = 0; k <= N; ++k) xs[k] = ocp_detail::unscale(X[k], sp.x_scale);
        for (int k = 0; k < N; ++k) us[k] = ocp_detail::unscale(U[k], sp.u_scale);
        return nlp.objective(xs, us);
    };

    // exact Hessian/gradient of the input cost in scaled input variables
    MatrixXd Hq = MatrixXd::Zero(nv, nv);
    for (int k = 0; k < N; ++k)
        for (int c = 0; c < nu; ++c) {
            const int v = varof[k * nu + c];
            if (v < 0) continue;
            const double usc = sp.u_scale[c];
            Hq(v, v) += 2.0 * sp.R[c] * usc * usc * dth;
            // rate terms couple consecutive intervals
            const double srate = 2.0 * sp.S[c] * usc * usc / dth;
            if (k > 0) {
                const int vp = varof[(k - 1) * nu + c];
                Hq(v, v) += srate;
                if (vp >= 0) {
                    Hq(vp, vp) += srate;
                    Hq(v, vp) -= srate;
                    Hq(vp, v) -= srate;
                }
            } else if (!sp.u_init.empty()) {
                Hq(v, v) += srate;
            }
        }

    auto input_gradient = [&](const std::vector<VectorXd>& U) {
        VectorXd g = VectorXd::Zero(nv);
        for (int k = 0; k < N; ++k)
            for (int c = 0; c < nu; ++c) {
                const int v = varof[k * nu + c];
                if (v < 0) continue;
                const double usc = sp.u_scale[c];
                const double uk = U[k][c] * usc;
                g[v] += 2.0 * sp.R[c] * uk * usc * dth;
                // each difference term (u_k - u_{k-1}) contributes to both
                // endpoints exactly once
                const double srate = 2.0 * sp.S[c] * usc / dth;
                if (k > 0) {
                    const double du = uk - U[k - 1][c] * usc;
                    g[v] += srate * du;
                    const int vp = varof[(k - 1) * nu + c];
                    if (vp >= 0) g[vp] -= srate * du;
                } else if (!sp.u_init.empty()) {
                    g[v] += srate * (uk - sp.u_init[c]);
                }
            }
        return g;
    };

    // terminal gradient via the adjoint chain through the linearization; the
    // adjoint values double as estimates of the defect-constraint multipliers
    VectorXd w_term(nx);
    for (int i = 0; i < nx; ++i) w_term[i] = sp.terminal_weight[i] * sp.x_scale[i];
    double adjoint_max = 0.0;
    auto terminal_gradient = [&]() {
        VectorXd g = VectorXd::Zero(nv);
        VectorXd adj = w_term;
        adjoint_max = adj.lpNorm<Eigen::Infinity>();
        for (int k = N - 1; k >= 0; --k) {
            const VectorXd gu = w.B[k].transpose() * adj;
            for (int c = 0; c < nu; ++c) {
                const int v = varof[k * nu + c];
                if (v >= 0) g[v] += gu[c];
            }
            adj = w.A[k].transpose() * adj;
            adjoint_max = std::max(adjoint_max, adj.lpNorm<Eigen::Infinity>());
        }
        return g;
    };

    // sensitivity row of scaled state (k, i) w.r.t. the input variables
    auto state_row = [&](int k, int i) {
        QpRow row;
        VectorXd adj = VectorXd::Zero(nx);
        adj[i] = 1.0;
        for (int j = k - 1; j >= 0; --j) {
            const VectorXd gu = w.B[j].transpose() * adj;
            for (int c = 0; c < nu; ++c) {
                const int v = varof[j * nu + c];
                if (v >= 0 && gu[c] != 0.0) row.terms.emplace_back(v, gu[c]);
            }
            adj = w.A[j].transpose() * adj;
        }
        return row;
    };

    // defect-closure shifts: dX[k] at du = 0
    auto closure_shift = [&]() {
        std::vector<VectorXd> shift(N + 1, VectorXd::Zero(nx));
        for (int k = 0; k < N; ++k) shift[k + 1] = w.A[k] * shift[k] - w.defect[k];
        return shift;
    };

    auto evaluate_all = [&]() {
        propagate_all(w.X, w.U, w.F);
        double dmax = 0.0;
        for (int k = 0; k < N; ++k) {
            w.defect[k] = w.X[k + 1] - w.F[k];
            dmax = std::max(dmax, w.defect[k].lpNorm<Eigen::Infinity>());
        }
        w.f = objective_of(w.X, w.U);
        return dmax;
    };

    auto sensitivities = [&]() {
        const double h = opt.fd_step;
        for (int k = 0; k < N; ++k) {
            auto base_u = ocp_detail::unscale(w.U[k], sp.u_scale);
            for (int i = 0; i < nx; ++i) {
                VectorXd xp = w.X[k], xm = w.X[k];
                xp[i] += h;
                xm[i] -= h;
                auto fp = nlp.propagate(k, ocp_detail::unscale(xp, sp.x_scale), base_u);
                auto fm = nlp.propagate(k, ocp_detail::unscale(xm, sp.x_scale), base_u);
                for (int r = 0; r < nx; ++r)
                    w.A[k](r, i) = (fp[r] / sp.x_scale[r] - fm[r] / sp.x_scale[r]) / (2.0 * h);
            }
            auto base_x = ocp_detail::unscale(w.X[k], sp.x_scale);
            for (int c = 0; c < nu; ++c) {
                if (sp.u_lo[c] >= sp.u_hi[c]) {
                    w.B[k].col(c).setZero();
                    continue;
                }
                VectorXd up = w.U[k], um = w.U[k];
                up[c] += h;
                um[c] -= h;
                auto fp = nlp.propagate(k, base_x, ocp_detail::unscale(up, sp.u_scale));
                auto fm = nlp.propagate(k, base_x, ocp_detail::unscale(um, sp.u_scale));
                for (int r = 0; r < nx; ++r)
                    w.B[k](r, c) = (fp[r] / sp.x_scale[r] - fm[r] / sp.x_scale[r]) / (2.0 * h);
            }
        }
    };

    OcpSolution sol;
    double mu_merit = 10.0;
    MatrixXd B_extra = MatrixXd::Zero(nv, nv);
    VectorXd g_red_prev;
    VectorXd step_prev;
    double dmax = evaluate_all();
    // Levenberg-style damping, adapted by line-search success: grows when the
    // local model proves untrustworthy (truncated steps), shrinks on clean
    // full steps
    double reg = 1e-6;

    int it = 0;
    for (; it < opt.max_iters; ++it) {
        sensitivities();
        const VectorXd g_red = input_gradient(w.U) + terminal_gradient();

        // BFGS update of the extra curvature (terminal-term contribution)
        if (opt.bfgs && g_red_prev.size() == nv && step_prev.size() == nv &&
            step_prev.lpNorm<Eigen::Infinity>() > 1e-14) {
            const VectorXd y = g_red - g_red_prev - Hq * step_prev;
            const VectorXd& s = step_prev;
            const double sy = s.dot(y);
            const double sBs = s.dot(B_extra * s);
            if (sy > 0.2 * sBs && sy > 1e-12) {
                if (sBs > 1e-14) B_extra -= (B_extra * s) * (s.transpose() * B_extra) / sBs;
                B_extra += (y * y.transpose()) / sy;
            }
        }
        g_red_prev = g_red;

        // --- assemble the QP over the free input steps -------------------
        QpProblem qp;
        qp.Q = Hq + B_extra;
        const double qscale = 1.0 + qp.Q.diagonal().maxCoeff();
        qp.Q.diagonal().array() += 1e-9 * qscale + reg * qscale;
        qp.c = g_red;

        // input box rows
        for (int v = 0; v < nv; ++v) {
            const auto [k, c] = varix[v];
            const double usc = sp.u_scale[c];
            qp.ineq.push_back({{{v, 1.0}}, (sp.u_hi[c] / usc) - w.U[k][c]});
            qp.ineq.push_back({{{v, -1.0}}, w.U[k][c] - (sp.u_lo[c] / usc)});
        }
        // rate rows in problem units per objective time unit
        for (int k = 0; k < N; ++k)
            for (int c = 0; c < nu; ++c) {
                const int v = varof[k * nu + c];
                if (v < 0) continue;
                if (!std::isfinite(sp.du_lo[c]) && !std::isfinite(sp.du_hi[c])) continue;
                const double usc = sp.u_scale[c];
                double du_now;
                QpRow up, dn;
                if (k > 0) {
                    const int vp = varof[(k - 1) * nu + c];
                    du_now = (w.U[k][c] - w.U[k - 1][c]) * usc / dth;
                    up.terms = {{v, usc / dth}};
                    if (vp >= 0) up.terms.push_back({vp, -usc / dth});
                } else if (!sp.u_init.empty()) {
                    du_now = (w.U[k][c] * usc - sp.u_init[c]) / dth;
                    up.terms = {{v, usc / dth}};
                } else {
                    continue;
                }
                dn.terms = up.terms;
                for (auto& t : dn.terms) t.second = -t.second;
                if (std::isfinite(sp.du_hi[c])) {
                    up.rhs = sp.du_hi[c] - du_now;
                    qp.ineq.push_back(up);
                }
                if (std::isfinite(sp.du_lo[c])) {
                    dn.rhs = du_now - sp.du_lo[c];
                    qp.ineq.push_back(dn);
                }
            }
        // state bounds: terminal equalities always; near-active or violated
        // inequality rows otherwise
        const auto shift = closure_shift();
        for (int k = 1; k <= N; ++k) {
            const std::vector<double>& lo = (k == N && !sp.xN_lo.empty()) ? sp.xN_lo : sp.x_lo;
            const std::vector<double>& hi = (k == N && !sp.xN_hi.empty()) ? sp.xN_hi : sp.x_hi;
            for (int i = 0; i < nx; ++i) {
                const bool has_lo = std::isfinite(lo[i]), has_hi = std::isfinite(hi[i]);
                if (!has_lo && !has_hi) continue;
                const double xsc = sp.x_scale[i];
                const double x_pred = w.X[k][i] + shift[k][i];  // after defect closure
                if (has_lo && has_hi && lo[i] == hi[i]) {
                    QpRow row = state_row(k, i);
                    row.rhs = lo[i] / xsc - x_pred;
                    qp.eq.push_back(std::move(row));
                    continue;
                }
                const double margin = 0.05;
                if (has_hi && (x_pred * xsc > hi[i] - margin * xsc)) {
                    QpRow row = state_row(k, i);
                    row.rhs = hi[i] / xsc - x_pred;
                    qp.ineq.push_back(std::move(row));
                }
                if (has_lo && (x_pred * xsc < lo[i] + margin * xsc)) {
                    QpRow row = state_row(k, i);
                    for (auto& t : row.terms) t.second = -t.second;
                    row.rhs = x_pred - lo[i] / xsc;
                    qp.ineq.push_back(std::move(row));
                }
            }
        }

        QpResult q = solve_qp(qp);
        const VectorXd& du = q.x;
        const double step_norm = du.lpNorm<Eigen::Infinity>();
        if (step_norm < opt.tol_step && dmax < opt.tol_defect) {
            sol.converged = true;
            break;
        }

        // merit parameter from the QP multipliers and the defect-constraint
        // multiplier estimate (the adjoint chain of the condensed objective)
        double lam_max = adjoint_max;
        if (q.lambda.size() > 0) lam_max = std::max(lam_max, q.lambda.lpNorm<Eigen::Infinity>());
        if (q.nu.size() > 0) lam_max = std::max(lam_max, q.nu.lpNorm<Eigen::Infinity>());
        mu_merit = std::max({mu_merit, 2.0 * lam_max, 10.0});

        // full step in (X, U) space closing the linearized defects
        std::vector<VectorXd> dX(N + 1, VectorXd::Zero(nx));
        std::vector<VectorXd> dU(N, VectorXd::Zero(nu));
        for (int k = 0; k < N; ++k)
            for (int c = 0; c < nu; ++c) {
                const int v = varof[k * nu + c];
                if (v >= 0) dU[k][c] = du[v];
            }
        for (int k = 0; k < N; ++k)
            dX[k + 1] = w.A[k] * dX[k] + w.B[k] * dU[k] - w.defect[k];

        double defect_l1 = 0.0;
        for (int k = 0; k < N; ++k) defect_l1 += w.defect[k].lpNorm<1>();
        const double bviol0 = bound_violation(w.X);

        double alpha = 1.0;
        bool accepted = false;
        std::vector<VectorXd> Xt(N + 1), Ut(N), Ft(N);
        for (int escalation = 0; escalation < 4 && !accepted; ++escalation) {
            const double merit0 = w.f + mu_merit * (defect_l1 + bviol0);
            const double pred_decrease =
                -(g_red.dot(du) + 0.5 * du.dot(qp.Q * du)) + mu_merit * defect_l1;
            alpha = 1.0;
            for (int ls = 0; ls < 25; ++ls) {
                for (int k = 0; k <= N; ++k) Xt[k] = w.X[k] + alpha * dX[k];
                for (int k = 0; k < N; ++k) Ut[k] = w.U[k] + alpha * dU[k];
                double ft, d1t = 0.0;
                try {
                    propagate_all(Xt, Ut, Ft);
                    for (int k = 0; k < N; ++k) d1t += (Xt[k + 1] - Ft[k]).lpNorm<1>();
                    ft = objective_of(Xt, Ut);
                } catch (const std::exception&) {
                    // divergence or a state outside a model law's validity:
                    // reject the trial
                    alpha *= 0.5;
                    continue;
                }
                const double merit_t = ft + mu_merit * (d1t + bound_violation(Xt));
                if (merit_t <= merit0 - 1e-4 * alpha * std::max(pred_decrease, 0.0)) {
                    accepted = true;
                    w.X = Xt;
                    w.U = Ut;
                    w.F = Ft;
                    dmax = 0.0;
                    for (int k = 0; k < N; ++k) {
                        w.defect[k] = w.X[k + 1] - w.F[k];
                        dmax = std::max(dmax, w.defect[k].lpNorm<Eigen::Infinity>());
                    }
                    w.f = ft;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) mu_merit *= 10.0;  // defects weighted too weakly
        }
        step_prev = alpha * du;
        if (!accepted) {
            sol.status = "line search stalled";
            break;
        }
        if (alpha >= 1.0)
            reg = std::max(reg * 0.5, 1e-8);
        else if (alpha <= 0.26)
            reg = std::min(reg * 4.0, 1e4);
        if (opt.verbose)
            std::fprintf(stderr, "it %3d  f=%.8g  defect=%.3e  step=%.3e  alpha=%.3f\n", it, w.f,
                         dmax, step_norm, alpha);
    }

    sol.iterations = it;
    sol.max_defect = dmax;
    sol.u = unscaled_inputs();
    sol.x = unscaled_states();
    if (!sol.converged && dmax > 10.0 * opt.tol_defect) {
        // nodes are dynamically inconsistent; report the re-simulated states
        try {
            sol.x = rollout(nlp, sol.u);
            if (sol.status.empty()) sol.status = "not converged";
            sol.status += " (states re-simulated)";
        } catch (const SimulationError&) {
            // keep the raw nodes together with the defect diagnostic
        }
    }
    sol.objective =
        nlp.objective(sol.x, sol.u, &sol.terminal_cost, &sol.input_cost, &sol.rate_cost);
    sol.u_rate.assign(N, std::vector<double>(nu, 0.0));
    for (int k = 0; k < N; ++k)
        for (int c = 0; c < nu; ++c) {
            const double prev = k > 0 ? sol.u[k - 1][c]
                                      : (!sp.u_init.empty() ? sp.u_init[c] : sol.u[0][c]);
            sol.u_rate[k][c] = (sol.u[k][c] - prev) / dth;
        }
    if (sol.status.empty())
        sol.status = sol.converged ? "converged" : "iteration limit";
    return sol;
}

}  // namespace larvasim
