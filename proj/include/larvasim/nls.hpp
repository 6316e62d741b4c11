#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "larvasim/errors.hpp"

namespace larvasim {

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

struct MinimizeOptions {
    double grad_rel_step = 1e-6;  // central-difference step relative to the bound range
    double tol_grad = 1e-9;       // projected-gradient norm in scaled coordinates
    double tol_step = 1e-13;
    std::size_t max_iters = 300;
};

struct MinimizeResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t iters = 0;
    std::size_t evals = 0;
    bool converged = false;
    bool failed = false;
    std::string message;
};

/// Bound-constrained quasi-Newton (damped BFGS with gradient projection and
/// an Armijo backtracking line search). Works in coordinates scaled by the
/// bound ranges; gradients by central differences.
inline MinimizeResult minimize_bounded(const ObjectiveFn& f, std::vector<double> x0,
                                       const std::vector<double>& lo,
                                       const std::vector<double>& hi,
                                       const MinimizeOptions& opt = {}) {
    const std::size_t n = x0.size();
    if (lo.size() != n || hi.size() != n) throw ConfigError("minimize_bounded: bound size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
            throw ConfigError("minimize_bounded: bounds must be finite with lo < hi");
    }

    MinimizeResult res;
    auto to_x = [&](const Eigen::VectorXd& z) {
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = lo[i] + z[static_cast<long>(i)] * (hi[i] - lo[i]);
        return x;
    };
    auto clampz = [&](Eigen::VectorXd z) {
        for (long i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], 0.0, 1.0);
        return z;
    };

    Eigen::VectorXd z(n);
    for (std::size_t i = 0; i < n; ++i)
        z[static_cast<long>(i)] = std::clamp((x0[i] - lo[i]) / (hi[i] - lo[i]), 0.0, 1.0);

    auto eval = [&](const Eigen::VectorXd& zz) {
        ++res.evals;
        return f(to_x(zz));
    };
    auto grad = [&](const Eigen::VectorXd& zz) {
        Eigen::VectorXd g(n);
        const double h = opt.grad_rel_step;
        Eigen::VectorXd zp = zz, zm = zz;
        for (long i = 0; i < static_cast<long>(n); ++i) {
            const double hp = std::min(h, 1.0 - zz[i]);
            const double hm = std::min(h, zz[i]);
            zp[i] = zz[i] + hp;
            zm[i] = zz[i] - hm;
            if (hp + hm <= 0.0) { g[i] = 0.0; zp[i] = zm[i] = zz[i]; continue; }
            const double fp = eval(zp), fm = eval(zm);
            g[i] = (fp - fm) / (hp + hm);
            zp[i] = zm[i] = zz[i];
        }
        return g;
    };

    double fz;
    try {
        fz = eval(z);
        if (!std::isfinite(fz)) throw SimulationError("non-finite objective at start", 0.0);
    } catch (const std::exception& e) {
        res.failed = true;
        res.message = std::string("objective failed at start: ") + e.what();
        return res;
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);  // inverse-Hessian approximation
    Eigen::VectorXd g;
    try {
        g = grad(z);
    } catch (const std::exception& e) {
        res.failed = true;
        res.message = std::string("gradient failed: ") + e.what();
        return res;
    }

    for (res.iters = 0; res.iters < opt.max_iters; ++res.iters) {
        // projected-gradient optimality measure
        const Eigen::VectorXd pg = z - clampz(z - g);
        if (pg.lpNorm<Eigen::Infinity>() < opt.tol_grad) {
            res.converged = true;
            break;
        }

        Eigen::VectorXd d = -H * g;
        // deactivate directions pushing against active bounds
        for (long i = 0; i < static_cast<long>(n); ++i) {
            if ((z[i] <= 1e-12 && d[i] < 0.0) || (z[i] >= 1.0 - 1e-12 && d[i] > 0.0)) d[i] = 0.0;
        }
        if (d.dot(g) >= 0.0) {
            H.setIdentity();
            d = -g;
            for (long i = 0; i < static_cast<long>(n); ++i)
                if ((z[i] <= 1e-12 && d[i] < 0.0) || (z[i] >= 1.0 - 1e-12 && d[i] > 0.0)) d[i] = 0.0;
            if (d.dot(g) >= 0.0) {
                res.converged = true;  // no feasible descent direction
                break;
            }
        }

        double alpha = 1.0;
        double f_new = fz;
        Eigen::VectorXd z_new = z;
        bool accepted = false;
        const double slope = d.dot(g);
        for (int ls = 0; ls < 50; ++ls) {
            z_new = clampz(z + alpha * d);
            try {
                f_new = eval(z_new);
            } catch (const std::exception&) {
                alpha *= 0.5;
                continue;
            }
            if (std::isfinite(f_new) && f_new <= fz + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted || (z_new - z).lpNorm<Eigen::Infinity>() < opt.tol_step) {
            res.converged = true;
            break;
        }

        Eigen::VectorXd g_new;
        try {
            g_new = grad(z_new);
        } catch (const std::exception& e) {
            res.failed = true;
            res.message = std::string("gradient failed: ") + e.what();
            break;
        }
        const Eigen::VectorXd s = z_new - z;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            // BFGS update of the inverse Hessian (Sherman-Morrison form)
            const Eigen::VectorXd Hy = H * y;
            const double yHy = y.dot(Hy);
            H += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                 (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }
        z = z_new;
        g = g_new;
        fz = f_new;
    }

    res.x = to_x(z);
    res.f = fz;
    if (!res.failed && res.message.empty())
        res.message = res.converged ? "converged" : "iteration limit";
    return res;
}

/// Latin-hypercube start points in [lo, hi]; deterministic under the seed.
inline std::vector<std::vector<double>> latin_hypercube(const std::vector<double>& lo,
                                                        const std::vector<double>& hi,
                                                        std::size_t n_starts, std::uint64_t seed) {
    const std::size_t p = lo.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<std::vector<double>> pts(n_starts, std::vector<double>(p));
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<std::size_t> strata(n_starts);
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (std::size_t i = 0; i < n_starts; ++i) {
            const double frac = (static_cast<double>(strata[i]) + u01(rng)) /
                                static_cast<double>(n_starts);
            pts[i][j] = lo[j] + frac * (hi[j] - lo[j]);
        }
    }
    return pts;
}

struct MultistartResult {
    MinimizeResult best;
    std::size_t best_index = 0;
    std::vector<MinimizeResult> starts;
};

/// Independent local minimizations from Latin-hypercube starts; the winner is
/// picked by (objective, start index), so results are deterministic.
/// Throws SimulationError when every start fails.
inline MultistartResult multistart_minimize(const ObjectiveFn& f, const std::vector<double>& lo,
                                            const std::vector<double>& hi, std::size_t n_starts,
                                            std::uint64_t seed, const MinimizeOptions& opt = {}) {
    if (n_starts < 1) throw ConfigError("multistart_minimize: need at least one start");
    MultistartResult out;
    const auto starts = latin_hypercube(lo, hi, n_starts, seed);
    bool any_ok = false;
    for (std::size_t i = 0; i < n_starts; ++i) {
        MinimizeResult r = minimize_bounded(f, starts[i], lo, hi, opt);
        out.starts.push_back(r);
        if (!r.failed && (!any_ok || r.f < out.best.f)) {
            out.best = r;
            out.best_index = i;
            any_ok = true;
        }
    }
    if (!any_ok) {
        std::string diag = "all multistart runs failed:";
        for (std::size_t i = 0; i < out.starts.size(); ++i)
            diag += "\n  start " + std::to_string(i) + ": " + out.starts[i].message;
        throw SimulationError(diag, 0.0);
    }
    return out;
}

}  // namespace larvasim
