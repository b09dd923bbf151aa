// cfra — robust resource allocation for user-centric cell-free massive MIMO
// Copyright (C) 2026 cfra developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "common.hpp"
#include "config.hpp"
#include "metrics.hpp"
#include "precoding.hpp"

namespace cfra {

/// Outcome of a power-coefficient solver. d is the final (possibly
/// rescaled) coefficient vector; d_raw is the descent output before the
/// budget rescale. Nonnegativity is reported, never enforced by clipping.
struct PowerResult {
    RVec d;
    RVec d_raw;
    double alpha_worst = 0.0;
    std::vector<double> objective_trace;
    bool scaled = false;
    bool diverged = false;
    bool d_nonnegative = true;
};

/// Gradient in d of the estimate-conditioned mean-square error. With
/// B = G_hat_a^T W the j-th entry is
/// 2 rho_f d_j |B e_j|^2 - 2 sqrt(rho_f) Re B_jj.
inline RVec mse_grad_d_conditioned(const RVec& d, const CMat& W, const CMat& G_hat_a,
                                   const LinkBudget& link) {
    detail::mse_check_dims(d, W, G_hat_a);
    const CMat B = G_hat_a.transpose() * W;
    RVec g(d.size());
    for (Eigen::Index j = 0; j < d.size(); ++j)
        g(j) = 2.0 * link.rho_f * B.col(j).squaredNorm() * d(j) -
               2.0 * std::sqrt(link.rho_f) * B(j, j).real();
    return g;
}

/// Gradient in d of the phase-averaged mean-square error; the linear term
/// of the conditioned gradient averages out, leaving the quadratic part.
inline RVec mse_grad_d(const RVec& d, const CMat& W, const CMat& G_hat_a, const LinkBudget& link) {
    detail::mse_check_dims(d, W, G_hat_a);
    const CMat B = G_hat_a.transpose() * W;
    RVec g(d.size());
    for (Eigen::Index j = 0; j < d.size(); ++j)
        g(j) = 2.0 * link.rho_f * B.col(j).squaredNorm() * d(j);
    return g;
}

namespace detail {

struct DescentResult {
    RVec d;
    std::vector<double> trace;
    bool diverged = false;
};

// Plain gradient descent with an optional step-halving guard. With the
// guard on, a step is only taken if it does not increase the objective, so
// the trace is nonincreasing by construction; without it the raw step is
// applied and blow-ups are flagged instead of suppressed.
template <class Grad, class Obj>
DescentResult descend(RVec d, int iters, double step0, bool backtracking, Grad&& grad, Obj&& obj) {
    DescentResult out;
    out.trace.reserve(static_cast<size_t>(iters) + 1);
    double f = obj(d);
    out.trace.push_back(f);
    const double scale0 = std::abs(f) + 1.0;
    for (int i = 0; i < iters; ++i) {
        const RVec g = grad(d);
        if (backtracking) {
            double step = step0;
            bool accepted = false;
            for (int t = 0; t < 20; ++t) {
                const RVec cand = d - step * g;
                const double fc = obj(cand);
                if (fc <= f) {
                    d = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
        } else {
            d -= step0 * g;
            f = obj(d);
        }
        out.trace.push_back(f);
        if (!std::isfinite(f) || f > 1e3 * scale0) {
            out.diverged = true;
            break;
        }
    }
    out.d = std::move(d);
    return out;
}

} // namespace detail

/// Gradient-descent power allocation against the phase-averaged error at
/// the channel estimate, followed by a rescale to the power budget. The
/// objective omits the d-independent error constant, so the trace is the
/// pure quadratic part.
inline PowerResult gdpa(const CMat& W, const CMat& G_hat_a, const LinkBudget& link,
                        const SolverParams& sp, const RVec& d0) {
    auto obj = [&](const RVec& d) { return mse_unconditioned(d, W, G_hat_a, link, 0.0); };
    auto grad = [&](const RVec& d) { return mse_grad_d(d, W, G_hat_a, link); };
    auto res = detail::descend(d0, sp.iters_d, sp.step_d, sp.backtracking, grad, obj);
    PowerResult pr;
    pr.d_raw = res.d;
    pr.objective_trace = std::move(res.trace);
    pr.diverged = res.diverged;
    pr.alpha_worst = 0.0;
    pr.d = power_scale(W, res.d, link.power_budget);
    pr.scaled = true;
    pr.d_nonnegative = (pr.d.array() >= 0.0).all();
    return pr;
}

/// Robust variant of gdpa: descends the estimate-conditioned error whose
/// error floor is frozen at the input precoder W diag(d0), then rescales
/// to the budget.
inline PowerResult rgdpa(const CMat& W, const CMat& G_hat_a, const ErrorStats& st,
                         const LinkBudget& link, const SolverParams& sp, const RVec& d0) {
    const double err = error_power_term(scale_cols(W, d0), st, link.rho_f);
    auto obj = [&](const RVec& d) { return mse_conditioned(d, W, G_hat_a, link, err); };
    auto grad = [&](const RVec& d) { return mse_grad_d_conditioned(d, W, G_hat_a, link); };
    auto res = detail::descend(d0, sp.iters_d, sp.step_d, sp.backtracking, grad, obj);
    PowerResult pr;
    pr.d_raw = res.d;
    pr.objective_trace = std::move(res.trace);
    pr.diverged = res.diverged;
    pr.alpha_worst = st.alpha;
    pr.d = power_scale(W, res.d, link.power_budget);
    pr.scaled = true;
    pr.d_nonnegative = (pr.d.array() >= 0.0).all();
    return pr;
}

/// Closed-form fixed point of the conditioned descent: the quadratic is
/// separable across coordinates, so each d_j lands at
/// Re B_jj / (sqrt(rho_f) |B e_j|^2) independent of the others.
inline RVec rgdpa_fixed_point(const CMat& W, const CMat& G_hat_a, const LinkBudget& link) {
    const CMat B = G_hat_a.transpose() * W;
    RVec d(B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        const double s = B.col(j).squaredNorm();
        if (s <= 0.0) throw DegenerateColumnError("coupling column has no energy");
        d(j) = B(j, j).real() / (std::sqrt(link.rho_f) * s);
    }
    return d;
}

/// Channel-inverting precoder at imperfection level alpha together with its
/// first two derivatives in alpha. With G(a) = sqrt(1-a) V + sqrt(a) Verr,
/// H(a) = G(a)^H G(a) and Q(a) = G(a)^H, the precoder is P(a) = (H^{-1}Q)^T
/// and the derivative blocks follow by differentiating H B = Q.
struct WrgdpaWorkspace {
    CMat H, H_d1, H_d2;
    CMat Q, Q_d1, Q_d2;
    CMat P_a, P_ad1, P_ad2;
    double alpha = 0.0;
};

inline WrgdpaWorkspace wrgdpa_workspace(const CMat& V_a, const CMat& V_err_a, double alpha) {
    if (V_a.rows() != V_err_a.rows() || V_a.cols() != V_err_a.cols())
        throw DimensionError("estimate and error directions must have equal shapes");
    if (!(alpha >= 1e-6 && alpha <= 1.0 - 1e-6))
        throw DomainError("alpha must lie in [1e-6, 1 - 1e-6]");
    const double a = alpha;
    const double ra = std::sqrt(a), rb = std::sqrt(1.0 - a);
    const double u = a * (1.0 - a), ru = std::sqrt(u);

    const CMat Hvv = V_a.adjoint() * V_a;
    const CMat Hee = V_err_a.adjoint() * V_err_a;
    const CMat Hve = V_a.adjoint() * V_err_a;
    const CMat cross = Hve + Hve.adjoint();

    WrgdpaWorkspace ws;
    ws.alpha = alpha;
    ws.H = (1.0 - a) * Hvv + ru * cross + a * Hee;
    ws.Q = ra * V_err_a.adjoint() + rb * V_a.adjoint();
    ws.H_d1 = -Hvv + (1.0 - 2.0 * a) / (2.0 * ru) * cross + Hee;
    ws.Q_d1 = 0.5 / ra * V_err_a.adjoint() - 0.5 / rb * V_a.adjoint();
    ws.H_d2 = -1.0 / (4.0 * u * ru) * cross;
    ws.Q_d2 = -0.25 / (a * ra) * V_err_a.adjoint() - 0.25 / ((1.0 - a) * rb) * V_a.adjoint();

    const Eigen::SelfAdjointEigenSolver<CMat> es(ws.H);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12)
        throw SingularHError("normal matrix is singular or too ill-conditioned");

    const Eigen::LLT<CMat> llt(ws.H);
    const CMat B = llt.solve(ws.Q);
    const CMat B1 = llt.solve(ws.Q_d1 - ws.H_d1 * B);
    const CMat B2 = llt.solve(ws.Q_d2 - ws.H_d2 * B - 2.0 * ws.H_d1 * B1);
    ws.P_a = B.transpose();
    ws.P_ad1 = B1.transpose();
    ws.P_ad2 = B2.transpose();
    return ws;
}

/// Worst-case design objective at imperfection level alpha: the
/// phase-averaged error with the estimate shrunk to sqrt(1-alpha) V_a and
/// the error floor carried by the level-alpha inverting precoder.
inline double wrgdpa_objective(const CMat& V_a, const CMat& V_err_a, double alpha, const RVec& d,
                               const CMat& W, const LinkBudget& link) {
    const auto ws = wrgdpa_workspace(V_a, V_err_a, alpha);
    const double err = link.rho_f * alpha * (V_err_a.transpose() * ws.P_a).squaredNorm();
    return mse_unconditioned_alpha(d, W, V_a, alpha, link, err);
}

struct AlphaDerivatives {
    double first = 0.0;
    double second = 0.0;
    WrgdpaWorkspace ws;
};

/// First and second derivative of the worst-case objective in alpha, using
/// the workspace's precoder derivative blocks.
inline AlphaDerivatives wrgdpa_alpha_derivatives(const CMat& V_a, const CMat& V_err_a,
                                                 double alpha, const RVec& d, const CMat& W,
                                                 const LinkBudget& link) {
    if (W.rows() != V_a.rows() || W.cols() != d.size())
        throw DimensionError("precoder directions must be antennas x coefficients");
    AlphaDerivatives out;
    out.ws = wrgdpa_workspace(V_a, V_err_a, alpha);
    const double rho = link.rho_f;

    const CMat BV = V_a.transpose() * W;
    double c_sig = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j)
        c_sig += d(j) * d(j) * BV.col(j).squaredNorm();
    c_sig *= rho;

    const CMat Y = V_err_a.transpose() * out.ws.P_a;
    const CMat Y1 = V_err_a.transpose() * out.ws.P_ad1;
    const CMat Y2 = V_err_a.transpose() * out.ws.P_ad2;
    const double t = rho * Y.squaredNorm();
    const double t_d1 = 2.0 * rho * (Y1.adjoint() * Y).trace().real();
    const double t_d2 = 2.0 * rho * ((Y2.adjoint() * Y).trace().real() + Y1.squaredNorm());

    out.first = -c_sig + t + alpha * t_d1;
    out.second = 2.0 * t_d1 + alpha * t_d2;
    return out;
}

/// Worst-case-aware power allocation. Phase one locates the worst
/// imperfection level in the bound interval: a strictly convex objective
/// peaks at an endpoint, otherwise a step-halving gradient ascent runs from
/// alpha0 and the iterate is projected back into the interval. Phase two
/// descends the phase-averaged error at the worst level, and phase three
/// rescales to the budget only when it is actually violated.
inline PowerResult wrgdpa(const CMat& V_a, const CMat& V_err_a, const CMat& W,
                          const LinkBudget& link, const RobustnessBounds& b,
                          const SolverParams& sp, const RVec& d0, double alpha0) {
    if (W.rows() != V_a.rows() || W.cols() != d0.size())
        throw DimensionError("precoder directions must be antennas x coefficients");
    constexpr double eps = 1e-6;
    const double lo = b.alpha_lo, hi = b.alpha_hi;
    if (!(lo > 0.0 && hi < 1.0 && lo <= hi))
        throw DomainError("bound interval must satisfy 0 < lo <= hi < 1");

    auto E = [&](double a) {
        return wrgdpa_objective(V_a, V_err_a, std::clamp(a, eps, 1.0 - eps), d0, W, link);
    };
    const double a0 = std::clamp(alpha0, eps, 1.0 - eps);
    const auto der = wrgdpa_alpha_derivatives(V_a, V_err_a, a0, d0, W, link);
    const double f0 = E(a0);

    double alpha_w;
    if (der.second > sp.hessian_tol * std::abs(f0)) {
        alpha_w = (E(lo) >= E(hi)) ? lo : hi;
    } else {
        double a = a0, fa = f0, g = der.first;
        double step = (g != 0.0) ? sp.step_alpha_ascent * (hi - lo) / std::abs(g) : 0.0;
        for (int i = 0; i < sp.iters_alpha && step > 0.0; ++i) {
            const double cand = std::clamp(a + step * g, eps, 1.0 - eps);
            const double fc = E(cand);
            if (fc > fa) {
                a = cand;
                fa = fc;
                g = wrgdpa_alpha_derivatives(V_a, V_err_a, a, d0, W, link).first;
            } else {
                step *= 0.5;
            }
            if (step * std::max(std::abs(g), 1.0) < 1e-15) break;
        }
        alpha_w = std::clamp(a, lo, hi);
    }

    const auto wsw = wrgdpa_workspace(V_a, V_err_a, std::clamp(alpha_w, eps, 1.0 - eps));
    const double err = link.rho_f * alpha_w * (V_err_a.transpose() * wsw.P_a).squaredNorm();
    const CMat G_hat_w = std::sqrt(1.0 - alpha_w) * V_a;
    auto obj = [&](const RVec& d) { return mse_unconditioned(d, W, G_hat_w, link, err); };
    auto grad = [&](const RVec& d) { return mse_grad_d(d, W, G_hat_w, link); };
    auto res = detail::descend(d0, sp.iters_d, sp.step_d, sp.backtracking, grad, obj);

    PowerResult pr;
    pr.d_raw = res.d;
    pr.objective_trace = std::move(res.trace);
    pr.diverged = res.diverged;
    pr.alpha_worst = alpha_w;
    double current = 0.0;
    for (Eigen::Index j = 0; j < res.d.size(); ++j)
        current += res.d(j) * res.d(j) * W.col(j).squaredNorm();
    if (std::abs(current - link.power_budget) > 1e-9 * link.power_budget) {
        pr.d = power_scale(W, res.d, link.power_budget);
        pr.scaled = true;
    } else {
        pr.d = res.d;
        pr.scaled = false;
    }
    pr.d_nonnegative = (pr.d.array() >= 0.0).all();
    return pr;
}

} // namespace cfra
