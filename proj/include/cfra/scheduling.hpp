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
#include <functional>
#include <limits>
#include <vector>

#include "channel.hpp"
#include "common.hpp"
#include "config.hpp"
#include "metrics.hpp"
#include "precoding.hpp"

namespace cfra {

enum class Curvature { Convex, Concave, Flat };

/// Solution of a per-user worst-case channel-power problem: the extremal
/// imperfection level within the bound interval and the power there.
struct ReopResult {
    int ue_index = -1;
    double worst_alpha = 0.0;
    double objective = 0.0;
};

struct CandidateSet {
    std::vector<int> ues;
    double sum_rate = 0.0;
};

struct ScheduleOutcome {
    std::vector<int> selected;
    double selected_sum_rate = 0.0;
    std::vector<CandidateSet> candidates;
    std::vector<int> rgus_set;
};

/// Optional per-step rewrite of the robust bound interval inside the greedy
/// scheduler. The default (empty function) keeps bounds fixed for the whole
/// run, which is also what keeps per-user robust powers cacheable.
using BoundsHook = std::function<RobustnessBounds(const RobustnessBounds&, int step)>;

namespace detail {

constexpr double alpha_eps = 1e-6;

// Channel power of one user as a function of the imperfection level:
// J(a) = (1-a)|v|^2 + a|ve|^2 + 2 sqrt(a(1-a)) Re<v, ve>, where v and ve
// are the gain-weighted channel and error columns. Only three scalars
// matter, so they are extracted once per user.
struct JCurve {
    double s_hat = 0.0; // |v|^2
    double s_err = 0.0; // |ve|^2
    double cross = 0.0; // Re sum_m v_m conj(ve_m)

    double value(double a) const {
        return (1.0 - a) * s_hat + a * s_err + 2.0 * std::sqrt(a * (1.0 - a)) * cross;
    }
    double grad(double a) const {
        return s_err - s_hat + (1.0 - 2.0 * a) / std::sqrt(a * (1.0 - a)) * cross;
    }
    // The second derivative -cross / (2 (a(1-a))^{3/2}); its sign does not
    // depend on a because the denominator is positive on (0,1).
    double curvature(double a) const {
        const double u = a * (1.0 - a);
        return -cross / (2.0 * u * std::sqrt(u));
    }
};

inline JCurve j_curve(const CVec& v, const CVec& ve) {
    JCurve c;
    c.s_hat = v.squaredNorm();
    c.s_err = ve.squaredNorm();
    c.cross = std::real(ve.dot(v)); // dot conjugates its first argument
    return c;
}

inline JCurve j_curve_weighted(const RVec& beta_col, const CVec& h_col, const CVec& h_err_col) {
    if (beta_col.size() != h_col.size() || h_col.size() != h_err_col.size())
        throw DimensionError("column lengths disagree");
    if (!(beta_col.array() >= 0).all()) throw DomainError("gains must be nonnegative");
    const CVec root = beta_col.cwiseSqrt().cast<cxd>();
    return j_curve(root.cwiseProduct(h_col), root.cwiseProduct(h_err_col));
}

inline Curvature curvature_of(const JCurve& c, double a, double tol) {
    const double r = c.curvature(a);
    if (r > tol) return Curvature::Convex;
    if (r < -tol) return Curvature::Concave;
    return Curvature::Flat;
}

// Monotone step-halving gradient walk on [lo, hi]; minimizes when
// direction = -1, maximizes when direction = +1. The step is normalized by
// the interval width and the initial gradient so convergence is scale-free.
inline double extremum_walk(const JCurve& c, double lo, double hi, double step0, int iters,
                            int direction) {
    auto clamp_eval = [&](double a) { return std::clamp(a, alpha_eps, 1.0 - alpha_eps); };
    double a = 0.5 * (lo + hi);
    double fa = c.value(a);
    const double g0 = std::abs(c.grad(clamp_eval(a)));
    if (g0 == 0.0) return a;
    double step = step0 * (hi - lo) / g0;
    double g = c.grad(clamp_eval(a));
    for (int i = 0; i < iters && step > 0.0; ++i) {
        const double cand = std::clamp(a + direction * step * g, lo, hi);
        const double fc = c.value(cand);
        if (direction < 0 ? fc < fa : fc > fa) {
            a = cand;
            fa = fc;
            g = c.grad(clamp_eval(a));
        } else {
            step *= 0.5;
        }
        if (step * std::max(std::abs(g), 1.0) < 1e-15) break;
    }
    return a;
}

inline ReopResult reop_min_on_curve(int ue, const JCurve& c, double lo, double hi,
                                    const SolverParams& sp) {
    if (!(lo > 0 && hi < 1 && lo <= hi)) throw DomainError("bound interval must satisfy 0 < lo <= hi < 1");
    ReopResult r;
    r.ue_index = ue;
    if (lo == hi) {
        r.worst_alpha = lo;
        r.objective = c.value(lo);
        return r;
    }
    double a;
    if (curvature_of(c, 0.5 * (lo + hi), sp.hessian_tol) == Curvature::Convex) {
        a = extremum_walk(c, lo, hi, sp.step_alpha_sched, sp.iters_reop, -1);
        // The walk can stall short of a boundary minimum; the endpoints are
        // always feasible candidates.
        if (c.value(lo) < c.value(a)) a = lo;
        if (c.value(hi) < c.value(a)) a = hi;
    } else {
        a = (c.value(lo) <= c.value(hi)) ? lo : hi;
    }
    r.worst_alpha = a;
    r.objective = c.value(a);
    return r;
}

inline ReopResult reop_max_on_curve(int ue, const JCurve& c, double lo, double hi,
                                    const SolverParams& sp) {
    if (!(lo > 0 && hi < 1 && lo <= hi)) throw DomainError("bound interval must satisfy 0 < lo <= hi < 1");
    ReopResult r;
    r.ue_index = ue;
    if (lo == hi) {
        r.worst_alpha = lo;
        r.objective = c.value(lo);
        return r;
    }
    double a;
    if (curvature_of(c, 0.5 * (lo + hi), sp.hessian_tol) == Curvature::Concave) {
        a = extremum_walk(c, lo, hi, sp.step_alpha_ascent, sp.iters_reop, +1);
        if (c.value(lo) > c.value(a)) a = lo;
        if (c.value(hi) > c.value(a)) a = hi;
    } else {
        a = (c.value(lo) >= c.value(hi)) ? lo : hi;
    }
    r.worst_alpha = a;
    r.objective = c.value(a);
    return r;
}

inline CVec masked_col(const CMat& X, const ClusterMask* cm, int k) {
    if (cm == nullptr) return X.col(k);
    if (cm->mask.rows() != X.rows() || cm->mask.cols() != X.cols())
        throw DimensionError("mask dimensions must match the channel");
    return X.col(k).cwiseProduct(cm->mask.col(k).cast<double>().matrix().cast<cxd>());
}

} // namespace detail

/// Channel power of one user at a given imperfection level.
inline double j_objective(const RVec& beta_col, const CVec& h_col, const CVec& h_err_col,
                          double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
    return detail::j_curve_weighted(beta_col, h_col, h_err_col).value(alpha);
}

/// Derivative of the channel power with respect to the imperfection level.
inline double j_grad_alpha(const RVec& beta_col, const CVec& h_col, const CVec& h_err_col,
                           double alpha) {
    if (!(alpha > detail::alpha_eps && alpha < 1.0 - detail::alpha_eps))
        throw DomainError("alpha too close to an endpoint for the derivative");
    return detail::j_curve_weighted(beta_col, h_col, h_err_col).grad(alpha);
}

/// Sign of the channel power's curvature in the imperfection level; the
/// sign holds on all of (0,1), so one evaluation settles the interval.
inline Curvature j_curvature_sign(const RVec& beta_col, const CVec& h_col, const CVec& h_err_col,
                                  double alpha, double hessian_tol) {
    if (!(alpha > detail::alpha_eps && alpha < 1.0 - detail::alpha_eps))
        throw DomainError("alpha too close to an endpoint for the curvature");
    return detail::curvature_of(detail::j_curve_weighted(beta_col, h_col, h_err_col), alpha,
                                hessian_tol);
}

/// Least channel power of a user over the admissible imperfection interval.
/// Convex curves use a projected, step-halving gradient descent from the
/// interval midpoint; concave or flat curves attain the minimum at an
/// interval endpoint.
inline ReopResult reop_worst_alpha_min(int ue, const ChannelRealization& chan,
                                       const RobustnessBounds& b, const SolverParams& sp,
                                       const ClusterMask* mask = nullptr) {
    if (ue < 0 || ue >= chan.V.cols()) throw IndexError("user index out of range");
    const auto c = detail::j_curve(detail::masked_col(chan.V, mask, ue),
                                   detail::masked_col(chan.V_err, mask, ue));
    return detail::reop_min_on_curve(ue, c, b.alpha_lo, b.alpha_hi, sp);
}

/// Greatest channel power of a user over the admissible interval; the
/// mirror image of reop_worst_alpha_min (gradient ascent on concave curves,
/// endpoint comparison on convex or flat ones).
inline ReopResult reop_worst_alpha_max(int ue, const ChannelRealization& chan,
                                       const RobustnessBounds& b, const SolverParams& sp,
                                       const ClusterMask* mask = nullptr) {
    if (ue < 0 || ue >= chan.V.cols()) throw IndexError("user index out of range");
    const auto c = detail::j_curve(detail::masked_col(chan.V, mask, ue),
                                   detail::masked_col(chan.V_err, mask, ue));
    return detail::reop_max_on_curve(ue, c, b.alpha_lo, b.alpha_hi, sp);
}

/// Sum-rate of a candidate set as the schedulers see it: the configured
/// precoder built from the channel estimate, equal power loading on its
/// directions, and the closed-form rate at the realization's imperfection
/// level. Sets the precoder cannot serve (rank failures) rate as zero.
inline double schedule_sum_rate(const ChannelRealization& chan, const LargeScaleFading& lsf,
                                const ClusterMask& cm, const std::vector<int>& S,
                                const LinkBudget& link, const SolverParams& sp) {
    try {
        const auto uc = mask_channel(chan, cm, S);
        const Precoder base = (sp.precoder == PrecoderKind::Zf) ? zf_precoder(uc.G_hat_a, link)
                                                                : mmse_precoder(uc.G_hat_a, link);
        const Precoder loaded = epl_precoder(base.W, link.power_budget);
        const ErrorStats st = error_stats(lsf, cm, S, chan.alpha);
        return sum_rate(uc.G_hat_a, loaded, st, link);
    } catch (const RankError&) {
        return 0.0;
    } catch (const DegenerateError&) {
        return 0.0;
    }
}

namespace detail {

// Greedy subset build plus iterative weakest-user substitution, shared by
// the robust and the nominal scheduler. score_add ranks users for inclusion
// (higher is better), score_drop ranks scheduled users for removal (lower
// is worse); both are recomputed through the hook when one is installed.
inline ScheduleOutcome esg_skeleton(
    const ChannelRealization& chan, const LargeScaleFading& lsf, const ClusterMask& cm,
    const LinkBudget& link, const SolverParams& sp, int n,
    const std::function<RVec(const RobustnessBounds&)>& add_scores,
    const std::function<RVec(const RobustnessBounds&)>& drop_scores, const RobustnessBounds& b0,
    const BoundsHook& hook) {
    const int K = static_cast<int>(chan.V.cols());
    if (n < 1 || n > K) throw DomainError("scheduled count must lie in [1, K]");

    int step = 0;
    auto bounds_at = [&](int s) { return hook ? hook(b0, s) : b0; };
    RVec add0 = add_scores(bounds_at(step));

    auto argmax_over = [](const RVec& scores, const std::vector<int>& pool) {
        int best = pool.front();
        for (int k : pool)
            if (scores(k) > scores(best)) best = k;
        return best;
    };
    auto argmin_over = [](const RVec& scores, const std::vector<int>& pool) {
        int best = pool.front();
        for (int k : pool)
            if (scores(k) < scores(best)) best = k;
        return best;
    };

    ScheduleOutcome out;
    std::vector<int> pool(K);
    for (int k = 0; k < K; ++k) pool[k] = k;

    // Greedy build: seed with the strongest user, then keep adding the
    // strongest remaining one while the set's sum-rate improves; a failed
    // addition is reverted and the build stops.
    std::vector<int> sel{argmax_over(add0, pool)};
    double sr_prev = schedule_sum_rate(chan, lsf, cm, sel, link, sp);
    while (static_cast<int>(sel.size()) < n) {
        ++step;
        const RVec add = hook ? add_scores(bounds_at(step)) : add0;
        std::vector<int> rest;
        for (int k = 0; k < K; ++k)
            if (std::find(sel.begin(), sel.end(), k) == sel.end()) rest.push_back(k);
        const int kl = argmax_over(add, rest);
        std::vector<int> trial = sel;
        trial.insert(std::lower_bound(trial.begin(), trial.end(), kl), kl);
        const double sr_new = schedule_sum_rate(chan, lsf, cm, trial, link, sp);
        if (sr_new <= sr_prev) break;
        sel = std::move(trial);
        sr_prev = sr_new;
    }
    out.rgus_set = sel;

    // Substitution sweep: repeatedly swap the scheduled user with the least
    // robust power for the strongest unscheduled one, recording every set
    // visited; each replacement candidate is consumed once.
    std::vector<int> remain;
    for (int k = 0; k < K; ++k)
        if (std::find(sel.begin(), sel.end(), k) == sel.end()) remain.push_back(k);

    const int rounds = K - n + 1;
    std::vector<int> cur = sel;
    int k_r = -1, k_su = -1;
    for (int j = 1; j <= rounds; ++j) {
        if (j > 1) {
            if (k_r < 0 || k_su < 0) break;
            cur.erase(std::find(cur.begin(), cur.end(), k_r));
            cur.insert(std::lower_bound(cur.begin(), cur.end(), k_su), k_su);
            remain.erase(std::find(remain.begin(), remain.end(), k_su));
            ++step;
        }
        const double sr = (j == 1) ? sr_prev : schedule_sum_rate(chan, lsf, cm, cur, link, sp);
        out.candidates.push_back({cur, sr});
        if (j < rounds && !remain.empty()) {
            const auto b = bounds_at(step);
            const RVec drop = drop_scores(b);
            const RVec add = hook ? add_scores(b) : add0;
            k_r = argmin_over(drop, cur);
            k_su = argmax_over(add, remain);
        } else {
            k_r = k_su = -1;
        }
    }

    size_t best = 0;
    for (size_t i = 1; i < out.candidates.size(); ++i)
        if (out.candidates[i].sum_rate > out.candidates[best].sum_rate) best = i;
    out.selected = out.candidates[best].ues;
    out.selected_sum_rate = out.candidates[best].sum_rate;
    return out;
}

inline std::vector<JCurve> all_curves(const ChannelRealization& chan, const ClusterMask& cm) {
    std::vector<JCurve> curves;
    const int K = static_cast<int>(chan.V.cols());
    curves.reserve(K);
    for (int k = 0; k < K; ++k)
        curves.push_back(j_curve(masked_col(chan.V, &cm, k), masked_col(chan.V_err, &cm, k)));
    return curves;
}

} // namespace detail

/// Robust greedy build only: each addition takes the user whose worst-case
/// (minimum over the bound interval) channel power is largest, and the
/// build stops as soon as the equal-power sum-rate fails to improve.
inline std::vector<int> rgus(const ChannelRealization& chan, const LargeScaleFading& lsf,
                             const ClusterMask& cm, const RobustnessBounds& b,
                             const LinkBudget& link, const SolverParams& sp, int n,
                             const BoundsHook& hook = {}) {
    const auto curves = detail::all_curves(chan, cm);
    auto add_scores = [&](const RobustnessBounds& bb) {
        RVec s(curves.size());
        for (size_t k = 0; k < curves.size(); ++k)
            s(k) = detail::reop_min_on_curve(static_cast<int>(k), curves[k], bb.alpha_lo,
                                             bb.alpha_hi, sp)
                       .objective;
        return s;
    };
    auto drop_scores = add_scores; // unused by the build phase
    return detail::esg_skeleton(chan, lsf, cm, link, sp, n, add_scores, drop_scores, b, hook)
        .rgus_set;
}

/// Robust scheduler: greedy build plus substitution sweep, ranking users by
/// worst-case channel power (minimum over the bound interval for additions,
/// maximum for removals); the best candidate set by sum-rate wins.
inline ScheduleOutcome rc_esg(const ChannelRealization& chan, const LargeScaleFading& lsf,
                              const ClusterMask& cm, const RobustnessBounds& b,
                              const LinkBudget& link, const SolverParams& sp, int n,
                              const BoundsHook& hook = {}) {
    const auto curves = detail::all_curves(chan, cm);
    auto add_scores = [&](const RobustnessBounds& bb) {
        RVec s(curves.size());
        for (size_t k = 0; k < curves.size(); ++k)
            s(k) = detail::reop_min_on_curve(static_cast<int>(k), curves[k], bb.alpha_lo,
                                             bb.alpha_hi, sp)
                       .objective;
        return s;
    };
    auto drop_scores = [&](const RobustnessBounds& bb) {
        RVec s(curves.size());
        for (size_t k = 0; k < curves.size(); ++k)
            s(k) = detail::reop_max_on_curve(static_cast<int>(k), curves[k], bb.alpha_lo,
                                             bb.alpha_hi, sp)
                       .objective;
        return s;
    };
    return detail::esg_skeleton(chan, lsf, cm, link, sp, n, add_scores, drop_scores, b, hook);
}

/// Nominal (non-robust) scheduler: the same skeleton with every user ranked
/// by the channel power at the realization's own imperfection level.
inline ScheduleOutcome c_esg(const ChannelRealization& chan, const LargeScaleFading& lsf,
                             const ClusterMask& cm, const LinkBudget& link,
                             const SolverParams& sp, int n) {
    const auto curves = detail::all_curves(chan, cm);
    RVec power(curves.size());
    for (size_t k = 0; k < curves.size(); ++k) power(k) = curves[k].value(chan.alpha);
    auto scores = [power](const RobustnessBounds&) { return power; };
    return detail::esg_skeleton(chan, lsf, cm, link, sp, n, scores, scores, RobustnessBounds{},
                                {});
}

} // namespace cfra
