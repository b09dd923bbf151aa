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
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <cfra/cfra.hpp>

namespace cfra::acceptance {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool passed = false;
    // Criteria whose target ordering cannot emerge from the algorithms as
    // specified carry expect_pass = false; docs/expectations.md derives why.
    // A run is surprising when any outcome differs from its expectation.
    bool expect_pass = true;
    std::string detail;
};

namespace detail {

struct Toy {
    LargeScaleFading lsf;
    ClusterMask cm;
    ChannelRealization chan;
    UserCentricChannel uc;
    std::vector<int> S;
    LinkBudget link;
};

inline Toy make_toy(int L, int N, int K, int n, double alpha, std::uint64_t seed) {
    NetworkConfig net;
    net.num_aps = L;
    net.antennas_per_ap = N;
    net.num_ues = K;
    net.num_scheduled = n;
    Toy t;
    t.lsf = generate_lsf(net, seed);
    const auto [H, He] = generate_small_scale(L * N, K, seed);
    t.chan = compose_channel(t.lsf, H, He, alpha);
    t.cm = cluster_aps(t.lsf);
    t.S.resize(n);
    std::iota(t.S.begin(), t.S.end(), 0);
    t.uc = mask_channel(t.chan, t.cm, t.S);
    return t;
}

inline CMat sample_masked_error(const LargeScaleFading& lsf, const ClusterMask& cm,
                                const std::vector<int>& S, double alpha, Rng& rng) {
    const auto M = lsf.beta.rows();
    CMat E = CMat::Zero(M, static_cast<Eigen::Index>(S.size()));
    for (size_t j = 0; j < S.size(); ++j)
        for (Eigen::Index m = 0; m < M; ++m)
            if (cm.mask(m, S[j]))
                E(m, static_cast<Eigen::Index>(j)) =
                    std::sqrt(alpha * lsf.beta(m, S[j])) * rng.cnormal();
    return E;
}

struct Column {
    RVec beta;
    CVec h;
    CVec he;
};

inline Column random_column(int M, std::uint64_t seed) {
    Rng rng(seed);
    Column c{RVec(M), CVec(M), CVec(M)};
    for (int m = 0; m < M; ++m) {
        c.beta(m) = 0.1 + rng.uniform();
        c.h(m) = rng.cnormal();
        c.he(m) = rng.cnormal();
    }
    return c;
}

inline double cross_term(const Column& c) {
    double acc = 0.0;
    for (int m = 0; m < c.beta.size(); ++m)
        acc += c.beta(m) * std::real(c.h(m) * std::conj(c.he(m)));
    return acc;
}

inline ChannelRealization column_channel(const Column& c, double alpha) {
    ChannelRealization chan;
    const CVec root = c.beta.cwiseSqrt().cast<cxd>();
    chan.V = root.cwiseProduct(c.h);
    chan.V_err = root.cwiseProduct(c.he);
    chan.alpha = alpha;
    return chan;
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(3) << x;
    return os.str();
}

// Slope of ln(y) against ln(x) by least squares.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::max(y[i], 1e-4));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Coefficient of determination of the best straight-line fit y = a + b x.
inline double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double a = (sy - b * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (size_t i = 0; i < n; ++i) {
        ss_res += (y[i] - (a + b * x[i])) * (y[i] - (a + b * x[i]));
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    return ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
}

inline double log2_det_llt(const CMat& A) {
    const Eigen::LLT<CMat> llt(A);
    double acc = 0.0;
    const CMat L = llt.matrixL();
    for (Eigen::Index i = 0; i < L.rows(); ++i) acc += std::log2(std::abs(L(i, i)));
    return 2.0 * acc;
}

} // namespace detail

/// Analytic first and second derivatives against central finite differences:
/// the error gradients in d, the scheduling power-curve slope in alpha, and
/// the worst-case objective's alpha derivatives.
inline CriterionResult criterion_derivatives() {
    CriterionResult r{1, "derivative formulas vs finite differences", false, true, ""};
    double worst_first = 0.0, worst_second = 0.0;

    for (int i = 0; i < 100; ++i) {
        const auto toy = detail::make_toy(2, 2, 5, 2, 0.2, 3000 + i);
        const auto pre = mmse_precoder(toy.uc.G_hat_a, toy.link);
        Rng rng(9000 + i);
        RVec d(2);
        d << 0.4 + rng.uniform(), 0.4 + rng.uniform();
        const RVec gc = mse_grad_d_conditioned(d, pre.W, toy.uc.G_hat_a, toy.link);
        const RVec gu = mse_grad_d(d, pre.W, toy.uc.G_hat_a, toy.link);
        const RVec fc = finite_diff_grad(
            [&](const RVec& x) {
                return mse_conditioned(x, pre.W, toy.uc.G_hat_a, toy.link, 0.3);
            },
            d, 1e-6);
        const RVec fu = finite_diff_grad(
            [&](const RVec& x) {
                return mse_unconditioned(x, pre.W, toy.uc.G_hat_a, toy.link, 0.3);
            },
            d, 1e-6);
        for (int j = 0; j < 2; ++j) {
            worst_first = std::max(worst_first,
                                   std::abs(gc(j) - fc(j)) / std::max(std::abs(fc(j)), 1.0));
            worst_first = std::max(worst_first,
                                   std::abs(gu(j) - fu(j)) / std::max(std::abs(fu(j)), 1.0));
        }
    }

    for (int i = 0; i < 100; ++i) {
        const auto c = detail::random_column(6, 4000 + i);
        const double a = 0.1 + 0.8 * (i / 99.0);
        const double g = j_grad_alpha(c.beta, c.h, c.he, a);
        const double fd = finite_diff(
            [&](double x) { return j_objective(c.beta, c.h, c.he, x); }, a, 1e-6);
        worst_first = std::max(worst_first, std::abs(g - fd) / std::max(std::abs(fd), 1.0));
    }

    int done = 0;
    for (std::uint64_t seed = 5000; done < 100; ++seed) {
        try {
            const auto toy = detail::make_toy(2, 2, 5, 2, 0.15, seed);
            const auto pre = zf_precoder(toy.uc.G_hat_a, toy.link);
            const double a = 0.1 + 0.7 * (done / 99.0);
            const auto der = wrgdpa_alpha_derivatives(toy.uc.V_a, toy.uc.V_err_a, a, pre.d,
                                                      pre.W, toy.link);
            auto E = [&](double x) {
                return wrgdpa_objective(toy.uc.V_a, toy.uc.V_err_a, x, pre.d, pre.W, toy.link);
            };
            const double fd1 = finite_diff(E, a, 1e-5);
            const double fd2 = finite_diff_second(E, a, 1e-4);
            worst_first =
                std::max(worst_first, std::abs(der.first - fd1) / std::max(std::abs(fd1), 1.0));
            worst_second = std::max(worst_second,
                                    std::abs(der.second - fd2) / std::max(std::abs(fd2), 1.0));
            ++done;
        } catch (const RankError&) {
        } catch (const SingularHError&) {
        }
    }

    r.passed = worst_first < 1e-5 && worst_second < 1e-3;
    r.detail = "first max rel " + detail::fmt(worst_first) + ", second max rel " +
               detail::fmt(worst_second);
    return r;
}

/// Closed-form error statistics against the Monte Carlo oracle: per-entry
/// error second moments and the aggregate error-power term, each within
/// three standard errors.
inline CriterionResult criterion_error_statistics() {
    CriterionResult r{2, "error statistics vs monte carlo", false, true, ""};
    double worst_z = 0.0;
    bool ok = true;
    const double alpha = 0.2;
    for (int i = 0; i < 20; ++i) {
        const auto toy = detail::make_toy(2, 2, 5, 2, alpha, 6000 + i);
        const auto st = error_stats(toy.lsf, toy.cm, toy.S, alpha);
        Rng rng(6100 + i);
        const auto mc = mc_expectation(
            [&](std::int64_t) {
                return CMat(detail::sample_masked_error(toy.lsf, toy.cm, toy.S, alpha, rng)
                                .cwiseAbs2()
                                .cast<cxd>());
            },
            2000);
        for (Eigen::Index m = 0; m < st.per_ue_weights.rows(); ++m) {
            for (Eigen::Index j = 0; j < st.per_ue_weights.cols(); ++j) {
                const double gap = std::abs(mc.mean(m, j).real() - st.per_ue_weights(m, j));
                const double se = mc.std_error(m, j);
                if (se == 0.0) {
                    ok = ok && gap <= 1e-12;
                } else {
                    worst_z = std::max(worst_z, gap / se);
                    ok = ok && gap <= 3.0 * se;
                }
            }
        }

        const auto pre = mmse_precoder(toy.uc.G_hat_a, toy.link);
        const double closed = error_power_term(pre.P, st, toy.link.rho_f);
        Rng rng2(6200 + i);
        const auto [mc_mean, mc_se] = mc_expectation_scalar(
            [&](std::int64_t) {
                const CMat E =
                    detail::sample_masked_error(toy.lsf, toy.cm, toy.S, alpha, rng2);
                return toy.link.rho_f * (E.transpose() * pre.P).squaredNorm();
            },
            2000);
        const double gap = std::abs(mc_mean - closed);
        worst_z = std::max(worst_z, gap / mc_se);
        ok = ok && gap <= 3.0 * mc_se;
    }
    r.passed = ok;
    r.detail = "max |z| " + detail::fmt(worst_z) + " over 20 instances";
    return r;
}

/// Closed-form sum rate against a Monte Carlo covariance-ratio estimate with
/// sampled error channels on 8-antenna, 4-user schedules.
inline CriterionResult criterion_sum_rate_mc() {
    CriterionResult r{3, "sum rate vs covariance-ratio monte carlo", false, true, ""};
    double worst_z = 0.0;
    bool ok = true;
    const double alpha = 0.15;
    for (int i = 0; i < 3; ++i) {
        const auto toy = detail::make_toy(4, 2, 6, 4, alpha, 6500 + i);
        const auto base = mmse_precoder(toy.uc.G_hat_a, toy.link);
        const Precoder pre = epl_precoder(base.W, toy.link.power_budget);
        const auto st = error_stats(toy.lsf, toy.cm, toy.S, alpha);
        const double closed = sum_rate(toy.uc.G_hat_a, pre, st, toy.link);

        const CMat Bs = std::sqrt(toy.link.rho_f) * (toy.uc.G_hat_a.transpose() * pre.P);
        const CMat sig = Bs * Bs.adjoint();
        Rng rng(6600 + i);
        // The plug-in log-det estimate carries an O(1/per_batch) bias, so the
        // batch size must keep that bias well inside the 3-standard-error band.
        const int batches = 12, per_batch = 8000;
        std::vector<double> sr_b(batches);
        const Eigen::Index ns = pre.P.cols();
        for (int b = 0; b < batches; ++b) {
            CMat acc = CMat::Zero(ns, ns);
            for (int s = 0; s < per_batch; ++s) {
                const CMat E =
                    detail::sample_masked_error(toy.lsf, toy.cm, toy.S, alpha, rng);
                const CMat Y = std::sqrt(toy.link.rho_f) * (E.transpose() * pre.P);
                acc += Y * Y.adjoint();
            }
            CMat r_err = acc / per_batch;
            r_err.diagonal().array() += toy.link.noise_var;
            const CMat r_full = r_err + sig;
            sr_b[b] = detail::log2_det_llt(r_full) - detail::log2_det_llt(r_err);
        }
        double mean = 0.0;
        for (double v : sr_b) mean += v;
        mean /= batches;
        double var = 0.0;
        for (double v : sr_b) var += (v - mean) * (v - mean);
        const double se = std::sqrt(var / (batches - 1) / batches);
        const double z = std::abs(mean - closed) / se;
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 3.0;
    }
    r.passed = ok;
    r.detail = "max |z| " + detail::fmt(worst_z) + " over 3 instances";
    return r;
}

/// Phase-averaged error formula against a direct symbol-level simulation
/// with randomized channel phase and sampled error channels.
inline CriterionResult criterion_error_simulation() {
    CriterionResult r{4, "phase-averaged error vs direct simulation", false, true, ""};
    double worst_z = 0.0;
    bool ok = true;
    const double alpha = 0.2;
    for (int i = 0; i < 3; ++i) {
        const auto toy = detail::make_toy(2, 2, 5, 2, alpha, 7000 + i);
        const auto pre = mmse_precoder(toy.uc.G_hat_a, toy.link);
        const auto st = error_stats(toy.lsf, toy.cm, toy.S, alpha);
        const double err = error_power_term(pre.P, st, toy.link.rho_f);
        const double closed = mse_unconditioned(pre.d, pre.W, toy.uc.G_hat_a, toy.link, err);

        Rng rng(7100 + i);
        const double rho = toy.link.rho_f;
        const auto [mc_mean, mc_se] = mc_expectation_scalar(
            [&](std::int64_t) {
                CVec x(2), w(2);
                for (int j = 0; j < 2; ++j) x(j) = rng.cnormal();
                const double sw = std::sqrt(toy.link.noise_var);
                for (int j = 0; j < 2; ++j) w(j) = sw * rng.cnormal();
                const cxd phase = std::exp(cxd(0.0, 2.0 * std::numbers::pi * rng.uniform()));
                const CMat E =
                    detail::sample_masked_error(toy.lsf, toy.cm, toy.S, alpha, rng);
                const CVec y =
                    std::sqrt(rho) * ((phase * toy.uc.G_hat_a + E).transpose() * (pre.P * x)) +
                    w;
                return (x - y).squaredNorm();
            },
            12000);
        const double z = std::abs(mc_mean - closed) / mc_se;
        worst_z = std::max(worst_z, z);
        ok = ok && z <= 3.0;
    }
    r.passed = ok;
    r.detail = "max |z| " + detail::fmt(worst_z) + " over 3 instances";
    return r;
}

/// Worst-level search against a dense grid on curves covering every
/// curvature branch.
inline CriterionResult criterion_worst_level_search() {
    CriterionResult r{5, "worst-level search vs grid oracle", false, true, ""};
    SolverParams sp;
    RobustnessBounds b;
    b.alpha_lo = 0.05;
    b.alpha_hi = 0.45;
    double worst_rel = 0.0;
    int convex = 0, concave = 0, flat = 0;

    auto check = [&](const detail::Column& c) {
        switch (j_curvature_sign(c.beta, c.h, c.he, 0.25, 1e-9)) {
        case Curvature::Convex: ++convex; break;
        case Curvature::Concave: ++concave; break;
        case Curvature::Flat: ++flat; break;
        }
        const auto chan = detail::column_channel(c, 0.15);
        const auto g = grid_search_alpha(
            [&](double a) { return j_objective(c.beta, c.h, c.he, a); }, b.alpha_lo,
            b.alpha_hi, 10001);
        const auto lo = reop_worst_alpha_min(0, chan, b, sp);
        const auto hi = reop_worst_alpha_max(0, chan, b, sp);
        worst_rel = std::max(worst_rel,
                             std::abs(lo.objective - g.min) / std::max(std::abs(g.min), 1e-12));
        worst_rel = std::max(worst_rel,
                             std::abs(hi.objective - g.max) / std::max(std::abs(g.max), 1e-12));
    };

    for (int i = 0; i < 10; ++i) check(detail::random_column(6, 7500 + i));
    for (int i = 0; i < 5; ++i) {
        auto c = detail::random_column(6, 7600 + i);
        if (detail::cross_term(c) > 0) c.he = -c.he;
        check(c);
    }
    for (int i = 0; i < 5; ++i) {
        auto c = detail::random_column(6, 7700 + i);
        if (detail::cross_term(c) < 0) c.he = -c.he;
        check(c);
    }
    for (int i = 0; i < 3; ++i) {
        auto c = detail::random_column(6, 7800 + i);
        for (int m = 0; m < 6; ++m) c.he(m) = cxd(0, 1) * c.h(m);
        check(c);
    }

    r.passed = worst_rel <= 1e-4 && convex > 0 && concave > 0 && flat > 0;
    r.detail = "max rel gap " + detail::fmt(worst_rel) + " (" + std::to_string(convex) +
               " convex, " + std::to_string(concave) + " concave, " + std::to_string(flat) +
               " flat)";
    return r;
}

/// Robust greedy schedule against exhaustive enumeration on 200 seeded toy
/// networks; the pass thresholds were calibrated against the oracle once and
/// then frozen.
inline CriterionResult criterion_optimality_gap() {
    CriterionResult r{6, "greedy schedule vs exhaustive optimum", false, true, ""};
    RobustnessBounds b;
    SolverParams sp;
    const int seeds = 200;
    int hits = 0;
    double worst_ratio = 1.0, mean_ratio = 0.0;
    for (int s = 0; s < seeds; ++s) {
        const auto toy = detail::make_toy(4, 2, 6, 3, 0.15, 1000 + s);
        const auto out = rc_esg(toy.chan, toy.lsf, toy.cm, b, toy.link, sp, 3);
        const auto ex = exhaustive_schedule(toy.chan, toy.lsf, toy.cm, toy.link, sp, 3);
        const double ratio =
            ex.best_sum_rate > 0 ? out.selected_sum_rate / ex.best_sum_rate : 1.0;
        worst_ratio = std::min(worst_ratio, ratio);
        mean_ratio += ratio;
        if (ratio >= 0.90) ++hits;
    }
    mean_ratio /= seeds;
    r.passed = hits >= 190;
    r.detail = std::to_string(hits) + "/200 seeds at >=90% of optimum (mean ratio " +
               detail::fmt(mean_ratio) + ", worst " + detail::fmt(worst_ratio) + ")";
    return r;
}

/// Midpoint convexity of the conditioned error in d, and constancy of the
/// second difference of the channel power along any fixed error direction.
inline CriterionResult criterion_convexity() {
    CriterionResult r{7, "error convexity and affine error structure", false, true, ""};
    bool ok = true;
    double worst_violation = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto toy = detail::make_toy(2, 2, 5, 2, 0.2, 8000 + i);
        const auto pre = mmse_precoder(toy.uc.G_hat_a, toy.link);
        Rng rng(8100 + i);
        RVec d1(2), d2(2);
        for (int j = 0; j < 2; ++j) {
            d1(j) = 2.0 * rng.uniform();
            d2(j) = 2.0 * rng.uniform();
        }
        auto f = [&](const RVec& d) {
            return mse_conditioned(d, pre.W, toy.uc.G_hat_a, toy.link, 0.3);
        };
        const double mid = f(0.5 * (d1 + d2));
        const double violation = mid - 0.5 * (f(d1) + f(d2));
        worst_violation = std::max(worst_violation, violation);
        ok = ok && violation <= 1e-10;
    }

    double worst_spread = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto c = detail::random_column(5, 8200 + i);
        Rng rng(8300 + i);
        CVec dir(5);
        for (int m = 0; m < 5; ++m) dir(m) = rng.cnormal();
        auto g = [&](double t) {
            return j_objective(c.beta, c.h, CVec(c.he + t * dir), 0.3);
        };
        const double delta = 0.3;
        auto second_diff = [&](double t) {
            return g(t + delta) - 2.0 * g(t) + g(t - delta);
        };
        const double d0 = second_diff(-0.5), d1 = second_diff(0.0), d2 = second_diff(0.7);
        const double scale = std::max({std::abs(d0), std::abs(d1), std::abs(d2), 1.0});
        const double spread = (std::max({d0, d1, d2}) - std::min({d0, d1, d2})) / scale;
        worst_spread = std::max(worst_spread, spread);
        ok = ok && spread <= 1e-10;
    }

    r.passed = ok;
    r.detail = "max midpoint violation " + detail::fmt(worst_violation) +
               ", max second-difference spread " + detail::fmt(worst_spread);
    return r;
}

/// Interference nulling, budget exactness, and split/scale round trips of
/// the precoder layer.
inline CriterionResult criterion_precoder_contracts() {
    CriterionResult r{8, "precoder contracts", false, true, ""};
    double worst_null = 0.0, worst_budget = 0.0, worst_round = 0.0;
    int done = 0;
    for (std::uint64_t seed = 8500; done < 50; ++seed) {
        try {
            const auto toy = detail::make_toy(2, 2, 5, 2, 0.0, seed);
            const auto zf = zf_precoder(toy.uc.G_hat_a, toy.link);
            const CMat gram = toy.uc.G_hat_a.transpose() * zf.P;
            double diag_min = std::abs(gram(0, 0));
            for (Eigen::Index j = 1; j < gram.cols(); ++j)
                diag_min = std::min(diag_min, std::abs(gram(j, j)));
            for (Eigen::Index a = 0; a < gram.rows(); ++a)
                for (Eigen::Index c = 0; c < gram.cols(); ++c)
                    if (a != c)
                        worst_null = std::max(worst_null, std::abs(gram(a, c)) / diag_min);

            const auto mmse = mmse_precoder(toy.uc.G_hat_a, toy.link);
            worst_budget = std::max(worst_budget,
                                    std::abs(mmse.P.squaredNorm() - toy.link.power_budget) /
                                        toy.link.power_budget);

            Rng rng(seed);
            CMat P(4, 2);
            for (int c = 0; c < 2; ++c)
                for (int m = 0; m < 4; ++m) P(m, c) = rng.cnormal();
            const auto [W, d] = split_precoder(P);
            worst_round =
                std::max(worst_round, (scale_cols(W, d) - P).norm() / P.norm());
            ++done;
        } catch (const RankError&) {
        }
    }
    r.passed = worst_null < 1e-9 && worst_budget <= 1e-9 && worst_round <= 1e-12;
    r.detail = "nulling " + detail::fmt(worst_null) + ", budget gap " +
               detail::fmt(worst_budget) + ", round-trip " + detail::fmt(worst_round);
    return r;
}

/// Full-scale sweep: the robust scheduler beats the nominal one under
/// imperfect knowledge at every SNR point with non-overlapping three-sigma
/// bands, and the perfect-knowledge baseline sits above both.
inline CriterionResult criterion_scheduler_ordering() {
    CriterionResult r{9, "robust scheduling gain ordering", false, false, ""};
    ExperimentSpec spec;
    spec.cfg.bounds.alpha_nominal = 0.15;
    spec.pairings = {pairing_from_string("rc_esg+epl+mmse+imperfect"),
                     pairing_from_string("c_esg+epl+mmse+imperfect"),
                     pairing_from_string("c_esg+epl+mmse+perfect")};
    spec.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
    spec.trials = 200;
    spec.master_seed = 42;
    const auto rows = run_experiment(spec);

    bool ok = true;
    std::string gains;
    for (size_t i = 0; i < spec.snr_db.size(); ++i) {
        const auto& rc = rows[i];
        const auto& ce = rows[spec.snr_db.size() + i];
        const auto& pe = rows[2 * spec.snr_db.size() + i];
        ok = ok && rc.mean_sum_rate > ce.mean_sum_rate;
        ok = ok && pe.mean_sum_rate > rc.mean_sum_rate;
        ok = ok && (rc.mean_sum_rate - 3.0 * rc.std_error) >
                       (ce.mean_sum_rate + 3.0 * ce.std_error);
        const double gain = 100.0 * (rc.mean_sum_rate / ce.mean_sum_rate - 1.0);
        gains += (gains.empty() ? "" : " ") + detail::fmt(gain) + "%";
    }
    r.passed = ok;
    r.detail = "robust-over-nominal gain by SNR: " + gains;
    return r;
}

/// Full-scale sweep with the channel-inverting precoder: both robust power
/// allocators beat the nominal one at every SNR point; the crossover between
/// the two robust variants is reported without a hard assertion.
inline CriterionResult criterion_allocator_ordering() {
    CriterionResult r{10, "robust allocation gain ordering", false, false, ""};
    ExperimentSpec spec;
    spec.cfg.bounds.alpha_nominal = 0.15;
    spec.cfg.solver.precoder = PrecoderKind::Zf;
    spec.pairings = {pairing_from_string("c_esg+wrgdpa+zf+imperfect"),
                     pairing_from_string("c_esg+rgdpa+zf+imperfect"),
                     pairing_from_string("c_esg+gdpa+zf+imperfect")};
    spec.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
    spec.trials = 200;
    spec.master_seed = 42;
    const auto rows = run_experiment(spec);

    bool ok = true;
    std::string means;
    for (size_t i = 0; i < spec.snr_db.size(); ++i) {
        const auto& wr = rows[i];
        const auto& rg = rows[spec.snr_db.size() + i];
        const auto& gd = rows[2 * spec.snr_db.size() + i];
        ok = ok && wr.mean_sum_rate > gd.mean_sum_rate;
        ok = ok && rg.mean_sum_rate > gd.mean_sum_rate;
        means += (means.empty() ? "wr/rg/gd " : "  ") + detail::fmt(wr.mean_sum_rate) + "/" +
                 detail::fmt(rg.mean_sum_rate) + "/" + detail::fmt(gd.mean_sum_rate);
    }
    r.passed = ok;
    r.detail = means;
    return r;
}

/// Degenerate-parameter equivalences: a collapsed bound interval makes the
/// robust and nominal schedulers identical, and a zero imperfection level
/// makes both knowledge modes bitwise equal.
inline CriterionResult criterion_degenerate_equivalence() {
    CriterionResult r{11, "degenerate-parameter equivalences", false, true, ""};
    bool ok = true;
    SolverParams sp;
    for (int i = 0; i < 10; ++i) {
        const double alpha = 0.15;
        const auto toy = detail::make_toy(2, 2, 6, 3, alpha, 8700 + i);
        RobustnessBounds b;
        b.alpha_lo = b.alpha_hi = alpha;
        const auto robust = rc_esg(toy.chan, toy.lsf, toy.cm, b, toy.link, sp, 3);
        const auto nominal = c_esg(toy.chan, toy.lsf, toy.cm, toy.link, sp, 3);
        ok = ok && robust.candidates.size() == nominal.candidates.size();
        if (!ok) break;
        for (size_t c = 0; c < robust.candidates.size(); ++c) {
            ok = ok && robust.candidates[c].ues == nominal.candidates[c].ues;
            ok = ok && robust.candidates[c].sum_rate == nominal.candidates[c].sum_rate;
        }
        ok = ok && robust.selected == nominal.selected;
    }

    ExperimentSpec spec;
    spec.cfg.net.num_aps = 2;
    spec.cfg.net.antennas_per_ap = 2;
    spec.cfg.net.num_ues = 5;
    spec.cfg.net.num_scheduled = 2;
    spec.cfg.bounds.alpha_nominal = 0.0;
    spec.pairings = {pairing_from_string("rc_esg+rgdpa+mmse+imperfect"),
                     pairing_from_string("rc_esg+rgdpa+mmse+perfect")};
    spec.snr_db = {0.0, 10.0};
    spec.trials = 5;
    spec.master_seed = 11;
    const auto rows = run_experiment(spec);
    for (size_t i = 0; i < 2; ++i) {
        ok = ok && rows[i].mean_sum_rate == rows[2 + i].mean_sum_rate;
        ok = ok && rows[i].std_error == rows[2 + i].std_error;
    }

    r.passed = ok;
    r.detail = ok ? "collapsed-interval and zero-level paths agree exactly"
                  : "equivalence violated";
    return r;
}

/// Measured runtime growth: the nominal scheduler's wall-time exponent in
/// the antenna count, and linearity of the descent allocator in its
/// iteration budget.
inline CriterionResult criterion_runtime_scaling() {
    CriterionResult r{12, "runtime scaling exponents", false, false, ""};
    ConfigBundle base;
    const auto rows = bench_scaling(base, {4, 8, 16, 32}, {100, 200, 400, 800}, 5, 3);

    std::vector<double> nl, t_fixed, nl_p, t_prop, iters, t_gdpa;
    for (const auto& row : rows) {
        if (row.component == "c_esg") {
            nl.push_back(row.size);
            t_fixed.push_back(row.wall_time_ms);
        } else if (row.component == "c_esg_prop") {
            nl_p.push_back(row.size);
            t_prop.push_back(row.wall_time_ms);
        } else {
            iters.push_back(row.size);
            t_gdpa.push_back(row.wall_time_ms);
        }
    }
    const double expo = detail::loglog_slope(nl, t_fixed);
    const double expo_prop = detail::loglog_slope(nl_p, t_prop);
    const double r2 = detail::linear_r2(iters, t_gdpa);

    r.passed = expo >= 2.5 && expo <= 3.5 && r2 > 0.98;
    r.detail = "scheduler antenna-exponent " + detail::fmt(expo) + " (target [2.5, 3.5]; " +
               detail::fmt(expo_prop) + " with schedule growing alongside), descent R^2 " +
               detail::fmt(r2);
    return r;
}

inline std::vector<CriterionResult> run_all(std::ostream& os) {
    std::vector<CriterionResult> out;
    const std::vector<CriterionResult (*)()> criteria = {
        criterion_derivatives,     criterion_error_statistics,
        criterion_sum_rate_mc,     criterion_error_simulation,
        criterion_worst_level_search, criterion_optimality_gap,
        criterion_convexity,       criterion_precoder_contracts,
        criterion_scheduler_ordering, criterion_allocator_ordering,
        criterion_degenerate_equivalence, criterion_runtime_scaling};
    for (const auto& fn : criteria) {
        const auto res = fn();
        os << "[" << std::setw(2) << res.index << "/12] " << (res.passed ? "PASS" : "FAIL");
        if (!res.passed && !res.expect_pass) os << " (expected)";
        if (res.passed && !res.expect_pass) os << " (unexpected)";
        os << " " << res.name << " | " << res.detail << "\n" << std::flush;
        out.push_back(res);
    }
    int passed = 0, expected_fail = 0, surprises = 0;
    for (const auto& res : out) {
        if (res.passed) ++passed;
        if (!res.passed && !res.expect_pass) ++expected_fail;
        if (res.passed != res.expect_pass) ++surprises;
    }
    os << passed << "/" << out.size() << " criteria passed";
    if (expected_fail > 0)
        os << ", " << expected_fail << " expected failure" << (expected_fail == 1 ? "" : "s")
           << " (see docs/expectations.md)";
    if (surprises > 0) os << ", " << surprises << " surprise" << (surprises == 1 ? "" : "s");
    os << "\n";
    return out;
}

} // namespace cfra::acceptance
