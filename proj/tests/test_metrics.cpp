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

#include <catch2/catch_amalgamated.hpp>

#include <cfra/metrics.hpp>
#include <cfra/oracles.hpp>
#include <cfra/power_allocation.hpp>

#include "test_support.hpp"

using namespace cfra;
using testutil::make_instance;

TEST_CASE("perfect knowledge leaves no error weight", "[metrics]") {
    const auto ins = make_instance(2, 2, 4, 2, 0.0, 3);
    const auto st = error_stats(ins.lsf, ins.cm, ins.S, 0.0);
    CHECK(st.per_ue_weights.norm() == 0.0);
    CHECK(st.antenna_weights.norm() == 0.0);
}

TEST_CASE("a fully served user weights each antenna by alpha times its gain", "[metrics]") {
    RMat beta(3, 1);
    beta << 0.5, 1.0, 1.5;
    const auto lsf = make_lsf(beta);
    ClusterMask full;
    full.mask = BoolMat::Constant(3, 1, true);
    const auto st = error_stats(lsf, full, {0}, 0.2);
    for (int m = 0; m < 3; ++m) {
        CHECK(st.per_ue_weights(m, 0) == Catch::Approx(0.2 * beta(m, 0)));
        CHECK(st.antenna_weights(m) == Catch::Approx(0.2 * beta(m, 0)));
    }
}

TEST_CASE("error second moment matches a fresh-draw Monte Carlo estimate", "[metrics]") {
    const double alpha = 0.3;
    const auto ins = make_instance(2, 2, 5, 3, alpha, 11);
    const auto pre = mmse_precoder(ins.uc.G_hat_a, ins.link);
    const auto st = error_stats(ins.lsf, ins.cm, ins.S, alpha);

    RVec row_power(pre.P.rows());
    for (Eigen::Index m = 0; m < pre.P.rows(); ++m) row_power(m) = pre.P.row(m).squaredNorm();

    Rng rng(77, "mc-error");
    const auto mc = mc_expectation(
        [&](std::int64_t) {
            const CMat Ge = testutil::sample_masked_error(ins.lsf, ins.cm, ins.S, alpha, rng);
            return (Ge.transpose() * pre.P * pre.P.adjoint() * Ge.conjugate()).eval();
        },
        4000);

    for (Eigen::Index i = 0; i < mc.mean.rows(); ++i) {
        for (Eigen::Index j = 0; j < mc.mean.cols(); ++j) {
            const double closed =
                (i == j) ? row_power.dot(st.per_ue_weights.col(i)) : 0.0;
            CHECK(std::abs(mc.mean(i, j) - closed) <= 3.0 * mc.std_error(i, j) + 1e-12);
        }
    }
}

TEST_CASE("frozen-precoder error power matches its definition", "[metrics]") {
    const double alpha = 0.25;
    const auto ins = make_instance(2, 2, 5, 2, alpha, 13);
    const auto pre = zf_precoder(ins.uc.G_hat_a, ins.link);
    const auto st = error_stats(ins.lsf, ins.cm, ins.S, alpha);
    double direct = 0.0;
    for (Eigen::Index m = 0; m < pre.P.rows(); ++m)
        direct += pre.P.row(m).squaredNorm() * st.antenna_weights(m);
    direct *= ins.link.rho_f;
    CHECK(error_power_term(pre.P, st, ins.link.rho_f) == Catch::Approx(direct));
}

TEST_CASE("a silent transmitter has zero sum-rate", "[metrics]") {
    const auto ins = make_instance(2, 2, 5, 2, 0.2, 17);
    const auto st = error_stats(ins.lsf, ins.cm, ins.S, 0.2);
    Precoder off;
    off.P = CMat::Zero(4, 2);
    off.W = CMat::Zero(4, 2);
    off.d = RVec::Zero(2);
    CHECK(sum_rate(ins.uc.G_hat_a, off, st, ins.link) == 0.0);
}

TEST_CASE("one perfect scalar link reduces to the Shannon formula", "[metrics]") {
    LargeScaleFading lsf = make_lsf(RMat::Constant(1, 1, 1.0));
    ClusterMask cm;
    cm.mask = BoolMat::Constant(1, 1, true);
    const auto [H, He] = generate_small_scale(1, 1, 19);
    const auto chan = compose_channel(lsf, H, He, 0.0);
    const auto uc = mask_channel(chan, cm, {0});

    LinkBudget link;
    link.rho_f = 2.0;
    link.noise_var = 0.5;
    Precoder pre;
    pre.P = CMat::Constant(1, 1, cxd(0.6, 0.8));
    pre.W = pre.P / pre.P.norm();
    pre.d = RVec::Constant(1, pre.P.norm());
    const auto st = error_stats(lsf, cm, {0}, 0.0);

    const double s = std::norm(uc.G_hat_a(0, 0) * pre.P(0, 0));
    const double expected = std::log2(1.0 + link.rho_f * s / link.noise_var);
    CHECK(sum_rate(uc.G_hat_a, pre, st, link) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("closed-form sum-rate matches the covariance-ratio Monte Carlo", "[metrics]") {
    const double alpha = 0.2;
    const auto ins = make_instance(2, 2, 6, 2, alpha, 23);
    const auto pre = mmse_precoder(ins.uc.G_hat_a, ins.link);
    const auto st = error_stats(ins.lsf, ins.cm, ins.S, alpha);
    const double closed = sum_rate(ins.uc.G_hat_a, pre, st, ins.link);

    const auto n = static_cast<Eigen::Index>(ins.S.size());
    const double rho = ins.link.rho_f, nv = ins.link.noise_var;
    const CMat signal = ins.uc.G_hat_a.transpose() * pre.P * pre.P.adjoint() *
                        ins.uc.G_hat_a.conjugate();

    Rng rng(5, "mc-appendix-a");
    const int batches = 12, per_batch = 600;
    std::vector<double> sr_b;
    for (int b = 0; b < batches; ++b) {
        CMat acc = CMat::Zero(n, n);
        for (int s = 0; s < per_batch; ++s) {
            const CMat Ge = testutil::sample_masked_error(ins.lsf, ins.cm, ins.S, alpha, rng);
            acc += Ge.transpose() * pre.P * pre.P.adjoint() * Ge.conjugate();
        }
        acc /= per_batch;
        const CMat r_err = rho * acc + nv * CMat::Identity(n, n);
        const CMat r_full = r_err + rho * signal;
        const cxd ratio = (r_err.inverse() * r_full).determinant();
        sr_b.push_back(std::log2(std::abs(ratio)));
    }
    double mean = 0.0;
    for (double v : sr_b) mean += v;
    mean /= batches;
    double var = 0.0;
    for (double v : sr_b) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (batches - 1) / batches);
    CHECK(std::abs(closed - mean) <= 3.0 * se + 1e-9);
}

TEST_CASE("zero coefficients leave only the constant error terms", "[metrics]") {
    const auto ins = make_instance(2, 2, 5, 3, 0.0, 29);
    const auto pre = mmse_precoder(ins.uc.G_hat_a, ins.link);
    const RVec d0 = RVec::Zero(3);
    const double expected = 3.0 * (1.0 + ins.link.noise_var);
    CHECK(mse_conditioned(d0, pre.W, ins.uc.G_hat_a, ins.link, 0.0) ==
          Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the conditioned error's minimizer sits at the separable fixed point", "[metrics]") {
    const auto ins = make_instance(2, 2, 5, 2, 0.15, 31);
    const auto pre = mmse_precoder(ins.uc.G_hat_a, ins.link);
    const RVec dstar = rgdpa_fixed_point(pre.W, ins.uc.G_hat_a, ins.link);

    // 2-D grid around the fixed point; the grid minimum must bracket it.
    const double span = 0.5 * std::max(dstar(0), dstar(1));
    const int pts = 81;
    double best = std::numeric_limits<double>::infinity();
    RVec best_d(2);
    for (int i = 0; i < pts; ++i) {
        for (int j = 0; j < pts; ++j) {
            RVec d(2);
            d << dstar(0) - span + 2 * span * i / (pts - 1.0),
                dstar(1) - span + 2 * span * j / (pts - 1.0);
            const double v = mse_conditioned(d, pre.W, ins.uc.G_hat_a, ins.link, 0.7);
            if (v < best) {
                best = v;
                best_d = d;
            }
        }
    }
    const double cell = 2 * span / (pts - 1.0);
    CHECK(std::abs(best_d(0) - dstar(0)) <= cell);
    CHECK(std::abs(best_d(1) - dstar(1)) <= cell);
}

TEST_CASE("conditioned error matches direct link simulation", "[metrics]") {
    const double alpha = 0.25;
    const auto ins = make_instance(2, 2, 5, 2, alpha, 37);
    const auto base = zf_precoder(ins.uc.G_hat_a, ins.link);
    RVec d(2);
    d << 0.8, 1.3;
    const CMat P = scale_cols(base.W, d);
    const auto st = error_stats(ins.lsf, ins.cm, ins.S, alpha);
    const double closed =
        mse_conditioned(d, base.W, ins.uc.G_hat_a, ins.link, error_power_term(P, st, ins.link.rho_f));

    Rng rng(7, "mc-cond");
    const auto [mean, se] = mc_expectation_scalar(
        [&](std::int64_t) {
            const CVec x = testutil::sample_cvec(2, 1.0, rng);
            const CVec w = testutil::sample_cvec(2, ins.link.noise_var, rng);
            const CMat Ge = testutil::sample_masked_error(ins.lsf, ins.cm, ins.S, alpha, rng);
            const CVec y = std::sqrt(ins.link.rho_f) * ((ins.uc.G_hat_a + Ge).transpose() * P * x) + w;
            return (x - y).squaredNorm();
        },
        20000);
    CHECK(std::abs(closed - mean) <= 3.0 * se);
}

TEST_CASE("alpha-form equals estimate-form at zero imperfection", "[metrics]") {
    const auto ins = make_instance(2, 2, 5, 2, 0.0, 41);
    const auto pre = mmse_precoder(ins.uc.G_hat_a, ins.link);
    RVec d(2);
    d << 1.0, 0.5;
    CHECK(mse_unconditioned_alpha(d, pre.W, ins.uc.V_a, 0.0, ins.link, 0.3) ==
          Catch::Approx(mse_unconditioned(d, pre.W, ins.uc.V_a, ins.link, 0.3)).epsilon(1e-14));
}

TEST_CASE("phase-averaged error grows along any coefficient ray", "[metrics]") {
    const auto ins = make_instance(2, 2, 5, 2, 0.2, 43);
    const auto pre = mmse_precoder(ins.uc.G_hat_a, ins.link);
    RVec d(2);
    d << 0.9, 1.4;
    double prev = -1.0;
    for (double c : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double v = mse_unconditioned((c * d).eval(), pre.W, ins.uc.G_hat_a, ins.link, 0.1);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("phase-averaged error matches phase-randomized link simulation", "[metrics]") {
    const double alpha = 0.3;
    const auto ins = make_instance(2, 2, 5, 2, alpha, 47);
    const auto base = zf_precoder(ins.uc.G_hat_a, ins.link);
    RVec d(2);
    d << 1.1, 0.7;
    const CMat P = scale_cols(base.W, d);
    const auto st = error_stats(ins.lsf, ins.cm, ins.S, alpha);
    const double closed = mse_unconditioned(d, base.W, ins.uc.G_hat_a, ins.link,
                                            error_power_term(P, st, ins.link.rho_f));

    Rng rng(9, "mc-uncond");
    const auto [mean, se] = mc_expectation_scalar(
        [&](std::int64_t) {
            const double theta = 2.0 * std::numbers::pi * rng.uniform();
            const CMat Gp = std::exp(cxd(0.0, theta)) * ins.uc.G_hat_a;
            const CVec x = testutil::sample_cvec(2, 1.0, rng);
            const CVec w = testutil::sample_cvec(2, ins.link.noise_var, rng);
            const CMat Ge = testutil::sample_masked_error(ins.lsf, ins.cm, ins.S, alpha, rng);
            const CVec y = std::sqrt(ins.link.rho_f) * ((Gp + Ge).transpose() * P * x) + w;
            return (x - y).squaredNorm();
        },
        20000);
    CHECK(std::abs(closed - mean) <= 3.0 * se);
}
