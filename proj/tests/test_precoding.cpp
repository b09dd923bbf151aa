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

#include <cfra/precoding.hpp>
#include <cfra/rng.hpp>

using namespace cfra;

namespace {

CMat random_channel(int M, int n, std::uint64_t seed) {
    Rng rng(seed);
    CMat G(M, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < M; ++i) G(i, j) = rng.cnormal();
    return G;
}

// Per-user SINR of the scaled system, written out directly from the
// received-signal model rather than through any library helper.
RVec sinr_per_ue(const CMat& G, const CMat& P, double rho_f, double noise_var) {
    const CMat A = G.transpose() * P;
    RVec out(A.rows());
    for (Eigen::Index j = 0; j < A.rows(); ++j) {
        double interference = 0.0;
        for (Eigen::Index i = 0; i < A.cols(); ++i)
            if (i != j) interference += std::norm(A(j, i));
        out(j) = rho_f * std::norm(A(j, j)) / (rho_f * interference + noise_var);
    }
    return out;
}

} // namespace

TEST_CASE("identity channel yields a scaled identity precoder", "[precoding]") {
    LinkBudget link;
    link.power_budget = 4.0;
    const auto pre = zf_precoder(CMat::Identity(3, 3), link);
    const double diag = std::sqrt(link.power_budget / 3.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) CHECK(std::abs(pre.P(i, j) - cxd(diag, 0)) < 1e-12);
            else CHECK(std::abs(pre.P(i, j)) < 1e-12);
        }
}

TEST_CASE("the inverting precoder cancels cross-user interference", "[precoding]") {
    LinkBudget link;
    const CMat G = random_channel(6, 4, 31);
    const auto pre = zf_precoder(G, link);
    const CMat A = G.transpose() * pre.P;
    const double diag_scale = std::abs(A(0, 0));
    for (int j = 1; j < 4; ++j) CHECK(std::abs(A(j, j)) == Catch::Approx(diag_scale).epsilon(1e-9));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(A(i, j)) < 1e-9 * diag_scale);
    CHECK(pre.P.squaredNorm() == Catch::Approx(link.power_budget).epsilon(1e-9));
}

TEST_CASE("impossible inversions raise RankError", "[precoding]") {
    LinkBudget link;
    CHECK_THROWS_AS(zf_precoder(random_channel(3, 4, 1), link), RankError);

    CMat G = random_channel(4, 3, 2);
    G.col(2) = G.col(1); // exactly rank-deficient
    CHECK_THROWS_AS(zf_precoder(G, link), RankError);
}

TEST_CASE("regularized precoder meets the power budget exactly", "[precoding]") {
    LinkBudget link;
    link.power_budget = 2.5;
    link.noise_var = 0.7;
    const auto pre = mmse_precoder(random_channel(8, 5, 17), link);
    CHECK(pre.P.squaredNorm() == Catch::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("vanishing noise turns the regularized precoder into the inverting one",
          "[precoding]") {
    const CMat G = random_channel(5, 5, 23);
    LinkBudget link;
    const auto zf = zf_precoder(G, link);
    link.noise_var = 1e-12;
    const auto mmse = mmse_precoder(G, link);
    const cxd inner = (zf.P.conjugate().cwiseProduct(mmse.P)).sum();
    const double cosine = std::abs(inner) / (zf.P.norm() * mmse.P.norm());
    CHECK(cosine > 0.999);
}

TEST_CASE("joint channel/noise rescaling leaves per-user SINR unchanged", "[precoding]") {
    const CMat G = random_channel(6, 4, 41);
    LinkBudget link;
    link.noise_var = 0.5;
    const double rho_f = 3.0, c = 7.5;

    const auto base = mmse_precoder(G, link);
    LinkBudget scaled_link = link;
    scaled_link.noise_var = c * c * link.noise_var;
    const auto scaled = mmse_precoder((c * G).eval(), scaled_link);

    const RVec s0 = sinr_per_ue(G, base.P, rho_f, link.noise_var);
    const RVec s1 = sinr_per_ue((c * G).eval(), scaled.P, rho_f, scaled_link.noise_var);
    for (Eigen::Index j = 0; j < s0.size(); ++j)
        CHECK(s1(j) == Catch::Approx(s0(j)).epsilon(1e-9));
}

TEST_CASE("split factors a precoder into directions and gains", "[precoding]") {
    SECTION("column norms become the gains") {
        CMat P(2, 2);
        P << cxd(2, 0), cxd(0, 0), cxd(0, 0), cxd(0, 3);
        const auto [W, d] = split_precoder(P);
        CHECK(d(0) == Catch::Approx(2.0));
        CHECK(d(1) == Catch::Approx(3.0));
        CHECK(W.col(0).norm() == Catch::Approx(1.0));
        CHECK(W.col(1).norm() == Catch::Approx(1.0));
    }
    SECTION("normalized columns give unit gains") {
        CMat P = random_channel(4, 3, 3);
        for (int j = 0; j < 3; ++j) P.col(j) /= P.col(j).norm();
        const auto [W, d] = split_precoder(P);
        for (int j = 0; j < 3; ++j) CHECK(d(j) == Catch::Approx(1.0));
    }
    SECTION("the factorization reconstructs the input") {
        const CMat P = random_channel(5, 4, 5);
        const auto [W, d] = split_precoder(P);
        CHECK((scale_cols(W, d) - P).norm() < 1e-12 * P.norm());
    }
    SECTION("a zero column cannot be factored") {
        CMat P = random_channel(3, 2, 7);
        P.col(1).setZero();
        CHECK_THROWS_AS(split_precoder(P), DegenerateColumnError);
    }
}

TEST_CASE("power rescaling hits the target and is homogeneous", "[precoding]") {
    const CMat P = random_channel(4, 3, 11);
    const auto [W, d] = split_precoder(P);

    SECTION("already on target means identity") {
        const double target = P.squaredNorm();
        const RVec d2 = power_scale(W, d, target);
        CHECK((d2 - d).norm() < 1e-12 * d.norm());
    }
    SECTION("doubling then scaling equals scaling") {
        const RVec a = power_scale(W, d, 5.0);
        const RVec b = power_scale(W, (2.0 * d).eval(), 5.0);
        CHECK((a - b).norm() < 1e-12 * a.norm());
    }
    SECTION("orthonormal directions make the budget a sum of squared gains") {
        CMat W2 = CMat::Zero(4, 2);
        W2(0, 0) = cxd(1, 0);
        W2(1, 1) = cxd(0, 1);
        RVec d2(2);
        d2 << 1.0, 1.0;
        const RVec scaled = power_scale(W2, d2, 8.0);
        CHECK(scaled(0) == Catch::Approx(2.0));
        CHECK(scaled(1) == Catch::Approx(2.0));
    }
    SECTION("degenerate inputs are rejected") {
        CHECK_THROWS_AS(power_scale(W, d, -1.0), DomainError);
        CHECK_THROWS_AS(power_scale(W, RVec::Zero(3), 2.0), DegenerateError);
    }
}

TEST_CASE("equal power loading splits the budget evenly", "[precoding]") {
    const CMat P = random_channel(6, 3, 13);
    const auto [W, d] = split_precoder(P);
    const auto pre = epl_precoder(W, 6.0);
    CHECK(pre.P.squaredNorm() == Catch::Approx(6.0).epsilon(1e-9));
    for (int j = 0; j < 3; ++j)
        CHECK(pre.P.col(j).squaredNorm() == Catch::Approx(2.0).epsilon(1e-9));
}
