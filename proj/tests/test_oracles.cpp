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

#include <cfra/oracles.hpp>

#include "test_support.hpp"

using namespace cfra;

TEST_CASE("central differences recover polynomial derivatives", "[oracles]") {
    auto square = [](double x) { return x * x; };
    CHECK(finite_diff(square, 3.0, 1e-6) == Catch::Approx(6.0).epsilon(1e-8));

    auto cubic = [](double x) { return x * x * x; };
    CHECK(finite_diff_second(cubic, 2.0, 1e-4) == Catch::Approx(12.0).epsilon(1e-6));

    auto constant = [](double) { return 4.2; };
    CHECK(finite_diff(constant, 1.0, 1e-6) == 0.0);
    CHECK(finite_diff_second(constant, 1.0, 1e-4) == 0.0);

    CHECK_THROWS_AS(finite_diff(square, 0.0, 0.0), DomainError);
}

TEST_CASE("coordinatewise differences recover a quadratic gradient", "[oracles]") {
    auto f = [](const RVec& x) { return x.squaredNorm(); };
    RVec x(2);
    x << 1.0, 2.0;
    const RVec g = finite_diff_grad(f, x, 1e-6);
    CHECK(g(0) == Catch::Approx(2.0).margin(1e-8));
    CHECK(g(1) == Catch::Approx(4.0).margin(1e-8));
}

TEST_CASE("sample means carry calibrated error bars", "[oracles]") {
    Rng rng(21, "mc-unit");
    const auto r = mc_expectation(
        [&](std::int64_t) {
            const cxd z = rng.cnormal();
            return CMat::Constant(1, 1, cxd(std::norm(z), 0.0));
        },
        20000);
    CHECK(r.samples == 20000);
    CHECK(std::abs(r.mean(0, 0) - 1.0) <= 3.0 * r.std_error(0, 0));
    // |z|^2 is Exp(1): std error of the mean is about 1/sqrt(n).
    CHECK(r.std_error(0, 0) == Catch::Approx(1.0 / std::sqrt(20000.0)).epsilon(0.1));
}

TEST_CASE("expectation runs are reproducible and validated", "[oracles]") {
    auto run = [] {
        Rng rng(33, "mc-repro");
        return mc_expectation([&](std::int64_t) { return CMat::Constant(2, 2, rng.cnormal()); },
                              500);
    };
    const auto a = run(), b = run();
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);

    Rng rng(1);
    CHECK_THROWS_AS(mc_expectation([&](std::int64_t) { return CMat::Zero(1, 1); }, 1),
                    DomainError);
    CHECK_THROWS_AS(mc_expectation(
                        [&](std::int64_t t) {
                            return t == 0 ? CMat::Zero(1, 1).eval() : CMat::Zero(2, 2).eval();
                        },
                        10),
                    DimensionError);
}

TEST_CASE("grid search finds endpoint and interior extrema", "[oracles]") {
    auto identity = [](double a) { return a; };
    const auto g = grid_search_alpha(identity, 0.0, 1.0, 11);
    CHECK(g.argmax == Catch::Approx(1.0));
    CHECK(g.argmin == Catch::Approx(0.0));

    auto bump = [](double a) { return -(a - 0.2) * (a - 0.2); };
    const auto h = grid_search_alpha(bump, 0.0, 1.0, 101);
    CHECK(std::abs(h.argmax - 0.2) <= 0.01 + 1e-12);

    CHECK_THROWS_AS(grid_search_alpha(identity, 0.0, 1.0, 1), DomainError);
    CHECK_THROWS_AS(grid_search_alpha(identity, 1.0, 0.0, 5), DomainError);
}

TEST_CASE("brute-force scheduling enumerates every subset", "[oracles]") {
    const auto ins = testutil::make_instance(2, 2, 4, 2, 0.2, 51);
    SolverParams sp;

    SECTION("four users choose two means six subsets") {
        const auto ex = exhaustive_schedule(ins.chan, ins.lsf, ins.cm, ins.link, sp, 2);
        CHECK(ex.subsets == 6);
        REQUIRE(ex.best_set.size() == 2);
        const double sr =
            schedule_sum_rate(ins.chan, ins.lsf, ins.cm, ex.best_set, ins.link, sp);
        CHECK(sr == Catch::Approx(ex.best_sum_rate));
    }

    SECTION("schedule size equal to the population returns the full set") {
        const auto ex = exhaustive_schedule(ins.chan, ins.lsf, ins.cm, ins.link, sp, 4);
        CHECK(ex.subsets == 1);
        CHECK(ex.best_set == std::vector<int>{0, 1, 2, 3});
    }

    SECTION("oversized enumerations are refused") {
        const auto big = testutil::make_instance(2, 2, 40, 2, 0.2, 53);
        CHECK_THROWS_AS(exhaustive_schedule(big.chan, big.lsf, big.cm, big.link, sp, 10),
                        CombinatoricsError);
    }
}

TEST_CASE("oracle reports serialize to JSON", "[oracles]") {
    OracleReport r;
    r.name = "unit";
    r.reference = 1.0;
    r.estimate = 1.125;
    r.discrepancy = 0.125;
    r.tolerance = 0.5;
    r.samples = 99;
    r.passed = true;
    const auto s = r.to_json();
    CHECK(s.find("\"name\":\"unit\"") != std::string::npos);
    CHECK(s.find("\"passed\":true") != std::string::npos);
    CHECK(s.find("\"samples\":99") != std::string::npos);
}
