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

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include <cfra/config.hpp>

using namespace cfra;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& text) {
        path = std::filesystem::temp_directory_path() /
               ("cfra_cfg_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ".json");
        std::ofstream os(path);
        os << text;
    }
    ~TempFile() { std::filesystem::remove(path); }
    static inline int counter = 0;
};

} // namespace

TEST_CASE("a standard-scale config file loads with its values", "[config]") {
    TempFile f(R"({"network": {"num_aps": 16, "antennas_per_ap": 4, "num_ues": 32,
                               "num_scheduled": 16}})");
    const auto c = load_config(f.path.string());
    CHECK(c.net.num_aps == 16);
    CHECK(c.net.antennas_per_ap == 4);
    CHECK(c.net.num_ues == 32);
    CHECK(c.net.num_scheduled == 16);
    CHECK(c.net.total_antennas() == 64);
}

TEST_CASE("zero scheduled users is rejected", "[config]") {
    TempFile f(R"({"network": {"num_scheduled": 0}})");
    CHECK_THROWS_AS(load_config(f.path.string()), ValidationError);
}

TEST_CASE("absent keys fall back to defaults", "[config]") {
    TempFile f(R"({"solver": {"iters_d": 50}})");
    const auto c = load_config(f.path.string());
    CHECK(c.solver.mc_samples == 2000);
    CHECK(c.solver.iters_d == 50);
    CHECK(c.solver.backtracking);
    CHECK(c.solver.precoder == PrecoderKind::Mmse);
}

TEST_CASE("malformed JSON raises ParseError", "[config]") {
    TempFile f("{network: oops");
    CHECK_THROWS_AS(load_config(f.path.string()), ParseError);
}

TEST_CASE("unknown sections and keys are rejected", "[config]") {
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"netwrk", {{"num_aps", 4}}}}), ParseError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"network", {{"nmu_aps", 4}}}}), ParseError);
}

TEST_CASE("validate reports bound ordering and antenna-count violations", "[config]") {
    ConfigBundle c;
    CHECK(!validate(c).has_value());

    c.bounds.alpha_lo = 0.05;
    c.bounds.alpha_hi = 0.3;
    CHECK(!validate(c).has_value());

    c.bounds.alpha_lo = 0.3;
    c.bounds.alpha_hi = 0.05;
    const auto issue = validate(c);
    REQUIRE(issue.has_value());
    CHECK(issue->find("alpha_lo") != std::string::npos);

    ConfigBundle d;
    d.net.num_scheduled = d.net.total_antennas() + 1;
    d.net.num_ues = d.net.num_scheduled + 1;
    const auto issue2 = validate(d);
    REQUIRE(issue2.has_value());
    CHECK(issue2->find("num_scheduled") != std::string::npos);
}

TEST_CASE("serialize then parse is the identity", "[config]") {
    ConfigBundle c;
    c.net.num_aps = 5;
    c.net.seed = 99;
    c.link.rho_f = 12.5;
    c.bounds.alpha_nominal = 0.22;
    c.solver.precoder = PrecoderKind::Zf;
    c.solver.backtracking = false;
    const auto back = parse_config(serialize(c));
    CHECK(serialize(back) == serialize(c));
}

TEST_CASE("overrides patch individual keys", "[config]") {
    TempFile f(R"({"network": {"num_aps": 16}})");
    const auto c = load_config(f.path.string(),
                               {"network.num_aps=8", "solver.precoder=zf", "link.rho_f=2.5"});
    CHECK(c.net.num_aps == 8);
    CHECK(c.solver.precoder == PrecoderKind::Zf);
    CHECK(c.link.rho_f == 2.5);

    nlohmann::json j;
    CHECK_THROWS_AS(apply_override(j, "no_equals_sign"), ParseError);
    CHECK_THROWS_AS(apply_override(j, "nodot=3"), ParseError);
}
