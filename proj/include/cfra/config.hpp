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
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace cfra {

enum class PrecoderKind { Zf, Mmse };

inline std::string to_string(PrecoderKind p) { return p == PrecoderKind::Zf ? "zf" : "mmse"; }

inline PrecoderKind precoder_from_string(const std::string& s) {
    if (s == "zf") return PrecoderKind::Zf;
    if (s == "mmse") return PrecoderKind::Mmse;
    throw ParseError("unknown precoder '" + s + "' (expected zf or mmse)");
}

/// Deployment geometry and dimensions. M = num_aps * antennas_per_ap is the
/// total antenna count; num_scheduled users are picked out of num_ues.
struct NetworkConfig {
    int num_aps = 16;          // L
    int antennas_per_ap = 4;   // N
    int num_ues = 32;          // K
    int num_scheduled = 16;    // n
    double area_side = 1000.0; // square deployment region side [m]
    double pathloss_exponent = 3.7;
    double pathloss_ref_db = 30.5; // loss at the 1 m reference distance [dB]
    double shadowing_sigma_db = 8.0;
    double min_distance = 10.0; // propagation-distance floor [m]
    bool normalize_lsf = true;  // rescale gains so their mean is 1
    std::uint64_t seed = 1;

    int total_antennas() const { return num_aps * antennas_per_ap; }
};

/// Transmit-power scale, noise variance and precoder power budget, all linear.
struct LinkBudget {
    double rho_f = 1.0;        // per-antenna transmit-power scale
    double noise_var = 1.0;    // sigma_w^2
    double power_budget = 1.0; // cap on ||P||_F^2
};

/// Interval of admissible channel-imperfection levels. The per-user and
/// global error-power bounds used by the robust solvers are induced from
/// these endpoints (bound = alpha * squared norm of the error direction),
/// so the interval endpoints are exactly the feasible alpha endpoints.
struct RobustnessBounds {
    double alpha_lo = 0.05;
    double alpha_hi = 0.30;
    double alpha_nominal = 0.15; // operating imperfection level for runs
};

/// Step sizes, iteration counts and numerical thresholds for the iterative
/// solvers, plus the Monte Carlo oracle sample count.
struct SolverParams {
    double step_d = 0.01;           // lambda: descent step over d
    double step_alpha_sched = 0.3;  // mu: scheduling alpha-descent step
    double step_alpha_ascent = 0.3; // gamma: alpha-ascent step
    int iters_d = 100;              // I_D
    int iters_alpha = 50;           // I_G
    int iters_reop = 50;            // I_R
    double hessian_tol = 1e-8;      // curvature-sign deadband
    int mc_samples = 2000;
    bool backtracking = true; // halve step_d while the objective fails to drop
    PrecoderKind precoder = PrecoderKind::Mmse; // precoder used inside scheduling
};

struct ConfigBundle {
    NetworkConfig net;
    LinkBudget link;
    RobustnessBounds bounds;
    SolverParams solver;
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline void read_key(const nlohmann::json& j, const char* key, PrecoderKind& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) throw ParseError(std::string("'") + key + "' must be a string");
    out = precoder_from_string(j.at(key).get<std::string>());
}

} // namespace detail

/// Parses a config bundle from JSON. Absent keys keep their defaults;
/// unknown keys are rejected so typos cannot silently drop a setting.
inline ConfigBundle parse_config(const nlohmann::json& j) {
    static const std::map<std::string, std::vector<std::string>> schema = {
        {"network",
         {"num_aps", "antennas_per_ap", "num_ues", "num_scheduled", "area_side",
          "pathloss_exponent", "pathloss_ref_db", "shadowing_sigma_db", "min_distance",
          "normalize_lsf", "seed"}},
        {"link", {"rho_f", "noise_var", "power_budget"}},
        {"robustness", {"alpha_lo", "alpha_hi", "alpha_nominal"}},
        {"solver",
         {"step_d", "step_alpha_sched", "step_alpha_ascent", "iters_d", "iters_alpha",
          "iters_reop", "hessian_tol", "mc_samples", "backtracking", "precoder"}},
    };
    if (!j.is_object()) throw ParseError("config root must be a JSON object");
    for (const auto& [section, content] : j.items()) {
        auto it = schema.find(section);
        if (it == schema.end()) throw ParseError("unknown config section '" + section + "'");
        if (!content.is_object()) throw ParseError("section '" + section + "' must be an object");
        for (const auto& [key, _] : content.items()) {
            const auto& allowed = it->second;
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw ParseError("unknown key '" + section + "." + key + "'");
        }
    }

    ConfigBundle c;
    if (j.contains("network")) {
        const auto& n = j.at("network");
        detail::read_key(n, "num_aps", c.net.num_aps);
        detail::read_key(n, "antennas_per_ap", c.net.antennas_per_ap);
        detail::read_key(n, "num_ues", c.net.num_ues);
        detail::read_key(n, "num_scheduled", c.net.num_scheduled);
        detail::read_key(n, "area_side", c.net.area_side);
        detail::read_key(n, "pathloss_exponent", c.net.pathloss_exponent);
        detail::read_key(n, "pathloss_ref_db", c.net.pathloss_ref_db);
        detail::read_key(n, "shadowing_sigma_db", c.net.shadowing_sigma_db);
        detail::read_key(n, "min_distance", c.net.min_distance);
        detail::read_key(n, "normalize_lsf", c.net.normalize_lsf);
        detail::read_key(n, "seed", c.net.seed);
    }
    if (j.contains("link")) {
        const auto& l = j.at("link");
        detail::read_key(l, "rho_f", c.link.rho_f);
        detail::read_key(l, "noise_var", c.link.noise_var);
        detail::read_key(l, "power_budget", c.link.power_budget);
    }
    if (j.contains("robustness")) {
        const auto& r = j.at("robustness");
        detail::read_key(r, "alpha_lo", c.bounds.alpha_lo);
        detail::read_key(r, "alpha_hi", c.bounds.alpha_hi);
        detail::read_key(r, "alpha_nominal", c.bounds.alpha_nominal);
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        detail::read_key(s, "step_d", c.solver.step_d);
        detail::read_key(s, "step_alpha_sched", c.solver.step_alpha_sched);
        detail::read_key(s, "step_alpha_ascent", c.solver.step_alpha_ascent);
        detail::read_key(s, "iters_d", c.solver.iters_d);
        detail::read_key(s, "iters_alpha", c.solver.iters_alpha);
        detail::read_key(s, "iters_reop", c.solver.iters_reop);
        detail::read_key(s, "hessian_tol", c.solver.hessian_tol);
        detail::read_key(s, "mc_samples", c.solver.mc_samples);
        detail::read_key(s, "backtracking", c.solver.backtracking);
        detail::read_key(s, "precoder", c.solver.precoder);
    }
    return c;
}

inline nlohmann::json serialize(const ConfigBundle& c) {
    return nlohmann::json{
        {"network",
         {{"num_aps", c.net.num_aps},
          {"antennas_per_ap", c.net.antennas_per_ap},
          {"num_ues", c.net.num_ues},
          {"num_scheduled", c.net.num_scheduled},
          {"area_side", c.net.area_side},
          {"pathloss_exponent", c.net.pathloss_exponent},
          {"pathloss_ref_db", c.net.pathloss_ref_db},
          {"shadowing_sigma_db", c.net.shadowing_sigma_db},
          {"min_distance", c.net.min_distance},
          {"normalize_lsf", c.net.normalize_lsf},
          {"seed", c.net.seed}}},
        {"link",
         {{"rho_f", c.link.rho_f},
          {"noise_var", c.link.noise_var},
          {"power_budget", c.link.power_budget}}},
        {"robustness",
         {{"alpha_lo", c.bounds.alpha_lo},
          {"alpha_hi", c.bounds.alpha_hi},
          {"alpha_nominal", c.bounds.alpha_nominal}}},
        {"solver",
         {{"step_d", c.solver.step_d},
          {"step_alpha_sched", c.solver.step_alpha_sched},
          {"step_alpha_ascent", c.solver.step_alpha_ascent},
          {"iters_d", c.solver.iters_d},
          {"iters_alpha", c.solver.iters_alpha},
          {"iters_reop", c.solver.iters_reop},
          {"hessian_tol", c.solver.hessian_tol},
          {"mc_samples", c.solver.mc_samples},
          {"backtracking", c.solver.backtracking},
          {"precoder", to_string(c.solver.precoder)}}},
    };
}

/// Returns a description of the first violated invariant, or nullopt if the
/// bundle is valid.
inline std::optional<std::string> validate(const ConfigBundle& c) {
    const auto& n = c.net;
    if (n.num_aps < 1) return "network.num_aps must be >= 1";
    if (n.antennas_per_ap < 1) return "network.antennas_per_ap must be >= 1";
    if (n.num_ues < 1) return "network.num_ues must be >= 1";
    if (n.num_scheduled < 1) return "network.num_scheduled must be >= 1";
    if (n.num_scheduled > n.total_antennas())
        return "network.num_scheduled must not exceed num_aps * antennas_per_ap";
    if (n.num_ues <= n.num_scheduled)
        return "network.num_ues must exceed num_scheduled (scheduling must be necessary)";
    if (!(n.area_side > 0)) return "network.area_side must be > 0";
    if (!(n.min_distance >= 0)) return "network.min_distance must be >= 0";
    if (!(n.shadowing_sigma_db >= 0)) return "network.shadowing_sigma_db must be >= 0";

    if (!(c.link.rho_f > 0)) return "link.rho_f must be > 0";
    if (!(c.link.noise_var > 0)) return "link.noise_var must be > 0";
    if (!(c.link.power_budget > 0)) return "link.power_budget must be > 0";

    const auto& b = c.bounds;
    if (!(b.alpha_lo > 0 && b.alpha_lo < 1)) return "robustness.alpha_lo must lie in (0,1)";
    if (!(b.alpha_hi > 0 && b.alpha_hi < 1)) return "robustness.alpha_hi must lie in (0,1)";
    if (!(b.alpha_lo < b.alpha_hi)) return "robustness.alpha_lo must be < alpha_hi";
    if (!(b.alpha_nominal >= 0 && b.alpha_nominal < 1))
        return "robustness.alpha_nominal must lie in [0,1)";

    const auto& s = c.solver;
    if (!(s.step_d > 0)) return "solver.step_d must be > 0";
    if (!(s.step_alpha_sched > 0)) return "solver.step_alpha_sched must be > 0";
    if (!(s.step_alpha_ascent > 0)) return "solver.step_alpha_ascent must be > 0";
    if (s.iters_d < 1) return "solver.iters_d must be >= 1";
    if (s.iters_alpha < 1) return "solver.iters_alpha must be >= 1";
    if (s.iters_reop < 1) return "solver.iters_reop must be >= 1";
    if (!(s.hessian_tol >= 0)) return "solver.hessian_tol must be >= 0";
    if (s.mc_samples < 1) return "solver.mc_samples must be >= 1";
    return std::nullopt;
}

/// Applies a dotted-path override like "network.num_ues=24" to raw JSON.
/// The value is parsed as a JSON literal, falling back to a plain string.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ParseError("override must look like section.key=value: '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    const auto dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
        throw ParseError("override key must be section.key: '" + path + "'");
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    j[path.substr(0, dot)][path.substr(dot + 1)] = value;
}

/// Loads, override-patches and validates a config file.
inline ConfigBundle load_config(const std::string& path,
                                const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError("config file '" + path + "' is not valid JSON");
    for (const auto& o : overrides) apply_override(j, o);
    ConfigBundle c = parse_config(j);
    if (auto issue = validate(c)) throw ValidationError(*issue);
    return c;
}

} // namespace cfra
