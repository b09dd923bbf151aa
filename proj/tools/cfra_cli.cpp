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

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <cfra/cfra.hpp>

#include "acceptance_suite.hpp"

namespace {

// Accepts "lo:step:hi" sweeps and comma-separated lists.
std::vector<double> parse_snr(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double lo = 0, step = 0, hi = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(text);
        if (!(is >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || step <= 0)
            throw cfra::ParseError("SNR sweep must be lo:step:hi with step > 0: " + text);
        for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw cfra::ParseError("empty SNR list: " + text);
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw cfra::ParseError("empty integer list: " + text);
    return out;
}

cfra::ConfigBundle load_or_default(const std::string& path,
                                   const std::vector<std::string>& overrides) {
    if (!path.empty()) return cfra::load_config(path, overrides);
    nlohmann::json j = cfra::serialize(cfra::ConfigBundle{});
    for (const auto& kv : overrides) cfra::apply_override(j, kv);
    cfra::ConfigBundle cfg = cfra::parse_config(j);
    if (const auto msg = cfra::validate(cfg)) throw cfra::ValidationError(*msg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cell-free downlink resource-allocation experiment harness"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv", snr_text = "0:5:20";
    std::string dump_path, report_path;
    std::vector<std::string> pairing_texts, overrides;
    int trials = 200, threads = 1, reps = 3;
    std::uint64_t seed = 1;
    std::string aps_text = "4,8,16,32", iters_text = "100,200,400,800";

    auto* run = app.add_subcommand("run", "Monte-Carlo sum-rate sweep over SNR");
    run->add_option("--config", config_path, "JSON configuration file");
    run->add_option("--out", out_path, "output file (default: stdout)");
    run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--trials", trials, "Monte-Carlo trials per point");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--threads", threads, "worker threads");
    run->add_option("--snr", snr_text, "SNR grid, lo:step:hi or comma list [dB]");
    run->add_option("--pairing", pairing_texts,
                    "scheduler+allocator+precoder+csi (repeatable)");
    run->add_option("--set", overrides, "config override section.key=value (repeatable)");
    run->add_option("--dump-channel", dump_path,
                    "also write the first trial's channel snapshot as CSV");

    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_option("--report", report_path, "write per-criterion results as JSON");

    auto* bench = app.add_subcommand("bench", "runtime scaling study");
    bench->add_option("--config", config_path, "JSON configuration file");
    bench->add_option("--out", out_path, "output file (default: stdout)");
    bench->add_option("--aps", aps_text, "access-point counts to sweep (comma list)");
    bench->add_option("--iters", iters_text, "descent iteration counts to sweep (comma list)");
    bench->add_option("--seed", seed, "master seed");
    bench->add_option("--reps", reps, "repetitions per timing (median is kept)");
    bench->add_option("--set", overrides, "config override section.key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            cfra::ExperimentSpec spec;
            spec.cfg = load_or_default(config_path, overrides);
            if (pairing_texts.empty())
                pairing_texts = {"rc_esg+epl+mmse+imperfect", "c_esg+epl+mmse+imperfect",
                                 "c_esg+epl+mmse+perfect"};
            for (const auto& t : pairing_texts)
                spec.pairings.push_back(cfra::pairing_from_string(t));
            spec.snr_db = parse_snr(snr_text);
            spec.trials = trials;
            spec.master_seed = (run->count("--seed") > 0) ? seed : spec.cfg.net.seed;
            spec.threads = threads;
            if (!dump_path.empty()) cfra::dump_channel(spec.cfg, spec.master_seed, dump_path);
            const auto rows = cfra::run_experiment(spec);
            if (out_path.empty())
                cfra::emit_results(rows, std::cout, format);
            else
                cfra::emit_results(rows, out_path, format);
            return 0;
        }

        if (verify->parsed()) {
            const auto results = cfra::acceptance::run_all(std::cout);
            if (!report_path.empty()) {
                nlohmann::json report = nlohmann::json::array();
                for (const auto& r : results)
                    report.push_back({{"index", r.index},
                                      {"name", r.name},
                                      {"passed", r.passed},
                                      {"expected_pass", r.expect_pass},
                                      {"detail", r.detail}});
                std::ofstream os(report_path);
                if (!os) throw cfra::IOError("cannot open report file: " + report_path);
                os << report.dump(2) << "\n";
            }
            int surprises = 0;
            for (const auto& r : results)
                if (r.passed != r.expect_pass) ++surprises;
            return surprises;
        }

        // bench
        const auto cfg = load_or_default(config_path, overrides);
        const std::uint64_t bench_seed = (bench->count("--seed") > 0) ? seed : cfg.net.seed;
        const auto rows =
            cfra::bench_scaling(cfg, parse_int_list(aps_text), parse_int_list(iters_text),
                                bench_seed, reps);
        if (out_path.empty()) {
            cfra::emit_bench(rows, std::cout);
        } else {
            std::ofstream os(out_path);
            if (!os) throw cfra::IOError("cannot open output file: " + out_path);
            cfra::emit_bench(rows, os);
        }
        return 0;
    } catch (const cfra::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 65;
    }
}
