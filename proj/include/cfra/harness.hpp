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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"
#include "common.hpp"
#include "config.hpp"
#include "oracles.hpp"
#include "power_allocation.hpp"
#include "rng.hpp"
#include "scheduling.hpp"

namespace cfra {

enum class Scheduler { CEsg, RcEsg };
enum class Allocator { Epl, Gdpa, Rgdpa, Wrgdpa };
enum class CsiMode { Perfect, Imperfect };

inline std::string to_string(Scheduler s) { return s == Scheduler::CEsg ? "c_esg" : "rc_esg"; }
inline std::string to_string(Allocator a) {
    switch (a) {
    case Allocator::Epl: return "epl";
    case Allocator::Gdpa: return "gdpa";
    case Allocator::Rgdpa: return "rgdpa";
    default: return "wrgdpa";
    }
}
inline std::string to_string(CsiMode c) { return c == CsiMode::Perfect ? "perfect" : "imperfect"; }

/// One scheduler/allocator/precoder/CSI combination swept over SNR.
struct Pairing {
    Scheduler scheduler = Scheduler::RcEsg;
    Allocator allocator = Allocator::Epl;
    PrecoderKind precoder = PrecoderKind::Mmse;
    CsiMode csi = CsiMode::Imperfect;

    std::string id() const {
        return to_string(scheduler) + "+" + to_string(allocator) + "+" + to_string(precoder) +
               "+" + to_string(csi);
    }
};

/// Parses "scheduler+allocator+precoder+csi", e.g. "rc_esg+wrgdpa+zf+imperfect".
inline Pairing pairing_from_string(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '+') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (parts.size() != 4) throw ParseError("pairing must have four '+'-separated fields: " + s);
    Pairing p;
    if (parts[0] == "c_esg") p.scheduler = Scheduler::CEsg;
    else if (parts[0] == "rc_esg") p.scheduler = Scheduler::RcEsg;
    else throw ParseError("unknown scheduler: " + parts[0]);
    if (parts[1] == "epl") p.allocator = Allocator::Epl;
    else if (parts[1] == "gdpa") p.allocator = Allocator::Gdpa;
    else if (parts[1] == "rgdpa") p.allocator = Allocator::Rgdpa;
    else if (parts[1] == "wrgdpa") p.allocator = Allocator::Wrgdpa;
    else throw ParseError("unknown allocator: " + parts[1]);
    p.precoder = precoder_from_string(parts[2]);
    if (parts[3] == "perfect") p.csi = CsiMode::Perfect;
    else if (parts[3] == "imperfect") p.csi = CsiMode::Imperfect;
    else throw ParseError("unknown CSI mode: " + parts[3]);
    if (p.allocator == Allocator::Wrgdpa && p.precoder != PrecoderKind::Zf)
        throw ValidationError("wrgdpa requires the zf precoder");
    return p;
}

struct ExperimentSpec {
    ConfigBundle cfg;
    std::vector<Pairing> pairings;
    std::vector<double> snr_db;
    int trials = 100;
    std::uint64_t master_seed = 1;
    int threads = 1;
};

struct ResultRow {
    std::string pairing;
    double snr_db = 0.0;
    double mean_sum_rate = 0.0;
    double std_error = 0.0;
    int trials = 0;
    double wall_time_ms = 0.0;
};

/// Runs fn(0..n-1) on a pool of worker threads; exceptions are captured and
/// the first one rethrown after the pool drains.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Schedules, allocates, and rates one pairing on one channel realization.
/// Failures the precoder or allocator cannot recover from rate as zero, the
/// same convention the schedulers use internally.
inline double pairing_sum_rate(const ChannelRealization& chan, const LargeScaleFading& lsf,
                               const ClusterMask& cm, const Pairing& p, const LinkBudget& link,
                               const RobustnessBounds& b, const SolverParams& sp, int n) {
    SolverParams sps = sp;
    sps.precoder = p.precoder;
    const ScheduleOutcome so = (p.scheduler == Scheduler::RcEsg)
                                   ? rc_esg(chan, lsf, cm, b, link, sps, n)
                                   : c_esg(chan, lsf, cm, link, sps, n);
    try {
        const auto uc = mask_channel(chan, cm, so.selected);
        const Precoder base = (p.precoder == PrecoderKind::Zf) ? zf_precoder(uc.G_hat_a, link)
                                                               : mmse_precoder(uc.G_hat_a, link);
        const Precoder equal = epl_precoder(base.W, link.power_budget);
        const ErrorStats st = error_stats(lsf, cm, so.selected, chan.alpha);

        Precoder fin;
        switch (p.allocator) {
        case Allocator::Epl: fin = equal; break;
        case Allocator::Gdpa: {
            const auto pr = gdpa(base.W, uc.G_hat_a, link, sps, base.d);
            fin = Precoder{scale_cols(base.W, pr.d), base.W, pr.d};
            break;
        }
        case Allocator::Rgdpa: {
            const auto pr = rgdpa(base.W, uc.G_hat_a, st, link, sps, base.d);
            fin = Precoder{scale_cols(base.W, pr.d), base.W, pr.d};
            break;
        }
        case Allocator::Wrgdpa: {
            const double alpha0 = 0.5 * (b.alpha_lo + b.alpha_hi);
            const auto pr =
                wrgdpa(uc.V_a, uc.V_err_a, base.W, link, b, sps, base.d, alpha0);
            fin = Precoder{scale_cols(base.W, pr.d), base.W, pr.d};
            break;
        }
        }
        return sum_rate(uc.G_hat_a, fin, st, link);
    } catch (const RankError&) {
        return 0.0;
    } catch (const DegenerateError&) {
        return 0.0;
    } catch (const SingularHError&) {
        return 0.0;
    }
}

/// Monte-Carlo sweep over trials, pairings, and SNR points. Every pairing
/// and SNR point sees the same per-trial channel draw, so curves are paired
/// comparisons. Trials may run on several threads; aggregation always walks
/// them in trial order, so the numbers do not depend on the thread count.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
    if (spec.pairings.empty()) throw DomainError("experiment needs at least one pairing");
    if (spec.snr_db.empty()) throw DomainError("experiment needs at least one SNR point");
    if (spec.trials < 1) throw DomainError("experiment needs at least one trial");
    if (const auto msg = validate(spec.cfg)) throw ValidationError(*msg);

    const auto& net = spec.cfg.net;
    const int combos = static_cast<int>(spec.pairings.size() * spec.snr_db.size());
    std::vector<std::vector<double>> sr(spec.trials, std::vector<double>(combos, 0.0));
    std::vector<std::vector<double>> ms(spec.trials, std::vector<double>(combos, 0.0));

    parallel_for(spec.trials, spec.threads, [&](int t) {
        const auto lsf =
            generate_lsf(net, substream_seed(spec.master_seed, "trial-lsf", t));
        const auto [H, He] = generate_small_scale(net.total_antennas(), net.num_ues,
                                                  substream_seed(spec.master_seed, "trial-ss", t));
        const auto cm = cluster_aps(lsf);
        int c = 0;
        for (const auto& p : spec.pairings) {
            const double alpha =
                p.csi == CsiMode::Perfect ? 0.0 : spec.cfg.bounds.alpha_nominal;
            const auto chan = compose_channel(lsf, H, He, alpha);
            for (double snr : spec.snr_db) {
                LinkBudget link = spec.cfg.link;
                link.rho_f = link.noise_var * db_to_lin(snr);
                const auto t0 = std::chrono::steady_clock::now();
                sr[t][c] = pairing_sum_rate(chan, lsf, cm, p, link, spec.cfg.bounds,
                                            spec.cfg.solver, net.num_scheduled);
                const auto t1 = std::chrono::steady_clock::now();
                ms[t][c] = std::chrono::duration<double, std::milli>(t1 - t0).count();
                ++c;
            }
        }
    });

    std::vector<ResultRow> rows;
    rows.reserve(combos);
    int c = 0;
    for (const auto& p : spec.pairings) {
        for (double snr : spec.snr_db) {
            double sum = 0.0, comp = 0.0, time_ms = 0.0;
            for (int t = 0; t < spec.trials; ++t) {
                const double y = sr[t][c] - comp;
                const double s = sum + y;
                comp = (s - sum) - y;
                sum = s;
                time_ms += ms[t][c];
            }
            const double mean = sum / spec.trials;
            double var = 0.0;
            for (int t = 0; t < spec.trials; ++t) {
                const double dev = sr[t][c] - mean;
                var += dev * dev;
            }
            ResultRow row;
            row.pairing = p.id();
            row.snr_db = snr;
            row.mean_sum_rate = mean;
            row.std_error =
                spec.trials > 1 ? std::sqrt(var / (spec.trials - 1) / spec.trials) : 0.0;
            row.trials = spec.trials;
            row.wall_time_ms = time_ms;
            rows.push_back(row);
            ++c;
        }
    }
    return rows;
}

/// Writes result rows as CSV (fixed header) or a JSON array.
inline void emit_results(const std::vector<ResultRow>& rows, std::ostream& os,
                         const std::string& format) {
    if (rows.empty()) throw EmptyResultError("no result rows to write");
    os.precision(12);
    if (format == "csv") {
        os << "pairing,snr_db,mean_sum_rate,std_error,trials,wall_time_ms\n";
        for (const auto& r : rows)
            os << r.pairing << ',' << r.snr_db << ',' << r.mean_sum_rate << ',' << r.std_error
               << ',' << r.trials << ',' << r.wall_time_ms << '\n';
    } else if (format == "json") {
        os << "[\n";
        for (size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            os << "  {\"pairing\":\"" << r.pairing << "\",\"snr_db\":" << r.snr_db
               << ",\"mean_sum_rate\":" << r.mean_sum_rate << ",\"std_error\":" << r.std_error
               << ",\"trials\":" << r.trials << ",\"wall_time_ms\":" << r.wall_time_ms << "}"
               << (i + 1 < rows.size() ? ",\n" : "\n");
        }
        os << "]\n";
    } else {
        throw DomainError("unknown output format: " + format);
    }
}

inline void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                         const std::string& format) {
    std::ofstream os(path);
    if (!os) throw IOError("cannot open output file: " + path);
    emit_results(rows, os, format);
}

/// Writes one trial's channel snapshot as CSV, one row per antenna/user
/// pair: the gain, the serving mask, and the gain-weighted channel and
/// error directions split into real and imaginary parts.
inline void dump_channel(const ConfigBundle& cfg, std::uint64_t master_seed,
                         const std::string& path) {
    const auto lsf = generate_lsf(cfg.net, substream_seed(master_seed, "trial-lsf", 0));
    const auto [H, He] = generate_small_scale(cfg.net.total_antennas(), cfg.net.num_ues,
                                              substream_seed(master_seed, "trial-ss", 0));
    const auto chan = compose_channel(lsf, H, He, cfg.bounds.alpha_nominal);
    const auto cm = cluster_aps(lsf);
    std::ofstream os(path);
    if (!os) throw IOError("cannot open output file: " + path);
    os.precision(12);
    os << "antenna,ue,beta,served,v_re,v_im,verr_re,verr_im\n";
    for (Eigen::Index m = 0; m < lsf.beta.rows(); ++m)
        for (Eigen::Index k = 0; k < lsf.beta.cols(); ++k)
            os << m << ',' << k << ',' << lsf.beta(m, k) << ',' << (cm.mask(m, k) ? 1 : 0) << ','
               << chan.V(m, k).real() << ',' << chan.V(m, k).imag() << ','
               << chan.V_err(m, k).real() << ',' << chan.V_err(m, k).imag() << '\n';
}

struct BenchRow {
    std::string component;
    double size = 0.0;
    double wall_time_ms = 0.0;
};

namespace detail {

template <class F>
double median_time_ms(F&& work, int reps) {
    std::vector<double> times;
    times.reserve(reps);
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        work();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

} // namespace detail

/// Runtime scaling probes. "c_esg" sweeps the antenna count at fixed user
/// and schedule sizes; "c_esg_prop" grows the schedule with the array;
/// "gdpa" sweeps the descent iteration count at a fixed size, with a probe
/// step so every run executes its full iteration budget. Each entry is the
/// median wall time over `reps` runs.
inline std::vector<BenchRow> bench_scaling(const ConfigBundle& base,
                                           const std::vector<int>& ap_counts,
                                           const std::vector<int>& iter_counts,
                                           std::uint64_t master_seed, int reps = 3) {
    std::vector<BenchRow> rows;
    auto trial_inputs = [&](const NetworkConfig& net) {
        const auto lsf = generate_lsf(net, substream_seed(master_seed, "trial-lsf", 0));
        const auto hs = generate_small_scale(net.total_antennas(), net.num_ues,
                                             substream_seed(master_seed, "trial-ss", 0));
        return std::make_tuple(lsf, hs.first, hs.second);
    };

    for (int L : ap_counts) {
        NetworkConfig net = base.net;
        net.num_aps = L;
        const auto [lsf, H, He] = trial_inputs(net);
        const auto cm = cluster_aps(lsf);
        const auto chan = compose_channel(lsf, H, He, base.bounds.alpha_nominal);
        const double ms = detail::median_time_ms(
            [&] { c_esg(chan, lsf, cm, base.link, base.solver, net.num_scheduled); }, reps);
        rows.push_back({"c_esg", static_cast<double>(net.total_antennas()), ms});
    }

    for (int L : ap_counts) {
        NetworkConfig net = base.net;
        net.num_aps = L;
        const int nl = net.total_antennas();
        net.num_scheduled = std::max(1, std::min(net.num_ues - 1, nl / 4));
        const auto [lsf, H, He] = trial_inputs(net);
        const auto cm = cluster_aps(lsf);
        const auto chan = compose_channel(lsf, H, He, base.bounds.alpha_nominal);
        const double ms = detail::median_time_ms(
            [&] { c_esg(chan, lsf, cm, base.link, base.solver, net.num_scheduled); }, reps);
        rows.push_back({"c_esg_prop", static_cast<double>(nl), ms});
    }

    {
        const auto [lsf, H, He] = trial_inputs(base.net);
        const auto cm = cluster_aps(lsf);
        const auto chan = compose_channel(lsf, H, He, base.bounds.alpha_nominal);
        std::vector<int> S(base.net.num_scheduled);
        for (int i = 0; i < base.net.num_scheduled; ++i) S[i] = i;
        const auto uc = mask_channel(chan, cm, S);
        const Precoder pre = mmse_precoder(uc.G_hat_a, base.link);
        const Precoder equal = epl_precoder(pre.W, base.link.power_budget);
        for (int iters : iter_counts) {
            SolverParams sp = base.solver;
            sp.iters_d = iters;
            sp.backtracking = false;
            // Probe per-iteration cost: the step must be small enough that
            // the divergence guard never cuts the loop short.
            sp.step_d = 1e-9;
            const double ms = detail::median_time_ms(
                [&] { gdpa(pre.W, uc.G_hat_a, base.link, sp, equal.d); }, reps);
            rows.push_back({"gdpa", static_cast<double>(iters), ms});
        }
    }
    return rows;
}

inline void emit_bench(const std::vector<BenchRow>& rows, std::ostream& os) {
    if (rows.empty()) throw EmptyResultError("no bench rows to write");
    os.precision(12);
    os << "component,size,wall_time_ms\n";
    for (const auto& r : rows) os << r.component << ',' << r.size << ',' << r.wall_time_ms << '\n';
}

} // namespace cfra
