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

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "scheduling.hpp"

namespace cfra {

/// One cross-check of a closed-form quantity against an independent
/// estimate; serializes to a JSON object for machine-readable reports.
struct OracleReport {
    std::string name;
    double reference = 0.0;
    double estimate = 0.0;
    double discrepancy = 0.0;
    double tolerance = 0.0;
    std::int64_t samples = 0;
    bool passed = false;

    std::string to_json() const {
        std::ostringstream os;
        os.precision(17);
        os << "{\"name\":\"" << name << "\",\"reference\":" << reference
           << ",\"estimate\":" << estimate << ",\"discrepancy\":" << discrepancy
           << ",\"tolerance\":" << tolerance << ",\"samples\":" << samples
           << ",\"passed\":" << (passed ? "true" : "false") << "}";
        return os.str();
    }
};

/// Central difference (f(x+h) - f(x-h)) / 2h.
template <class F>
double finite_diff(F&& f, double x, double h) {
    if (!(h > 0)) throw DomainError("step must be positive");
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Central second difference (f(x+h) - 2 f(x) + f(x-h)) / h^2.
template <class F>
double finite_diff_second(F&& f, double x, double h) {
    if (!(h > 0)) throw DomainError("step must be positive");
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// Coordinatewise central-difference gradient of a scalar field on R^n.
template <class F>
RVec finite_diff_grad(F&& f, const RVec& x, double h) {
    if (!(h > 0)) throw DomainError("step must be positive");
    RVec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        RVec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// Monte-Carlo mean of a matrix-valued sampler with per-entry standard
/// errors. The error entry is the standard error of the complex sample
/// mean, sqrt((var Re + var Im) / n), so |mean - truth| <= 3 * error is the
/// natural elementwise acceptance band. Accumulation is Welford's method in
/// draw order, so results are independent of any outer parallelism.
struct McResult {
    CMat mean;
    RMat std_error;
    std::int64_t samples = 0;
};

template <class Sampler>
McResult mc_expectation(Sampler&& draw, std::int64_t n_samples) {
    if (n_samples < 2) throw DomainError("need at least two samples");
    CMat first = draw(0);
    CMat mean = first;
    RMat m2 = RMat::Zero(first.rows(), first.cols());
    for (std::int64_t t = 1; t < n_samples; ++t) {
        const CMat x = draw(t);
        if (x.rows() != mean.rows() || x.cols() != mean.cols())
            throw DimensionError("sampler changed its output shape");
        const CMat delta = x - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta.cwiseProduct((x - mean).conjugate()).real();
    }
    McResult r;
    r.mean = std::move(mean);
    r.std_error =
        (m2 / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples)).cwiseSqrt();
    r.samples = n_samples;
    return r;
}

/// Scalar convenience wrapper around mc_expectation.
template <class Sampler>
std::pair<double, double> mc_expectation_scalar(Sampler&& draw, std::int64_t n_samples) {
    auto r = mc_expectation(
        [&](std::int64_t t) { return CMat::Constant(1, 1, cxd(draw(t), 0.0)); }, n_samples);
    return {r.mean(0, 0).real(), r.std_error(0, 0)};
}

/// Exhaustive argmax of f over a uniform grid on [lo, hi] (both endpoints
/// included); returns the argmax/argmin pair with their values.
struct GridExtrema {
    double argmax = 0.0, max = 0.0;
    double argmin = 0.0, min = 0.0;
};

template <class F>
GridExtrema grid_search_alpha(F&& f, double lo, double hi, int points) {
    if (points < 2) throw DomainError("need at least two grid points");
    if (!(lo < hi)) throw DomainError("grid interval must be nonempty");
    GridExtrema g;
    for (int i = 0; i < points; ++i) {
        const double a = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        const double v = f(a);
        if (i == 0 || v > g.max) {
            g.max = v;
            g.argmax = a;
        }
        if (i == 0 || v < g.min) {
            g.min = v;
            g.argmin = a;
        }
    }
    return g;
}

/// Best scheduled set by brute force: every size-n subset of the users,
/// scored with the same equal-power sum-rate the schedulers use. Guarded to
/// at most 1e5 subsets.
struct ExhaustiveSchedule {
    std::vector<int> best_set;
    double best_sum_rate = 0.0;
    std::int64_t subsets = 0;
};

inline ExhaustiveSchedule exhaustive_schedule(const ChannelRealization& chan,
                                              const LargeScaleFading& lsf, const ClusterMask& cm,
                                              const LinkBudget& link, const SolverParams& sp,
                                              int n) {
    const int K = static_cast<int>(chan.V.cols());
    if (n < 1 || n > K) throw DomainError("subset size must lie in [1, K]");
    double count = 1.0;
    for (int i = 0; i < n; ++i) count = count * (K - i) / (i + 1);
    if (count > 1e5) throw CombinatoricsError("subset count exceeds the exhaustive-search cap");

    ExhaustiveSchedule out;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    bool first = true;
    while (true) {
        const double sr = schedule_sum_rate(chan, lsf, cm, idx, link, sp);
        ++out.subsets;
        if (first || sr > out.best_sum_rate) {
            out.best_sum_rate = sr;
            out.best_set = idx;
            first = false;
        }
        int i = n - 1;
        while (i >= 0 && idx[i] == K - n + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

} // namespace cfra
