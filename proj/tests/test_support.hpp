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

#include <numeric>
#include <vector>

#include <cfra/cfra.hpp>

namespace testutil {

using namespace cfra;

struct Instance {
    LargeScaleFading lsf;
    ClusterMask cm;
    ChannelRealization chan;
    UserCentricChannel uc;
    std::vector<int> S;
    LinkBudget link;
};

/// Small synthetic network with the first n users scheduled.
inline Instance make_instance(int L, int N, int K, int n, double alpha, std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.num_aps = L;
    cfg.antennas_per_ap = N;
    cfg.num_ues = K;
    cfg.num_scheduled = n;
    Instance ins;
    ins.lsf = generate_lsf(cfg, seed);
    const auto [H, He] = generate_small_scale(L * N, K, seed);
    ins.chan = compose_channel(ins.lsf, H, He, alpha);
    ins.cm = cluster_aps(ins.lsf);
    ins.S.resize(n);
    std::iota(ins.S.begin(), ins.S.end(), 0);
    ins.uc = mask_channel(ins.chan, ins.cm, ins.S);
    return ins;
}

/// Fresh draw of the masked, gain-weighted error channel at level alpha.
inline CMat sample_masked_error(const LargeScaleFading& lsf, const ClusterMask& cm,
                                const std::vector<int>& S, double alpha, Rng& rng) {
    const auto M = lsf.beta.rows();
    CMat E = CMat::Zero(M, static_cast<Eigen::Index>(S.size()));
    for (size_t j = 0; j < S.size(); ++j) {
        const int k = S[j];
        for (Eigen::Index m = 0; m < M; ++m)
            if (cm.mask(m, k))
                E(m, static_cast<Eigen::Index>(j)) =
                    std::sqrt(alpha * lsf.beta(m, k)) * rng.cnormal();
    }
    return E;
}

inline CVec sample_cvec(Eigen::Index n, double var, Rng& rng) {
    CVec x(n);
    const double s = std::sqrt(var);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = s * rng.cnormal();
    return x;
}

inline CMat sample_cmat(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    CMat x(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = rng.cnormal();
    return x;
}

} // namespace testutil
