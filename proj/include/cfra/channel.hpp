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

#include <utility>
#include <vector>

#include "common.hpp"
#include "config.hpp"
#include "rng.hpp"

namespace cfra {

/// Slow-fading gain matrix beta (M x K, positive) and the network-mean
/// clustering threshold derived from it.
struct LargeScaleFading {
    RMat beta;
    double lambda_lsf = 0.0;
};

/// Builds a LargeScaleFading from an explicit gain matrix; the threshold is
/// the arithmetic mean of all entries. Also serves as the test hook for
/// forcing specific gains.
inline LargeScaleFading make_lsf(RMat beta) {
    if (beta.size() == 0) throw DimensionError("gain matrix must be non-empty");
    if (!(beta.array() > 0).all()) throw DomainError("gains must be strictly positive");
    LargeScaleFading lsf;
    lsf.lambda_lsf = beta.mean();
    lsf.beta = std::move(beta);
    return lsf;
}

/// Draws a deployment (uniform AP/UE positions in the square), applies
/// log-distance path loss with log-normal shadowing, and replicates each
/// AP's gain across its antennas. Distances are floored at min_distance.
/// With normalize_lsf the matrix is rescaled to mean 1 so the transmit
/// power scale is interpretable as a mean per-antenna link SNR; the
/// clustering decisions are invariant to this rescaling.
inline LargeScaleFading generate_lsf(const NetworkConfig& cfg, std::uint64_t seed) {
    const int L = cfg.num_aps, K = cfg.num_ues, N = cfg.antennas_per_ap;
    Rng placement(seed, "placement");
    RMat ap_xy(L, 2), ue_xy(K, 2);
    for (int l = 0; l < L; ++l)
        for (int c = 0; c < 2; ++c) ap_xy(l, c) = cfg.area_side * placement.uniform();
    for (int k = 0; k < K; ++k)
        for (int c = 0; c < 2; ++c) ue_xy(k, c) = cfg.area_side * placement.uniform();

    Rng shadowing(seed, "shadowing");
    RMat beta_ap(L, K);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            const double d = std::max((ap_xy.row(l) - ue_xy.row(k)).norm(), cfg.min_distance);
            const double shadow_db = cfg.shadowing_sigma_db * shadowing.normal();
            const double gain_db =
                -cfg.pathloss_ref_db - 10.0 * cfg.pathloss_exponent * std::log10(d) + shadow_db;
            beta_ap(l, k) = db_to_lin(gain_db);
        }
    }
    if (cfg.normalize_lsf) beta_ap /= beta_ap.mean();

    RMat beta(L * N, K);
    for (int l = 0; l < L; ++l)
        beta.middleRows(l * N, N) = beta_ap.row(l).replicate(N, 1);
    return make_lsf(std::move(beta));
}

/// Draws two independent M x K matrices of iid CN(0,1) entries: the
/// small-scale channel and the estimation-error direction.
inline std::pair<CMat, CMat> generate_small_scale(int M, int K, std::uint64_t seed) {
    if (M < 1 || K < 1) throw DimensionError("small-scale dimensions must be >= 1");
    Rng rh(seed, "H"), re(seed, "Ht");
    CMat H(M, K), H_err(M, K);
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < M; ++m) H(m, k) = rh.cnormal();
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < M; ++m) H_err(m, k) = re.cnormal();
    return {std::move(H), std::move(H_err)};
}

/// Imperfect-CSI channel: the true channel splits into an estimate and an
/// error, g = sqrt(1-alpha) v + sqrt(alpha) v_err, with v = sqrt(beta) h.
/// V and V_err carry the gain-weighted directions; alpha mixes them.
struct ChannelRealization {
    CMat V;     // sqrt(beta_mk) * h_mk
    CMat V_err; // sqrt(beta_mk) * h_err_mk
    double alpha = 0.0;

    CMat g_hat() const { return std::sqrt(1.0 - alpha) * V; }
    CMat g_err() const { return std::sqrt(alpha) * V_err; }
    CMat g() const { return std::sqrt(1.0 - alpha) * V + std::sqrt(alpha) * V_err; }
};

inline ChannelRealization compose_channel(const LargeScaleFading& lsf, const CMat& H,
                                          const CMat& H_err, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
    if (H.rows() != lsf.beta.rows() || H.cols() != lsf.beta.cols() || H.rows() != H_err.rows() ||
        H.cols() != H_err.cols())
        throw DimensionError("gain and small-scale matrices must share dimensions");
    ChannelRealization chan;
    const CMat root = lsf.beta.cwiseSqrt().cast<cxd>();
    chan.V = root.cwiseProduct(H);
    chan.V_err = root.cwiseProduct(H_err);
    chan.alpha = alpha;
    return chan;
}

/// Per-(antenna, user) serving mask: entry (m, k) is true iff antenna m
/// serves user k.
struct ClusterMask {
    BoolMat mask;
};

/// User-centric association: antenna m serves user k when beta_mk reaches
/// the network-mean threshold; a user whose whole column falls below it is
/// served by its single strongest antenna (ties to the lowest index).
inline ClusterMask cluster_aps(const LargeScaleFading& lsf) {
    const auto M = lsf.beta.rows(), K = lsf.beta.cols();
    ClusterMask cm;
    cm.mask = BoolMat::Constant(M, K, false);
    for (Eigen::Index k = 0; k < K; ++k) {
        Eigen::Index best = 0;
        for (Eigen::Index m = 0; m < M; ++m) {
            if (lsf.beta(m, k) >= lsf.lambda_lsf) cm.mask(m, k) = true;
            if (lsf.beta(m, k) > lsf.beta(best, k)) best = m;
        }
        cm.mask(best, k) = true;
    }
    return cm;
}

/// Channel columns of a scheduled user set with non-serving antennas zeroed.
/// The same mask is applied to the true channel, the estimate and the error,
/// so the imperfect-CSI decomposition commutes with masking.
struct UserCentricChannel {
    std::vector<int> ues; // scheduled users, column order of the matrices
    CMat G_a;             // masked true channel, M x |S|
    CMat G_hat_a;         // masked estimate
    CMat G_err_a;         // masked error
    CMat V_a;             // masked gain-weighted channel direction
    CMat V_err_a;         // masked gain-weighted error direction
};

inline UserCentricChannel mask_channel(const ChannelRealization& chan, const ClusterMask& cm,
                                       const std::vector<int>& S) {
    const auto M = chan.V.rows();
    const auto K = chan.V.cols();
    if (cm.mask.rows() != M || cm.mask.cols() != K)
        throw DimensionError("mask dimensions must match the channel");
    if (S.empty()) throw IndexError("scheduled set must be non-empty");
    for (size_t i = 0; i < S.size(); ++i) {
        if (S[i] < 0 || S[i] >= K) throw IndexError("scheduled user index out of range");
        for (size_t j = i + 1; j < S.size(); ++j)
            if (S[i] == S[j]) throw IndexError("scheduled user indices must be distinct");
    }

    UserCentricChannel uc;
    uc.ues = S;
    const auto n = static_cast<Eigen::Index>(S.size());
    uc.V_a.resize(M, n);
    uc.V_err_a.resize(M, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const int k = S[j];
        if (!cm.mask.col(k).any())
            throw DomainError("cluster mask leaves user " + std::to_string(k) + " unserved");
        const CVec sel = cm.mask.col(k).cast<double>().matrix().cast<cxd>();
        uc.V_a.col(j) = chan.V.col(k).cwiseProduct(sel);
        uc.V_err_a.col(j) = chan.V_err.col(k).cwiseProduct(sel);
    }
    const double ca = std::sqrt(1.0 - chan.alpha), ce = std::sqrt(chan.alpha);
    uc.G_hat_a = ca * uc.V_a;
    uc.G_err_a = ce * uc.V_err_a;
    uc.G_a = uc.G_hat_a + uc.G_err_a;
    return uc;
}

} // namespace cfra
