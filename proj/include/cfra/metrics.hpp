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

#include <cmath>
#include <numbers>
#include <vector>

#include "channel.hpp"
#include "common.hpp"
#include "config.hpp"
#include "precoding.hpp"

namespace cfra {

/// Second-moment profile of the masked channel-error matrix for a scheduled
/// set: per_ue_weights(m, j) = alpha * beta_{m, S[j]} where antenna m serves
/// user S[j] (zero otherwise), and antenna_weights are the row sums. These
/// are the only statistics of the error needed by the closed-form sum-rate
/// and MSE expressions, because the error entries are independent and
/// zero-mean, making every error expectation diagonal.
struct ErrorStats {
    RMat per_ue_weights;  // M x n
    RVec antenna_weights; // length M
    double alpha = 0.0;
};

inline ErrorStats error_stats(const LargeScaleFading& lsf, const ClusterMask& cm,
                              const std::vector<int>& S, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
    const auto M = lsf.beta.rows(), K = lsf.beta.cols();
    if (cm.mask.rows() != M || cm.mask.cols() != K)
        throw DimensionError("mask dimensions must match the gain matrix");
    ErrorStats st;
    st.alpha = alpha;
    st.per_ue_weights.resize(M, static_cast<Eigen::Index>(S.size()));
    for (size_t j = 0; j < S.size(); ++j) {
        const int k = S[j];
        if (k < 0 || k >= K) throw IndexError("scheduled user index out of range");
        st.per_ue_weights.col(j) =
            alpha * lsf.beta.col(k).cwiseProduct(cm.mask.col(k).cast<double>().matrix());
    }
    st.antenna_weights = st.per_ue_weights.rowwise().sum();
    return st;
}

/// Transmit-power contribution of the channel error under a frozen precoder:
/// rho_f * sum_m (P P^H)_mm * antenna_weight_m. This equals the closed form
/// of rho_f * Tr E[P^H Gerr* Gerr^T P], the term both MSE objectives treat
/// as constant in d.
inline double error_power_term(const CMat& P_frozen, const ErrorStats& st, double rho_f) {
    if (P_frozen.rows() != st.antenna_weights.size())
        throw DimensionError("frozen precoder row count must match the antenna count");
    double acc = 0.0;
    for (Eigen::Index m = 0; m < P_frozen.rows(); ++m)
        acc += P_frozen.row(m).squaredNorm() * st.antenna_weights(m);
    return rho_f * acc;
}

/// Downlink sum-rate in bits/s/Hz with the residual channel error treated
/// as noise. The effective noise-plus-error covariance is diagonal (entry j:
/// rho_f * sum_m (P P^H)_mm * per_ue_weight(m, j) + sigma_w^2), and the
/// signal part is rho_f B B^H with B = G_hat_a^T P, so the log-det is taken
/// of I + D^{-1/2} (rho_f B B^H) D^{-1/2} via a Cholesky factorization,
/// which keeps the result exactly nonnegative.
inline double sum_rate(const CMat& G_hat_a, const Precoder& pre, const ErrorStats& st,
                       const LinkBudget& link) {
    const auto M = G_hat_a.rows(), n = G_hat_a.cols();
    if (pre.P.rows() != M || pre.P.cols() != n)
        throw DimensionError("precoder dimensions must match the channel");
    if (st.per_ue_weights.rows() != M || st.per_ue_weights.cols() != n)
        throw DimensionError("error statistics must match the scheduled set");

    RVec row_power(M);
    for (Eigen::Index m = 0; m < M; ++m) row_power(m) = pre.P.row(m).squaredNorm();
    RVec dn(n);
    for (Eigen::Index j = 0; j < n; ++j)
        dn(j) = link.rho_f * st.per_ue_weights.col(j).dot(row_power) + link.noise_var;

    const CMat B = G_hat_a.transpose() * pre.P;
    CMat S = link.rho_f * (B * B.adjoint());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) S(i, j) /= std::sqrt(dn(i) * dn(j));
    S += CMat::Identity(n, n);

    const Eigen::LLT<CMat> llt(S);
    if (llt.info() != Eigen::Success)
        throw DimensionError("sum-rate matrix failed to factorize (not positive definite)");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(std::real(llt.matrixL()(i, i)));
    return std::max(log_det / std::numbers::ln2, 0.0);
}

namespace detail {

// Shared quadratic pieces of the MSE objectives: the per-stream signal
// energies diag((G^T W)^H (G^T W)) and the matched-filter diagonal.
inline void mse_check_dims(const RVec& d, const CMat& W, const CMat& G_hat_a) {
    if (W.cols() != d.size()) throw DimensionError("W and d disagree on the stream count");
    if (G_hat_a.rows() != W.rows() || G_hat_a.cols() != W.cols())
        throw DimensionError("channel and precoder dimensions disagree");
}

} // namespace detail

/// Mean-square symbol error under a fixed channel estimate. The quadratic
/// and linear terms follow the current coefficients d; error_term carries
/// the frozen-precoder error contribution (see error_power_term), which is
/// deliberately constant in d so the d-gradient stays exact.
inline double mse_conditioned(const RVec& d, const CMat& W, const CMat& G_hat_a,
                              const LinkBudget& link, double error_term) {
    detail::mse_check_dims(d, W, G_hat_a);
    const auto n = d.size();
    const CMat B = G_hat_a.transpose() * W;
    double quad = 0.0, lin = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        quad += d(j) * d(j) * B.col(j).squaredNorm();
        lin += d(j) * std::real(B(j, j));
    }
    return static_cast<double>(n) * (1.0 + link.noise_var) + link.rho_f * quad + error_term -
           2.0 * std::sqrt(link.rho_f) * lin;
}

inline double mse_conditioned(const RVec& d, const CMat& W, const CMat& G_hat_a,
                              const ErrorStats& st, const LinkBudget& link,
                              const CMat& P_frozen) {
    return mse_conditioned(d, W, G_hat_a, link, error_power_term(P_frozen, st, link.rho_f));
}

/// Mean-square symbol error with the estimate also treated as zero-mean:
/// the matched-filter (linear) term of the conditioned form drops out.
inline double mse_unconditioned(const RVec& d, const CMat& W, const CMat& G_hat_a,
                                const LinkBudget& link, double error_term) {
    detail::mse_check_dims(d, W, G_hat_a);
    const auto n = d.size();
    const CMat B = G_hat_a.transpose() * W;
    double quad = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) quad += d(j) * d(j) * B.col(j).squaredNorm();
    return static_cast<double>(n) * (1.0 + link.noise_var) + link.rho_f * quad + error_term;
}

inline double mse_unconditioned(const RVec& d, const CMat& W, const CMat& G_hat_a,
                                const ErrorStats& st, const LinkBudget& link,
                                const CMat& P_frozen) {
    return mse_unconditioned(d, W, G_hat_a, link, error_power_term(P_frozen, st, link.rho_f));
}

/// Imperfection-level form of the unconditioned MSE: the estimate is
/// sqrt(1 - alpha) V_a for the gain-weighted direction matrix V_a.
inline double mse_unconditioned_alpha(const RVec& d, const CMat& W, const CMat& V_a, double alpha,
                                      const LinkBudget& link, double error_term) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
    return mse_unconditioned(d, W, (std::sqrt(1.0 - alpha) * V_a).eval(), link, error_term);
}

} // namespace cfra
