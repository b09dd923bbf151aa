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

#include "common.hpp"
#include "config.hpp"

namespace cfra {

/// Linear precoder P (M x n) together with its factorization P = W diag(d)
/// into unit-norm column directions W and nonnegative power coefficients d.
struct Precoder {
    CMat P;
    CMat W;
    RVec d;
};

/// Factors P into unit-norm columns and their norms. Throws on an all-zero
/// column, which has no direction.
inline std::pair<CMat, RVec> split_precoder(const CMat& P) {
    CMat W = P;
    RVec d(P.cols());
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
        const double norm = P.col(j).norm();
        if (norm == 0.0)
            throw DegenerateColumnError("precoder column " + std::to_string(j) + " is zero");
        d(j) = norm;
        W.col(j) /= norm;
    }
    return {std::move(W), std::move(d)};
}

/// Rescales d so that ||W diag(d)||_F^2 equals target.
inline RVec power_scale(const CMat& W, const RVec& d, double target) {
    if (W.cols() != d.size()) throw DimensionError("W and d disagree on the stream count");
    if (!(target > 0)) throw DomainError("power target must be > 0");
    double current = 0.0;
    for (Eigen::Index j = 0; j < W.cols(); ++j) current += d(j) * d(j) * W.col(j).squaredNorm();
    if (current == 0.0) throw DegenerateError("cannot scale an all-zero power vector");
    return std::sqrt(target / current) * d;
}

namespace detail {

inline Precoder finalize_precoder(const CMat& raw, double budget) {
    auto [W, d] = split_precoder(raw);
    d = power_scale(W, d, budget);
    Precoder p;
    p.P = scale_cols(W, d);
    p.W = std::move(W);
    p.d = std::move(d);
    return p;
}

} // namespace detail

/// Zero-forcing precoder against the transpose channel convention: the
/// received mixing matrix is G_a^T P, so interference nulling needs
/// G_a^T P = I, i.e. P = conj(G_a (G_a^H G_a)^{-1}); the power budget is
/// then enforced by uniform scaling. A rank-deficient channel (condition
/// number above 1e12) raises RankError instead of being regularized away,
/// so zero-forcing failures stay visible.
inline Precoder zf_precoder(const CMat& G_a, const LinkBudget& link) {
    const auto M = G_a.rows(), n = G_a.cols();
    if (n < 1) throw DimensionError("precoder needs at least one stream");
    if (n > M) throw RankError("more streams than antennas: channel cannot be inverted");
    const Eigen::JacobiSVD<CMat> svd(G_a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    if (smin <= 0.0 || smax / smin > 1e12)
        throw RankError("channel is rank-deficient (condition number above 1e12)");
    // G (G^H G)^{-1} collapses to U S^{-1} V^H on the thin SVD G = U S V^H.
    const CVec sinv = svd.singularValues().cwiseInverse().cast<cxd>();
    const CMat raw = (svd.matrixU() * sinv.asDiagonal() * svd.matrixV().adjoint()).conjugate();
    return detail::finalize_precoder(raw, link.power_budget);
}

/// Regularized (MMSE) precoder for unit-covariance symbols and white noise:
/// P = eta * conj(G_a L^{-1}) with L = G_a^H G_a + (n sigma_w^2 / budget) I,
/// eta chosen so the transmit power meets the budget exactly. Always well
/// defined for positive noise variance.
inline Precoder mmse_precoder(const CMat& G_a, const LinkBudget& link) {
    const auto n = G_a.cols();
    if (n < 1) throw DimensionError("precoder needs at least one stream");
    if (G_a.norm() == 0.0) throw DegenerateError("channel matrix is zero");
    CMat L = G_a.adjoint() * G_a;
    L.diagonal().array() += static_cast<double>(n) * link.noise_var / link.power_budget;
    const CMat raw = (G_a * L.llt().solve(CMat::Identity(n, n))).conjugate();
    return detail::finalize_precoder(raw, link.power_budget);
}

/// Equal power loading on the direction matrix of a base precoder: uniform
/// coefficients scaled to the budget.
inline Precoder epl_precoder(const CMat& W, double budget) {
    Precoder p;
    p.d = power_scale(W, RVec::Ones(W.cols()), budget);
    p.P = scale_cols(W, p.d);
    p.W = W;
    return p;
}

} // namespace cfra
