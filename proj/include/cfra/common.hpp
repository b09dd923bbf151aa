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

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace cfra {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using BoolMat = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct RankError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct DegenerateColumnError : DegenerateError { using DegenerateError::DegenerateError; };
struct SingularHError : Error { using Error::Error; };
struct CombinatoricsError : Error { using Error::Error; };
struct EmptyResultError : Error { using Error::Error; };
struct IOError : Error { using Error::Error; };

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

/// A * diag(d) for a complex matrix and a real coefficient vector.
inline CMat scale_cols(const CMat& A, const RVec& d) {
    if (A.cols() != d.size()) throw DimensionError("column count must match coefficient count");
    CMat out = A;
    for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) *= d(j);
    return out;
}

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

} // namespace cfra
