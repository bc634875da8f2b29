// Copyright 2026 The covchange Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "covchange/errors.hpp"

namespace covchange {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense complex Hermitian matrix.
///
/// Every constructor stores (A + A^H) / 2, so the stored entries are exactly
/// Hermitian and real on the diagonal. Values are immutable once built.
class HermitianMatrix {
 public:
  /// Relative asymmetry accepted by from_entries().
  static constexpr double kSymmetryTolerance = 1e-12;

  /// Validates `raw` (square, Hermitian within kSymmetryTolerance relative to
  /// its largest entry) and returns the symmetrized value.
  static HermitianMatrix from_entries(const CMatrix& raw);

  /// Symmetrizes without the tolerance check. For results of Hermitian
  /// arithmetic whose asymmetry is pure rounding.
  static HermitianMatrix symmetrize(const CMatrix& raw);

  static HermitianMatrix identity(Index dim, double scale = 1.0);
  static HermitianMatrix diagonal(const RVector& values);

  Index dim() const { return entries_.rows(); }
  const CMatrix& entries() const { return entries_; }
  Complex operator()(Index row, Index col) const { return entries_(row, col); }

  /// A + shift * I.
  HermitianMatrix shifted(double shift) const;

  bool operator==(const HermitianMatrix& other) const {
    return entries_.rows() == other.entries_.rows() && entries_ == other.entries_;
  }

 private:
  explicit HermitianMatrix(CMatrix entries) : entries_(std::move(entries)) {}
  CMatrix entries_;
};

struct EigenSystem {
  RVector eigenvalues;   // ascending
  CMatrix eigenvectors;  // unitary, columns match eigenvalues
};

/// Full eigendecomposition, eigenvalues ascending.
/// Throws ConvergenceError if the solver does not converge.
EigenSystem eig_hermitian(const HermitianMatrix& a);

/// Eigenvalues only (ascending); cheaper than eig_hermitian.
RVector eigenvalues_hermitian(const HermitianMatrix& a);
RVector eigenvalues_hermitian(const CMatrix& hermitian_entries);

/// Lower-triangular Cholesky factor L with A = L L^H, kept for repeated solves.
class CholeskyFactor {
 public:
  /// Throws NotPositiveDefiniteError on a non-positive pivot.
  explicit CholeskyFactor(const HermitianMatrix& a);

  Index dim() const { return lower_.rows(); }
  const CMatrix& lower() const { return lower_; }

  /// log|A| = 2 sum log L_mm.
  double logdet() const { return logdet_; }

  /// v^H A^{-1} v via one forward substitution.
  double quadform_inv(const CVector& v) const;

  /// L^{-1} v.
  CVector whiten(const CVector& v) const;

  /// A^{-1} B.
  CMatrix solve(const CMatrix& b) const;

 private:
  CMatrix lower_;
  double logdet_ = 0.0;
};

/// log|A| through a Cholesky factorization. Throws NotPositiveDefiniteError.
double logdet_psd(const HermitianMatrix& a);

/// v^H A^{-1} v, never forming A^{-1}.
double quadform_inv(const HermitianMatrix& a, const CVector& v);

/// Real part of tr(A B^{-1}); B must be positive definite.
double trace_product_inv(const HermitianMatrix& a, const HermitianMatrix& b);

}  // namespace covchange
