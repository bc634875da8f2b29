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

#include "covchange/hermitian.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace covchange {

namespace {

void require_square(const CMatrix& raw) {
  if (raw.rows() != raw.cols() || raw.rows() < 1) {
    std::ostringstream msg;
    msg << "expected a non-empty square grid, got " << raw.rows() << "x" << raw.cols();
    throw DimensionError(msg.str());
  }
}

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream msg;
    msg << "dimension mismatch: " << a.dim() << " vs " << b.dim();
    throw DimensionError(msg.str());
  }
}

}  // namespace

HermitianMatrix HermitianMatrix::from_entries(const CMatrix& raw) {
  require_square(raw);
  const double scale = raw.cwiseAbs().maxCoeff();
  const double asymmetry = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
  if (asymmetry > kSymmetryTolerance * scale) {
    std::ostringstream msg;
    msg << "grid is not Hermitian: max |A - A^H| = " << asymmetry << " (scale " << scale << ")";
    throw NotHermitianError(msg.str());
  }
  return symmetrize(raw);
}

HermitianMatrix HermitianMatrix::symmetrize(const CMatrix& raw) {
  require_square(raw);
  CMatrix sym = (raw + raw.adjoint()) * 0.5;
  return HermitianMatrix(std::move(sym));
}

HermitianMatrix HermitianMatrix::identity(Index dim, double scale) {
  if (dim < 1) throw DimensionError("identity dimension must be >= 1");
  CMatrix id = CMatrix::Identity(dim, dim) * scale;
  return HermitianMatrix(std::move(id));
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& values) {
  if (values.size() < 1) throw DimensionError("diagonal needs at least one entry");
  CMatrix d = values.cast<Complex>().asDiagonal();
  return HermitianMatrix(std::move(d));
}

HermitianMatrix HermitianMatrix::shifted(double shift) const {
  CMatrix out = entries_;
  out.diagonal().array() += shift;
  return HermitianMatrix(std::move(out));
}

EigenSystem eig_hermitian(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.entries(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("Hermitian eigen solver did not converge");
  }
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

RVector eigenvalues_hermitian(const CMatrix& hermitian_entries) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_entries, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("Hermitian eigen solver did not converge");
  }
  return solver.eigenvalues();
}

RVector eigenvalues_hermitian(const HermitianMatrix& a) { return eigenvalues_hermitian(a.entries()); }

CholeskyFactor::CholeskyFactor(const HermitianMatrix& a) {
  Eigen::LLT<CMatrix> llt(a.entries());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("Cholesky factorization failed: matrix is not positive definite");
  }
  lower_ = llt.matrixL();
  double acc = 0.0;
  for (Index m = 0; m < lower_.rows(); ++m) {
    const double pivot = lower_(m, m).real();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw NotPositiveDefiniteError("Cholesky factorization produced a non-positive pivot");
    }
    acc += std::log(pivot);
  }
  logdet_ = 2.0 * acc;
}

CVector CholeskyFactor::whiten(const CVector& v) const {
  if (v.size() != dim()) {
    std::ostringstream msg;
    msg << "vector length " << v.size() << " does not match dimension " << dim();
    throw DimensionError(msg.str());
  }
  return lower_.triangularView<Eigen::Lower>().solve(v);
}

double CholeskyFactor::quadform_inv(const CVector& v) const { return whiten(v).squaredNorm(); }

CMatrix CholeskyFactor::solve(const CMatrix& b) const {
  if (b.rows() != dim()) throw DimensionError("right-hand side row count does not match dimension");
  CMatrix y = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.adjoint().triangularView<Eigen::Upper>().solve(y);
}

double logdet_psd(const HermitianMatrix& a) { return CholeskyFactor(a).logdet(); }

double quadform_inv(const HermitianMatrix& a, const CVector& v) {
  return CholeskyFactor(a).quadform_inv(v);
}

double trace_product_inv(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b);
  // tr(A B^{-1}) = tr(B^{-1} A)
  return CholeskyFactor(b).solve(a.entries()).trace().real();
}

}  // namespace covchange
