// Copyright 2026 The qbc3sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include "indexing.hpp"
#include "qbc3/core.hpp"
#include "qbc3/errors.hpp"

namespace qbc3 {

DensityOperator partial_trace(const StateVector& state, std::span<const WireLabel> keep) {
  if (keep.empty()) throw InvalidArgument("partial trace needs at least one kept wire");
  const auto rows = detail::positions(state, keep);
  const Matrix m = detail::to_matrix(state.amplitudes(), state.wire_dims(), rows);
  return DensityOperator(m * m.adjoint());
}

DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> dims,
                              std::span<const std::size_t> keep) {
  if (keep.empty()) throw InvalidArgument("partial trace needs at least one kept subsystem");
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (total != rho.dim()) throw InvalidArgument("subsystem dimensions do not match operator");
  for (auto k : keep)
    if (k >= dims.size()) throw InvalidArgument("kept subsystem out of range");
  const auto kept = detail::group_offsets(dims, keep);
  const auto traced = detail::group_offsets(dims, detail::complement(dims.size(), keep));
  Matrix out = Matrix::Zero(kept.size(), kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r)
    for (std::size_t c = 0; c < kept.size(); ++c)
      for (std::size_t t : traced) out(r, c) += rho.matrix()(kept[r] + t, kept[c] + t);
  return DensityOperator(std::move(out));
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidArgument("trace distance of operators with different dims");
  const Matrix diff = rho.matrix() - sigma.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> eig((diff + diff.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  return std::clamp(0.5 * eig.eigenvalues().cwiseAbs().sum(), 0.0, 1.0);
}

namespace {

// PSD square root; eigenvalues under the cutoff are solver noise and are
// zeroed so they do not surface as sqrt(1e-16) = 1e-8 artifacts.
Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig((m + m.adjoint()) / 2.0);
  if (eig.eigenvalues().minCoeff() < -kNormTolerance)
    throw InvalidStateError("operator is not positive semidefinite");
  Eigen::VectorXd s = eig.eigenvalues();
  for (auto& v : s) v = v < kSingularCutoff ? 0.0 : std::sqrt(v);
  return eig.eigenvectors() * s.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidArgument("fidelity of operators with different dims");
  // Tr sqrt(sqrt(rho) sigma sqrt(rho)) = || sqrt(rho) sqrt(sigma) ||_1
  const Matrix prod = psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix());
  Eigen::JacobiSVD<Matrix> svd(prod);
  return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

DensityOperator kron(const DensityOperator& a, const DensityOperator& b) {
  const auto da = static_cast<Eigen::Index>(a.dim());
  const auto db = static_cast<Eigen::Index>(b.dim());
  Matrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return DensityOperator(std::move(out));
}

namespace {

void require_same_structure(const StateVector& a, const StateVector& b) {
  if (a.wires().size() != b.wires().size())
    throw InvalidArgument("states have different wire structure");
  for (std::size_t i = 0; i < a.wires().size(); ++i)
    if (a.wires()[i].label != b.wires()[i].label || a.wires()[i].dim != b.wires()[i].dim)
      throw InvalidArgument("states have different wire structure");
}

// Unit-modulus phases of the (numerically diagonal) R factor of a QR of a
// matrix with orthonormal columns.
Vector r_phases(const Eigen::HouseholderQR<Matrix>& qr, Eigen::Index r) {
  Vector d(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Complex v = qr.matrixQR()(i, i);
    d(i) = std::abs(v) > 0 ? v / std::abs(v) : Complex(1.0);
  }
  return d;
}

// Unitary U on C^dim with U * from = to, where `from` and `to` have r
// orthonormal columns. Completion on the orthogonal complement comes from
// the Householder bases of both frames.
Matrix complete_unitary(const Matrix& from, const Matrix& to) {
  const Eigen::Index dim = from.rows();
  const Eigen::Index r = from.cols();
  Eigen::HouseholderQR<Matrix> qr_from(from);
  Eigen::HouseholderQR<Matrix> qr_to(to);
  const Vector d_from = r_phases(qr_from, r);
  const Vector d_to = r_phases(qr_to, r);
  Matrix m = qr_from.householderQ().adjoint() * Matrix::Identity(dim, dim);
  for (Eigen::Index i = 0; i < r; ++i) m.row(i) *= d_to(i) * std::conj(d_from(i));
  return qr_to.householderQ() * m;
}

std::pair<Matrix, Matrix> split_matrices(const StateVector& psi0, const StateVector& psi1,
                                         std::span<const WireLabel> a_wires) {
  require_same_structure(psi0, psi1);
  if (a_wires.empty()) throw InvalidArgument("cheat operator needs at least one A wire");
  const auto rows = detail::positions(psi0, a_wires);
  const auto dims = psi0.wire_dims();
  return {detail::to_matrix(psi0.amplitudes(), dims, rows), detail::to_matrix(psi1.amplitudes(), dims, rows)};
}

}  // namespace

double cheat_trace_norm(const StateVector& psi0, const StateVector& psi1, std::span<const WireLabel> a_wires) {
  const auto [m0, m1] = split_matrices(psi0, psi1, a_wires);
  // ||M0 M1^dagger||_1 through whichever factorization is smaller.
  if (m0.rows() <= m0.cols()) {
    Eigen::JacobiSVD<Matrix> svd(m0 * m1.adjoint());
    return svd.singularValues().sum();
  }
  Eigen::HouseholderQR<Matrix> qr0(m0);
  Eigen::HouseholderQR<Matrix> qr1(m1);
  const Matrix r0 = qr0.matrixQR().topRows(m0.cols()).triangularView<Eigen::Upper>();
  const Matrix r1 = qr1.matrixQR().topRows(m1.cols()).triangularView<Eigen::Upper>();
  // X = Q0 R0 R1^dagger Q1^dagger with isometric Q factors.
  Eigen::JacobiSVD<Matrix> svd(r0 * r1.adjoint());
  return svd.singularValues().sum();
}

CheatOperator cheat_operator(const StateVector& psi0, const StateVector& psi1,
                             std::span<const WireLabel> a_wires) {
  const auto [m0, m1] = split_matrices(psi0, psi1, a_wires);
  const Eigen::Index d_a = m0.rows();
  const Eigen::Index d_b = m0.cols();

  // X = Tr_B |psi0><psi1| = M0 M1^dagger = W S V^dagger and U = V W^dagger
  // gives Tr(U X) = sum S.
  CheatOperator out{0.0, UnitaryOp(Matrix::Identity(1, 1), UnitaryOp::Trusted{}),
                    {a_wires.begin(), a_wires.end()}};
  if (d_a <= d_b) {
    const Matrix x = m0 * m1.adjoint();
    Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.trace_norm = svd.singularValues().sum();
    out.u_opt = UnitaryOp(svd.matrixV() * svd.matrixU().adjoint(), UnitaryOp::Trusted{});
    return out;
  }

  // X has rank <= d_b; compress through thin QR factors so the SVD is d_b x d_b.
  Eigen::HouseholderQR<Matrix> qr0(m0);
  Eigen::HouseholderQR<Matrix> qr1(m1);
  const Matrix q0 = qr0.householderQ() * Matrix::Identity(d_a, d_b);
  const Matrix q1 = qr1.householderQ() * Matrix::Identity(d_a, d_b);
  const Matrix r0 = q0.adjoint() * m0;
  const Matrix r1 = q1.adjoint() * m1;
  Eigen::JacobiSVD<Matrix> svd(r0 * r1.adjoint(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.trace_norm = svd.singularValues().sum();
  out.u_opt = UnitaryOp(complete_unitary(q0 * svd.matrixU(), q1 * svd.matrixV()), UnitaryOp::Trusted{});
  return out;
}

}  // namespace qbc3
