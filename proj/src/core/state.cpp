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
#include <numbers>
#include <set>

#include "indexing.hpp"
#include "qbc3/core.hpp"
#include "qbc3/errors.hpp"

namespace qbc3 {

std::string to_string(const WireLabel& label) {
  switch (label.role) {
    case WireRole::Ancilla:
      return "ancilla";
    case WireRole::Qubit:
      return "q" + std::to_string(label.index);
    case WireRole::Committed:
      return "c" + std::to_string(label.index);
  }
  return "?";
}

std::string to_string(Party party) { return party == Party::A ? "A" : "B"; }

StateVector::StateVector(std::vector<Wire> wires, Vector amplitudes)
    : wires_(std::move(wires)), amplitudes_(std::move(amplitudes)) {
  if (wires_.empty()) throw InvalidArgument("state needs at least one wire");
  std::size_t total = 1;
  std::set<WireLabel> seen;
  for (const auto& w : wires_) {
    if (w.dim == 0) throw InvalidArgument("wire dimension must be positive");
    if (!seen.insert(w.label).second) throw ConflictError("duplicate wire label " + to_string(w.label));
    total *= w.dim;
  }
  if (static_cast<std::size_t>(amplitudes_.size()) != total)
    throw InvalidArgument("amplitude count does not match wire dimensions");
  if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance)
    throw InvalidStateError("state vector is not normalized");
}

std::vector<std::size_t> StateVector::wire_dims() const {
  std::vector<std::size_t> dims;
  dims.reserve(wires_.size());
  for (const auto& w : wires_) dims.push_back(w.dim);
  return dims;
}

bool StateVector::has_wire(const WireLabel& label) const {
  return std::any_of(wires_.begin(), wires_.end(), [&](const Wire& w) { return w.label == label; });
}

std::size_t StateVector::position(const WireLabel& label) const {
  for (std::size_t i = 0; i < wires_.size(); ++i)
    if (wires_[i].label == label) return i;
  throw NotFoundError("no wire " + to_string(label));
}

const Wire& StateVector::wire(const WireLabel& label) const { return wires_[position(label)]; }

std::vector<WireLabel> StateVector::owned_by(Party party) const {
  std::vector<WireLabel> out;
  for (const auto& w : wires_)
    if (w.owner == party) out.push_back(w.label);
  return out;
}

StateVector StateVector::with_wire(const WireLabel& label, const Wire& replacement) const {
  auto wires = wires_;
  auto& target = wires[position(label)];
  if (replacement.dim != target.dim) throw InvalidArgument("relabeling cannot change dimension");
  target = replacement;
  return StateVector(std::move(wires), amplitudes_);
}

StateVector StateVector::transferred(const WireLabel& label, Party to) const {
  Wire w = wire(label);
  w.owner = to;
  return with_wire(label, w);
}

namespace {

Matrix hermitian_part(const Matrix& m) { return (m + m.adjoint()) / 2.0; }

}  // namespace

DensityOperator::DensityOperator(Matrix matrix) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols())
    throw InvalidArgument("density operator must be square and non-empty");
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance)
    throw InvalidStateError("density operator is not Hermitian");
  matrix_ = hermitian_part(matrix);
  if (std::abs(matrix_.trace() - Complex(1.0)) > kNormTolerance)
    throw InvalidStateError("density operator trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kNormTolerance)
    throw InvalidStateError("density operator has a negative eigenvalue");
}

DensityOperator DensityOperator::pure(const Vector& psi) { return DensityOperator(psi * psi.adjoint()); }

UnitaryOp::UnitaryOp(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() == 0 || matrix_.rows() != matrix_.cols())
    throw InvalidArgument("unitary must be square and non-empty");
  const Matrix dev = matrix_.adjoint() * matrix_ - Matrix::Identity(matrix_.rows(), matrix_.cols());
  // Frobenius bounds the operator norm from above; only fall back to the
  // spectrum when the cheap bound is inconclusive.
  if (dev.norm() <= kNormTolerance) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(dev), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().cwiseAbs().maxCoeff() > kNormTolerance)
    throw InvalidArgument("matrix is not unitary");
}

Vector bb84_amplitudes(int id) {
  if (id < 1 || id > 4) throw InvalidArgument("BB84 id must be in 1..4, got " + std::to_string(id));
  const double h = std::numbers::sqrt2 / 2.0;
  Vector v(2);
  switch (id) {
    case 1: v << 1.0, 0.0; break;
    case 2: v << h, h; break;
    case 3: v << 0.0, 1.0; break;
    default: v << -h, h; break;
  }
  return v;
}

StateVector bb84_state(int id, WireLabel label, Party owner) {
  return StateVector({Wire{label, 2, owner, label.index}}, bb84_amplitudes(id));
}

StateVector uniform_ancilla(std::size_t n, Party owner) {
  if (n == 0) throw InvalidArgument("ancilla dimension must be positive");
  Vector v = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  return StateVector({Wire{ancilla_label(), n, owner, -1}}, std::move(v));
}

UnitaryOp rotation_gate(double theta) {
  if (!std::isfinite(theta)) throw InvalidArgument("rotation angle must be finite");
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return UnitaryOp(std::move(r), UnitaryOp::Trusted{});
}

StateVector tensor(std::span<const StateVector> parts) {
  if (parts.empty()) throw InvalidArgument("tensor of an empty list");
  std::vector<Wire> wires;
  Vector amps = Vector::Ones(1);
  std::set<WireLabel> seen;
  for (const auto& part : parts) {
    for (const auto& w : part.wires()) {
      if (!seen.insert(w.label).second) throw ConflictError("duplicate wire label " + to_string(w.label));
      wires.push_back(w);
    }
    const Vector& b = part.amplitudes();
    Vector next(amps.size() * b.size());
    for (Eigen::Index i = 0; i < amps.size(); ++i) next.segment(i * b.size(), b.size()) = amps(i) * b;
    amps = std::move(next);
  }
  return StateVector(std::move(wires), std::move(amps));
}

UnitaryOp random_unitary(std::size_t dim, Rng& rng) {
  if (dim == 0) throw InvalidArgument("unitary dimension must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  // Box-Muller keeps the stream identical across standard libraries.
  auto gauss = [&rng] {
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  Matrix z(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) z(r, c) = Complex(gauss(), gauss());
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Complex r = qr.matrixQR()(i, i);
    if (std::abs(r) > 0) q.col(i) *= r / std::abs(r);
  }
  return UnitaryOp(std::move(q), UnitaryOp::Trusted{});
}

Complex inner_product(const StateVector& phi, const StateVector& psi) {
  if (phi.wires().size() != psi.wires().size()) throw InvalidArgument("wire structure mismatch");
  for (std::size_t i = 0; i < phi.wires().size(); ++i)
    if (phi.wires()[i].label != psi.wires()[i].label || phi.wires()[i].dim != psi.wires()[i].dim)
      throw InvalidArgument("wire structure mismatch");
  return phi.amplitudes().dot(psi.amplitudes());
}

}  // namespace qbc3
