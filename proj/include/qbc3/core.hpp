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

#pragma once

// Exact dense linear algebra for small multi-wire pure states.
//
// Amplitude ordering: the first wire is the slowest-varying index. For wires
// with dimensions (d0, d1, ..., dk) the basis state |i0 i1 ... ik> sits at
// offset i0*(d1*...*dk) + i1*(d2*...*dk) + ... + ik.

#include <complex>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbc3/rng.hpp"

namespace qbc3 {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kSingularCutoff = 1e-12;

enum class Party { A, B };

enum class WireRole { Ancilla, Qubit, Committed };

/// Identifies a wire inside a StateVector. Qubit and committed wires are
/// indexed by their slot position in the segment.
struct WireLabel {
  WireRole role = WireRole::Qubit;
  int index = 0;

  friend auto operator<=>(const WireLabel&, const WireLabel&) = default;
};

inline WireLabel ancilla_label() { return {WireRole::Ancilla, 0}; }
inline WireLabel qubit_label(int slot) { return {WireRole::Qubit, slot}; }
inline WireLabel committed_label(int slot) { return {WireRole::Committed, slot}; }

std::string to_string(const WireLabel& label);
std::string to_string(Party party);

struct Wire {
  WireLabel label;
  std::size_t dim = 2;
  Party owner = Party::B;
  /// Original position of the qubit carried by this wire, or -1 when the
  /// content differs across superposed branches.
  int origin = -1;
};

/// Normalized pure state over labeled wires. Immutable; every operation
/// below returns a new value.
class StateVector {
 public:
  StateVector(std::vector<Wire> wires, Vector amplitudes);

  const std::vector<Wire>& wires() const { return wires_; }
  const Vector& amplitudes() const { return amplitudes_; }
  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }
  std::vector<std::size_t> wire_dims() const;

  bool has_wire(const WireLabel& label) const;
  std::size_t position(const WireLabel& label) const;
  const Wire& wire(const WireLabel& label) const;

  /// Labels of all wires held by `party`, in state order.
  std::vector<WireLabel> owned_by(Party party) const;

  StateVector with_wire(const WireLabel& label, const Wire& replacement) const;
  StateVector transferred(const WireLabel& label, Party to) const;

 private:
  std::vector<Wire> wires_;
  Vector amplitudes_;
};

/// Unit-trace positive semidefinite operator.
class DensityOperator {
 public:
  explicit DensityOperator(Matrix matrix);

  static DensityOperator pure(const Vector& psi);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }

 private:
  Matrix matrix_;
};

class UnitaryOp {
 public:
  /// Validates U^dagger U = I to 1e-9 in operator norm.
  explicit UnitaryOp(Matrix matrix);

  struct Trusted {};
  /// Skips the O(d^3) check; for matrices unitary by construction.
  UnitaryOp(Matrix matrix, Trusted) : matrix_(std::move(matrix)) {}

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  UnitaryOp adjoint() const { return UnitaryOp(matrix_.adjoint(), Trusted{}); }

 private:
  Matrix matrix_;
};

/// perm[i] = destination position of the content currently at position i.
using Permutation = std::vector<std::size_t>;

using Projector = Matrix;

struct MeasurementBranch {
  std::size_t outcome_index = 0;
  double probability = 0.0;
  StateVector post_state;
};

// -- preparation ------------------------------------------------------------

/// Single-qubit amplitudes of BB84 state `id` (1..4) at Hilbert angle
/// (id-1)*pi/4: (1,0), (1,1)/sqrt2, (0,1), (-1,1)/sqrt2.
Vector bb84_amplitudes(int id);

StateVector bb84_state(int id, WireLabel label = qubit_label(0), Party owner = Party::B);

/// Uniform superposition over a dim-`n` ancilla.
StateVector uniform_ancilla(std::size_t n, Party owner = Party::A);

/// Real rotation [[cos, -sin], [sin, cos]].
UnitaryOp rotation_gate(double theta);

StateVector tensor(std::span<const StateVector> parts);

/// Haar-random unitary (QR of a complex Gaussian matrix, phase-corrected).
UnitaryOp random_unitary(std::size_t dim, Rng& rng);

// -- evolution --------------------------------------------------------------

StateVector apply_on_wires(const StateVector& state, const UnitaryOp& u,
                           std::span<const WireLabel> wires);

/// Applies sum_l |l><l| (x) P^l, where P moves the content of qubits[i] to
/// qubits[(i+1) mod n]. Requires ancilla dim == qubits.size().
StateVector controlled_shift(const StateVector& state, const WireLabel& ancilla,
                             std::span<const WireLabel> qubits);

/// Exact inverse of controlled_shift.
StateVector controlled_unshift(const StateVector& state, const WireLabel& ancilla,
                               std::span<const WireLabel> qubits);

/// Applies sum_l |l><l| (x) Pi(perms[l]) over `wires`. Every ancilla value
/// needs an entry and every entry must be a bijection on `wires`.
StateVector controlled_route(const StateVector& state, const WireLabel& ancilla,
                             std::span<const WireLabel> wires,
                             const std::map<std::size_t, Permutation>& perms);

Permutation inverse(const Permutation& perm);

// -- reduction and metrics --------------------------------------------------

/// Reduced operator on `keep`, ordered as given.
DensityOperator partial_trace(const StateVector& state, std::span<const WireLabel> keep);

/// Reduced operator of a density matrix over subsystems `dims`, keeping
/// subsystem positions `keep` in the given order.
DensityOperator partial_trace(const DensityOperator& rho, std::span<const std::size_t> dims,
                              std::span<const std::size_t> keep);

/// Half the trace norm of rho - sigma.
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);

/// Square-root fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);

/// Tensor product of density operators.
DensityOperator kron(const DensityOperator& a, const DensityOperator& b);

struct CheatOperator {
  /// ||Tr_B |psi0><psi1| ||_1
  double trace_norm = 0.0;
  /// Polar-construction unitary on the A wires (ordered as `a_wires`).
  UnitaryOp u_opt;
  std::vector<WireLabel> a_wires;
};

/// Optimal A-local unitary steering psi0 toward psi1 (Uhlmann).
CheatOperator cheat_operator(const StateVector& psi0, const StateVector& psi1,
                             std::span<const WireLabel> a_wires);

/// trace_norm of cheat_operator without building the unitary.
double cheat_trace_norm(const StateVector& psi0, const StateVector& psi1, std::span<const WireLabel> a_wires);

/// <phi|psi>, requiring identical wire structure.
Complex inner_product(const StateVector& phi, const StateVector& psi);

// -- measurement ------------------------------------------------------------

/// Projective measurement on one wire. Zero-probability branches are dropped.
std::vector<MeasurementBranch> luders_measure(const StateVector& state, const WireLabel& wire,
                                              std::span<const Projector> projectors);

/// Probability and normalized post-state of one projector on `wires`.
/// Post-state is absent when the probability is below 1e-15.
struct ProjectionResult {
  double probability = 0.0;
  std::optional<StateVector> post_state;
};
ProjectionResult project(const StateVector& state, const Projector& projector,
                         std::span<const WireLabel> wires);

/// sum_{l in subset} |l><l| on a dim-n register.
Projector ancilla_subset_projector(std::size_t n, std::span<const std::size_t> subset);

}  // namespace qbc3
