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

#include "indexing.hpp"
#include "qbc3/core.hpp"
#include "qbc3/errors.hpp"

namespace qbc3 {

StateVector apply_on_wires(const StateVector& state, const UnitaryOp& u, std::span<const WireLabel> wires) {
  const auto group = detail::positions(state, wires);
  const auto dims = state.wire_dims();
  std::size_t sub = 1;
  for (auto p : group) sub *= dims[p];
  if (sub != u.dim()) throw InvalidArgument("unitary dimension does not match the selected wires");
  return StateVector(state.wires(), detail::apply_matrix(state.amplitudes(), dims, group, u.matrix()));
}

Permutation inverse(const Permutation& perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv.at(perm[i]) = i;
  return inv;
}

namespace {

bool is_bijection(const Permutation& perm, std::size_t size) {
  if (perm.size() != size) return false;
  std::vector<bool> hit(size, false);
  for (auto d : perm) {
    if (d >= size || hit[d]) return false;
    hit[d] = true;
  }
  return true;
}

}  // namespace

StateVector controlled_route(const StateVector& state, const WireLabel& ancilla,
                             std::span<const WireLabel> wires,
                             const std::map<std::size_t, Permutation>& perms) {
  const std::size_t a = state.position(ancilla);
  const auto group = detail::positions(state, wires);
  if (std::find(group.begin(), group.end(), a) != group.end())
    throw InvalidArgument("ancilla cannot be routed by itself");
  const auto dims = state.wire_dims();
  const std::size_t n_anc = dims[a];
  for (auto p : group)
    if (dims[p] != dims[group.front()]) throw InvalidArgument("routed wires must share a dimension");

  std::vector<const Permutation*> table(n_anc, nullptr);
  for (std::size_t l = 0; l < n_anc; ++l) {
    auto it = perms.find(l);
    if (it == perms.end()) throw InvalidArgument("no permutation for ancilla value " + std::to_string(l));
    if (!is_bijection(it->second, group.size()))
      throw InvalidArgument("permutation for ancilla value " + std::to_string(l) + " is not a bijection");
    table[l] = &it->second;
  }
  for (const auto& [l, _] : perms)
    if (l >= n_anc) throw InvalidArgument("permutation key exceeds ancilla dimension");

  const auto st = detail::strides(dims);
  const Vector& in = state.amplitudes();
  Vector out = Vector::Zero(in.size());
  std::vector<std::size_t> digit(group.size());
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(in.size()); ++idx) {
    const std::size_t l = (idx / st[a]) % n_anc;
    const Permutation& perm = *table[l];
    std::size_t target = idx;
    for (std::size_t i = 0; i < group.size(); ++i) {
      digit[i] = (idx / st[group[i]]) % dims[group[i]];
      target -= digit[i] * st[group[i]];
    }
    for (std::size_t i = 0; i < group.size(); ++i) target += digit[i] * st[group[perm[i]]];
    out(target) = in(idx);
  }
  return StateVector(state.wires(), std::move(out));
}

namespace {

std::map<std::size_t, Permutation> shift_table(std::size_t n, bool forward) {
  std::map<std::size_t, Permutation> perms;
  for (std::size_t l = 0; l < n; ++l) {
    Permutation p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = forward ? (i + l) % n : (i + n - l) % n;
    perms.emplace(l, std::move(p));
  }
  return perms;
}

}  // namespace

StateVector controlled_shift(const StateVector& state, const WireLabel& ancilla,
                             std::span<const WireLabel> qubits) {
  if (state.wire(ancilla).dim != qubits.size())
    throw InvalidArgument("ancilla dimension must equal the number of shifted wires");
  return controlled_route(state, ancilla, qubits, shift_table(qubits.size(), true));
}

StateVector controlled_unshift(const StateVector& state, const WireLabel& ancilla,
                               std::span<const WireLabel> qubits) {
  if (state.wire(ancilla).dim != qubits.size())
    throw InvalidArgument("ancilla dimension must equal the number of shifted wires");
  return controlled_route(state, ancilla, qubits, shift_table(qubits.size(), false));
}

}  // namespace qbc3
