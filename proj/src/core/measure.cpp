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

#include <cmath>

#include "indexing.hpp"
#include "qbc3/core.hpp"
#include "qbc3/errors.hpp"

namespace qbc3 {

namespace {

constexpr double kDropProbability = 1e-15;

}  // namespace

ProjectionResult project(const StateVector& state, const Projector& projector,
                         std::span<const WireLabel> wires) {
  const auto group = detail::positions(state, wires);
  const Vector v = detail::apply_matrix(state.amplitudes(), state.wire_dims(), group, projector);
  const double p = v.squaredNorm();
  ProjectionResult out{std::min(p, 1.0), std::nullopt};
  if (p > kDropProbability) out.post_state = StateVector(state.wires(), v / std::sqrt(p));
  return out;
}

std::vector<MeasurementBranch> luders_measure(const StateVector& state, const WireLabel& wire,
                                              std::span<const Projector> projectors) {
  const auto dim = static_cast<Eigen::Index>(state.wire(wire).dim);
  if (projectors.empty()) throw InvalidArgument("measurement needs at least one projector");
  Matrix sum = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const auto& p = projectors[i];
    if (p.rows() != dim || p.cols() != dim) throw InvalidArgument("projector dimension mismatch");
    if ((p - p.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance ||
        (p * p - p).cwiseAbs().maxCoeff() > kNormTolerance)
      throw InvalidArgument("measurement operator is not a projector");
    for (std::size_t j = 0; j < i; ++j)
      if ((p * projectors[j]).cwiseAbs().maxCoeff() > kNormTolerance)
        throw InvalidArgument("projectors are not pairwise orthogonal");
    sum += p;
  }
  if ((sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > kNormTolerance)
    throw InvalidArgument("projectors do not resolve the identity");

  const WireLabel group[] = {wire};
  std::vector<MeasurementBranch> branches;
  for (std::size_t k = 0; k < projectors.size(); ++k) {
    auto r = project(state, projectors[k], group);
    if (r.post_state) branches.push_back({k, r.probability, std::move(*r.post_state)});
  }
  return branches;
}

Projector ancilla_subset_projector(std::size_t n, std::span<const std::size_t> subset) {
  Projector p = Projector::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (auto l : subset) {
    if (l >= n) throw InvalidArgument("ancilla index " + std::to_string(l) + " out of range");
    p(l, l) = 1.0;
  }
  return p;
}

}  // namespace qbc3
