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

#include "indexing.hpp"

#include <algorithm>
#include <numeric>

#include "qbc3/errors.hpp"

namespace qbc3::detail {

std::vector<std::size_t> strides(std::span<const std::size_t> dims) {
  std::vector<std::size_t> out(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) out[i - 1] = out[i] * dims[i];
  return out;
}

std::vector<std::size_t> group_offsets(std::span<const std::size_t> dims,
                                       std::span<const std::size_t> group) {
  const auto st = strides(dims);
  std::vector<std::size_t> offsets{0};
  for (std::size_t pos : group) {
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * dims[pos]);
    for (std::size_t base : offsets)
      for (std::size_t d = 0; d < dims[pos]; ++d) next.push_back(base + d * st[pos]);
    offsets = std::move(next);
  }
  return offsets;
}

std::vector<std::size_t> complement(std::size_t count, std::span<const std::size_t> group) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < count; ++i)
    if (std::find(group.begin(), group.end(), i) == group.end()) out.push_back(i);
  return out;
}

Vector apply_matrix(const Vector& amps, std::span<const std::size_t> dims,
                    std::span<const std::size_t> group, const Matrix& op) {
  const auto inner = group_offsets(dims, group);
  const auto rest = group_offsets(dims, complement(dims.size(), group));
  if (static_cast<std::size_t>(op.rows()) != inner.size() ||
      static_cast<std::size_t>(op.cols()) != inner.size())
    throw InvalidArgument("operator dimension does not match the selected wires");

  // Gather every group-vector as one column, map them with a single
  // matrix product, and scatter back.
  Matrix local(static_cast<Eigen::Index>(inner.size()), static_cast<Eigen::Index>(rest.size()));
  for (std::size_t r = 0; r < rest.size(); ++r)
    for (std::size_t g = 0; g < inner.size(); ++g) local(g, r) = amps(rest[r] + inner[g]);
  const Matrix mapped = op * local;
  Vector out(amps.size());
  for (std::size_t r = 0; r < rest.size(); ++r)
    for (std::size_t g = 0; g < inner.size(); ++g) out(rest[r] + inner[g]) = mapped(g, r);
  return out;
}

Matrix to_matrix(const Vector& amps, std::span<const std::size_t> dims,
                 std::span<const std::size_t> rows) {
  const auto row_off = group_offsets(dims, rows);
  const auto col_off = group_offsets(dims, complement(dims.size(), rows));
  Matrix m(row_off.size(), col_off.size());
  for (std::size_t c = 0; c < col_off.size(); ++c)
    for (std::size_t r = 0; r < row_off.size(); ++r) m(r, c) = amps(row_off[r] + col_off[c]);
  return m;
}

std::vector<std::size_t> positions(const StateVector& state, std::span<const WireLabel> labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    const std::size_t p = state.position(label);
    if (std::find(out.begin(), out.end(), p) != out.end())
      throw InvalidArgument("wire listed twice: " + to_string(label));
    out.push_back(p);
  }
  return out;
}

}  // namespace qbc3::detail
