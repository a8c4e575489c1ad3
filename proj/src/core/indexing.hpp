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

// Index arithmetic shared by the core kernels. Not part of the public API.

#include <cstddef>
#include <span>
#include <vector>

#include "qbc3/core.hpp"

namespace qbc3::detail {

std::vector<std::size_t> strides(std::span<const std::size_t> dims);

/// Offsets of every joint basis state of `group` (first listed slowest)
/// relative to an index whose group digits are all zero.
std::vector<std::size_t> group_offsets(std::span<const std::size_t> dims,
                                       std::span<const std::size_t> group);

/// Complement of `group` in [0, dims.size()), in ascending order.
std::vector<std::size_t> complement(std::size_t count, std::span<const std::size_t> group);

/// Applies `op` (any square matrix) to the tensor factor spanned by `group`.
Vector apply_matrix(const Vector& amps, std::span<const std::size_t> dims,
                    std::span<const std::size_t> group, const Matrix& op);

/// Reshapes amplitudes into a matrix with rows indexed by `rows` (given
/// order) and columns by the remaining wires (state order).
Matrix to_matrix(const Vector& amps, std::span<const std::size_t> dims,
                 std::span<const std::size_t> rows);

std::vector<std::size_t> positions(const StateVector& state, std::span<const WireLabel> labels);

}  // namespace qbc3::detail
