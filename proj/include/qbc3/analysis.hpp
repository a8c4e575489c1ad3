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

// Security metrics for one commitment segment and their m-segment
// composition. Monte Carlo routines take an explicit generator and draw
// one sub-seed per trial, so results depend only on the generator state.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qbc3/core.hpp"
#include "qbc3/protocol.hpp"

namespace qbc3 {

inline constexpr double kWilsonZ95 = 1.959963984540054;
/// Largest n simulated with the full entangled state.
inline constexpr std::size_t kMaxEprQubits = 8;
/// Largest n for concealment-only statistics.
inline constexpr std::size_t kMaxConcealQubits = 64;
/// Largest m for the exact tensor-product concealment distance.
inline constexpr std::size_t kMaxExactSegments = 10;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

Interval wilson_interval(std::size_t successes, std::size_t trials, double z = kWilsonZ95);

// -- concealment ------------------------------------------------------------

/// B's views of the committed qubit: (1/n) sum_k U_b |j_k><j_k| U_b^dagger.
std::pair<DensityOperator, DensityOperator> committed_views(const BB84Record& record, double theta);

double concealment_distance(const BB84Record& record, double theta);

/// B's optimal probability of guessing the bit early.
inline double guess_probability(double distance) { return 0.5 + distance / 2.0; }

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

MeanEstimate expected_concealment(std::size_t n, double theta, std::size_t trials, Rng& rng);

BB84Record random_record(std::size_t n, Rng& rng);

// -- binding ----------------------------------------------------------------

/// Uhlmann fidelity between the two entangled commitments as seen by B.
double cheat_fidelity_pre(const BB84Record& record, double theta);

struct PostCheckBranch {
  Claim outcome = Claim::None;
  double probability = 0.0;
  /// Trace norm of the cheat operator between the conditioned states;
  /// absent when the outcome cannot occur.
  std::optional<double> fidelity;
  /// Trace distance of B's conditioned views (committed + returned wires).
  std::optional<double> post_check_distance;
  std::size_t surviving_branches = 0;
};

PostCheckBranch cheat_fidelity_post(const ProtocolParams& params, const BB84Record& record,
                                    const std::vector<std::size_t>& requested, Claim outcome);

/// sum over both outcomes of p_outcome * F_conditioned^2.
/// Same quantity as cheat_fidelity_post(...).fidelity computed only from the
/// 2x2 committed-qubit mixtures over the surviving branches (the returned
/// qubits are product states). No entangled simulation; usable for any n.
std::optional<double> conditioned_view_fidelity(const BB84Record& record, double theta,
                                                const std::vector<std::size_t>& requested, Claim outcome);

double analytic_cheat_decomposition(const ProtocolParams& params, const BB84Record& record,
                                    const std::vector<std::size_t>& requested);

struct ComposedTotals {
  std::size_t m = 0;
  /// Exact distance of the m-fold product views (m <= kMaxExactSegments).
  std::optional<double> epsilon_exact;
  /// sum_i D_i
  double epsilon_bound = 0.0;
  /// prod_i cos^2(2 theta_i)
  double honest_flip_total = 1.0;
  /// prod_i of the per-segment cheat probability
  double cheat_total = 1.0;
};

struct Estimate {
  double value = 0.0;
  Interval interval;
};

struct SecurityReport {
  std::size_t n = 0;
  std::size_t m = 1;
  double lambda = 0.5;
  double theta = 0.0;

  std::optional<MeanEstimate> concealment;
  std::optional<double> post_check_distance;
  std::optional<double> cheat_f_pre;
  std::optional<double> p_out, f_out, p_in, f_in;

  std::optional<Estimate> cheat_estimate;
  /// Mean over trials of sum_o p_o F_o^2 (F_pre^2 without checking).
  std::optional<double> analytic_decomposition;
  /// Mean over trials of B's exact acceptance probability for the
  /// simulated opening (conditioned on A's sampled outcomes).
  std::optional<double> exact_accept_mean;
  std::optional<double> game_score;
  std::optional<ComposedTotals> composed;

  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
  std::string error;
};

/// End-to-end sessions where A commits 0 and opens 1. Under ensemble
/// accounting a detection is a failed cheat; under game accounting the
/// penalty is also subtracted from the score.
SecurityReport ensemble_cheat_estimate(const ProtocolParams& params, std::size_t trials, Rng& rng);

struct SegmentView {
  DensityOperator rho0;
  DensityOperator rho1;
  double distance = 0.0;
  double theta = 0.0;
  double cheat_probability = 0.0;
};

SegmentView segment_view(const BB84Record& record, double theta, double cheat_probability);

ComposedTotals compose_segments(std::span<const SegmentView> segments);

// -- scans ------------------------------------------------------------------

struct GridPoint {
  std::size_t n = 4;
  std::size_t m = 1;
  double lambda = 0.5;
  double theta = 0.0;
  std::size_t trials = 1000;
};

struct ScanOptions {
  std::uint64_t root_seed = 0;
  AliceMode alice_mode = AliceMode::EprCheat;
  Accounting accounting = Accounting::Ensemble;
  double penalty = 0.0;
  VerifyMode verify_mode = VerifyMode::Exact;
  bool checking = true;
  /// Records averaged for the F columns; capped by the point's trials.
  std::size_t binding_samples = 200;
  std::size_t threads = 1;
};

/// Evaluates one grid point on stream (root_seed, "scan", index).
SecurityReport scan_point(const GridPoint& point, std::size_t index, const ScanOptions& options);

/// One report per grid point, in grid order. `keep_going` is polled between
/// points; when it returns false the scan stops and returns what it has.
std::vector<SecurityReport> scan(std::span<const GridPoint> grid, const ScanOptions& options,
                                 const std::function<bool()>& keep_going = {});

}  // namespace qbc3
