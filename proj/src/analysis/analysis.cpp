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

#include "qbc3/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "qbc3/errors.hpp"

namespace qbc3 {

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (successes > trials) throw InvalidArgument("more successes than trials");
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

Matrix committed_mixture(const BB84Record& record, std::span<const std::size_t> originals, int b, double theta) {
  const Matrix u = rotation_gate(b == 0 ? theta : -theta).matrix();
  Matrix rho = Matrix::Zero(2, 2);
  for (auto k : originals) {
    const Vector v = u * bb84_amplitudes(record.j_ids[k]);
    rho += v * v.adjoint();
  }
  return rho / static_cast<double>(originals.size());
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

// Originals that can sit on the committed slot after the given outcome.
std::vector<std::size_t> surviving_originals(std::size_t n, const std::vector<std::size_t>& requested, Claim outcome) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool in = std::binary_search(requested.begin(), requested.end(), i);
    if (in == (outcome == Claim::CommittedInS)) out.push_back(i);
  }
  return out;
}

void validate_request(std::size_t n, const std::vector<std::size_t>& requested) {
  if (requested.empty() || requested.size() >= n || !std::is_sorted(requested.begin(), requested.end()) ||
      std::adjacent_find(requested.begin(), requested.end()) != requested.end() || requested.back() >= n)
    throw InvalidArgument("challenge must be a sorted proper subset of the slots");
}

}  // namespace

BB84Record random_record(std::size_t n, Rng& rng) {
  BB84Record r;
  r.j_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) r.j_ids.push_back(1 + static_cast<int>(uniform_below(rng, 4)));
  return r;
}

std::pair<DensityOperator, DensityOperator> committed_views(const BB84Record& record, double theta) {
  record.validate();
  const auto idx = all_indices(record.size());
  return {DensityOperator(committed_mixture(record, idx, 0, theta)),
          DensityOperator(committed_mixture(record, idx, 1, theta))};
}

double concealment_distance(const BB84Record& record, double theta) {
  const auto [rho0, rho1] = committed_views(record, theta);
  return trace_distance(rho0, rho1);
}

MeanEstimate expected_concealment(std::size_t n, double theta, std::size_t trials, Rng& rng) {
  if (trials < 2) throw InvalidArgument("expected_concealment needs at least 2 trials");
  if (n < 1) throw InvalidArgument("n must be positive");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double d = concealment_distance(random_record(n, rng), theta);
    const double delta = d - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (d - mean);
  }
  const double var = m2 / static_cast<double>(trials - 1);
  return {mean, std::sqrt(var / static_cast<double>(trials)), trials};
}

double cheat_fidelity_pre(const BB84Record& record, double theta) {
  const StateVector psi0 = epr_replay_state(record, theta, 0, std::nullopt);
  const StateVector psi1 = epr_replay_state(record, theta, 1, std::nullopt);
  return cheat_trace_norm(psi0, psi1, alice_wires(psi0));
}

PostCheckBranch cheat_fidelity_post(const ProtocolParams& params, const BB84Record& record,
                                    const std::vector<std::size_t>& requested, Claim outcome) {
  if (outcome == Claim::None) throw InvalidArgument("post-check fidelity needs a resolved outcome");
  record.validate();
  const std::size_t n = record.size();
  validate_request(n, requested);

  PostCheckBranch out;
  out.outcome = outcome;
  out.surviving_branches = surviving_originals(n, requested, outcome).size();
  out.probability = static_cast<double>(out.surviving_branches) / static_cast<double>(n);
  if (out.surviving_branches == 0) return out;

  const std::optional<ChallengeRecord> ch =
      ChallengeRecord{requested, outcome, effective_set(n, requested, outcome)};
  const StateVector psi0 = epr_replay_state(record, params.theta, 0, ch);
  const StateVector psi1 = epr_replay_state(record, params.theta, 1, ch);
  out.fidelity = cheat_trace_norm(psi0, psi1, alice_wires(psi0));
  const auto b_wires = psi0.owned_by(Party::B);
  out.post_check_distance = trace_distance(partial_trace(psi0, b_wires), partial_trace(psi1, b_wires));
  return out;
}

std::optional<double> conditioned_view_fidelity(const BB84Record& record, double theta,
                                                const std::vector<std::size_t>& requested, Claim outcome) {
  record.validate();
  validate_request(record.size(), requested);
  const auto originals = surviving_originals(record.size(), requested, outcome);
  if (originals.empty()) return std::nullopt;
  return fidelity(DensityOperator(committed_mixture(record, originals, 0, theta)),
                  DensityOperator(committed_mixture(record, originals, 1, theta)));
}

double analytic_cheat_decomposition(const ProtocolParams& params, const BB84Record& record,
                                    const std::vector<std::size_t>& requested) {
  double total = 0.0;
  for (Claim c : {Claim::CommittedNotInS, Claim::CommittedInS}) {
    const auto br = cheat_fidelity_post(params, record, requested, c);
    if (br.fidelity) total += br.probability * *br.fidelity * *br.fidelity;
  }
  return total;
}

SecurityReport ensemble_cheat_estimate(const ProtocolParams& params, std::size_t trials, Rng& rng) {
  params.validate();
  if (trials == 0) throw InvalidArgument("ensemble estimate needs trials");
  if (params.alice_mode == AliceMode::EprCheat && params.n > kMaxEprQubits)
    throw InvalidArgument("entangled simulation is limited to n <= " + std::to_string(kMaxEprQubits));

  SecurityReport rep;
  rep.n = params.n;
  rep.m = params.m;
  rep.lambda = params.lambda;
  rep.theta = params.theta;
  rep.trials = trials;
  if (trials < 100) rep.warnings.push_back("fewer than 100 trials: interval is not meaningful");

  const bool epr = params.alice_mode == AliceMode::EprCheat;
  const double honest_flip = std::pow(std::cos(2.0 * params.theta), 2);
  std::size_t successes = 0;
  double analytic = 0.0, exact_accept = 0.0, score = 0.0;
  double f_pre = 0.0, f_out = 0.0, f_in = 0.0, d_post = 0.0;

  for (std::size_t t = 0; t < trials; ++t) {
    Rng trial_rng(rng());
    SessionTranscript log;
    Segment seg = bob_prepare(params.n, trial_rng, log);
    if (epr)
      alice_commit_epr(seg, 0, params.theta, log);
    else
      alice_commit_honest(seg, 0, params.theta, trial_rng, log);

    double accept_p = 1.0;
    bool detected = false;
    bool success = false;
    if (params.checking) {
      issue_challenge(seg, bob_challenge(params.n, params.lambda, trial_rng), log);
      alice_answer_challenge(seg, trial_rng, log);
      const auto v = bob_verify_returned(seg, params.verify_mode, trial_rng, log);
      if (v.probability) accept_p *= *v.probability;
      detected = !v.passed;
    }
    if (!detected) {
      const auto ann = alice_open(seg, 1, trial_rng, log);
      const auto v = bob_verify_open(seg, ann, params.verify_mode, trial_rng, log);
      if (v.probability) accept_p *= *v.probability;
      success = v.passed;
    } else {
      accept_p = 0.0;
    }
    successes += success ? 1 : 0;
    exact_accept += accept_p;
    score += (success ? 1.0 : 0.0) -
             (detected && params.accounting == Accounting::Game ? params.penalty : 0.0);

    if (!epr) {
      analytic += honest_flip;
      continue;
    }
    const double pre = cheat_fidelity_pre(seg.record, params.theta);
    f_pre += pre;
    if (!params.checking) {
      analytic += pre * pre;
      continue;
    }
    const auto& s = seg.challenge->requested;
    const auto out = cheat_fidelity_post(params, seg.record, s, Claim::CommittedNotInS);
    const auto in = cheat_fidelity_post(params, seg.record, s, Claim::CommittedInS);
    f_out += out.fidelity.value_or(0.0);
    f_in += in.fidelity.value_or(0.0);
    d_post += out.probability * out.post_check_distance.value_or(0.0) +
              in.probability * in.post_check_distance.value_or(0.0);
    analytic += out.probability * std::pow(out.fidelity.value_or(0.0), 2) +
                in.probability * std::pow(in.fidelity.value_or(0.0), 2);
  }

  const double nt = static_cast<double>(trials);
  rep.cheat_estimate = Estimate{static_cast<double>(successes) / nt, wilson_interval(successes, trials)};
  rep.analytic_decomposition = analytic / nt;
  if (params.verify_mode == VerifyMode::Exact) rep.exact_accept_mean = exact_accept / nt;
  if (params.accounting == Accounting::Game) rep.game_score = score / nt;
  if (epr) {
    rep.cheat_f_pre = f_pre / nt;
    if (params.checking) {
      const double s = static_cast<double>(params.check_size());
      rep.p_in = s / static_cast<double>(params.n);
      rep.p_out = 1.0 - *rep.p_in;
      rep.f_out = f_out / nt;
      rep.f_in = f_in / nt;
      rep.post_check_distance = d_post / nt;
    }
  }
  return rep;
}

SegmentView segment_view(const BB84Record& record, double theta, double cheat_probability) {
  auto [rho0, rho1] = committed_views(record, theta);
  const double d = trace_distance(rho0, rho1);
  return {std::move(rho0), std::move(rho1), d, theta, cheat_probability};
}

ComposedTotals compose_segments(std::span<const SegmentView> segments) {
  if (segments.empty()) throw InvalidArgument("composition needs at least one segment");
  ComposedTotals out;
  out.m = segments.size();
  for (const auto& s : segments) {
    out.epsilon_bound += s.distance;
    out.honest_flip_total *= std::pow(std::cos(2.0 * s.theta), 2);
    out.cheat_total *= s.cheat_probability;
  }
  if (out.m <= kMaxExactSegments) {
    DensityOperator rho0 = segments[0].rho0;
    DensityOperator rho1 = segments[0].rho1;
    for (std::size_t i = 1; i < segments.size(); ++i) {
      rho0 = kron(rho0, segments[i].rho0);
      rho1 = kron(rho1, segments[i].rho1);
    }
    out.epsilon_exact = trace_distance(rho0, rho1);
  }
  return out;
}

SecurityReport scan_point(const GridPoint& point, std::size_t index, const ScanOptions& options) {
  SecurityReport rep;
  rep.n = point.n;
  rep.m = point.m;
  rep.lambda = point.lambda;
  rep.theta = point.theta;
  rep.trials = point.trials;
  rep.seed = split_seed(options.root_seed, "scan", index, 0);
  try {
    if (point.n < 2 || point.n > kMaxConcealQubits)
      throw InvalidArgument("n must lie in 2.." + std::to_string(kMaxConcealQubits));
    if (point.m < 1) throw InvalidArgument("m must be at least 1");
    ProtocolParams params;
    params.n = point.n;
    params.m = point.m;
    params.lambda = point.lambda;
    params.theta = point.theta;
    params.alice_mode = options.alice_mode;
    params.accounting = options.accounting;
    params.penalty = options.penalty;
    params.verify_mode = options.verify_mode;
    params.checking = options.checking;
    params.commit_bit = 0;
    params.open_bit = 1;
    params.validate();

    Rng conceal_rng = make_rng(options.root_seed, "scan", index, 0);
    rep.concealment = expected_concealment(point.n, point.theta, point.trials, conceal_rng);

    const bool epr = options.alice_mode == AliceMode::EprCheat;
    const double honest_flip = std::pow(std::cos(2.0 * point.theta), 2);
    auto cheat_probability = [&](const BB84Record& rec, Rng& r) {
      if (!epr) return honest_flip;
      if (!options.checking) {
        const auto [rho0, rho1] = committed_views(rec, point.theta);
        return std::pow(fidelity(rho0, rho1), 2);
      }
      const auto s = bob_challenge(point.n, point.lambda, r).requested;
      double total = 0.0;
      for (Claim c : {Claim::CommittedNotInS, Claim::CommittedInS}) {
        const auto f = conditioned_view_fidelity(rec, point.theta, s, c);
        const double p = static_cast<double>(c == Claim::CommittedInS ? s.size() : point.n - s.size()) /
                         static_cast<double>(point.n);
        if (f) total += p * *f * *f;
      }
      return total;
    };

    Rng compose_rng = make_rng(options.root_seed, "scan", index, 3);
    std::vector<SegmentView> views;
    for (std::size_t i = 0; i < point.m; ++i) {
      const auto rec = random_record(point.n, compose_rng);
      views.push_back(segment_view(rec, point.theta, cheat_probability(rec, compose_rng)));
    }
    rep.composed = compose_segments(views);

    if (point.n <= kMaxEprQubits) {
      if (epr) {
        Rng bind_rng = make_rng(options.root_seed, "scan", index, 1);
        const std::size_t samples = std::max<std::size_t>(1, std::min(options.binding_samples, point.trials));
        double f_pre = 0.0, f_out = 0.0, f_in = 0.0, d_post = 0.0;
        for (std::size_t i = 0; i < samples; ++i) {
          const auto rec = random_record(point.n, bind_rng);
          f_pre += cheat_fidelity_pre(rec, point.theta);
          if (!options.checking) continue;
          const auto s = bob_challenge(point.n, point.lambda, bind_rng).requested;
          const auto out = cheat_fidelity_post(params, rec, s, Claim::CommittedNotInS);
          const auto in = cheat_fidelity_post(params, rec, s, Claim::CommittedInS);
          f_out += out.fidelity.value_or(0.0);
          f_in += in.fidelity.value_or(0.0);
          d_post += out.probability * out.post_check_distance.value_or(0.0) +
                    in.probability * in.post_check_distance.value_or(0.0);
          rep.p_out = out.probability;
          rep.p_in = in.probability;
        }
        const double ns = static_cast<double>(samples);
        rep.cheat_f_pre = f_pre / ns;
        if (options.checking) {
          rep.f_out = f_out / ns;
          rep.f_in = f_in / ns;
          rep.post_check_distance = d_post / ns;
        }
      }
      Rng ensemble_rng = make_rng(options.root_seed, "scan", index, 2);
      const auto ens = ensemble_cheat_estimate(params, point.trials, ensemble_rng);
      rep.cheat_estimate = ens.cheat_estimate;
      rep.analytic_decomposition = ens.analytic_decomposition;
      rep.exact_accept_mean = ens.exact_accept_mean;
      rep.game_score = ens.game_score;
      rep.warnings = ens.warnings;
    }
  } catch (const std::exception& e) {
    rep.error = e.what();
  }
  return rep;
}

std::vector<SecurityReport> scan(std::span<const GridPoint> grid, const ScanOptions& options,
                                 const std::function<bool()>& keep_going) {
  std::vector<SecurityReport> out;
  const std::size_t width = std::max<std::size_t>(1, options.threads);
  for (std::size_t start = 0; start < grid.size(); start += width) {
    if (keep_going && !keep_going()) break;
    const std::size_t stop = std::min(grid.size(), start + width);
    std::vector<std::future<SecurityReport>> batch;
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred,
                                 [&grid, &options, i] { return scan_point(grid[i], i, options); }));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

}  // namespace qbc3
