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

#include "qbc3/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qbc3/errors.hpp"

namespace qbc3 {

std::string to_string(AliceMode mode) { return mode == AliceMode::Honest ? "honest" : "epr"; }
std::string to_string(Accounting accounting) {
  return accounting == Accounting::Ensemble ? "ensemble" : "game";
}
std::string to_string(VerifyMode mode) { return mode == VerifyMode::Exact ? "exact" : "sampled"; }
std::string to_string(Claim claim) {
  switch (claim) {
    case Claim::None: return "none";
    case Claim::CommittedInS: return "committed-in-S";
    case Claim::CommittedNotInS: return "committed-not-in-S";
  }
  return "?";
}

std::size_t ProtocolParams::check_size() const {
  return static_cast<std::size_t>(std::llround(lambda * static_cast<double>(n)));
}

void ProtocolParams::validate() const {
  if (n < 2) throw InvalidArgument("n must be at least 2");
  if (m < 1) throw InvalidArgument("m must be at least 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  const std::size_t s = check_size();
  if (s < 1 || s > n - 1) throw InvalidArgument("round(lambda * n) must lie in 1..n-1");
  if (lambda == 0.5 && n % 2 != 0) throw InvalidArgument("n must be even when lambda = 1/2");
  if (!(theta > 0.0 && theta < std::numbers::pi / 4.0)) throw InvalidArgument("theta must lie in (0, pi/4)");
  if (commit_bit != 0 && commit_bit != 1) throw InvalidArgument("commit bit must be 0 or 1");
  if (open_bit < -1 || open_bit > 1) throw InvalidArgument("open bit must be 0, 1 or -1");
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw InvalidArgument("penalty must be a nonnegative real");
}

void BB84Record::validate() const {
  if (j_ids.empty()) throw InvalidArgument("empty BB84 record");
  for (int j : j_ids)
    if (j < 1 || j > 4) throw InvalidArgument("BB84 id out of range: " + std::to_string(j));
}

std::size_t committed_origin(std::size_t n, std::size_t shift) { return (n - shift % n) % n; }

std::vector<std::size_t> effective_set(std::size_t n, const std::vector<std::size_t>& requested, Claim claim) {
  if (claim != Claim::CommittedInS) return requested;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::binary_search(requested.begin(), requested.end(), i)) rest.push_back(i);
  return rest;
}

std::vector<WireLabel> alice_wires(const StateVector& state) { return state.owned_by(Party::A); }

namespace {

void require_owner(const StateVector& state, std::span<const WireLabel> labels, Party party) {
  for (const auto& l : labels)
    if (state.wire(l).owner != party)
      throw InternalError(to_string(party) + " acted on wire " + to_string(l) + " it does not hold");
}

void require_stage(const Segment& seg, std::initializer_list<Stage> allowed, const char* what) {
  if (std::find(allowed.begin(), allowed.end(), seg.stage) == allowed.end())
    throw ProtocolOrderError(std::string(what) + " invoked out of order");
}

void require_bit(int b) {
  if (b != 0 && b != 1) throw InvalidArgument("bit must be 0 or 1");
}

StateVector& state_of(Segment& seg) {
  if (!seg.state) throw InternalError("segment has no state");
  return *seg.state;
}

void transfer(Segment& seg, const WireLabel& label, Party to, Phase phase, SessionTranscript& log) {
  StateVector& st = state_of(seg);
  const Wire& w = st.wire(label);
  log.record_transfer(seg.index, phase, w, w.owner, to);
  st = st.transferred(label, to);
}

void set_origin(Segment& seg, const WireLabel& label, int origin) {
  StateVector& st = state_of(seg);
  Wire w = st.wire(label);
  w.origin = origin;
  st = st.with_wire(label, w);
}

double modulation_angle(int b, double theta) { return b == 0 ? theta : -theta; }

std::vector<WireLabel> labels_of(std::span<const std::size_t> slots) {
  std::vector<WireLabel> out;
  for (auto s : slots) out.push_back(qubit_label(static_cast<int>(s)));
  return out;
}

std::size_t sample_index(std::span<const double> probabilities, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  return probabilities.size() - 1;
}

// Origin carried by each A slot 1..n-1 once the shift value is known.
std::vector<int> slot_origins(std::size_t n, std::size_t shift, const std::optional<ChallengeRecord>& ch) {
  std::vector<int> origin(n, -1);
  if (!ch || ch->claim == Claim::None) {
    for (std::size_t p = 0; p < n; ++p) origin[p] = static_cast<int>((p + n - shift) % n);
    return origin;
  }
  const auto& e = ch->effective_checked;
  const std::size_t c = committed_origin(n, shift);
  origin[0] = static_cast<int>(c);
  std::size_t slot = 1;
  for (auto i : e) origin[slot++] = static_cast<int>(i);
  for (std::size_t i = 0; i < n; ++i)
    if (i != c && !std::binary_search(e.begin(), e.end(), i)) origin[slot++] = static_cast<int>(i);
  return origin;
}

// Per-branch wire permutation over slots 1..n-1 bringing effective_checked
// originals to slots 1..s in ascending order and the rest after them.
Permutation routing_permutation(std::size_t n, std::size_t shift, const std::vector<std::size_t>& effective) {
  const auto target = slot_origins(n, shift, ChallengeRecord{{}, Claim::CommittedNotInS, effective});
  Permutation perm(n - 1);
  for (std::size_t dst = 1; dst < n; ++dst) {
    const auto i = static_cast<std::size_t>(target[dst]);
    const std::size_t src = (i + shift) % n;
    if (src == 0) throw InternalError("requested original sits on the committed slot");
    perm[src - 1] = dst - 1;
  }
  return perm;
}

struct ProjectionOutcome {
  double probability = 1.0;
  bool passed = true;
};

// Projects each (wire, target) pair in turn. Exact mode multiplies the
// conditional probabilities and draws once; sampled mode draws per wire and
// stops at the first failure.
ProjectionOutcome run_projections(StateVector& state, const std::vector<std::pair<WireLabel, Vector>>& tests,
                                  VerifyMode mode, Rng& rng) {
  ProjectionOutcome out;
  StateVector current = state;
  for (const auto& [label, target] : tests) {
    const Projector proj = target * target.adjoint();
    const WireLabel group[] = {label};
    auto hit = project(current, proj, group);
    if (mode == VerifyMode::Sampled) {
      if (uniform01(rng) < hit.probability) {
        current = *hit.post_state;
        continue;
      }
      const Projector miss = Projector::Identity(2, 2) - proj;
      auto other = project(current, miss, group);
      if (other.post_state) current = *other.post_state;
      state = current;
      return {0.0, false};
    }
    out.probability *= hit.probability;
    if (!hit.post_state) {
      out.probability = 0.0;
      break;
    }
    current = *hit.post_state;
  }
  if (mode == VerifyMode::Exact) {
    out.passed = uniform01(rng) < out.probability;
    if (out.passed) state = current;
  } else {
    state = current;
  }
  return out;
}

}  // namespace

Segment bob_prepare(const BB84Record& record, SessionTranscript& log, std::size_t segment) {
  record.validate();
  if (record.size() < 2) throw InvalidArgument("a segment needs at least 2 qubits");
  std::vector<StateVector> parts;
  for (std::size_t i = 0; i < record.size(); ++i)
    parts.push_back(bb84_state(record.j_ids[i], qubit_label(static_cast<int>(i)), Party::B));

  Segment seg;
  seg.index = segment;
  seg.record = record;
  seg.state = tensor(parts);
  log.record(segment, Phase::Prepare, "B", "prepare",
             {{"n", record.size()}, {"j_ids", record.j_ids}, {"private", true}});
  for (std::size_t i = 0; i < record.size(); ++i)
    transfer(seg, qubit_label(static_cast<int>(i)), Party::A, Phase::Prepare, log);
  seg.stage = Stage::Prepared;
  return seg;
}

Segment bob_prepare(std::size_t n, Rng& rng, SessionTranscript& log, std::size_t segment) {
  if (n < 2) throw InvalidArgument("a segment needs at least 2 qubits");
  BB84Record record;
  record.j_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) record.j_ids.push_back(1 + static_cast<int>(uniform_below(rng, 4)));
  return bob_prepare(record, log, segment);
}

void alice_commit_honest_at(Segment& seg, int b, double theta, std::size_t k, SessionTranscript& log) {
  require_stage(seg, {Stage::Prepared}, "commit");
  require_bit(b);
  const std::size_t n = seg.record.size();
  if (k >= n) throw InvalidArgument("committed slot out of range");
  const WireLabel slot = qubit_label(static_cast<int>(k));
  StateVector& st = state_of(seg);
  const WireLabel group[] = {slot};
  require_owner(st, group, Party::A);
  st = apply_on_wires(st, rotation_gate(modulation_angle(b, theta)), group);

  Wire w = st.wire(slot);
  w.label = committed_label(static_cast<int>(k));
  st = st.with_wire(slot, w);
  log.record(seg.index, Phase::Commit, "A", "modulate",
             {{"mode", "honest"}, {"k", k}, {"bit", b}, {"private", true}});
  transfer(seg, w.label, Party::B, Phase::Commit, log);

  seg.mode = AliceMode::Honest;
  seg.theta = theta;
  seg.commit_bit = b;
  seg.honest_k = k;
  seg.committed_slot = k;
  seg.stage = Stage::Committed;
}

std::size_t alice_commit_honest(Segment& seg, int b, double theta, Rng& rng, SessionTranscript& log) {
  const auto k = static_cast<std::size_t>(uniform_below(rng, seg.record.size()));
  alice_commit_honest_at(seg, b, theta, k, log);
  return k;
}

void alice_commit_epr(Segment& seg, int b, double theta, SessionTranscript& log) {
  require_stage(seg, {Stage::Prepared}, "commit");
  require_bit(b);
  const std::size_t n = seg.record.size();
  StateVector& st = state_of(seg);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto qubits = labels_of(all);
  require_owner(st, qubits, Party::A);

  const StateVector parts[] = {uniform_ancilla(n, Party::A), st};
  st = tensor(parts);
  if (st.wire(ancilla_label()).dim != n) throw InternalError("ancilla dimension differs from n");
  st = controlled_shift(st, ancilla_label(), qubits);
  for (const auto& q : qubits) set_origin(seg, q, -1);
  const WireLabel first[] = {qubit_label(0)};
  st = apply_on_wires(st, rotation_gate(modulation_angle(b, theta)), first);

  Wire w = st.wire(first[0]);
  w.label = committed_label(0);
  st = st.with_wire(first[0], w);
  log.record(seg.index, Phase::Commit, "A", "entangle", {{"mode", "epr"}, {"ancilla_dim", n}, {"bit", b}, {"private", true}});
  transfer(seg, w.label, Party::B, Phase::Commit, log);

  seg.mode = AliceMode::EprCheat;
  seg.theta = theta;
  seg.commit_bit = b;
  seg.committed_slot = 0;
  seg.stage = Stage::Committed;
}

ChallengeRecord bob_challenge(std::size_t n, double lambda, Rng& rng) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  const auto s = static_cast<std::size_t>(std::llround(lambda * static_cast<double>(n)));
  if (n < 2 || s < 1 || s > n - 1) throw InvalidArgument("round(lambda * n) must lie in 1..n-1");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < s; ++i) std::swap(idx[i], idx[i + uniform_below(rng, n - i)]);
  ChallengeRecord ch;
  ch.requested.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s));
  std::sort(ch.requested.begin(), ch.requested.end());
  return ch;
}

void issue_challenge(Segment& seg, ChallengeRecord challenge, SessionTranscript& log) {
  require_stage(seg, {Stage::Committed}, "challenge");
  const std::size_t n = seg.record.size();
  std::sort(challenge.requested.begin(), challenge.requested.end());
  if (challenge.requested.empty() || challenge.requested.size() >= n ||
      std::adjacent_find(challenge.requested.begin(), challenge.requested.end()) != challenge.requested.end() ||
      challenge.requested.back() >= n)
    throw InvalidArgument("challenge must be a proper non-empty subset of the slots");
  challenge.claim = Claim::None;
  challenge.effective_checked.clear();
  log.record(seg.index, Phase::Challenge, "B", "request", {{"S", challenge.requested}});
  seg.challenge = std::move(challenge);
  seg.stage = Stage::Challenged;
}

AnswerResult alice_answer_challenge(Segment& seg, Rng& rng, SessionTranscript& log, const AnswerOptions& options) {
  require_stage(seg, {Stage::Challenged}, "answer");
  const std::size_t n = seg.record.size();
  auto& ch = *seg.challenge;
  const auto& s_set = ch.requested;
  auto in_s = [&](std::size_t i) { return std::binary_search(s_set.begin(), s_set.end(), i); };
  AnswerResult result;

  if (seg.mode == AliceMode::Honest) {
    result.claim = in_s(*seg.honest_k) ? Claim::CommittedInS : Claim::CommittedNotInS;
    if (options.forced_claim && *options.forced_claim != result.claim)
      throw InvalidArgument("honest A cannot realize the forced claim");
  } else {
    std::vector<std::size_t> in_shifts, out_shifts;
    for (std::size_t l = 0; l < n; ++l) (in_s(committed_origin(n, l)) ? in_shifts : out_shifts).push_back(l);
    const Projector projectors[] = {ancilla_subset_projector(n, in_shifts), ancilla_subset_projector(n, out_shifts)};
    const WireLabel anc[] = {ancilla_label()};
    require_owner(state_of(seg), anc, Party::A);
    auto branches = luders_measure(state_of(seg), ancilla_label(), projectors);

    std::size_t pick = 0;
    if (options.forced_claim) {
      const std::size_t want = *options.forced_claim == Claim::CommittedInS ? 0 : 1;
      auto it = std::find_if(branches.begin(), branches.end(),
                             [&](const MeasurementBranch& br) { return br.outcome_index == want; });
      if (it == branches.end()) throw InvalidArgument("forced claim has zero probability");
      pick = static_cast<std::size_t>(it - branches.begin());
    } else {
      std::vector<double> probs;
      for (const auto& br : branches) probs.push_back(br.probability);
      pick = sample_index(probs, rng);
    }
    const auto& br = branches[pick];
    result.claim = br.outcome_index == 0 ? Claim::CommittedInS : Claim::CommittedNotInS;
    result.branch_probability = br.probability;
    result.surviving_shifts = br.outcome_index == 0 ? in_shifts : out_shifts;
    seg.state = br.post_state;
    log.record(seg.index, Phase::Answer, "A", "luders",
               {{"outcome", to_string(result.claim)}, {"probability", br.probability}, {"private", true}});
  }

  ch.claim = result.claim;
  ch.effective_checked = effective_set(n, s_set, result.claim);
  log.record(seg.index, Phase::Answer, "A", "claim", {{"claim", to_string(result.claim)}});
  if (result.claim == Claim::CommittedInS)
    log.record(seg.index, Phase::Answer, "B", "counter_challenge", {{"checked", ch.effective_checked}});
  const auto& e = ch.effective_checked;

  if (seg.mode == AliceMode::Honest) {
    for (auto i : e) {
      result.returned.push_back(qubit_label(static_cast<int>(i)));
      transfer(seg, result.returned.back(), Party::B, Phase::Answer, log);
    }
  } else {
    std::vector<std::size_t> a_slots(n - 1);
    std::iota(a_slots.begin(), a_slots.end(), 1);
    const auto wires = labels_of(a_slots);
    if (options.route) {
      std::map<std::size_t, Permutation> perms;
      for (std::size_t l = 0; l < n; ++l) {
        Permutation identity(n - 1);
        std::iota(identity.begin(), identity.end(), 0);
        perms[l] = identity;
      }
      for (auto l : result.surviving_shifts) perms[l] = routing_permutation(n, l, e);
      require_owner(state_of(seg), wires, Party::A);
      seg.state = controlled_route(state_of(seg), ancilla_label(), wires, perms);
      log.record(seg.index, Phase::Answer, "A", "route", {{"slots", e.size()}, {"private", true}});
    }
    for (std::size_t t = 0; t < e.size(); ++t) {
      const WireLabel slot = qubit_label(static_cast<int>(t + 1));
      set_origin(seg, slot, static_cast<int>(e[t]));
      result.returned.push_back(slot);
      transfer(seg, slot, Party::B, Phase::Answer, log);
    }
  }
  seg.stage = Stage::Answered;
  return result;
}

VerifyResult bob_verify_returned(Segment& seg, VerifyMode mode, Rng& rng, SessionTranscript& log) {
  require_stage(seg, {Stage::Answered}, "verify_returned");
  const auto& e = seg.challenge->effective_checked;
  StateVector& st = state_of(seg);
  std::vector<std::pair<WireLabel, Vector>> tests;
  std::vector<std::size_t> seen;
  for (const auto& w : st.wires()) {
    if (w.owner != Party::B || w.label.role != WireRole::Qubit) continue;
    if (w.origin < 0 || !std::binary_search(e.begin(), e.end(), static_cast<std::size_t>(w.origin)))
      throw InvalidArgument("returned wire " + to_string(w.label) + " carries an unrequested label");
    seen.push_back(static_cast<std::size_t>(w.origin));
    tests.emplace_back(w.label, bb84_amplitudes(seg.record.j_ids[static_cast<std::size_t>(w.origin)]));
  }
  std::sort(seen.begin(), seen.end());
  if (seen != e) throw InvalidArgument("returned wires do not match the checked set");

  const auto outcome = run_projections(st, tests, mode, rng);
  VerifyResult result;
  result.passed = outcome.passed;
  if (mode == VerifyMode::Exact) result.probability = outcome.probability;
  nlohmann::ordered_json payload{{"passed", result.passed}};
  if (result.probability) payload["probability"] = *result.probability;
  log.record(seg.index, Phase::VerifyReturned, "B", "verify", payload);
  if (!result.passed) {
    log.flag_detection(seg.index, Phase::VerifyReturned, "returned qubit failed its BB84 projection");
    seg.detected = true;
    seg.stage = Stage::Closed;
  } else {
    seg.stage = Stage::Verified;
  }
  return result;
}

StateVector epr_replay_state(const BB84Record& record, double theta, int b,
                             const std::optional<ChallengeRecord>& challenge) {
  SessionTranscript scratch;
  Rng unused(0);
  Segment seg = bob_prepare(record, scratch);
  alice_commit_epr(seg, b, theta, scratch);
  if (challenge) {
    if (challenge->claim == Claim::None) throw InvalidArgument("replay needs the resolved claim");
    issue_challenge(seg, ChallengeRecord{challenge->requested, Claim::None, {}}, scratch);
    AnswerOptions opts;
    opts.forced_claim = challenge->claim;
    alice_answer_challenge(seg, unused, scratch, opts);
    bob_verify_returned(seg, VerifyMode::Exact, unused, scratch);
  }
  return *seg.state;
}

Announcement alice_open(Segment& seg, int open_bit, Rng& rng, SessionTranscript& log) {
  if (seg.detected) throw ProtocolOrderError("open after a detected cheat");
  require_stage(seg, {Stage::Committed, Stage::Verified}, "open");
  require_bit(open_bit);
  const std::size_t n = seg.record.size();
  Announcement ann;
  ann.bit = open_bit;

  if (seg.mode == AliceMode::Honest) {
    ann.k = *seg.honest_k;
  } else {
    auto a_wires = alice_wires(state_of(seg));
    if (open_bit != seg.commit_bit) {
      const StateVector target = epr_replay_state(seg.record, seg.theta, open_bit, seg.challenge);
      const auto cheat = cheat_operator(state_of(seg), target, a_wires);
      seg.state = apply_on_wires(state_of(seg), cheat.u_opt, a_wires);
      log.record(seg.index, Phase::Open, "A", "steer",
                 {{"target_bit", open_bit}, {"trace_norm", cheat.trace_norm}, {"private", true}});
    }
    std::vector<Projector> basis;
    for (std::size_t l = 0; l < n; ++l) {
      const std::size_t one[] = {l};
      basis.push_back(ancilla_subset_projector(n, one));
    }
    auto branches = luders_measure(state_of(seg), ancilla_label(), basis);
    std::vector<double> probs;
    for (const auto& br : branches) probs.push_back(br.probability);
    const auto& br = branches[sample_index(probs, rng)];
    const std::size_t shift = br.outcome_index;
    seg.state = br.post_state;
    ann.shift = shift;
    ann.k = committed_origin(n, shift);
    log.record(seg.index, Phase::Open, "A", "measure_ancilla", {{"shift", shift}, {"private", true}});

    const auto origin = slot_origins(n, shift, seg.challenge);
    for (const auto& label : alice_wires(state_of(seg)))
      if (label.role == WireRole::Qubit) set_origin(seg, label, origin[static_cast<std::size_t>(label.index)]);
  }

  nlohmann::ordered_json payload{{"k", ann.k}, {"bit", ann.bit}};
  if (ann.shift) payload["shift"] = *ann.shift;
  log.record(seg.index, Phase::Open, "A", "announce", payload);
  for (const auto& label : alice_wires(state_of(seg))) transfer(seg, label, Party::B, Phase::Open, log);
  seg.stage = Stage::Opened;
  return ann;
}

VerifyResult bob_verify_open(Segment& seg, const Announcement& ann, VerifyMode mode, Rng& rng,
                             SessionTranscript& log) {
  require_stage(seg, {Stage::Opened}, "verify_open");
  const std::size_t n = seg.record.size();
  StateVector& st = state_of(seg);
  if (!alice_wires(st).empty()) throw InternalError("B verifies while A still holds wires");
  if (ann.k >= n) throw InvalidArgument("announced index out of range");
  VerifyResult result;

  const bool already_returned =
      seg.challenge && std::binary_search(seg.challenge->effective_checked.begin(),
                                          seg.challenge->effective_checked.end(), ann.k);
  if (already_returned) {
    result.passed = false;
    if (mode == VerifyMode::Exact) result.probability = 0.0;
    log.record(seg.index, Phase::VerifyOpen, "B", "verify",
               {{"passed", false}, {"reason", "announced qubit was returned unmodulated"}});
    seg.stage = Stage::Closed;
    return result;
  }

  std::vector<std::pair<WireLabel, Vector>> tests;
  const Vector committed =
      rotation_gate(modulation_angle(ann.bit, seg.theta)).matrix() * bb84_amplitudes(seg.record.j_ids[ann.k]);
  tests.emplace_back(committed_label(static_cast<int>(seg.committed_slot)), committed);
  for (const auto& w : st.wires()) {
    if (w.label.role != WireRole::Qubit) continue;
    if (w.origin < 0 || static_cast<std::size_t>(w.origin) >= n)
      throw InvalidArgument("opened wire " + to_string(w.label) + " has no original index");
    tests.emplace_back(w.label, bb84_amplitudes(seg.record.j_ids[static_cast<std::size_t>(w.origin)]));
  }

  const auto outcome = run_projections(st, tests, mode, rng);
  result.passed = outcome.passed;
  if (mode == VerifyMode::Exact) result.probability = outcome.probability;
  nlohmann::ordered_json payload{{"passed", result.passed}};
  if (result.probability) payload["probability"] = *result.probability;
  log.record(seg.index, Phase::VerifyOpen, "B", "verify", payload);
  seg.stage = Stage::Closed;
  return result;
}

SessionResult run_session(const ProtocolParams& params, Rng& rng) {
  params.validate();
  SessionResult out;
  auto& log = out.transcript;
  auto& sum = out.summary;
  const int open_bit = params.effective_open_bit();
  double accept_p = 1.0;
  bool rejected = false;

  for (std::size_t s = 0; s < params.m && !rejected; ++s) {
    Segment seg = bob_prepare(params.n, rng, log, s);
    if (params.alice_mode == AliceMode::Honest)
      alice_commit_honest(seg, params.commit_bit, params.theta, rng, log);
    else
      alice_commit_epr(seg, params.commit_bit, params.theta, log);

    if (params.checking) {
      issue_challenge(seg, bob_challenge(params.n, params.lambda, rng), log);
      sum.claims.push_back(alice_answer_challenge(seg, rng, log).claim);
      const auto v = bob_verify_returned(seg, params.verify_mode, rng, log);
      if (v.probability) accept_p *= *v.probability;
      if (!v.passed) {
        ++sum.detections;
        sum.penalty_total += params.accounting == Accounting::Game ? params.penalty : 0.0;
        if (params.accounting == Accounting::Ensemble) break;
        continue;
      }
    }

    const auto ann = alice_open(seg, open_bit, rng, log);
    const auto v = bob_verify_open(seg, ann, params.verify_mode, rng, log);
    if (v.probability) accept_p *= *v.probability;
    if (!v.passed) rejected = true;
  }

  if (sum.detections > 0)
    sum.outcome = {OutcomeKind::CheatDetected, -1};
  else if (rejected)
    sum.outcome = {OutcomeKind::Rejected, -1};
  else
    sum.outcome = {OutcomeKind::Accepted, open_bit};
  const bool cheat_success = sum.outcome.kind == OutcomeKind::Accepted && open_bit != params.commit_bit;
  sum.score = (cheat_success ? 1.0 : 0.0) - sum.penalty_total;
  if (params.verify_mode == VerifyMode::Exact) sum.accept_probability = accept_p;
  log.finish(sum.outcome);
  return out;
}

AuditResult run_entanglement_audit(const ProtocolParams& params, const BB84Record& record, Rng& rng,
                                   const AuditOptions& options) {
  if (params.alice_mode != AliceMode::EprCheat)
    throw InvalidArgument("the audit is defined for the entangled commitment only");
  require_bit(params.commit_bit);
  const int b = params.commit_bit;
  SessionTranscript log;
  Segment seg = bob_prepare(record, log);
  alice_commit_epr(seg, b, params.theta, log);
  const WireLabel anc[] = {ancilla_label()};
  const WireLabel com[] = {committed_label(0)};
  auto stop = [&](AuditStage stage) { return options.stop_before && *options.stop_before <= stage; };
  auto finish = [&](std::optional<double> p) {
    log.finish(p && *p > 1.0 - 1e-9 ? SessionOutcome{OutcomeKind::Accepted, b} : SessionOutcome{});
    return AuditResult{p, *seg.state, std::move(log)};
  };

  if (stop(AuditStage::RandomizeBasis)) return finish(std::nullopt);
  const UnitaryOp basis = random_unitary(record.size(), rng);
  seg.state = apply_on_wires(state_of(seg), basis, anc);
  log.record(0, Phase::Audit, "A", "randomize_ancilla_basis", {{"private", true}});

  if (stop(AuditStage::SendAncilla)) return finish(std::nullopt);
  transfer(seg, ancilla_label(), Party::B, Phase::Audit, log);

  if (stop(AuditStage::ReturnCommitted)) return finish(std::nullopt);
  transfer(seg, committed_label(0), Party::A, Phase::Audit, log);

  if (stop(AuditStage::UndoModulation)) return finish(std::nullopt);
  require_owner(state_of(seg), com, Party::A);
  seg.state = apply_on_wires(state_of(seg), rotation_gate(-modulation_angle(b, params.theta)), com);
  log.record(0, Phase::Audit, "A", "undo_modulation", {{"private", true}});

  if (stop(AuditStage::ReturnAll)) return finish(std::nullopt);
  if (options.stray_rotation != 0.0)
    seg.state = apply_on_wires(state_of(seg), rotation_gate(options.stray_rotation), com);
  log.record(0, Phase::Audit, "A", "announce_basis", {{"bit", b}});
  for (const auto& label : alice_wires(state_of(seg))) transfer(seg, label, Party::B, Phase::Audit, log);

  if (stop(AuditStage::Project)) return finish(std::nullopt);
  StateVector expected = epr_replay_state(record, params.theta, b, std::nullopt);
  expected = apply_on_wires(expected, rotation_gate(-modulation_angle(b, params.theta)), com);
  expected = apply_on_wires(expected, basis, anc);
  const double pass = std::min(1.0, std::norm(inner_product(expected, state_of(seg))));
  log.record(0, Phase::Audit, "B", "project_total_state", {{"probability", pass}});
  return finish(pass);
}

}  // namespace qbc3
