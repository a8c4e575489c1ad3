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

// Two-party execution of one or more commitment segments. A holds the
// commitment, B prepares the BB84 qubits and verifies.

#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "qbc3/core.hpp"
#include "qbc3/rng.hpp"
#include "qbc3/transcript.hpp"

namespace qbc3 {

enum class AliceMode { Honest, EprCheat };
enum class Accounting { Ensemble, Game };
enum class VerifyMode { Exact, Sampled };
enum class Claim { None, CommittedInS, CommittedNotInS };

std::string to_string(AliceMode mode);
std::string to_string(Accounting accounting);
std::string to_string(VerifyMode mode);
std::string to_string(Claim claim);

struct ProtocolParams {
  std::size_t n = 8;
  std::size_t m = 1;
  double lambda = 0.5;
  double theta = std::numbers::pi / 16.0;
  AliceMode alice_mode = AliceMode::Honest;
  Accounting accounting = Accounting::Ensemble;
  double penalty = 0.0;
  VerifyMode verify_mode = VerifyMode::Exact;
  int commit_bit = 0;
  /// Bit A tries to open; -1 means the committed bit.
  int open_bit = -1;
  /// When false the challenge/return phase is skipped entirely.
  bool checking = true;

  /// round(lambda * n)
  std::size_t check_size() const;
  int effective_open_bit() const { return open_bit < 0 ? commit_bit : open_bit; }
  /// Throws InvalidArgument on any violated constraint.
  void validate() const;
};

struct BB84Record {
  std::vector<int> j_ids;

  std::size_t size() const { return j_ids.size(); }
  void validate() const;
};

struct ChallengeRecord {
  std::vector<std::size_t> requested;  // ascending
  Claim claim = Claim::None;
  std::vector<std::size_t> effective_checked;  // ascending
};

/// Original qubit index carried to slot 0 by shift value l: (0 - l) mod n.
std::size_t committed_origin(std::size_t n, std::size_t shift);

/// Index set a Claim selects: S itself, or its complement for CommittedInS.
std::vector<std::size_t> effective_set(std::size_t n, const std::vector<std::size_t>& requested, Claim claim);

enum class Stage { Prepared, Committed, Challenged, Answered, Verified, Opened, Closed };

/// One segment of a session: B's record, the joint state of every wire the
/// segment touches, and the phase bookkeeping. A session owns its segments
/// exclusively.
struct Segment {
  std::size_t index = 0;
  BB84Record record;
  std::optional<StateVector> state;
  Stage stage = Stage::Prepared;
  AliceMode mode = AliceMode::Honest;
  double theta = std::numbers::pi / 16.0;
  int commit_bit = -1;
  std::optional<std::size_t> honest_k;
  std::optional<ChallengeRecord> challenge;
  bool detected = false;
  /// Slot of the wire labeled committed.
  std::size_t committed_slot = 0;
};

// -- B: preparation ---------------------------------------------------------

Segment bob_prepare(std::size_t n, Rng& rng, SessionTranscript& log, std::size_t segment = 0);

/// bob_prepare with a fixed record.
Segment bob_prepare(const BB84Record& record, SessionTranscript& log, std::size_t segment = 0);

// -- A: commitment ----------------------------------------------------------

/// Returns the uniformly chosen slot k.
std::size_t alice_commit_honest(Segment& seg, int b, double theta, Rng& rng, SessionTranscript& log);

/// Honest commit on a caller-chosen slot.
void alice_commit_honest_at(Segment& seg, int b, double theta, std::size_t k, SessionTranscript& log);

/// Entangled commitment: uniform ancilla, controlled shift, U_b on slot 0.
void alice_commit_epr(Segment& seg, int b, double theta, SessionTranscript& log);

// -- checking ---------------------------------------------------------------

/// Uniform subset of size round(lambda * n).
ChallengeRecord bob_challenge(std::size_t n, double lambda, Rng& rng);

/// Delivers B's request to A.
void issue_challenge(Segment& seg, ChallengeRecord challenge, SessionTranscript& log);

struct AnswerOptions {
  /// Coherently route requested originals to the outgoing slots. Disabling
  /// it gives the naive baseline that B's check catches.
  bool route = true;
  /// Select the Luders branch instead of sampling it (analysis replays).
  std::optional<Claim> forced_claim;
};

struct AnswerResult {
  Claim claim = Claim::None;
  /// Probability of the branch that occurred (1 for honest A).
  double branch_probability = 1.0;
  /// Surviving ancilla values (EPR only).
  std::vector<std::size_t> surviving_shifts;
  std::vector<WireLabel> returned;
};

AnswerResult alice_answer_challenge(Segment& seg, Rng& rng, SessionTranscript& log,
                                    const AnswerOptions& options = {});

struct VerifyResult {
  /// Exact joint success probability (exact mode only).
  std::optional<double> probability;
  bool passed = false;
};

/// Projects each returned wire onto |j_origin>. Exact mode conditions the
/// state on success and draws `passed` from the probability; sampled mode
/// measures wire by wire.
VerifyResult bob_verify_returned(Segment& seg, VerifyMode mode, Rng& rng, SessionTranscript& log);

// -- opening ----------------------------------------------------------------

struct Announcement {
  std::size_t k = 0;
  int bit = 0;
  /// Ancilla value measured by an entangled A.
  std::optional<std::size_t> shift;
};

Announcement alice_open(Segment& seg, int open_bit, Rng& rng, SessionTranscript& log);

VerifyResult bob_verify_open(Segment& seg, const Announcement& announcement, VerifyMode mode, Rng& rng,
                             SessionTranscript& log);

/// Global state an entangled A would hold after committing `b` and living
/// through the same challenge and Luders outcome. Used as the opening
/// target for the opposite bit.
StateVector epr_replay_state(const BB84Record& record, double theta, int b,
                             const std::optional<ChallengeRecord>& challenge);

/// A-owned wires of a segment state.
std::vector<WireLabel> alice_wires(const StateVector& state);

// -- sessions ---------------------------------------------------------------

struct SessionSummary {
  SessionOutcome outcome;
  std::vector<Claim> claims;  // per checked segment
  std::size_t detections = 0;
  double penalty_total = 0.0;
  /// 1 for an accepted opening of a bit other than the committed one, minus
  /// penalties under game accounting.
  double score = 0.0;
  /// Product of exact per-phase pass probabilities (exact mode).
  std::optional<double> accept_probability;
};

struct SessionResult {
  SessionTranscript transcript;
  SessionSummary summary;
};

SessionResult run_session(const ProtocolParams& params, Rng& rng);

/// Stages of the entangled-commitment audit, in execution order.
enum class AuditStage { RandomizeBasis, SendAncilla, ReturnCommitted, UndoModulation, ReturnAll, Project };

struct AuditOptions {
  /// Extra rotation A applies to her qubits before handing everything back.
  double stray_rotation = 0.0;
  /// Abort before this stage (Project runs the whole audit).
  std::optional<AuditStage> stop_before;
};

struct AuditResult {
  /// Probability that B's projection onto the expected total state succeeds;
  /// absent when aborted.
  std::optional<double> pass_probability;
  StateVector final_state;
  SessionTranscript transcript;
};

AuditResult run_entanglement_audit(const ProtocolParams& params, const BB84Record& record, Rng& rng,
                                   const AuditOptions& options = {});

}  // namespace qbc3
