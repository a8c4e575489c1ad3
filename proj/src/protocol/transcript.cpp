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

#include "qbc3/transcript.hpp"

#include "qbc3/errors.hpp"

namespace qbc3 {

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Prepare: return "prepare";
    case Phase::Commit: return "commit";
    case Phase::Challenge: return "challenge";
    case Phase::Answer: return "answer";
    case Phase::VerifyReturned: return "verify_returned";
    case Phase::Open: return "open";
    case Phase::VerifyOpen: return "verify_open";
    case Phase::Audit: return "audit";
    case Phase::Outcome: return "outcome";
  }
  return "?";
}

std::string SessionOutcome::describe() const {
  switch (kind) {
    case OutcomeKind::Accepted: return "accepted(" + std::to_string(bit) + ")";
    case OutcomeKind::Rejected: return "rejected";
    case OutcomeKind::CheatDetected: return "cheat-detected";
  }
  return "?";
}

void SessionTranscript::record(std::size_t segment, Phase phase, std::string actor, std::string kind,
                               nlohmann::ordered_json payload) {
  if (outcome_) throw InternalError("event recorded after the session outcome");
  events_.push_back({segment, phase, std::move(actor), std::move(kind), std::move(payload)});
}

void SessionTranscript::record_transfer(std::size_t segment, Phase phase, const Wire& wire, Party from,
                                        Party to) {
  if (from == to) throw InternalError("transfer to the current owner");
  if (!crossings_.emplace(segment, phase, wire.label, to).second)
    throw InternalError("wire " + to_string(wire.label) + " crossed twice toward " + to_string(to) +
                        " in phase " + to_string(phase));
  nlohmann::ordered_json payload;
  payload["wire"] = to_string(wire.label);
  payload["from"] = to_string(from);
  payload["to"] = to_string(to);
  if (wire.origin >= 0) payload["origin"] = wire.origin;
  record(segment, phase, to_string(from), "transfer", std::move(payload));
}

void SessionTranscript::flag_detection(std::size_t segment, Phase phase, std::string reason) {
  ++detections_;
  record(segment, phase, "B", "detection", {{"reason", std::move(reason)}});
}

void SessionTranscript::finish(SessionOutcome outcome) {
  if (outcome_) throw InternalError("session outcome set twice");
  nlohmann::ordered_json payload;
  payload["outcome"] = outcome.describe();
  payload["detections"] = detections_;
  events_.push_back({0, Phase::Outcome, "-", "outcome", std::move(payload)});
  outcome_ = outcome;
}

std::string SessionTranscript::to_jsonl() const {
  std::string out;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    nlohmann::ordered_json line;
    line["seq"] = i;
    line["segment"] = e.segment;
    line["phase"] = to_string(e.phase);
    line["actor"] = e.actor;
    line["event"] = e.kind;
    line["payload"] = e.payload;
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace qbc3
