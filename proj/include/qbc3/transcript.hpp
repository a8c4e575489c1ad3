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

// Line-delimited session log. Each line is one JSON object with the fixed
// key order: seq, segment, phase, actor, event, payload.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbc3/core.hpp"

namespace qbc3 {

enum class Phase { Prepare, Commit, Challenge, Answer, VerifyReturned, Open, VerifyOpen, Audit, Outcome };

std::string to_string(Phase phase);

enum class OutcomeKind { Accepted, Rejected, CheatDetected };

struct SessionOutcome {
  OutcomeKind kind = OutcomeKind::Rejected;
  int bit = -1;  // meaningful for Accepted

  std::string describe() const;
};

struct TranscriptEvent {
  std::size_t segment = 0;
  Phase phase = Phase::Prepare;
  std::string actor;  // "A", "B" or "-"
  std::string kind;
  nlohmann::ordered_json payload;
};

class SessionTranscript {
 public:
  void record(std::size_t segment, Phase phase, std::string actor, std::string kind,
              nlohmann::ordered_json payload = nlohmann::ordered_json::object());

  /// Logs an ownership change. A wire may cross once per direction per
  /// phase and segment; a repeat is an InternalError.
  void record_transfer(std::size_t segment, Phase phase, const Wire& wire, Party from, Party to);

  void flag_detection(std::size_t segment, Phase phase, std::string reason);

  /// Sets the final outcome; calling twice is an InternalError.
  void finish(SessionOutcome outcome);

  const std::vector<TranscriptEvent>& events() const { return events_; }
  const std::optional<SessionOutcome>& outcome() const { return outcome_; }
  std::size_t detections() const { return detections_; }

  /// One JSON object per line, newline-terminated.
  std::string to_jsonl() const;

 private:
  std::vector<TranscriptEvent> events_;
  std::set<std::tuple<std::size_t, Phase, WireLabel, Party>> crossings_;
  std::optional<SessionOutcome> outcome_;
  std::size_t detections_ = 0;
};

}  // namespace qbc3
