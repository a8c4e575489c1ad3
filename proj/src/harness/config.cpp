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
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "qbc3/errors.hpp"
#include "qbc3/harness.hpp"

namespace qbc3 {

namespace {

const std::map<std::string, AliceMode> kModes{{"honest", AliceMode::Honest}, {"epr", AliceMode::EprCheat}};
const std::map<std::string, Accounting> kAccounting{{"ensemble", Accounting::Ensemble},
                                                    {"game", Accounting::Game}};
const std::map<std::string, VerifyMode> kVerify{{"exact", VerifyMode::Exact}, {"sampled", VerifyMode::Sampled}};
const std::map<std::string, TableFormat> kFormats{{"csv", TableFormat::Csv}, {"json", TableFormat::Json}};
const std::map<std::string, Subcommand> kCommands{{"conceal", Subcommand::Conceal},
                                                  {"bind", Subcommand::Bind},
                                                  {"session", Subcommand::Session},
                                                  {"scan", Subcommand::Scan}};

template <class E>
std::string key_of(const std::map<std::string, E>& table, E value) {
  for (const auto& [k, v] : table)
    if (v == value) return k;
  throw InternalError("unnamed enum value");
}

template <class T>
nlohmann::ordered_json list_json(const std::vector<T>& values) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& v : values) out.push_back(v);
  return out;
}

}  // namespace

std::string to_string(Subcommand command) { return key_of(kCommands, command); }

AliceMode RunConfig::effective_mode() const {
  if (mode) return *mode;
  return command == Subcommand::Session ? AliceMode::Honest : AliceMode::EprCheat;
}

void RunConfig::validate() const {
  if (n_values.empty() || m_values.empty() || lambda_values.empty())
    throw InvalidArgument("--n, --m and --lambda need at least one value");
  for (auto n : n_values)
    if (n < 2 || n > kMaxConcealQubits)
      throw InvalidArgument("n must lie in 2.." + std::to_string(kMaxConcealQubits));
  for (auto m : m_values)
    if (m < 1) throw InvalidArgument("m must be at least 1");
  for (double l : lambda_values)
    if (!(l > 0.0 && l < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (!(theta > 0.0 && theta < std::numbers::pi / 4.0)) throw InvalidArgument("theta must lie in (0, pi/4)");
  if (trials < 1) throw InvalidArgument("trials must be at least 1");
  if (root_seed && *root_seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    throw InvalidArgument("seed must be below 2^63");
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) throw InvalidArgument("penalty must be a nonnegative real");
  if (commit_bit != 0 && commit_bit != 1) throw InvalidArgument("commit bit must be 0 or 1");
  if (open_bit < -1 || open_bit > 1) throw InvalidArgument("open bit must be 0, 1 or -1");
  if (threads < 1 || threads > 256) throw InvalidArgument("threads must lie in 1..256");
  if (symmetric_record) {
    if (command != Subcommand::Conceal && command != Subcommand::Session)
      throw InvalidArgument("--symmetric-record applies to conceal and session");
    for (auto n : n_values)
      if (n % 4 != 0) throw InvalidArgument("--symmetric-record needs n divisible by 4");
  }
  if (audit && (command != Subcommand::Session || effective_mode() != AliceMode::EprCheat))
    throw InvalidArgument("--audit applies to session with --mode epr");

  if (command == Subcommand::Bind || command == Subcommand::Session) {
    for (auto n : n_values) {
      if (n > kMaxEprQubits)
        throw InvalidArgument(to_string(command) + " simulates the full state; n must be at most " +
                              std::to_string(kMaxEprQubits));
      for (auto m : m_values)
        for (double l : lambda_values) {
          ProtocolParams p;
          p.n = n;
          p.m = m;
          p.lambda = l;
          p.theta = theta;
          p.penalty = penalty;
          p.commit_bit = commit_bit;
          p.open_bit = open_bit;
          p.validate();
        }
    }
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = to_string(command);
  j["n"] = list_json(n_values);
  j["m"] = list_json(m_values);
  j["lambda"] = list_json(lambda_values);
  j["theta"] = theta;
  j["trials"] = trials;
  j["seed"] = root_seed ? nlohmann::ordered_json(*root_seed) : nlohmann::ordered_json();
  j["mode"] = key_of(kModes, effective_mode());
  j["accounting"] = key_of(kAccounting, accounting);
  j["penalty"] = penalty;
  j["verify"] = key_of(kVerify, verify_mode);
  j["out"] = out;
  j["format"] = to_string(format);
  j["config"] = config_path;
  j["symmetric_record"] = symmetric_record;
  j["checking"] = checking;
  j["audit"] = audit;
  j["commit_bit"] = commit_bit;
  j["open_bit"] = open_bit;
  j["threads"] = threads;
  return j;
}

ParseResult parse_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Simulator for a quantum bit commitment scheme with cyclic-shift entanglement"};
  app.name("qbc3");
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  app.set_version_flag("--version", std::string(QBC3_VERSION));

  std::string mode, accounting = "ensemble", verify = "exact", format = "csv";
  std::uint64_t seed = 0;
  bool no_checking = false;
  app.add_option("--n", cfg.n_values, "Qubits per segment (comma-separated list)")->delimiter(',');
  app.add_option("--m", cfg.m_values, "Segments per commitment (list)")->delimiter(',');
  app.add_option("--lambda", cfg.lambda_values, "Checked fraction (list)")->delimiter(',');
  app.add_option("--theta", cfg.theta, "Modulation angle in radians")->capture_default_str();
  app.add_option("--trials", cfg.trials, "Monte Carlo trials")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Root seed; generated and recorded when absent");
  auto* mode_opt = app.add_option("--mode", mode, "A's strategy")->check(CLI::IsMember({"honest", "epr"}));
  app.add_option("--accounting", accounting, "Detection accounting")
      ->check(CLI::IsMember({"ensemble", "game"}))
      ->capture_default_str();
  app.add_option("--penalty", cfg.penalty, "Score penalty per detection (game accounting)");
  app.add_option("--verify", verify, "Verification mode")
      ->check(CLI::IsMember({"exact", "sampled"}))
      ->capture_default_str();
  app.add_option("--out", cfg.out, "Output file (default: $" + std::string(kOutDirEnv) + "/<command>.<ext>)");
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_flag("--symmetric-record", cfg.symmetric_record, "Use the record 1,2,3,4,1,2,... instead of random ones");
  app.add_flag("--no-checking", no_checking, "Skip the challenge and return phase");
  app.add_flag("--audit", cfg.audit, "session: run the entanglement audit as well");
  app.add_option("--commit-bit", cfg.commit_bit, "session: committed bit");
  app.add_option("--open-bit", cfg.open_bit, "session: bit A opens (-1 = committed bit)");
  app.add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();

  for (const auto& [name, cmd] : kCommands) {
    (void)cmd;
    app.add_subcommand(name, "Run the " + name + " analysis")->fallthrough();
  }
  app.get_subcommand("conceal")->description("Mean trace distance of B's committed-qubit views");
  app.get_subcommand("bind")->description("Cheat fidelities and the end-to-end cheat estimate");
  app.get_subcommand("session")->description("One protocol run: transcript and outcome");
  app.get_subcommand("scan")->description("Grid over n x m x lambda with composed totals");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return {std::nullopt, code == 0 ? kExitOk : kExitUsage};
  }

  cfg.command = kCommands.at(app.get_subcommands().front()->get_name());
  if (mode_opt->count() > 0) cfg.mode = kModes.at(mode);
  if (seed_opt->count() > 0) cfg.root_seed = seed;
  cfg.accounting = kAccounting.at(accounting);
  cfg.verify_mode = kVerify.at(verify);
  cfg.format = kFormats.at(format);
  cfg.checking = !no_checking;
  if (auto* c = app.get_option("--config"); c->count() > 0) cfg.config_path = c->as<std::string>();
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    err << "qbc3: " << e.what() << "\n";
    return {std::nullopt, kExitUsage};
  }
  return {cfg, kExitOk};
}

}  // namespace qbc3
