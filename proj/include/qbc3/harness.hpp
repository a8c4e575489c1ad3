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

// Command-line front end. Every subcommand builds a Table in memory and a
// single writer persists it together with a manifest.

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbc3/analysis.hpp"
#include "qbc3/protocol.hpp"

namespace qbc3 {

// -- tables -----------------------------------------------------------------

/// Empty cells are written as an empty CSV field and as JSON null.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

enum class TableFormat { Csv, Json };

std::string to_string(TableFormat format);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;
  const Cell& at(std::size_t row, const std::string& name) const;
};

/// Doubles use 12 significant digits ("%.12g"). Strings that would parse as
/// a number are quoted so the type survives a round trip.
std::string format_double(double value);
std::string write_csv(const Table& table);
std::string write_json(const Table& table);
std::string write_table(const Table& table, TableFormat format);
Table parse_csv(const std::string& text);
Table parse_json(const std::string& text);
Table parse_table(const std::string& text, TableFormat format);

// -- configuration ----------------------------------------------------------

enum class Subcommand { Conceal, Bind, Session, Scan };

std::string to_string(Subcommand command);

struct RunConfig {
  Subcommand command = Subcommand::Conceal;
  std::vector<std::size_t> n_values{4};
  std::vector<std::size_t> m_values{1};
  std::vector<double> lambda_values{0.5};
  double theta = std::numbers::pi / 16.0;
  std::size_t trials = 1000;
  /// Kept below 2^63 so it fits a signed table cell.
  std::optional<std::uint64_t> root_seed;
  /// Unset: honest for session, entangled for bind and scan.
  std::optional<AliceMode> mode;
  Accounting accounting = Accounting::Ensemble;
  double penalty = 0.0;
  VerifyMode verify_mode = VerifyMode::Exact;
  std::string out;
  TableFormat format = TableFormat::Csv;
  std::string config_path;

  bool symmetric_record = false;
  bool checking = true;
  bool audit = false;
  int commit_bit = 0;
  int open_bit = -1;
  std::size_t threads = 1;

  AliceMode effective_mode() const;
  /// Throws InvalidArgument on any violated constraint.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

/// Default output directory when --out is absent.
inline constexpr const char* kOutDirEnv = "QBC3_OUT_DIR";

struct ParseResult {
  std::optional<RunConfig> config;
  /// Exit code to return when no config was produced (help or usage error).
  int exit_code = 0;
};

/// Flags override config-file values, which override defaults.
ParseResult parse_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// -- commands ---------------------------------------------------------------

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInterrupted = 130;

struct CommandResult {
  Table table;
  /// Transcript lines for the session command.
  std::string transcript;
  std::vector<std::string> summary;
  bool complete = true;
};

/// `stop` is polled between rows; a set flag ends the run early with a
/// partial table.
CommandResult run_conceal(const RunConfig& config, const std::atomic<bool>* stop = nullptr);
CommandResult run_bind(const RunConfig& config, const std::atomic<bool>* stop = nullptr);
CommandResult run_session_command(const RunConfig& config, const std::atomic<bool>* stop = nullptr);
CommandResult run_scan(const RunConfig& config, const std::atomic<bool>* stop = nullptr);

/// Resolves --out, the environment default, and the format extension.
std::string output_path(const RunConfig& config);

/// Full front end: parse, run, write the table and `<out>.manifest.json`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* stop = nullptr);

}  // namespace qbc3
