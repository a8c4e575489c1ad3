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


#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <random>
#include <sstream>

#include "qbc3/errors.hpp"
#include "qbc3/harness.hpp"

namespace qbc3 {

namespace {

bool stopped(const std::atomic<bool>* stop) { return stop && stop->load(); }

std::uint64_t seed_of(const RunConfig& config) {
  if (!config.root_seed) throw InvalidArgument("no root seed set");
  return *config.root_seed;
}

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }
Cell count(std::size_t v) { return static_cast<std::int64_t>(v); }
Cell text(std::string s) { return s.empty() ? Cell{} : Cell{std::move(s)}; }

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// Grid order: n outermost, then m, then lambda.
std::size_t grid_index(const RunConfig& c, std::size_t ni, std::size_t mi, std::size_t li) {
  return (ni * c.m_values.size() + mi) * c.lambda_values.size() + li;
}

ScanOptions scan_options(const RunConfig& c) {
  ScanOptions o;
  o.root_seed = seed_of(c);
  o.alice_mode = c.effective_mode();
  o.accounting = c.accounting;
  o.penalty = c.penalty;
  o.verify_mode = c.verify_mode;
  o.checking = c.checking;
  return o;
}

struct Job {
  GridPoint point;
  std::size_t index = 0;
};

// Runs jobs in batches of `threads`; results come back in job order.
std::vector<SecurityReport> run_jobs(const std::vector<Job>& jobs, const ScanOptions& options, std::size_t threads,
                                     const std::atomic<bool>* stop) {
  std::vector<SecurityReport> out;
  for (std::size_t start = 0; start < jobs.size(); start += threads) {
    if (stopped(stop)) break;
    const std::size_t end = std::min(jobs.size(), start + threads);
    std::vector<std::future<SecurityReport>> batch;
    for (std::size_t i = start; i < end; ++i)
      batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                 [&jobs, &options, i] { return scan_point(jobs[i].point, jobs[i].index, options); }));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

BB84Record symmetric_record(std::size_t n) {
  BB84Record r;
  for (std::size_t i = 0; i < n; ++i) r.j_ids.push_back(static_cast<int>(i % 4) + 1);
  return r;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t generated_seed() {
  std::random_device rd;
  const std::uint64_t hi = rd(), lo = rd();
  return ((hi << 32) ^ lo) & 0x7fffffffffffffffULL;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  f.close();
  if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace

CommandResult run_conceal(const RunConfig& config, const std::atomic<bool>* stop) {
  const auto seed = seed_of(config);
  CommandResult res;
  res.table.columns = {"n", "theta", "mean_distance", "standard_error", "guess_probability", "trials", "record", "seed"};
  for (std::size_t ni = 0; ni < config.n_values.size(); ++ni) {
    if (stopped(stop)) {
      res.complete = false;
      break;
    }
    const std::size_t n = config.n_values[ni];
    MeanEstimate est;
    if (config.symmetric_record) {
      est = {concealment_distance(symmetric_record(n), config.theta), 0.0, 1};
    } else {
      Rng rng = make_rng(seed, "scan", grid_index(config, ni, 0, 0), 0);
      est = expected_concealment(n, config.theta, config.trials, rng);
    }
    res.table.add_row({count(n), config.theta, est.mean, est.standard_error, guess_probability(est.mean),
                       count(est.trials), std::string(config.symmetric_record ? "symmetric" : "random"),
                       static_cast<std::int64_t>(seed)});
  }
  res.summary.push_back("conceal rows=" + std::to_string(res.table.rows.size()));
  return res;
}

CommandResult run_bind(const RunConfig& config, const std::atomic<bool>* stop) {
  const auto seed = seed_of(config);
  std::vector<Job> jobs;
  for (std::size_t ni = 0; ni < config.n_values.size(); ++ni)
    for (std::size_t li = 0; li < config.lambda_values.size(); ++li)
      jobs.push_back({GridPoint{config.n_values[ni], config.m_values.front(), config.lambda_values[li], config.theta,
                                config.trials},
                      grid_index(config, ni, 0, li)});
  const auto reports = run_jobs(jobs, scan_options(config), config.threads, stop);

  CommandResult res;
  res.complete = reports.size() == jobs.size();
  res.table.columns = {"n",     "lambda",       "theta",       "p_out",      "f_out",
                       "p_in",  "f_in",         "f_pre",       "cheat_estimate", "ci_lo",
                       "ci_hi", "analytic",     "exact_accept", "game_score", "post_check_distance",
                       "trials", "seed",        "warnings"};
  for (const auto& r : reports) {
    if (!r.error.empty()) throw InvalidArgument(r.error);
    const auto& ce = r.cheat_estimate;
    res.table.add_row({count(r.n), r.lambda, r.theta, opt(r.p_out), opt(r.f_out), opt(r.p_in), opt(r.f_in),
                       opt(r.cheat_f_pre), ce ? Cell{ce->value} : Cell{}, ce ? Cell{ce->interval.lo} : Cell{},
                       ce ? Cell{ce->interval.hi} : Cell{}, opt(r.analytic_decomposition), opt(r.exact_accept_mean),
                       opt(r.game_score), opt(r.post_check_distance), count(r.trials),
                       static_cast<std::int64_t>(seed), text(join(r.warnings, "; "))});
  }
  res.summary.push_back("bind rows=" + std::to_string(res.table.rows.size()));
  return res;
}

CommandResult run_session_command(const RunConfig& config, const std::atomic<bool>* stop) {
  const auto seed = seed_of(config);
  ProtocolParams params;
  params.n = config.n_values.front();
  params.m = config.m_values.front();
  params.lambda = config.lambda_values.front();
  params.theta = config.theta;
  params.alice_mode = config.effective_mode();
  params.accounting = config.accounting;
  params.penalty = config.penalty;
  params.verify_mode = config.verify_mode;
  params.commit_bit = config.commit_bit;
  params.open_bit = config.open_bit;
  params.checking = config.checking;

  CommandResult res;
  Rng rng = make_rng(seed, "session");
  const auto session = run_session(params, rng);
  res.transcript = session.transcript.to_jsonl();
  const auto& s = session.summary;

  std::vector<std::string> claims;
  for (Claim c : s.claims) claims.push_back(to_string(c));
  std::ostringstream line;
  line << "outcome=" << s.outcome.describe() << " mode=" << to_string(params.alice_mode)
       << " claims=" << (claims.empty() ? "-" : join(claims, ",")) << " detections=" << s.detections
       << " score=" << format_double(s.score);
  if (s.accept_probability) line << " accept_probability=" << format_double(*s.accept_probability);
  res.summary.push_back(line.str());

  std::optional<double> audit_pass;
  if (config.audit) {
    if (stopped(stop)) {
      res.complete = false;
    } else {
      Rng audit_rng = make_rng(seed, "audit");
      const auto record = config.symmetric_record ? symmetric_record(params.n) : random_record(params.n, audit_rng);
      const auto audit = run_entanglement_audit(params, record, audit_rng);
      res.transcript += audit.transcript.to_jsonl();
      audit_pass = audit.pass_probability;
      res.summary.push_back("audit pass_probability=" +
                            (audit_pass ? format_double(*audit_pass) : std::string("aborted")));
    }
  }

  res.table.columns = {"n",     "m",          "lambda",         "mode",
                       "outcome", "detections", "penalty_total", "score",
                       "accept_probability", "audit_pass_probability", "seed"};
  res.table.add_row({count(params.n), count(params.m), params.lambda, to_string(params.alice_mode),
                     s.outcome.describe(), count(s.detections), s.penalty_total, s.score, opt(s.accept_probability),
                     opt(audit_pass), static_cast<std::int64_t>(seed)});
  return res;
}

CommandResult run_scan(const RunConfig& config, const std::atomic<bool>* stop) {
  const auto seed = seed_of(config);
  std::vector<Job> jobs;
  for (std::size_t ni = 0; ni < config.n_values.size(); ++ni)
    for (std::size_t mi = 0; mi < config.m_values.size(); ++mi)
      for (std::size_t li = 0; li < config.lambda_values.size(); ++li)
        jobs.push_back({GridPoint{config.n_values[ni], config.m_values[mi], config.lambda_values[li], config.theta,
                                  config.trials},
                        grid_index(config, ni, mi, li)});
  const auto reports = run_jobs(jobs, scan_options(config), config.threads, stop);

  CommandResult res;
  res.complete = reports.size() == jobs.size();
  res.table.columns = {"n",
                       "m",
                       "lambda",
                       "theta",
                       "trials",
                       "mean_distance",
                       "standard_error",
                       "guess_probability",
                       "post_check_distance",
                       "f_pre",
                       "p_out",
                       "f_out",
                       "p_in",
                       "f_in",
                       "cheat_estimate",
                       "ci_lo",
                       "ci_hi",
                       "analytic",
                       "exact_accept",
                       "game_score",
                       "epsilon_exact",
                       "epsilon_bound",
                       "honest_flip_total",
                       "cheat_total",
                       "seed",
                       "warnings",
                       "error"};
  std::size_t errors = 0;
  for (const auto& r : reports) {
    const auto& c = r.concealment;
    const auto& ce = r.cheat_estimate;
    const auto& k = r.composed;
    errors += r.error.empty() ? 0 : 1;
    res.table.add_row({count(r.n),
                       count(r.m),
                       r.lambda,
                       r.theta,
                       count(r.trials),
                       c ? Cell{c->mean} : Cell{},
                       c ? Cell{c->standard_error} : Cell{},
                       c ? Cell{guess_probability(c->mean)} : Cell{},
                       opt(r.post_check_distance),
                       opt(r.cheat_f_pre),
                       opt(r.p_out),
                       opt(r.f_out),
                       opt(r.p_in),
                       opt(r.f_in),
                       ce ? Cell{ce->value} : Cell{},
                       ce ? Cell{ce->interval.lo} : Cell{},
                       ce ? Cell{ce->interval.hi} : Cell{},
                       opt(r.analytic_decomposition),
                       opt(r.exact_accept_mean),
                       opt(r.game_score),
                       k ? opt(k->epsilon_exact) : Cell{},
                       k ? Cell{k->epsilon_bound} : Cell{},
                       k ? Cell{k->honest_flip_total} : Cell{},
                       k ? Cell{k->cheat_total} : Cell{},
                       static_cast<std::int64_t>(seed),
                       text(join(r.warnings, "; ")),
                       text(r.error)});
  }
  res.summary.push_back("scan points=" + std::to_string(res.table.rows.size()) + "/" + std::to_string(jobs.size()) +
                        " errors=" + std::to_string(errors));
  return res;
}

std::string output_path(const RunConfig& config) {
  if (!config.out.empty()) return config.out;
  std::filesystem::path dir = ".";
  if (const char* env = std::getenv(kOutDirEnv); env && *env) dir = env;
  const std::string ext = config.command == Subcommand::Session ? "jsonl" : to_string(config.format);
  return (dir / (to_string(config.command) + "." + ext)).string();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* stop) {
  auto parsed = parse_cli(args, out, err);
  if (!parsed.config) return parsed.exit_code;
  RunConfig config = std::move(*parsed.config);

  const std::string provenance = config.root_seed ? "provided" : "generated";
  if (!config.root_seed) config.root_seed = generated_seed();

  const std::string started = timestamp();
  CommandResult result;
  try {
    switch (config.command) {
      case Subcommand::Conceal: result = run_conceal(config, stop); break;
      case Subcommand::Bind: result = run_bind(config, stop); break;
      case Subcommand::Session: result = run_session_command(config, stop); break;
      case Subcommand::Scan: result = run_scan(config, stop); break;
    }
  } catch (const InvalidArgument& e) {
    err << "qbc3: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "qbc3: " << e.what() << "\n";
    return kExitFailure;
  }

  const std::string path = output_path(config);
  std::vector<std::string> outputs{path};
  const std::string manifest_path = path + ".manifest.json";
  try {
    if (config.out.empty()) {
      const auto parent = std::filesystem::path(path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
    }
    if (config.command == Subcommand::Session) {
      const std::string summary_path = path + ".summary." + to_string(config.format);
      write_file(path, result.transcript);
      write_file(summary_path, write_table(result.table, config.format));
      outputs.push_back(summary_path);
    } else {
      write_file(path, write_table(result.table, config.format));
    }

    nlohmann::ordered_json manifest;
    manifest["artifact"] = "qbc3sim";
    manifest["version"] = QBC3_VERSION;
    manifest["command"] = to_string(config.command);
    manifest["status"] = result.complete ? "complete" : "incomplete";
    manifest["started"] = started;
    manifest["finished"] = timestamp();
    manifest["config"] = config.to_json();
    manifest["seed"] = {{"root", *config.root_seed},
                        {"provenance", provenance},
                        {"stream_rule", "split_seed(root, fnv1a64(tag), grid_index, session_index) via splitmix64"}};
    manifest["outputs"] = outputs;
    manifest["rows"] = result.table.rows.size();
    manifest["summary"] = result.summary;
    write_file(manifest_path, manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "qbc3: " << e.what() << "\n";
    return kExitFailure;
  }

  for (const auto& line : result.summary) out << line << "\n";
  out << "wrote " << path << " (manifest " << manifest_path << ")\n";
  return result.complete ? kExitOk : kExitInterrupted;
}

}  // namespace qbc3
