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


// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "qbc3/analysis.hpp"
#include "qbc3/harness.hpp"

using namespace qbc3;

namespace {

constexpr double kTheta = std::numbers::pi / 16.0;
constexpr std::uint64_t kSeed = 20260101;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// (committed-qubit view for b=0, for b=1) of the entangled commitment.
std::pair<Matrix, Matrix> epr_marginals(const BB84Record& rec, double theta) {
  const WireLabel c[] = {committed_label(0)};
  return {partial_trace(epr_replay_state(rec, theta, 0, std::nullopt), c).matrix(),
          partial_trace(epr_replay_state(rec, theta, 1, std::nullopt), c).matrix()};
}

Verdict claim_branch_law() {
  ProtocolParams p;
  p.n = 8;
  p.lambda = 0.5;
  p.alice_mode = AliceMode::EprCheat;
  const std::size_t sessions = 10000;
  std::size_t in = 0;
  for (std::size_t i = 0; i < sessions; ++i) {
    Rng rng = make_rng(kSeed, "claims", 0, i);
    in += run_session(p, rng).summary.claims.at(0) == Claim::CommittedInS ? 1 : 0;
  }
  const double freq = static_cast<double>(in) / sessions;

  // Exact branch probability for forced outcomes on random (record, S).
  double worst = 0.0;
  Rng rng = make_rng(kSeed, "claims-exact");
  for (int i = 0; i < 50; ++i) {
    const auto rec = random_record(8, rng);
    const auto ch = bob_challenge(8, 0.5, rng);
    SessionTranscript log;
    Segment seg = bob_prepare(rec, log);
    alice_commit_epr(seg, 0, kTheta, log);
    issue_challenge(seg, ch, log);
    AnswerOptions opt;
    opt.forced_claim = Claim::CommittedInS;
    const auto ans = alice_answer_challenge(seg, rng, log, opt);
    worst = std::max(worst, std::abs(ans.branch_probability - static_cast<double>(ch.requested.size()) / 8.0));
  }
  return {std::abs(freq - 0.5) <= 0.02 && worst <= 1e-12,
          "in-S frequency " + fmt("%.4f", freq) + " over 10^4 sessions; max |P(in-S) - |S|/n| = " + fmt("%.1e", worst)};
}

Verdict symmetric_concealment() {
  const double d = concealment_distance(BB84Record{{1, 2, 3, 4}}, kTheta);
  return {std::abs(d) <= 1e-9, "D = " + fmt("%.3e", d)};
}

Verdict concealment_decay() {
  Rng a = make_rng(kSeed, "decay", 0), b = make_rng(kSeed, "decay", 1);
  const auto d4 = expected_concealment(4, kTheta, 10000, a);
  const auto d16 = expected_concealment(16, kTheta, 10000, b);
  const double z = (d4.mean - d16.mean) / std::hypot(d4.standard_error, d16.standard_error);
  return {z > 2.3263478740408408,  // one-sided 99% normal quantile
          "mean D(4) = " + fmt("%.5f", d4.mean) + ", mean D(16) = " + fmt("%.5f", d16.mean) + ", z = " + fmt("%.1f", z)};
}

Verdict uhlmann_oracle() {
  Rng rng = make_rng(kSeed, "uhlmann");
  double gap_f = 0.0, gap_u = 0.0, excess = -1.0;
  std::size_t probes = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 5);
    const auto rec = random_record(n, rng);
    std::optional<ChallengeRecord> ch;
    if (i % 2 == 1) {
      auto c = bob_challenge(n, 0.5, rng);
      c.claim = i % 4 == 1 ? Claim::CommittedNotInS : Claim::CommittedInS;
      c.effective_checked = effective_set(n, c.requested, c.claim);
      ch = c;
    }
    const auto s0 = epr_replay_state(rec, kTheta, 0, ch);
    const auto s1 = epr_replay_state(rec, kTheta, 1, ch);
    const auto a = alice_wires(s0);
    const auto b = s0.owned_by(Party::B);
    const auto cheat = cheat_operator(s0, s1, a);
    gap_f = std::max(gap_f, std::abs(cheat.trace_norm - fidelity(partial_trace(s0, b), partial_trace(s1, b))));
    gap_u = std::max(gap_u,
                     std::abs(std::abs(inner_product(s1, apply_on_wires(s0, cheat.u_opt, a))) - cheat.trace_norm));
    std::size_t dim = 1;
    for (const auto& w : a) dim *= s0.wire(w).dim;
    for (int r = 0; r < 10; ++r, ++probes) {
      const auto u = random_unitary(dim, rng);
      excess = std::max(excess, std::abs(inner_product(s1, apply_on_wires(s0, u, a))) - cheat.trace_norm);
    }
  }
  return {gap_f <= 1e-9 && gap_u <= 1e-9 && excess <= 1e-9,
          "max |trace_norm - F| = " + fmt("%.1e", gap_f) + ", max |overlap - trace_norm| = " + fmt("%.1e", gap_u) +
              ", max excess over " + std::to_string(probes) + " random unitaries = " + fmt("%.1e", excess)};
}

Verdict fuchs_van_de_graaf() {
  Rng rng = make_rng(kSeed, "fvdg");
  std::size_t pairs = 0, bad = 0;
  auto check = [&](double d, double f) {
    ++pairs;
    if (!(1.0 - f <= d + 1e-9 && d <= std::sqrt(std::max(0.0, 1.0 - f * f)) + 1e-9)) ++bad;
  };
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 7);
    const auto rec = random_record(n, rng);
    check(concealment_distance(rec, kTheta), cheat_fidelity_pre(rec, kTheta));
    if (n % 2 == 0) {
      ProtocolParams p;
      p.n = n;
      p.alice_mode = AliceMode::EprCheat;
      const auto s = bob_challenge(n, 0.5, rng).requested;
      for (Claim c : {Claim::CommittedNotInS, Claim::CommittedInS}) {
        const auto br = cheat_fidelity_post(p, rec, s, c);
        if (br.fidelity) check(*br.post_check_distance, *br.fidelity);
      }
    }
  }
  // Scan rows: averaged pairs from the same records.
  ScanOptions opt;
  opt.root_seed = kSeed;
  opt.binding_samples = 50;
  const GridPoint grid[] = {{4, 1, 0.5, kTheta, 100}, {6, 2, 0.5, kTheta, 100}};
  for (const auto& r : scan(grid, opt))
    if (r.post_check_distance && r.f_out) check(*r.post_check_distance, 0.5 * (*r.f_out + *r.f_in));
  return {bad == 0, std::to_string(pairs) + " (D, F) pairs, " + std::to_string(bad) + " violations"};
}

Verdict marginal_equivalence() {
  Rng rng = make_rng(kSeed, "marginal");
  double worst = 0.0;
  for (std::size_t n = 2; n <= 8; ++n)
    for (int r = 0; r < 50; ++r) {
      const auto rec = random_record(n, rng);
      const auto [e0, e1] = epr_marginals(rec, kTheta);
      const auto [h0, h1] = committed_views(rec, kTheta);
      worst = std::max({worst, (e0 - h0.matrix()).cwiseAbs().maxCoeff(), (e1 - h1.matrix()).cwiseAbs().maxCoeff()});
    }
  return {worst <= 1e-9, "max entry deviation over n = 2..8 x 50 records x 2 bits = " + fmt("%.1e", worst)};
}

Verdict completeness() {
  double honest_worst = 0.0, route_worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Rng rng = make_rng(kSeed, "complete", static_cast<std::uint64_t>(i));
    ProtocolParams p;
    p.n = 2 + 2 * static_cast<std::size_t>(i % 4);
    p.m = 1 + static_cast<std::size_t>(i % 3);
    p.commit_bit = i % 2;
    const auto s = run_session(p, rng);
    honest_worst = std::max(honest_worst, std::abs(s.summary.accept_probability.value_or(0.0) - 1.0));

    const auto rec = random_record(p.n, rng);
    SessionTranscript log;
    Segment seg = bob_prepare(rec, log);
    alice_commit_epr(seg, i % 2, kTheta, log);
    issue_challenge(seg, bob_challenge(p.n, 0.5, rng), log);
    alice_answer_challenge(seg, rng, log);
    const auto v = bob_verify_returned(seg, VerifyMode::Exact, rng, log);
    route_worst = std::max(route_worst, std::abs(v.probability.value_or(0.0) - 1.0));
  }
  return {honest_worst <= 1e-9 && route_worst <= 1e-9,
          "honest |P - 1| <= " + fmt("%.1e", honest_worst) + ", routed return |P - 1| <= " + fmt("%.1e", route_worst)};
}

Verdict honest_flip_binding() {
  const double expect = std::pow(std::cos(std::numbers::pi / 8), 2);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Rng rng = make_rng(kSeed, "flip", static_cast<std::uint64_t>(i));
    ProtocolParams p;
    p.n = 4 + 2 * static_cast<std::size_t>(i % 3);
    p.open_bit = 1;
    p.checking = i % 2 == 0;
    worst = std::max(worst, std::abs(*run_session(p, rng).summary.accept_probability - expect));
  }
  Rng rng = make_rng(kSeed, "flip-m8");
  ProtocolParams p;
  p.n = 4;
  p.m = 8;
  p.open_bit = 1;
  const double total = *run_session(p, rng).summary.accept_probability;
  return {worst <= 1e-6 && std::abs(total - 0.2823) <= 1e-3,
          "per segment max |P - cos^2(pi/8)| = " + fmt("%.1e", worst) + ", m = 8 total = " + fmt("%.6f", total)};
}

Verdict end_to_end() {
  ProtocolParams p;
  p.n = 6;
  p.lambda = 0.5;
  p.alice_mode = AliceMode::EprCheat;
  p.commit_bit = 0;
  p.open_bit = 1;
  Rng rng = make_rng(kSeed, "ensemble");
  const auto rep = ensemble_cheat_estimate(p, 10000, rng);
  const double emp = rep.cheat_estimate->value;
  const double analytic = *rep.analytic_decomposition;
  const auto successes = static_cast<std::size_t>(std::llround(emp * 10000));
  const auto band = wilson_interval(successes, 10000, 3.0);
  return {band.lo <= analytic && analytic <= band.hi,
          "empirical " + fmt("%.4f", emp) + " [3-sigma " + fmt("%.4f", band.lo) + ", " + fmt("%.4f", band.hi) +
              "], sum p F^2 = " + fmt("%.4f", analytic) + ", exact acceptance mean = " +
              fmt("%.4f", *rep.exact_accept_mean) + ", F_out = " + fmt("%.4f", *rep.f_out) + ", F_in = " +
              fmt("%.4f", *rep.f_in) + ", F_pre = " + fmt("%.4f", *rep.cheat_f_pre)};
}

Verdict determinism() {
  namespace fs = std::filesystem;
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("qbc3_accept_" + std::to_string(rd()));
  fs::create_directories(dir);
  auto run = [&](const std::string& name) {
    std::ostringstream out, err;
    const int code = run_cli({"scan", "--n", "4,6,12", "--m", "1,3", "--trials", "200", "--seed", "77", "--threads",
                              "3", "--verify", "exact", "--out", (dir / name).string()},
                             out, err);
    std::ifstream f(dir / name, std::ios::binary);
    std::ostringstream text;
    text << f.rdbuf();
    return std::make_pair(code, text.str());
  };
  const auto a = run("a.csv");
  const auto b = run("b.csv");
  fs::remove_all(dir);
  const bool same = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
  return {same, std::to_string(a.second.size()) + " bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"claim-branch law", claim_branch_law},
      {"symmetric concealment", symmetric_concealment},
      {"concealment decay", concealment_decay},
      {"Uhlmann oracle", uhlmann_oracle},
      {"Fuchs-van de Graaf", fuchs_van_de_graaf},
      {"EPR/honest marginal equivalence", marginal_equivalence},
      {"completeness", completeness},
      {"honest-flip binding", honest_flip_binding},
      {"end-to-end consistency", end_to_end},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += v.pass ? 0 : 1;
    std::printf("%s %2d %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", index++, name, v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
