// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero if any fails. With arguments, runs only the listed criteria
// (1 to 8).
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "optsva/figures.hpp"
#include "optsva/harmony.hpp"
#include "optsva/luopacity.hpp"
#include "optsva/replay.hpp"
#include "optsva/report.hpp"
#include "optsva/runner.hpp"
#include "optsva/workload.hpp"
#include "support/adversarial.hpp"
#include "support/lu_controls.hpp"
#include "support/serial_oracle.hpp"

using namespace optsva;
namespace fs = std::filesystem;

namespace {

// Pinned parameters and tolerances.
constexpr std::uint64_t kForcedAbortSeeds = 1000;   // 8 threads x 10 txns each
constexpr std::uint64_t kHarmonySeeds = 5000;       // x 2 engines = 10k runs
constexpr std::uint64_t kThreadedEvery = 10;        // every 10th harmony seed on OS threads
constexpr std::uint64_t kLuSeeds = 5000;            // x 2 engines
constexpr std::size_t kLuMaxTxns = 5;
constexpr std::uint64_t kDominanceSeeds = 100;
constexpr std::uint32_t kTrendSeeds = 30;
constexpr double kOracleBudgetSeconds = 300.0;

struct Verdict {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 1) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

Verdict no_forced_aborts() {
  std::uint64_t forced = 0, committed = 0;
  for (std::uint64_t seed = 1; seed <= kForcedAbortSeeds; ++seed) {
    WorkloadSpec w;
    w.threads = 8;
    w.txns_per_thread = 10;
    w.abort_probability = 0.0;
    w.seed = seed;
    RunOptions o;
    o.mode = RunMode::sim_random;
    o.seed = seed;
    o.record = false;
    auto m = run_program(generate(w), o).metrics;
    forced += m.forced_aborts;
    committed += m.committed;
  }
  return {forced == 0 && committed == kForcedAbortSeeds * 80,
          std::to_string(kForcedAbortSeeds) + " seeds, " + std::to_string(committed) + " commits, " +
              std::to_string(forced) + " forced aborts (required 0)"};
}

Verdict harmony_stress() {
  std::size_t runs = 0, bad = 0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= kHarmonySeeds; ++seed) {
    SmallSpec sp;
    sp.seed = seed;
    auto p = generate_small(sp);
    for (auto kind : {EngineKind::optsva, EngineKind::sva}) {
      RunOptions o;
      o.engine = kind;
      o.mode = seed % kThreadedEvery == 0 ? RunMode::threads : RunMode::sim_random;
      o.seed = seed;
      auto rep = check_harmony(run_program(p, o).trace);
      ++runs;
      if (!rep.ok() && bad++ == 0) first = std::string(to_string(kind)) + " seed " + std::to_string(seed);
    }
  }
  return {bad == 0, std::to_string(runs) + " runs, " + std::to_string(bad) + " not harmonious" +
                        (first.empty() ? "" : " (first: " + first + ")")};
}

Verdict adversarial() {
  std::size_t exact = 0;
  std::string misses;
  const auto traces = testing::adversarial_traces();
  for (const auto& a : traces) {
    auto rep = check_harmony(a.trace);
    if (rep.rules() == std::set<Rule>{a.rule}) {
      ++exact;
      continue;
    }
    misses += std::string(misses.empty() ? "" : "; ") + std::string(to_string(a.rule)) + " -> {";
    bool comma = false;
    for (Rule r : rep.rules()) {
      misses += std::string(comma ? "," : "") + std::string(to_string(r));
      comma = true;
    }
    misses += "}";
  }
  return {exact == traces.size(), std::to_string(exact) + "/" + std::to_string(traces.size()) +
                                      " rejected with exactly their rule" +
                                      (misses.empty() ? "" : " (" + misses + ")")};
}

Verdict lu_opacity() {
  std::size_t checked = 0, bad = 0, skipped = 0;
  std::string first;
  LuOptions lo;
  lo.max_txns = kLuMaxTxns;
  for (std::uint64_t seed = 1; seed <= kLuSeeds; ++seed) {
    SmallSpec sp;
    sp.seed = seed;
    auto p = generate_small(sp);
    if (p.txns.size() > kLuMaxTxns) {
      ++skipped;
      continue;
    }
    for (auto kind : {EngineKind::optsva, EngineKind::sva}) {
      RunOptions o;
      o.engine = kind;
      o.mode = RunMode::sim_random;
      o.seed = seed;
      auto r = run_program(p, o);
      auto res = check_lu_opaque(to_history(r.trace), r.program, r.trace, lo);
      ++checked;
      if (!res.ok() && bad++ == 0) first = std::string(to_string(kind)) + " seed " + std::to_string(seed);
    }
  }
  const auto control = testing::early_read_then_abort(2, false);
  const auto verdict =
      check_lu_opaque(to_history(control), testing::lu_control_program(2, ProgOp::Kind::commit), control).verdict;
  const bool control_rejected = verdict == LuVerdict::not_opaque;
  return {bad == 0 && skipped == 0 && control_rejected,
          std::to_string(checked) + " traces, " + std::to_string(bad) + " rejected" +
              (first.empty() ? "" : " (first: " + first + ")") + "; negative control " +
              (control_rejected ? "rejected" : std::string("verdict ") + std::string(to_string(verdict)))};
}

Verdict dominance() {
  const auto cs = bench_configs();
  std::size_t makespan_bad = 0, release_bad = 0, completion_bad = 0;
  for (std::uint64_t seed = 1; seed <= kDominanceSeeds; ++seed) {
    auto p = generate(workload_for(cs[seed % cs.size()], 8, 10, seed));
    RunOptions o;
    o.ordered_starts = true;
    auto opt = run_program(p, o).metrics;
    o.engine = EngineKind::sva;
    auto sva = run_program(p, o).metrics;
    makespan_bad += opt.makespan > sva.makespan;
    for (const auto& [k, t] : opt.release) release_bad += t > sva.release.at(k);
    for (const auto& [k, t] : opt.completion) completion_bad += t > sva.completion.at(k);
  }
  return {makespan_bad + release_bad + completion_bad == 0,
          std::to_string(kDominanceSeeds) + " seeds; later makespans " + std::to_string(makespan_bad) +
              ", later releases " + std::to_string(release_bad) + ", later completions " +
              std::to_string(completion_bad) + " (required 0 each)"};
}

Verdict trend() {
  SweepSpec s;
  s.seeds = kTrendSeeds;
  const auto rows = compare(sweep(s));
  const auto cs = bench_configs();
  double high = 0, low = 0;
  std::size_t nh = 0, nl = 0;
  bool all_positive = rows.size() == cs.size();
  std::string gains;
  for (const auto& r : rows) {
    all_positive = all_positive && r.gain_pct > 0.0;
    const bool is_high = std::find_if(cs.begin(), cs.end(), [&](const BenchConfig& c) {
                           return c.name == r.config && c.high_contention;
                         }) != cs.end();
    (is_high ? high : low) += r.gain_pct;
    ++(is_high ? nh : nl);
    gains += std::string(gains.empty() ? "" : ", ") + r.config + " " + fmt(r.gain_pct) + "%";
  }
  const double mh = nh ? high / static_cast<double>(nh) : 0.0;
  const double ml = nl ? low / static_cast<double>(nl) : 0.0;
  return {all_positive && nh > 0 && nl > 0 && mh > ml,
          "mean gain high " + fmt(mh) + "% vs low " + fmt(ml) + "% over " + std::to_string(kTrendSeeds) +
              " seeds (" + gains + ")"};
}

Verdict figures() {
  const fs::path dir = fs::path(OPTSVA_SOURCE_DIR) / "scripts" / "figures";
  std::size_t ok = 0;
  std::string misses;
  for (const auto& f : figure_checks()) {
    std::optional<std::string> failure;
    try {
      auto r = replay(load_script((dir / (f.name + ".txt")).string()));
      failure = f.check(r);
      if (!failure && !check_harmony(r.trace).ok()) failure = "trace is not harmonious";
    } catch (const std::exception& e) {
      failure = e.what();
    }
    if (failure)
      misses += std::string(misses.empty() ? "" : "; ") + f.name + ": " + *failure;
    else
      ++ok;
  }
  return {ok == 7 && figure_checks().size() == 7,
          std::to_string(ok) + "/7 replays match" + (misses.empty() ? "" : " (" + misses + ")")};
}

Verdict serialization() {
  struct Tier {
    std::size_t txns, max_ops, preemptions;
    const char* what;
  };
  const Tier tiers[] = {
      {2, 1, SIZE_MAX, "2 txns x 1 op, all schedules"},
      {2, 2, 0, "2 txns x <=2 ops, non-preemptive"},
      {3, 1, 0, "3 txns x 1 op, non-preemptive"},
  };
  const auto t0 = Clock::now();
  std::size_t programs = 0, schedules = 0;
  bool complete = true;
  std::optional<std::string> failure;
  for (const Tier& t : tiers) {
    const auto ps = testing::small_programs(t.txns, 2, t.max_ops);
    for (auto kind : {EngineKind::optsva, EngineKind::sva}) {
      auto rep = testing::check_serializable(ps, kind, ExploreLimits{SIZE_MAX, t.preemptions});
      programs += rep.programs;
      schedules += rep.schedules;
      complete = complete && rep.complete;
      if (rep.failure && !failure) failure = std::string(t.what) + ": " + *rep.failure;
    }
  }
  const double secs = seconds_since(t0);
  return {!failure && complete && secs < kOracleBudgetSeconds,
          std::to_string(programs) + " programs, " + std::to_string(schedules) + " schedules, " +
              fmt(secs) + " s (budget " + fmt(kOracleBudgetSeconds, 0) + " s)" +
              (failure ? "; " + *failure : std::string())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "no forced aborts without manual aborts", no_forced_aborts},
      {2, "stress histories are harmonious", harmony_stress},
      {3, "adversarial traces rejected with their rule", adversarial},
      {4, "last-use opacity on stress traces", lu_opacity},
      {5, "OptSVA dominates SVA", dominance},
      {6, "gain trend across configurations", trend},
      {7, "figure replays", figures},
      {8, "serializability oracle", serialization},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  bool all_pass = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && v.pass;
    std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
