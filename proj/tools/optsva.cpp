// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Command-line front end: trace checkers, workload runs, scenario replays and
// benchmark reports. Exit status 0 means success (or a passing check), 1 a
// failing check, 2 a usage or input error.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "optsva/figures.hpp"
#include "optsva/harmony.hpp"
#include "optsva/luopacity.hpp"
#include "optsva/replay.hpp"
#include "optsva/report.hpp"
#include "optsva/runner.hpp"
#include "optsva/sim_runtime.hpp"
#include "optsva/workload.hpp"

using namespace optsva;

namespace {

std::pair<std::uint32_t, std::uint32_t> parse_ratio(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("ratio must look like 5:1, got '" + s + "'");
  try {
    return {static_cast<std::uint32_t>(std::stoul(s.substr(0, colon))),
            static_cast<std::uint32_t>(std::stoul(s.substr(colon + 1)))};
  } catch (const std::exception&) {
    throw ConfigError("ratio must look like 5:1, got '" + s + "'");
  }
}

// Benchmark configuration name when the parameters match one, else a label.
std::string config_name(const WorkloadSpec& w) {
  for (const auto& c : bench_configs())
    if (c.ops == w.ops_per_txn && c.read_weight == w.read_weight && c.write_weight == w.write_weight &&
        c.hot == w.hot_size)
      return c.name;
  return w.label();
}

struct HarmonyArgs {
  std::string trace;
  std::vector<std::string> rules;
  std::size_t max_chain_nodes = 100000;
};

int check_harmony_cmd(const HarmonyArgs& a) {
  HarmonyOptions o;
  o.max_chain_nodes = a.max_chain_nodes;
  for (const auto& r : a.rules) {
    auto rule = parse_rule(r);
    if (!rule) throw ConfigError("unknown rule '" + r + "'");
    o.only.insert(*rule);
  }
  const ViolationReport rep = check_harmony(load_trace(a.trace), o);
  std::cout << rep.to_json() << '\n';
  return rep.ok() ? 0 : 1;
}

struct LuArgs {
  std::string trace, program;
  std::size_t max_txns = 5;
  bool direct = false;
};

int check_lu_cmd(const LuArgs& a) {
  const auto trace = load_trace(a.trace);
  const auto program = load_program(a.program);
  LuOptions o;
  o.max_txns = a.max_txns;
  o.direct_visibility = a.direct;
  const LuResult r = check_lu_opaque(to_history(trace), program, trace, o);
  std::cout << r.to_json() << '\n';
  return r.ok() ? 0 : 1;
}

struct RunArgs {
  std::string engine = "optsva";
  std::string mode = "virtual";
  std::uint32_t threads = 8, txns = 10, ops = 10, hot = 20, history = 5;
  std::string rw = "5:1";
  double locality = 0.5;
  double abort_probability = 0.0;
  std::uint64_t seed = 1;
  Tick latency = 100;
  std::string record, save_program, csv;
};

int run_cmd(const RunArgs& a) {
  WorkloadSpec w;
  w.threads = a.threads;
  w.txns_per_thread = a.txns;
  w.ops_per_txn = a.ops;
  std::tie(w.read_weight, w.write_weight) = parse_ratio(a.rw);
  w.hot_size = a.hot;
  w.locality = a.locality;
  w.history = a.history;
  w.abort_probability = a.abort_probability;
  w.seed = a.seed;
  const ProgramModel p = generate(w);

  RunOptions o;
  o.engine = parse_engine_kind(a.engine);
  o.mode = parse_run_mode(a.mode);
  o.seed = a.seed;
  o.latency = a.latency;
  o.record = !a.record.empty();
  o.ordered_starts = o.mode == RunMode::virtual_time;
  o.workers = std::max<std::size_t>(4, a.threads);
  const RunResult res = run_program(p, o);

  if (!a.record.empty()) save_trace(a.record, res.trace);
  if (!a.save_program.empty()) save_program(a.save_program, res.program);
  const RunRecord rec = make_record(config_name(w), w, a.latency, res.metrics);
  if (a.csv.empty()) {
    std::cout << csv_header() << '\n' << to_csv_row(rec) << '\n';
  } else {
    const bool fresh = !std::filesystem::exists(a.csv) || std::filesystem::file_size(a.csv) == 0;
    std::ofstream out(a.csv, std::ios::app);
    if (!out) throw ConfigError("cannot write " + a.csv);
    if (fresh) out << csv_header() << '\n';
    out << to_csv_row(rec) << '\n';
  }
  if (res.metrics.orphaned_tasks)
    std::cerr << "warning: " << res.metrics.orphaned_tasks << " task(s) never ran\n";
  return 0;
}

struct ReplayArgs {
  std::string script, engine = "optsva", out;
  Tick latency = 100;
  bool check = false;
};

int replay_cmd(const ReplayArgs& a) {
  const Script s = load_script(a.script);
  const ReplayResult r = replay(s, ReplayOptions{parse_engine_kind(a.engine), a.latency});
  if (a.out.empty()) {
    write_jsonl(std::cout, r.trace);
  } else {
    save_trace(a.out, r.trace);
  }
  for (const auto& t : r.txns) {
    std::cerr << t.thread << '#' << t.index << " (txn " << t.id << "): "
              << (t.outcome == Outcome::committed ? "committed" : "aborted") << ", reads";
    for (Value v : t.reads) std::cerr << ' ' << v;
    std::cerr << '\n';
  }
  if (!a.check) return 0;
  const std::string stem = std::filesystem::path(a.script).stem().string();
  for (const auto& f : figure_checks()) {
    if (f.name != stem) continue;
    const auto failure = f.check(r);
    std::cerr << (failure ? "FAIL " : "PASS ") << f.name << ": " << (failure ? *failure : f.claim) << '\n';
    return failure ? 1 : 0;
  }
  throw ConfigError("no built-in check for '" + stem + "'");
}

int figures_cmd(const std::string& dir) {
  int failed = 0;
  for (const auto& f : figure_checks()) {
    const auto path = std::filesystem::path(dir) / (f.name + ".txt");
    const auto failure = f.check(replay(load_script(path.string())));
    std::cout << (failure ? "FAIL " : "PASS ") << f.name << ": " << (failure ? *failure : f.claim) << '\n';
    failed += failure ? 1 : 0;
  }
  return failed ? 1 : 0;
}

struct SweepArgs {
  SweepSpec spec;
  std::string out;
};

int sweep_cmd(const SweepArgs& a) {
  const auto records = sweep(a.spec);
  if (a.out.empty()) {
    write_csv(std::cout, records);
  } else {
    std::ofstream out(a.out);
    if (!out) throw ConfigError("cannot write " + a.out);
    write_csv(out, records);
  }
  return 0;
}

int report_cmd(const std::vector<std::string>& files, const std::string& dir) {
  std::vector<RunRecord> all;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ConfigError("cannot open " + f);
    auto rs = read_csv(in);
    all.insert(all.end(), rs.begin(), rs.end());
  }
  const auto rows = compare(all);
  write_report(dir, rows);
  std::cout << std::left << std::setw(18) << "config" << std::right << std::setw(14) << "SVA"
            << std::setw(14) << "OptSVA" << std::setw(9) << "gain%" << '\n';
  for (const auto& r : rows)
    std::cout << std::left << std::setw(18) << r.config << std::right << std::fixed << std::setprecision(1)
              << std::setw(14) << r.sva_makespan << std::setw(14) << r.optsva_makespan << std::setw(9)
              << r.gain_pct << '\n';
  std::cout << "wrote " << rows.size() << " row(s) to " << dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OptSVA transactional memory: engines, checkers and benchmarks"};
  app.require_subcommand(1);
  int status = 0;

  HarmonyArgs ha;
  auto* harmony = app.add_subcommand("check-harmony", "Check a JSONL trace for harmony");
  harmony->add_option("trace", ha.trace, "Trace file (JSON lines)")->required()->check(CLI::ExistingFile);
  harmony->add_option("--rule", ha.rules, "Evaluate only these rules (repeatable)");
  harmony->add_option("--max-chain-nodes", ha.max_chain_nodes, "Bound on view-chain exploration");
  harmony->callback([&] { status = check_harmony_cmd(ha); });

  LuArgs la;
  auto* lu = app.add_subcommand("check-luopacity", "Check a small history for last-use opacity");
  lu->add_option("trace", la.trace, "Trace file (JSON lines)")->required()->check(CLI::ExistingFile);
  lu->add_option("--program", la.program, "Program model (JSON) with the trace's txn ids")
      ->required()
      ->check(CLI::ExistingFile);
  lu->add_option("--max-txns", la.max_txns, "Give up above this many transactions");
  lu->add_flag("--direct", la.direct, "Enumerate with direct last-use visibility");
  lu->callback([&] { status = check_lu_cmd(la); });

  auto* bench = app.add_subcommand("bench", "Workloads, replays and reports");
  bench->require_subcommand(1);

  RunArgs ra;
  auto* run = bench->add_subcommand("run", "Generate a workload and run it once");
  run->add_option("--engine", ra.engine, "optsva or sva")->check(CLI::IsMember({"optsva", "sva"}));
  run->add_option("--mode", ra.mode, "virtual, threads, sim")
      ->check(CLI::IsMember({"virtual", "threads", "sim"}));
  run->add_option("--threads", ra.threads, "Worker threads");
  run->add_option("--txns", ra.txns, "Transactions per thread");
  run->add_option("--ops", ra.ops, "Operations per transaction (5 or 10)");
  run->add_option("--rw", ra.rw, "Read:write ratio, e.g. 5:1");
  run->add_option("--hot", ra.hot, "Hot array size (20 high, 80 low contention)");
  run->add_option("--locality", ra.locality, "Probability of revisiting a recent variable");
  run->add_option("--history", ra.history, "Locality history length");
  run->add_option("--abort-probability", ra.abort_probability, "Manual abort probability per txn");
  run->add_option("--seed", ra.seed, "Workload seed");
  run->add_option("--latency", ra.latency, "Virtual ticks per read or write");
  run->add_option("--record", ra.record, "Write the trace here");
  run->add_option("--save-program", ra.save_program, "Write the program (trace txn ids) here");
  run->add_option("--csv", ra.csv, "Append the metrics row here instead of printing");
  run->callback([&] { status = run_cmd(ra); });

  ReplayArgs pa;
  auto* rep = bench->add_subcommand("replay", "Replay a scenario script deterministically");
  rep->add_option("script", pa.script, "Scenario script")->required()->check(CLI::ExistingFile);
  rep->add_option("--engine", pa.engine, "optsva or sva")->check(CLI::IsMember({"optsva", "sva"}));
  rep->add_option("--latency", pa.latency, "Virtual ticks per read or write");
  rep->add_option("--out", pa.out, "Write the trace here instead of stdout");
  rep->add_flag("--check", pa.check, "Verify the built-in assertions of a figure script");
  rep->callback([&] { status = replay_cmd(pa); });

  std::string fig_dir = "scripts/figures";
  auto* figs = bench->add_subcommand("figures", "Replay and verify all figure scripts");
  figs->add_option("--dir", fig_dir, "Directory holding the figure scripts")->check(CLI::ExistingDirectory);
  figs->callback([&] { status = figures_cmd(fig_dir); });

  SweepArgs sa;
  auto* sw = bench->add_subcommand("sweep", "Run both engines on the eight benchmark configurations");
  sw->add_option("--seeds", sa.spec.seeds, "Seeds per configuration");
  sw->add_option("--first-seed", sa.spec.first_seed, "First seed");
  sw->add_option("--threads", sa.spec.threads, "Worker threads");
  sw->add_option("--txns", sa.spec.txns_per_thread, "Transactions per thread");
  sw->add_option("--latency", sa.spec.latency, "Virtual ticks per read or write");
  sw->add_option("--out", sa.out, "CSV output (default stdout)");
  sw->callback([&] { status = sweep_cmd(sa); });

  std::vector<std::string> csvs;
  std::string out_dir = "report";
  auto* rpt = bench->add_subcommand("report", "Compare engines from run CSVs");
  rpt->add_option("csv", csvs, "Run CSV files")->check(CLI::ExistingFile);
  rpt->add_option("--out-dir", out_dir, "Directory for report.csv, report.json, report.svg");
  rpt->callback([&] { status = report_cmd(csvs, out_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
