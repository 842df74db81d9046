// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Executes a ProgramModel against an engine and collects metrics and the
// recorded trace.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "optsva/engine.hpp"
#include "optsva/program.hpp"
#include "optsva/sim_runtime.hpp"
#include "optsva/trace.hpp"

namespace optsva {

enum class RunMode : std::uint8_t {
  threads,       // real OS threads
  sim_random,    // simulated threads, seeded random interleaving
  virtual_time,  // simulated threads, discrete-event virtual time
  controlled,    // simulated threads, external chooser
};

std::string_view to_string(RunMode m);
RunMode parse_run_mode(std::string_view s);

struct RunOptions {
  EngineKind engine = EngineKind::optsva;
  RunMode mode = RunMode::virtual_time;
  std::uint64_t seed = 0;  // interleaving seed for sim_random
  // Cost of each read or write in virtual ticks, charged after the operation
  // returns. Concurrency-control code costs nothing.
  Tick latency = 100;
  bool record = true;
  // Start transactions in a fixed global order (k-th transaction of every
  // thread before any (k+1)-th, threads in index order) so that both engines
  // draw identical private versions.
  bool ordered_starts = false;
  Chooser chooser;          // for RunMode::controlled
  std::size_t workers = 4;  // task pool for RunMode::threads
};

struct TxnRun {
  TxnId trace_id = 0;
  std::size_t program_index = 0;
  Outcome outcome = Outcome::ok;
  bool manual_abort = false;
  std::vector<Value> reads;  // values returned by successful reads
  std::map<VarId, Version> pv;
};

struct RunMetrics {
  std::string engine;
  std::uint64_t wall_ns = 0;
  Tick makespan = 0;        // virtual ticks (virtual_time mode), else 0
  std::uint64_t exec_time = 0;  // seq of the last trace event
  std::uint64_t operations = 0;
  double throughput = 0.0;  // operations per wall-clock second
  std::uint64_t committed = 0;
  std::uint64_t forced_aborts = 0;
  std::uint64_t manual_aborts = 0;
  std::size_t orphaned_tasks = 0;
  // Release (lv update) and completion (ltv update) times per (program
  // transaction index, variable), in the runtime's clock. Needs a record.
  std::map<std::pair<std::size_t, VarId>, Tick> release, completion;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<Event> trace;
  std::vector<Value> final_values;
  std::vector<TxnRun> txns;  // indexed like program.txns
  // Copy of the input program with ids replaced by the trace's txn ids.
  ProgramModel program;
};

RunResult run_program(const ProgramModel& p, const RunOptions& opts);

}  // namespace optsva
