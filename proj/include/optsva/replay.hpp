// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Scenario scripts: hand-written interleavings replayed deterministically.
//
// One operation per line, `thread <name>: <op>`, where <op> is one of
//
//   start [x:r<n>:w<m> ...]   begin a transaction; without declarations the
//                             bounds are the counts of its reads and writes
//   read x                    read x
//   write x v                 write v (> 0) to x
//   commit | abort            tryC or tryA
//   barrier <name>            rendezvous with every thread naming <name>
//   work <ticks>              local computation
//
// A read or write outside a transaction starts one implicitly. Variables are
// numbered in order of first appearance and threads likewise; threads that
// appear first start first when nothing else orders them. `#` starts a
// comment. Replays run on simulated threads in virtual time, so a script
// always produces the same trace.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "optsva/engine.hpp"
#include "optsva/trace.hpp"

namespace optsva {

struct ScriptOp {
  enum class Kind : std::uint8_t { start, read, write, commit, abort, barrier, work };
  Kind kind = Kind::read;
  VarId var = 0;
  Value value = 0;
  Tick ticks = 0;
  std::string barrier;
  // start only; empty means the bounds are counted.
  std::vector<Access> aset;
  std::size_t line = 0;
};

struct Script {
  std::vector<std::string> vars;     // VarId -> name
  std::vector<std::string> threads;  // thread index -> name
  std::vector<std::vector<ScriptOp>> ops;  // per thread, with explicit starts
};

// Throws ConfigError naming the offending line.
Script parse_script(std::string_view text);
Script load_script(const std::string& path);

struct ReplayOptions {
  EngineKind engine = EngineKind::optsva;
  // Virtual cost of each read and write.
  Tick latency = 100;
};

struct ReplayTxn {
  std::string thread;
  std::size_t index = 0;  // position among the thread's transactions
  TxnId id = 0;           // id in the trace
  Outcome outcome = Outcome::ok;
  std::vector<Value> reads;
};

struct ReplayResult {
  std::vector<Event> trace;
  std::vector<ReplayTxn> txns;
  std::vector<Value> final_values;
  Tick makespan = 0;

  // The k-th transaction of the named thread. Throws std::out_of_range.
  const ReplayTxn& txn(std::string_view thread, std::size_t k = 0) const;
};

// Throws DeadlockError if the script cannot finish.
ReplayResult replay(const Script& s, const ReplayOptions& o = {});

}  // namespace optsva
