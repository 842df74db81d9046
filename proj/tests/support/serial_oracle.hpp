// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Serializability oracle for small programs: every explored schedule must
// commit every transaction and agree, read for read and in final memory, with
// the serial execution in private version order.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "optsva/runner.hpp"
#include "optsva/sim_runtime.hpp"

namespace optsva::testing {

struct SerialRun {
  std::vector<std::vector<Value>> reads;  // per program txn
  std::vector<Value> final_values;
};

// Runs the transactions one after another in the given order.
inline SerialRun run_serially(const ProgramModel& p, const std::vector<std::size_t>& order) {
  SerialRun s;
  s.reads.resize(p.txns.size());
  s.final_values.assign(p.vars, 0);
  for (std::size_t i : order) {
    std::map<VarId, Value> local;
    for (const ProgOp& op : p.txns[i].ops) {
      if (op.kind == ProgOp::Kind::read) {
        auto it = local.find(op.var);
        s.reads[i].push_back(it != local.end() ? it->second : s.final_values[op.var]);
      } else if (op.kind == ProgOp::Kind::write) {
        local[op.var] = op.value;
      }
    }
    for (auto [x, v] : local) s.final_values[x] = v;
  }
  return s;
}

// Orders transactions by private version on each shared variable. Empty if
// those orders contradict each other.
inline std::optional<std::vector<std::size_t>> version_order(const RunResult& r) {
  const std::size_t n = r.txns.size();
  std::vector<std::vector<std::size_t>> next(n);
  std::vector<std::size_t> indeg(n, 0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (auto [x, va] : r.txns[a].pv) {
        auto it = r.txns[b].pv.find(x);
        if (a != b && it != r.txns[b].pv.end() && va < it->second) {
          next[a].push_back(b);
          ++indeg[b];
          break;
        }
      }
  std::vector<std::size_t> order;
  for (std::size_t done = 0; done < n; ++done) {
    std::size_t i = 0;
    while (i < n && (indeg[i] != 0 || std::find(order.begin(), order.end(), i) != order.end())) ++i;
    if (i == n) return std::nullopt;
    order.push_back(i);
    for (std::size_t b : next[i]) --indeg[b];
  }
  return order;
}

// Empty if the run is equivalent to the serial run in private version order.
inline std::optional<std::string> serial_mismatch(const ProgramModel& p, const RunResult& r) {
  const auto order = version_order(r);
  if (!order) return std::string("private versions order transactions cyclically");
  for (std::size_t i = 0; i < r.txns.size(); ++i)
    if (r.txns[i].outcome != Outcome::committed)
      return "transaction " + std::to_string(i) + " did not commit";
  const SerialRun s = run_serially(p, *order);
  for (std::size_t i = 0; i < r.txns.size(); ++i)
    if (r.txns[i].reads != s.reads[i])
      return "transaction " + std::to_string(i) + " read values no serial order explains";
  if (r.final_values != s.final_values) return std::string("final memory differs from the serial run");
  return std::nullopt;
}

struct OracleReport {
  std::size_t programs = 0;
  std::size_t schedules = 0;
  bool complete = true;  // no program hit the schedule cap
  std::optional<std::string> failure;
};

// Explores each program under `engine` and stops at the first mismatch.
inline OracleReport check_serializable(const std::vector<ProgramModel>& programs, EngineKind engine,
                                       ExploreLimits limits) {
  OracleReport rep;
  for (const ProgramModel& p : programs) {
    ++rep.programs;
    std::optional<std::string> bad;
    auto st = explore_schedules(
        [&](Chooser ch) {
          if (bad) return;
          RunOptions o;
          o.engine = engine;
          o.mode = RunMode::controlled;
          o.chooser = std::move(ch);
          o.record = false;
          RunResult r = run_program(p, o);
          bad = serial_mismatch(p, r);
        },
        limits);
    rep.schedules += st.schedules;
    rep.complete = rep.complete && st.complete;
    if (bad) {
      std::ostringstream os;
      os << to_string(engine) << ", program " << to_json(p) << ": " << *bad;
      rep.failure = os.str();
      return rep;
    }
  }
  return rep;
}

// Every program with one transaction per thread, `txns` transactions, and
// between 1 and `max_ops` reads or writes per transaction over `vars`
// variables. Written values are distinct.
inline std::vector<ProgramModel> small_programs(std::size_t txns, std::size_t vars, std::size_t max_ops) {
  std::vector<std::vector<ProgOp>> bodies;
  std::vector<ProgOp> cur;
  auto grow = [&](auto&& self) -> void {
    if (!cur.empty()) bodies.push_back(cur);
    if (cur.size() == max_ops) return;
    for (VarId x = 0; x < vars; ++x)
      for (auto k : {ProgOp::Kind::read, ProgOp::Kind::write}) {
        cur.push_back(ProgOp{k, x, 0});
        self(self);
        cur.pop_back();
      }
  };
  grow(grow);

  std::vector<ProgramModel> out;
  std::vector<std::size_t> pick(txns, 0);
  for (;;) {
    ProgramModel p;
    p.vars = vars;
    Value next = 1;
    for (std::size_t t = 0; t < txns; ++t) {
      TxnProgram tp;
      tp.id = t + 1;
      tp.thread = static_cast<std::uint32_t>(t);
      std::map<VarId, Access> acc;
      for (ProgOp op : bodies[pick[t]]) {
        Access& a = acc[op.var];
        a.var = op.var;
        if (op.kind == ProgOp::Kind::write) {
          op.value = next++;
          ++a.wub;
        } else {
          ++a.rub;
        }
        tp.ops.push_back(op);
      }
      tp.ops.push_back(ProgOp{ProgOp::Kind::commit, 0, 0});
      for (auto& [x, a] : acc) tp.aset.push_back(a);
      p.txns.push_back(std::move(tp));
    }
    out.push_back(std::move(p));
    std::size_t i = 0;
    while (i < txns && ++pick[i] == bodies.size()) pick[i++] = 0;
    if (i == txns) break;
  }
  return out;
}

}  // namespace optsva::testing
