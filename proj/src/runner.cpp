// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/runner.hpp"

#include <algorithm>
#include <chrono>

#include "optsva/threaded_runtime.hpp"

namespace optsva {

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::threads: return "threads";
    case RunMode::sim_random: return "sim";
    case RunMode::virtual_time: return "virtual";
    case RunMode::controlled: return "controlled";
  }
  return "";
}

RunMode parse_run_mode(std::string_view s) {
  for (RunMode m : {RunMode::threads, RunMode::sim_random, RunMode::virtual_time, RunMode::controlled})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown run mode '" + std::string(s) + "'");
}

RunResult run_program(const ProgramModel& p, const RunOptions& opts) {
  validate(p);
  std::unique_ptr<Runtime> rt;
  SimRuntime* sim = nullptr;
  if (opts.mode == RunMode::threads) {
    rt = std::make_unique<ThreadedRuntime>(opts.workers);
  } else {
    SimOptions so;
    so.seed = opts.seed;
    so.policy = opts.mode == RunMode::sim_random     ? SimPolicy::random
                : opts.mode == RunMode::virtual_time ? SimPolicy::virtual_time
                                                     : SimPolicy::controlled;
    so.chooser = opts.chooser;
    auto s = std::make_unique<SimRuntime>(std::move(so));
    sim = s.get();
    rt = std::move(s);
  }
  Runtime& runtime = *rt;
  TraceRecorder rec([&runtime] { return runtime.now(); });
  auto engine = make_engine(opts.engine, EngineOptions{p.vars, rt.get(), opts.record ? &rec : nullptr});

  const std::uint32_t nthreads = p.num_threads();
  std::vector<std::vector<std::size_t>> by_thread(nthreads);
  for (std::size_t i = 0; i < p.txns.size(); ++i) by_thread[p.txns[i].thread].push_back(i);

  // Global start order: (position within thread, thread).
  std::vector<std::size_t> rank(p.txns.size());
  {
    std::vector<std::size_t> order;
    for (std::uint32_t t = 0; t < nthreads; ++t)
      for (std::size_t k = 0; k < by_thread[t].size(); ++k) order.push_back(by_thread[t][k]);
    std::vector<std::size_t> pos(p.txns.size());
    for (std::uint32_t t = 0; t < nthreads; ++t)
      for (std::size_t k = 0; k < by_thread[t].size(); ++k) pos[by_thread[t][k]] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (pos[a] != pos[b]) return pos[a] < pos[b];
      return p.txns[a].thread < p.txns[b].thread;
    });
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  }
  Waitable gate;
  gate.name = "start gate";
  std::size_t started = 0;

  RunResult res;
  res.txns.resize(p.txns.size());
  std::vector<std::uint64_t> ops_done(nthreads, 0);

  std::vector<std::function<void()>> fns;
  for (std::uint32_t t = 0; t < nthreads; ++t) {
    fns.push_back([&, t] {
      for (std::size_t idx : by_thread[t]) {
        const TxnProgram& prog = p.txns[idx];
        TxnRun& run = res.txns[idx];
        run.program_index = idx;
        if (opts.ordered_starts)
          runtime.wait_until(gate, [&] { return started == rank[idx]; });
        auto txn = engine->start(TxnDescriptor{prog.aset, prog.thread});
        if (opts.ordered_starts) {
          {
            std::lock_guard<std::mutex> g(gate.mu);
            ++started;
          }
          runtime.notify(gate);
        }
        run.trace_id = txn->id();
        for (const auto& a : prog.aset) run.pv[a.var] = txn->pv(a.var);
        for (const ProgOp& op : prog.ops) {
          bool stop = false;
          switch (op.kind) {
            case ProgOp::Kind::read: {
              const ReadResult r = txn->read(op.var);
              ++ops_done[t];
              if (r.aborted()) {
                run.outcome = Outcome::aborted;
                stop = true;
              } else {
                run.reads.push_back(r.value);
                runtime.work(opts.latency);
              }
              break;
            }
            case ProgOp::Kind::write:
              ++ops_done[t];
              if (txn->write(op.var, op.value) == Outcome::aborted) {
                run.outcome = Outcome::aborted;
                stop = true;
              } else {
                runtime.work(opts.latency);
              }
              break;
            case ProgOp::Kind::commit:
              run.outcome = txn->commit();
              break;
            case ProgOp::Kind::abort:
              run.outcome = txn->abort();
              run.manual_abort = true;
              break;
          }
          if (stop) break;
        }
      }
    });
  }

  const auto t0 = std::chrono::steady_clock::now();
  runtime.run_threads(std::move(fns));
  const auto t1 = std::chrono::steady_clock::now();

  rec.seal();
  if (opts.record) res.trace = rec.events();
  RunMetrics& m = res.metrics;
  m.engine = std::string(to_string(opts.engine));
  m.wall_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  m.makespan = opts.mode == RunMode::virtual_time && sim ? sim->makespan() : 0;
  m.exec_time = res.trace.empty() ? 0 : res.trace.back().seq;
  for (auto n : ops_done) m.operations += n;
  m.throughput = m.wall_ns ? m.operations * 1e9 / static_cast<double>(m.wall_ns) : 0.0;
  for (const auto& r : res.txns) {
    if (r.outcome == Outcome::committed) ++m.committed;
    if (r.outcome == Outcome::aborted) ++(r.manual_abort ? m.manual_aborts : m.forced_aborts);
  }
  m.orphaned_tasks = runtime.orphaned_tasks();

  for (VarId x = 0; x < p.vars; ++x) res.final_values.push_back(engine->cell(x).value);
  res.program = p;
  std::map<TxnId, std::size_t> index;
  for (std::size_t i = 0; i < p.txns.size(); ++i) {
    res.program.txns[i].id = res.txns[i].trace_id;
    index[res.txns[i].trace_id] = i;
  }
  if (opts.record) {
    const Timing t = timing_by_time(res.trace);
    for (const auto& [key, at] : t.release) m.release[{index.at(key.first), key.second}] = at;
    for (const auto& [key, at] : t.completion) m.completion[{index.at(key.first), key.second}] = at;
  }
  return res;
}

}  // namespace optsva
