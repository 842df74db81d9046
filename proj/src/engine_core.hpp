// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Internals shared by the OptSVA engine and the SVA baseline: variable cells,
// version counters, checkpoints, consistency tracking, commit and abort paths.
//
// Lock order: EngineCore::restore_mu, then cell mutexes in ascending id
// order, then TxnCore::mu (leaf). No lock is held across a runtime wait.
#pragma once

#include <atomic>
#include <initializer_list>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "optsva/engine.hpp"

namespace optsva::detail {

struct TxnCore;

struct Cell : Waitable {
  VarId id = 0;
  Value value = 0;
  Version gv = 0, lv = 0, ltv = 0, cv = 0;
  // Private version and identity of the transaction whose routine update
  // produced `value` (0 / null for the initial value or a restored one that
  // traces back to it).
  Version ver = 0;
  std::shared_ptr<TxnCore> writer;
  // Version each recovery update restored the cell to, in order.
  std::vector<Version> restores;
};

// What a transaction saw and wrote; other transactions inspect it to decide
// whether they depend on a doomed transaction.
struct ViewRec {
  VarId x;
  Version ver;
  std::shared_ptr<TxnCore> writer;
  std::size_t mark;  // restores.size() at view time
};
struct WriteRec {
  VarId x;
  Version pv;
  std::size_t mark;
};

struct TxnCore {
  TxnId id = 0;
  std::atomic<TxnState> state{TxnState::active};
  std::mutex mu;
  std::vector<ViewRec> views;
  std::vector<WriteRec> writes;
};

class EngineCore {
 public:
  explicit EngineCore(const EngineOptions& opts);

  Cell& cell(VarId x) { return *cells_[x]; }
  std::size_t size() const { return cells_.size(); }
  CellSnapshot snapshot(VarId x) const;
  Runtime& rt() { return *rt_; }

  void record(TxnId t, EventKind k, std::optional<VarId> x = {}, std::optional<Value> v = {},
              RespCode r = RespCode::none);
  void record(Event e);

  // True iff some recovery update logged on c after `mark` restored the cell
  // below version v, i.e. the state produced by version v was rolled back.
  static bool reverted(const Cell& c, Version v, std::size_t mark);

  // True iff nothing t saw or wrote has been rolled back, transitively
  // through the uncommitted writers it saw. `viewing` adds the current
  // writers of cells about to be viewed. Caller holds restore_mu (shared or
  // exclusive) and the mutexes of the cells in `viewing`.
  bool consistent(TxnCore& t, const std::vector<Cell*>& viewing);

  std::shared_mutex restore_mu;
  std::atomic<TxnId> next_id{1};

 private:
  Runtime* rt_;
  TraceRecorder* rec_;
  std::vector<std::unique_ptr<Cell>> cells_;
};

struct VarState {
  Cell* cell = nullptr;
  VarId x = 0;
  std::uint32_t rub = 0, wub = 0, rc = 0, wc = 0;
  Version pv = 0, rv = 0;
  Value buf = 0;
  Value st = 0;
  Version st_ver = 0;
  std::shared_ptr<TxnCore> st_writer;
  std::size_t write_mark = 0;
  bool checkpointed = false;
  bool updated = false;
  bool released = false;
  bool completed = false;
  bool dirty = false;  // SVA: buffered write not yet applied
  TaskRef rb_task, wb_task, rcommit_task;

  bool read_only() const { return rub > 0 && wub == 0; }
};

class TxnBase : public Txn {
 public:
  TxnBase(EngineCore& e, const TxnDescriptor& desc);
  ~TxnBase() override;

  TxnId id() const override { return core_->id; }
  TxnState state() const override { return core_->state.load(); }
  Version pv(VarId x) const override;
  Outcome abort() override;

 protected:
  VarState& var(VarId x);
  void require_active() const;

  // The following four run with restore_mu shared and v.cell->mu held.
  void checkpoint(VarState& v);
  void routine_update(VarState& v, Value val);
  void release(VarState& v);
  void complete(VarState& v);

  // Consistency of this transaction before viewing the given variables.
  bool consistent_locked(std::initializer_list<VarState*> viewing);
  bool consistent_now();

  void wait_access(VarState& v);
  void wait_termination(VarState& v);

  // Releases, at commit time, every variable that has nothing left to write
  // and is not handled elsewhere.
  void release_clean();
  // Final atomic step of commit: consistency check, pending updates, status,
  // publication of lv/cv/ltv.
  Outcome finish_commit();
  // Shared by tryA and forced aborts. Records the response `resp` (with var
  // for read responses) and returns Outcome::aborted.
  Outcome abort_path(EventKind resp, std::optional<VarId> x = {});

  // Whether commit must still apply a buffered write for v.
  virtual bool needs_flush(const VarState& v) const = 0;
  // Whether commit leaves v to asynchronous tasks.
  virtual bool task_managed(const VarState& v) const { (void)v; return false; }

  void settle_tasks();
  void notify_all();
  void drop_history();

  EngineCore& e_;
  std::shared_ptr<TxnCore> core_;
  std::vector<VarState> vars_;  // ascending var id
  std::atomic<bool> abort_pending_{false};
};

}  // namespace optsva::detail
