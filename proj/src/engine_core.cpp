// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "engine_core.hpp"

#include <algorithm>
#include <unordered_set>

namespace optsva {

std::string_view to_string(EngineKind k) { return k == EngineKind::optsva ? "optsva" : "sva"; }

EngineKind parse_engine_kind(std::string_view s) {
  if (s == "optsva") return EngineKind::optsva;
  if (s == "sva") return EngineKind::sva;
  throw ConfigError("unknown engine '" + std::string(s) + "'");
}

std::unique_ptr<Engine> make_engine(EngineKind kind, const EngineOptions& opts) {
  return kind == EngineKind::optsva ? make_optsva(opts) : make_sva(opts);
}

namespace detail {

EngineCore::EngineCore(const EngineOptions& opts) : rt_(opts.runtime), rec_(opts.recorder) {
  if (!rt_) throw ConfigError("engine needs a runtime");
  cells_.reserve(opts.num_vars);
  for (std::size_t i = 0; i < opts.num_vars; ++i) {
    auto c = std::make_unique<Cell>();
    c->id = static_cast<VarId>(i);
    c->name = "x" + std::to_string(i);
    cells_.push_back(std::move(c));
  }
}

CellSnapshot EngineCore::snapshot(VarId x) const {
  if (x >= cells_.size()) throw ConfigError("unknown variable " + std::to_string(x));
  Cell& c = *cells_[x];
  std::lock_guard<std::mutex> g(c.mu);
  return CellSnapshot{c.value, c.gv, c.lv, c.ltv, c.cv};
}

void EngineCore::record(TxnId t, EventKind k, std::optional<VarId> x, std::optional<Value> v,
                        RespCode r) {
  if (!rec_) return;
  Event e;
  e.txn = t;
  e.kind = k;
  e.var = x;
  e.value = v;
  e.outcome = r;
  rec_->record(std::move(e));
}

void EngineCore::record(Event e) {
  if (rec_) rec_->record(std::move(e));
}

bool EngineCore::reverted(const Cell& c, Version v, std::size_t mark) {
  for (std::size_t i = mark; i < c.restores.size(); ++i)
    if (c.restores[i] < v) return true;
  return false;
}

bool EngineCore::consistent(TxnCore& t, const std::vector<Cell*>& viewing) {
  std::vector<TxnCore*> todo{&t};
  for (Cell* c : viewing)
    if (c->writer) todo.push_back(c->writer.get());
  std::unordered_set<TxnCore*> seen;
  while (!todo.empty()) {
    TxnCore* u = todo.back();
    todo.pop_back();
    if (!seen.insert(u).second) continue;
    if (u != &t) {
      const TxnState s = u->state.load();
      if (s == TxnState::committed) continue;
      if (s == TxnState::aborted) return false;
    }
    std::lock_guard<std::mutex> g(u->mu);
    for (const auto& w : u->writes)
      if (reverted(*cells_[w.x], w.pv, w.mark)) return false;
    for (const auto& r : u->views) {
      if (reverted(*cells_[r.x], r.ver, r.mark)) return false;
      if (r.writer) todo.push_back(r.writer.get());
    }
  }
  return true;
}

TxnBase::TxnBase(EngineCore& e, const TxnDescriptor& desc)
    : e_(e), core_(std::make_shared<TxnCore>()) {
  for (const auto& a : desc.aset) {
    if (a.var >= e_.size()) throw ConfigError("unknown variable " + std::to_string(a.var));
    for (const auto& v : vars_)
      if (v.x == a.var) throw ConfigError("variable " + std::to_string(a.var) + " declared twice");
    VarState v;
    v.cell = &e_.cell(a.var);
    v.x = a.var;
    v.rub = a.rub;
    v.wub = a.wub;
    vars_.push_back(std::move(v));
  }
  std::sort(vars_.begin(), vars_.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  core_->id = e_.next_id++;

  e_.rt().yield();
  Event inv;
  inv.txn = core_->id;
  inv.kind = EventKind::inv_start;
  inv.proc = desc.proc;
  inv.aset = desc.aset;
  e_.record(std::move(inv));
  {
    std::vector<std::unique_lock<std::mutex>> locks;
    locks.reserve(vars_.size());
    for (auto& v : vars_) locks.emplace_back(v.cell->mu);
    for (auto& v : vars_) v.pv = ++v.cell->gv;
  }
  e_.record(core_->id, EventKind::resp_start, {}, {}, RespCode::ok);
}

TxnBase::~TxnBase() {
  // An abandoned active transaction stalls its successors; the tasks that
  // reference it must not outlive it either way.
  settle_tasks();
}

Version TxnBase::pv(VarId x) const {
  for (const auto& v : vars_)
    if (v.x == x) return v.pv;
  throw AccessSetError("variable " + std::to_string(x) + " not in access set");
}

VarState& TxnBase::var(VarId x) {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), x,
                             [](const VarState& v, VarId id) { return v.x < id; });
  if (it == vars_.end() || it->x != x)
    throw AccessSetError("variable " + std::to_string(x) + " not in access set of txn " +
                         std::to_string(core_->id));
  return *it;
}

void TxnBase::require_active() const {
  if (core_->state.load() != TxnState::active)
    throw UsageError("operation on completed txn " + std::to_string(core_->id));
}

void TxnBase::checkpoint(VarState& v) {
  if (v.checkpointed) throw std::logic_error("second checkpoint");
  Cell& c = *v.cell;
  e_.record(core_->id, EventKind::view, v.x, c.value);
  v.st = c.value;
  v.st_ver = c.ver;
  v.st_writer = c.writer;
  v.rv = c.cv;
  v.checkpointed = true;
  std::lock_guard<std::mutex> g(core_->mu);
  core_->views.push_back(ViewRec{v.x, c.ver, c.writer, c.restores.size()});
}

void TxnBase::routine_update(VarState& v, Value val) {
  if (v.updated) throw std::logic_error("second routine update");
  Cell& c = *v.cell;
  c.value = val;
  c.ver = v.pv;
  c.writer = core_;
  e_.record(core_->id, EventKind::rupdate, v.x, val);
  v.updated = true;
  v.write_mark = c.restores.size();
  std::lock_guard<std::mutex> g(core_->mu);
  core_->writes.push_back(WriteRec{v.x, v.pv, v.write_mark});
}

void TxnBase::release(VarState& v) {
  if (v.released) throw std::logic_error("second release");
  v.cell->cv = v.pv;
  v.cell->lv = v.pv;
  v.released = true;
  e_.record(core_->id, EventKind::release, v.x);
}

void TxnBase::complete(VarState& v) {
  v.cell->ltv = v.pv;
  v.completed = true;
  e_.record(core_->id, EventKind::complete, v.x);
}

bool TxnBase::consistent_locked(std::initializer_list<VarState*> viewing) {
  std::vector<Cell*> cells;
  for (VarState* v : viewing) cells.push_back(v->cell);
  return e_.consistent(*core_, cells);
}

bool TxnBase::consistent_now() {
  std::shared_lock<std::shared_mutex> r(e_.restore_mu);
  return e_.consistent(*core_, {});
}

void TxnBase::wait_access(VarState& v) {
  Cell& c = *v.cell;
  const Version want = v.pv - 1;
  e_.rt().wait_until(c, [&c, want] { return c.lv == want; });
}

void TxnBase::wait_termination(VarState& v) {
  Cell& c = *v.cell;
  const Version want = v.pv - 1;
  e_.rt().wait_until(c, [&c, want] { return c.ltv == want; });
}

void TxnBase::release_clean() {
  for (auto& v : vars_) {
    if (v.released || task_managed(v) || needs_flush(v)) continue;
    wait_access(v);
    {
      std::shared_lock<std::shared_mutex> r(e_.restore_mu);
      std::lock_guard<std::mutex> g(v.cell->mu);
      release(v);
    }
    e_.rt().notify(*v.cell);
  }
}

Outcome TxnBase::finish_commit() {
  {
    std::shared_lock<std::shared_mutex> r(e_.restore_mu);
    std::vector<std::unique_lock<std::mutex>> locks;
    locks.reserve(vars_.size());
    for (auto& v : vars_) locks.emplace_back(v.cell->mu);
    std::vector<Cell*> viewing;
    for (auto& v : vars_)
      if (needs_flush(v) && !v.checkpointed) viewing.push_back(v.cell);
    if (!e_.consistent(*core_, viewing)) {
      locks.clear();
      r.unlock();
      return abort_path(EventKind::resp_tryc);
    }
    for (auto& v : vars_) {
      if (!needs_flush(v)) continue;
      if (!v.checkpointed) checkpoint(v);
      routine_update(v, v.buf);
      v.dirty = false;
    }
    core_->state = TxnState::committed;
    drop_history();
    for (auto& v : vars_) {
      if (!v.released) release(v);
      if (!v.completed) complete(v);
    }
    e_.record(core_->id, EventKind::resp_tryc, {}, {}, RespCode::committed);
  }
  notify_all();
  return Outcome::committed;
}

Outcome TxnBase::abort() {
  require_active();
  e_.rt().yield();
  e_.record(core_->id, EventKind::inv_trya);
  return abort_path(EventKind::resp_trya);
}

Outcome TxnBase::abort_path(EventKind resp, std::optional<VarId> x) {
  settle_tasks();
  for (auto& v : vars_)
    if (!v.released) wait_access(v);
  for (auto& v : vars_)
    if (!v.completed) wait_termination(v);
  {
    std::unique_lock<std::shared_mutex> r(e_.restore_mu);
    for (auto& v : vars_) {
      if (!v.updated) continue;
      Cell& c = *v.cell;
      std::lock_guard<std::mutex> g(c.mu);
      // A predecessor's recovery already rolled this write back.
      if (EngineCore::reverted(c, v.pv, v.write_mark)) continue;
      c.value = v.st;
      c.ver = v.st_ver;
      c.writer = v.st_writer;
      c.cv = v.rv;
      c.restores.push_back(v.st_ver);
      e_.record(core_->id, EventKind::aupdate, v.x, v.st);
    }
  }
  {
    std::vector<std::unique_lock<std::mutex>> locks;
    locks.reserve(vars_.size());
    for (auto& v : vars_) locks.emplace_back(v.cell->mu);
    core_->state = TxnState::aborted;
    drop_history();
    for (auto& v : vars_) {
      if (!v.released) {
        v.cell->lv = v.pv;
        v.released = true;
        e_.record(core_->id, EventKind::release, v.x);
      }
      if (!v.completed) complete(v);
    }
    e_.record(core_->id, resp, resp == EventKind::resp_read ? x : std::nullopt, {},
              RespCode::aborted);
  }
  notify_all();
  return Outcome::aborted;
}

void TxnBase::settle_tasks() {
  Runtime& rt = e_.rt();
  for (auto& v : vars_) {
    for (TaskRef* t : {&v.rb_task, &v.wb_task, &v.rcommit_task}) {
      if (*t && !rt.cancel(*t)) rt.join(*t);
    }
  }
}

void TxnBase::drop_history() {
  // Nobody inspects a completed transaction's views; dropping them also
  // breaks the chain of writer references.
  std::lock_guard<std::mutex> g(core_->mu);
  core_->views.clear();
  core_->writes.clear();
}

void TxnBase::notify_all() {
  for (auto& v : vars_) e_.rt().notify(*v.cell);
}

}  // namespace detail
}  // namespace optsva
