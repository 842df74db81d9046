// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// OptSVA: SVA plus read-only buffering, asynchronous first-write
// synchronization, early release on the closing write, and catch-up of
// writes left short of their upper bound.
#include "engine_core.hpp"

namespace optsva {
namespace detail {
namespace {

class OptTxn final : public TxnBase {
 public:
  using TxnBase::TxnBase;

  void after_start() {
    for (auto& v : vars_) {
      if (!v.read_only()) continue;
      Cell& c = *v.cell;
      const Version want = v.pv - 1;
      v.rb_task = e_.rt().spawn_when(
          c, [&c, want] { return c.lv == want; }, [this, &v] { read_buffer(v); });
    }
  }

  ReadResult read(VarId x) override {
    require_active();
    VarState& v = var(x);
    if (v.rc >= v.rub) throw UpperBoundError("read bound of var " + std::to_string(x) + " exceeded");
    e_.rt().yield();
    e_.record(id(), EventKind::inv_read, x);
    ++v.rc;
    auto fail = [&] { return ReadResult{abort_path(EventKind::resp_read, x), 0}; };
    if (abort_pending_) return fail();

    if (v.read_only()) {
      e_.rt().join(v.rb_task);
      if (abort_pending_ || !consistent_now()) return fail();
    } else if (v.wc > 0) {
      if (!consistent_now()) return fail();
    } else {
      wait_access(v);
      bool ok;
      {
        std::shared_lock<std::shared_mutex> r(e_.restore_mu);
        std::lock_guard<std::mutex> g(v.cell->mu);
        ok = v.checkpointed ? consistent_locked({}) : consistent_locked({&v});
        if (ok && !v.checkpointed) {
          checkpoint(v);
          v.buf = v.st;
        }
      }
      if (!ok) return fail();
    }
    e_.record(id(), EventKind::resp_read, x, v.buf, RespCode::ok);
    return ReadResult{Outcome::ok, v.buf};
  }

  Outcome write(VarId x, Value val) override {
    require_active();
    VarState& v = var(x);
    if (v.wc >= v.wub) throw UpperBoundError("write bound of var " + std::to_string(x) + " exceeded");
    e_.rt().yield();
    e_.record(id(), EventKind::inv_write, x, val);
    if (abort_pending_ || !in_domain(val) || !consistent_now())
      return abort_path(EventKind::resp_write);
    v.buf = val;
    ++v.wc;
    // The response goes out before the buffer task can publish the value, so
    // every reader of a closing write sees its writer already decided on x.
    e_.record(id(), EventKind::resp_write, {}, {}, RespCode::ok);
    if (v.wc == v.wub) {
      Cell& c = *v.cell;
      const Version want = v.pv - 1;
      v.wb_task = e_.rt().spawn_when(
          c, [&c, want] { return c.lv == want; }, [this, &v] { write_buffer(v); });
      e_.rt().yield();
    }
    return Outcome::ok;
  }

  Outcome commit() override {
    require_active();
    e_.rt().yield();
    e_.record(id(), EventKind::inv_tryc);
    if (abort_pending_) return abort_path(EventKind::resp_tryc);
    for (auto& v : vars_) {
      if (v.rb_task) e_.rt().join(v.rb_task);
      if (v.wb_task) e_.rt().join(v.wb_task);
    }
    if (abort_pending_) return abort_path(EventKind::resp_tryc);
    release_clean();
    for (auto& v : vars_)
      if (!v.read_only() && !v.released) wait_access(v);
    for (auto& v : vars_)
      if (!v.read_only()) wait_termination(v);
    for (auto& v : vars_)
      if (v.rcommit_task) e_.rt().join(v.rcommit_task);
    if (abort_pending_) return abort_path(EventKind::resp_tryc);
    return finish_commit();
  }

 protected:
  bool needs_flush(const VarState& v) const override { return v.wc > 0 && v.wc < v.wub; }
  bool task_managed(const VarState& v) const override { return v.read_only(); }

 private:
  void read_buffer(VarState& v) {
    if (abort_pending_) return;
    {
      std::shared_lock<std::shared_mutex> r(e_.restore_mu);
      std::lock_guard<std::mutex> g(v.cell->mu);
      if (!consistent_locked({&v})) {
        abort_pending_ = true;
        return;
      }
      checkpoint(v);
      v.buf = v.st;
      release(v);
    }
    e_.rt().notify(*v.cell);
    Cell& c = *v.cell;
    const Version want = v.pv - 1;
    v.rcommit_task = e_.rt().spawn_when(
        c, [&c, want] { return c.ltv == want; }, [this, &v] { read_commit(v); });
  }

  void read_commit(VarState& v) {
    if (abort_pending_) return;
    {
      std::shared_lock<std::shared_mutex> r(e_.restore_mu);
      std::lock_guard<std::mutex> g(v.cell->mu);
      if (!consistent_locked({})) {
        abort_pending_ = true;
        return;
      }
      complete(v);
    }
    e_.rt().notify(*v.cell);
  }

  void write_buffer(VarState& v) {
    if (abort_pending_) return;
    {
      std::shared_lock<std::shared_mutex> r(e_.restore_mu);
      std::lock_guard<std::mutex> g(v.cell->mu);
      if (!(v.checkpointed ? consistent_locked({}) : consistent_locked({&v}))) {
        abort_pending_ = true;
        return;
      }
      if (!v.checkpointed) checkpoint(v);
      routine_update(v, v.buf);
      release(v);
    }
    e_.rt().notify(*v.cell);
  }
};

class OptEngine final : public Engine {
 public:
  explicit OptEngine(const EngineOptions& o) : core_(o) {}

  std::unique_ptr<Txn> start(const TxnDescriptor& desc) override {
    auto t = std::make_unique<OptTxn>(core_, desc);
    t->after_start();
    return t;
  }
  EngineKind kind() const override { return EngineKind::optsva; }
  std::size_t num_vars() const override { return core_.size(); }
  CellSnapshot cell(VarId x) const override { return core_.snapshot(x); }

 private:
  EngineCore core_;
};

}  // namespace
}  // namespace detail

std::unique_ptr<Engine> make_optsva(const EngineOptions& opts) {
  return std::make_unique<detail::OptEngine>(opts);
}

}  // namespace optsva
