// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// SVA baseline: every access waits at the access condition, reads and writes
// are not distinguished, and a variable is released after its last access
// (access count reaching rub + wub) or at commit.
#include "engine_core.hpp"

namespace optsva {
namespace detail {
namespace {

class SvaTxn final : public TxnBase {
 public:
  using TxnBase::TxnBase;

  ReadResult read(VarId x) override {
    Value out = 0;
    const Outcome o = access(x, std::nullopt, out);
    return ReadResult{o, out};
  }

  Outcome write(VarId x, Value val) override {
    Value ignored = 0;
    return access(x, val, ignored);
  }

  Outcome commit() override {
    require_active();
    e_.rt().yield();
    e_.record(id(), EventKind::inv_tryc);
    release_clean();
    for (auto& v : vars_)
      if (!v.released) wait_access(v);
    for (auto& v : vars_) wait_termination(v);
    return finish_commit();
  }

 protected:
  bool needs_flush(const VarState& v) const override { return v.dirty; }

 private:
  // The checkpoint is the single view of x; writes go to the buffer and are
  // applied as one routine update when x is released.
  Outcome access(VarId x, std::optional<Value> val, Value& out) {
    require_active();
    VarState& v = var(x);
    if (v.rc + v.wc >= v.rub + v.wub)
      throw UpperBoundError("access bound of var " + std::to_string(x) + " exceeded");
    e_.rt().yield();
    const EventKind resp = val ? EventKind::resp_write : EventKind::resp_read;
    const std::optional<VarId> rx = val ? std::nullopt : std::optional<VarId>(x);
    if (val)
      e_.record(id(), EventKind::inv_write, x, *val);
    else
      e_.record(id(), EventKind::inv_read, x);
    if (val && !in_domain(*val)) return abort_path(resp, rx);
    wait_access(v);
    bool ok;
    bool released = false;
    {
      std::shared_lock<std::shared_mutex> r(e_.restore_mu);
      std::lock_guard<std::mutex> g(v.cell->mu);
      ok = v.checkpointed ? consistent_locked({}) : consistent_locked({&v});
      if (ok) {
        if (!v.checkpointed) {
          checkpoint(v);
          v.buf = v.st;
        }
        if (val) {
          v.buf = *val;
          v.dirty = true;
          ++v.wc;
        } else {
          ++v.rc;
        }
        out = v.buf;
        if (v.rc + v.wc == v.rub + v.wub) {
          if (v.dirty) {
            routine_update(v, v.buf);
            v.dirty = false;
          }
          release(v);
          released = true;
        }
        // Responding under the cell lock orders the response before any
        // successor's view of x.
        if (val)
          e_.record(id(), EventKind::resp_write, {}, {}, RespCode::ok);
        else
          e_.record(id(), EventKind::resp_read, x, out, RespCode::ok);
      }
    }
    if (!ok) return abort_path(resp, rx);
    if (released) e_.rt().notify(*v.cell);
    return Outcome::ok;
  }
};

class SvaEngine final : public Engine {
 public:
  explicit SvaEngine(const EngineOptions& o) : core_(o) {}

  std::unique_ptr<Txn> start(const TxnDescriptor& desc) override {
    return std::make_unique<SvaTxn>(core_, desc);
  }
  EngineKind kind() const override { return EngineKind::sva; }
  std::size_t num_vars() const override { return core_.size(); }
  CellSnapshot cell(VarId x) const override { return core_.snapshot(x); }

 private:
  EngineCore core_;
};

}  // namespace
}  // namespace detail

std::unique_ptr<Engine> make_sva(const EngineOptions& opts) {
  return std::make_unique<detail::SvaEngine>(opts);
}

}  // namespace optsva
