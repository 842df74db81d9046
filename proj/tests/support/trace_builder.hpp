// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Fluent construction of hand-written traces for checker tests.
#pragma once

#include <vector>

#include "optsva/trace.hpp"

namespace optsva::testing {

class TraceBuilder {
 public:
  TraceBuilder& start(TxnId t, std::vector<Access> aset) {
    Event e = make(t, EventKind::inv_start);
    e.proc = static_cast<std::uint32_t>(t);
    e.aset = std::move(aset);
    push(e);
    return resp(t, EventKind::resp_start, RespCode::ok);
  }
  TraceBuilder& view(TxnId t, VarId x, Value v) { return mem(t, EventKind::view, x, v); }
  TraceBuilder& rset(TxnId t, VarId x, Value v) { return mem(t, EventKind::rupdate, x, v); }
  TraceBuilder& aset(TxnId t, VarId x, Value v) { return mem(t, EventKind::aupdate, x, v); }
  TraceBuilder& release(TxnId t, VarId x) { return marker(t, EventKind::release, x); }
  TraceBuilder& complete(TxnId t, VarId x) { return marker(t, EventKind::complete, x); }

  TraceBuilder& inv_read(TxnId t, VarId x) { return marker(t, EventKind::inv_read, x); }
  TraceBuilder& resp_read(TxnId t, VarId x, Value v) {
    Event e = make(t, EventKind::resp_read);
    e.var = x;
    e.value = v;
    e.outcome = RespCode::ok;
    push(e);
    return *this;
  }
  TraceBuilder& read(TxnId t, VarId x, Value v) { return inv_read(t, x).resp_read(t, x, v); }

  TraceBuilder& inv_write(TxnId t, VarId x, Value v) {
    Event e = make(t, EventKind::inv_write);
    e.var = x;
    e.value = v;
    push(e);
    return *this;
  }
  TraceBuilder& resp_write(TxnId t) { return resp(t, EventKind::resp_write, RespCode::ok); }
  TraceBuilder& write(TxnId t, VarId x, Value v) { return inv_write(t, x, v).resp_write(t); }

  TraceBuilder& inv_tryc(TxnId t) { return push(make(t, EventKind::inv_tryc)); }
  TraceBuilder& committed(TxnId t) { return resp(t, EventKind::resp_tryc, RespCode::committed); }
  TraceBuilder& commit_aborted(TxnId t) { return resp(t, EventKind::resp_tryc, RespCode::aborted); }
  TraceBuilder& inv_trya(TxnId t) { return push(make(t, EventKind::inv_trya)); }
  TraceBuilder& aborted(TxnId t) { return resp(t, EventKind::resp_trya, RespCode::aborted); }
  TraceBuilder& commit(TxnId t) { return inv_tryc(t).committed(t); }
  TraceBuilder& abort(TxnId t) { return inv_trya(t).aborted(t); }

  TraceBuilder& push(Event e) {
    e.seq = events_.size();
    events_.push_back(std::move(e));
    return *this;
  }

  const std::vector<Event>& events() const { return events_; }
  operator std::vector<Event>() const { return events_; }  // NOLINT

 private:
  static Event make(TxnId t, EventKind k) {
    Event e;
    e.txn = t;
    e.kind = k;
    return e;
  }
  TraceBuilder& resp(TxnId t, EventKind k, RespCode c) {
    Event e = make(t, k);
    e.outcome = c;
    return push(e);
  }
  TraceBuilder& mem(TxnId t, EventKind k, VarId x, Value v) {
    Event e = make(t, k);
    e.var = x;
    e.value = v;
    return push(e);
  }
  TraceBuilder& marker(TxnId t, EventKind k, VarId x) {
    Event e = make(t, k);
    e.var = x;
    return push(e);
  }

  std::vector<Event> events_;
};

}  // namespace optsva::testing
