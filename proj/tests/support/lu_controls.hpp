// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Hand-built last-use opacity controls: a reader sees a write of a
// transaction that later aborts.
#pragma once

#include <vector>

#include "optsva/program.hpp"
#include "support/trace_builder.hpp"

namespace optsva::testing {

inline ProgramModel lu_control_program(std::uint32_t wub1, ProgOp::Kind end2) {
  ProgramModel p;
  p.vars = 1;
  TxnProgram t1;
  t1.id = 1;
  t1.thread = 0;
  t1.aset = {{VarId{0}, 0, wub1}};
  t1.ops = {{ProgOp::Kind::write, VarId{0}, 1}, {ProgOp::Kind::abort, 0, 0}};
  TxnProgram t2;
  t2.id = 2;
  t2.thread = 1;
  t2.aset = {{VarId{0}, 1, 0}};
  t2.ops = {{ProgOp::Kind::read, VarId{0}, 0}, {end2, 0, 0}};
  p.txns = {t1, t2};
  return p;
}

// 1 writes x = 1 and lets 2 see it, 2 finishes, then 1 aborts. `reader_commits`
// selects whether 2's tryC returns C or A.
inline std::vector<Event> early_read_then_abort(std::uint32_t wub1, bool reader_commits) {
  TraceBuilder b;
  b.start(1, {{VarId{0}, 0, wub1}}).write(1, VarId{0}, 1).view(1, VarId{0}, 0).rset(1, VarId{0}, 1).release(1, VarId{0});
  b.start(2, {{VarId{0}, 1, 0}}).view(2, VarId{0}, 1).read(2, VarId{0}, 1).inv_tryc(2);
  if (reader_commits)
    b.committed(2);
  else
    b.commit_aborted(2);
  b.inv_trya(1).aset(1, VarId{0}, 0).aborted(1);
  return b;
}

}  // namespace optsva::testing
