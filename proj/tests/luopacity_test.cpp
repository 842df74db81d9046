// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include "optsva/luopacity.hpp"
#include "optsva/runner.hpp"
#include "optsva/workload.hpp"
#include "support/lu_controls.hpp"

using namespace optsva;
using namespace optsva::testing;

namespace {
constexpr VarId kX = 0;
}  // namespace

TEST(LuOpacity, readingAClosingWriteOfALaterAbortedWriterIsAllowed) {
  auto tr = early_read_then_abort(1, false);
  auto r = check_lu_opaque(to_history(tr), lu_control_program(1, ProgOp::Kind::commit), tr);
  EXPECT_TRUE(r.ok()) << r.to_json();
}

// Negative control: the reader saw a write its writer had not finished with.
TEST(LuOpacity, readingANonClosingWriteIsRejected) {
  auto tr = early_read_then_abort(2, false);
  auto r = check_lu_opaque(to_history(tr), lu_control_program(2, ProgOp::Kind::commit), tr);
  EXPECT_EQ(r.verdict, LuVerdict::not_opaque) << r.to_json();
  EXPECT_TRUE(r.failing_prefix);
}

TEST(LuOpacity, committedReaderOfAbortedWriterIsRejected) {
  auto tr = early_read_then_abort(1, true);
  auto r = check_lu_opaque(to_history(tr), lu_control_program(1, ProgOp::Kind::commit), tr);
  EXPECT_EQ(r.verdict, LuVerdict::not_opaque) << r.to_json();
}

TEST(LuOpacity, boundExceeded) {
  TraceBuilder b;
  for (TxnId t = 1; t <= 3; ++t) b.start(t, {{kX, 1, 0}}).view(t, kX, 0).read(t, kX, 0).commit(t);
  ProgramModel p;
  p.vars = 1;
  for (TxnId t = 1; t <= 3; ++t) {
    TxnProgram tp;
    tp.id = t;
    tp.thread = static_cast<std::uint32_t>(t - 1);
    tp.aset = {{kX, 1, 0}};
    tp.ops = {{ProgOp::Kind::read, kX, 0}, {ProgOp::Kind::commit, 0, 0}};
    p.txns.push_back(tp);
  }
  LuOptions o;
  o.max_txns = 2;
  std::vector<Event> tr = b;
  EXPECT_EQ(check_lu_opaque(to_history(tr), p, tr, o).verdict, LuVerdict::bound_exceeded);
  o.max_txns = 3;
  EXPECT_TRUE(check_lu_opaque(to_history(tr), p, tr, o).ok());
}

TEST(LuOpacity, legality) {
  // Sequential: 1 writes 5 and commits, 2 reads 5.
  History good = to_history(TraceBuilder().start(1, {{kX, 0, 1}}).write(1, kX, 5).commit(1).start(2, {{kX, 1, 0}}).read(2, kX, 5).commit(2));
  EXPECT_TRUE(legal(good));
  History bad = to_history(TraceBuilder().start(1, {{kX, 0, 1}}).write(1, kX, 5).commit(1).start(2, {{kX, 1, 0}}).read(2, kX, 4).commit(2));
  EXPECT_FALSE(legal(bad));
  // Every write in the input counts; callers filter visibility first.
  History aborted = to_history(TraceBuilder().start(1, {{kX, 0, 1}}).write(1, kX, 5).abort(1).start(2, {{kX, 1, 0}}).read(2, kX, 0).commit(2));
  EXPECT_FALSE(legal(aborted));
}

TEST(LuOpacity, buildSeqFollowsRealTimeOrder) {
  std::vector<Event> tr = TraceBuilder()
                              .start(2, {{kX, 1, 0}})
                              .view(2, kX, 0)
                              .read(2, kX, 0)
                              .commit(2)
                              .start(1, {{kX, 1, 0}})
                              .view(1, kX, 0)
                              .read(1, kX, 0)
                              .commit(1);
  auto s = build_seq(to_history(tr), tr);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->order, (std::vector<TxnId>{2, 1}));
}

TEST(LuOpacity, engineStressTracesAreOpaque) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    SmallSpec sp;
    sp.seed = seed;
    auto p = generate_small(sp);
    for (auto kind : {EngineKind::optsva, EngineKind::sva}) {
      RunOptions o;
      o.engine = kind;
      o.mode = RunMode::sim_random;
      o.seed = seed;
      auto r = run_program(p, o);
      auto res = check_lu_opaque(to_history(r.trace), r.program, r.trace);
      EXPECT_TRUE(res.ok()) << to_string(kind) << " seed " << seed << "\n" << res.to_json();
      ++checked;
    }
  }
  EXPECT_EQ(checked, 600u);
}

// Enumeration without the construction shortcut agrees on engine traces.
TEST(LuOpacity, constructionAgreesWithEnumeration) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    SmallSpec sp;
    sp.seed = seed;
    RunOptions o;
    o.mode = RunMode::sim_random;
    o.seed = seed;
    auto r = run_program(generate_small(sp), o);
    auto h = to_history(r.trace);
    LuOptions enumerate;
    enumerate.construction = false;
    EXPECT_EQ(check_lu_opaque(h, r.program, r.trace).ok(),
              check_lu_opaque(h, r.program, r.trace, enumerate).ok())
        << "seed " << seed;
  }
}
