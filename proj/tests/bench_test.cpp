// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "optsva/figures.hpp"
#include "optsva/harmony.hpp"
#include "optsva/replay.hpp"
#include "optsva/report.hpp"
#include "optsva/runner.hpp"
#include "optsva/workload.hpp"
#include "support/serial_oracle.hpp"

using namespace optsva;

namespace {

const std::filesystem::path kFigures = std::filesystem::path(OPTSVA_SOURCE_DIR) / "scripts" / "figures";

std::string jsonl(const std::vector<Event>& ev) {
  std::ostringstream os;
  write_jsonl(os, ev);
  return os.str();
}

}  // namespace

TEST(Replay, parsesDeclarationsAndImplicitStarts) {
  auto s = parse_script(
      "# comment\n"
      "thread a: start x:r1:w2 y:w1\n"
      "thread a: commit\n"
      "thread b: read y   # implicit start\n"
      "thread b: write y 3\n"
      "thread b: commit\n");
  EXPECT_EQ(s.threads, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.vars, (std::vector<std::string>{"x", "y"}));
  ASSERT_EQ(s.ops[1].size(), 4u);
  EXPECT_EQ(s.ops[1][0].kind, ScriptOp::Kind::start);
  EXPECT_EQ(s.ops[1][0].aset, (std::vector<Access>{{1, 1, 1}}));
  EXPECT_EQ(s.ops[0][0].aset, (std::vector<Access>{{0, 1, 2}, {1, 0, 1}}));
}

TEST(Replay, parseErrorsNameTheLine) {
  auto message = [](const char* text) {
    try {
      parse_script(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_EQ(message("thread a: read x\nthread a: fly\n").rfind("line 2:", 0), 0u);
  EXPECT_EQ(message("read x\n").rfind("line 1:", 0), 0u);
  EXPECT_EQ(message("thread a: write x one\n").rfind("line 1:", 0), 0u);
  EXPECT_EQ(message("thread a: commit\n").rfind("line 1:", 0), 0u);
  EXPECT_EQ(message("thread a: read x\n").rfind("line 1:", 0), 0u);  // never ends
  EXPECT_EQ(message("thread a: start x:q1\nthread a: commit\n").rfind("line 1:", 0), 0u);
}

TEST(Replay, isDeterministic) {
  for (const auto& f : figure_checks()) {
    auto s = load_script((kFigures / (f.name + ".txt")).string());
    EXPECT_EQ(jsonl(replay(s).trace), jsonl(replay(s).trace)) << f.name;
  }
}

TEST(Replay, barriersOrderThreads) {
  auto s = parse_script(
      "thread a: work 500\n"
      "thread a: barrier go\n"
      "thread a: write x 1\n"
      "thread a: commit\n"
      "thread b: barrier go\n"
      "thread b: read x\n"
      "thread b: commit\n");
  auto r = replay(s);
  // b starts at tick 0 but its read waits for x; a reaches the barrier at 500.
  EXPECT_EQ(r.txn("a").outcome, Outcome::committed);
  EXPECT_EQ(r.txn("b").outcome, Outcome::committed);
  EXPECT_GE(r.makespan, 600u);
}

TEST(Replay, unfinishableScriptDeadlocks) {
  auto s = parse_script(
      "thread a: barrier one\n"
      "thread a: barrier two\n"
      "thread b: barrier two\n"
      "thread b: barrier one\n");
  EXPECT_THROW(replay(s), DeadlockError);
}

class FigureTest : public ::testing::TestWithParam<std::size_t> {};

TEST_P(FigureTest, scenarioBehavesAsDrawn) {
  const FigureCheck& f = figure_checks().at(GetParam());
  auto r = replay(load_script((kFigures / (f.name + ".txt")).string()));
  auto failure = f.check(r);
  EXPECT_FALSE(failure) << f.name << ": " << f.claim << "\n" << failure.value_or("");
  auto h = check_harmony(r.trace);
  EXPECT_TRUE(h.ok()) << h.to_json();
}

INSTANTIATE_TEST_SUITE_P(Figures, FigureTest, ::testing::Range<std::size_t>(0, 7),
                         [](const auto& info) {
                           std::string n = figure_checks().at(info.param).name;
                           for (char& c : n)
                             if (c == '-') c = '_';
                           return n;
                         });

TEST(Figures, sevenScenarios) { EXPECT_EQ(figure_checks().size(), 7u); }

TEST(Report, csvRoundTrip) {
  RunRecord r;
  r.config = "short-5:1-high";
  r.engine = "optsva";
  r.seed = 3;
  r.rw = "5:1";
  r.makespan = 1234;
  r.throughput = 1.5;
  std::stringstream ss;
  write_csv(ss, {r, r});
  auto back = read_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].config, r.config);
  EXPECT_EQ(back[0].makespan, 1234u);
  EXPECT_DOUBLE_EQ(back[0].throughput, 1.5);
  EXPECT_EQ(to_csv_row(back[1]), to_csv_row(r));
}

TEST(Report, gainPerConfiguration) {
  RunRecord sva;
  sva.config = "c";
  sva.engine = "sva";
  sva.makespan = 200;
  RunRecord opt = sva;
  opt.engine = "optsva";
  opt.makespan = 150;
  RunRecord lonely = sva;
  lonely.config = "only-sva";
  auto rows = compare({sva, opt, lonely});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].gain_pct, 25.0);
  EXPECT_NE(comparison_csv(rows).find("25"), std::string::npos);
  EXPECT_NE(comparison_svg(rows).find("<svg"), std::string::npos);
}

TEST(Report, emptyInputGivesEmptyReport) {
  std::stringstream ss(csv_header() + "\n");
  EXPECT_TRUE(compare(read_csv(ss)).empty());
  const auto dir = std::filesystem::temp_directory_path() / "optsva-empty-report";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_report(dir.string(), {});
  for (const char* f : {"report.csv", "report.json", "report.svg"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::filesystem::remove_all(dir);
}

// Same program and start order: OptSVA never finishes later than SVA.
TEST(Bench, optsvaDominatesSva) {
  const auto cs = bench_configs();
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto p = generate(workload_for(cs[seed % cs.size()], 8, 10, seed));
    RunOptions o;
    o.ordered_starts = true;
    auto opt = run_program(p, o);
    o.engine = EngineKind::sva;
    auto sva = run_program(p, o);
    EXPECT_LE(opt.metrics.makespan, sva.metrics.makespan) << "seed " << seed;
    for (const auto& [k, t] : opt.metrics.release) EXPECT_LE(t, sva.metrics.release.at(k));
    for (const auto& [k, t] : opt.metrics.completion) EXPECT_LE(t, sva.metrics.completion.at(k));
  }
}

TEST(Bench, sweepProducesBothEngines) {
  SweepSpec s;
  s.seeds = 2;
  auto rows = compare(sweep(s));
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.sva_runs, 2u);
    EXPECT_EQ(r.optsva_runs, 2u);
    EXPECT_GT(r.gain_pct, 0.0) << r.config;
  }
}

TEST(SerialOracle, serialRunReadsAndFinalValues) {
  auto ps = optsva::testing::small_programs(2, 1, 1);
  ASSERT_EQ(ps.size(), 4u);  // {r, w} x {r, w}
  // 0 writes x = 1, 1 reads x.
  const ProgramModel* wr = nullptr;
  for (const auto& p : ps)
    if (p.txns[0].ops[0].kind == ProgOp::Kind::write && p.txns[1].ops[0].kind == ProgOp::Kind::read) wr = &p;
  ASSERT_TRUE(wr);
  auto forward = optsva::testing::run_serially(*wr, {0, 1});
  EXPECT_EQ(forward.reads[1], (std::vector<Value>{1}));
  EXPECT_EQ(forward.final_values, (std::vector<Value>{1}));
  auto backward = optsva::testing::run_serially(*wr, {1, 0});
  EXPECT_EQ(backward.reads[1], (std::vector<Value>{0}));
}

TEST(SerialOracle, twoTransactionsOneOperationEverySchedule) {
  auto ps = optsva::testing::small_programs(2, 2, 1);
  for (auto kind : {EngineKind::optsva, EngineKind::sva}) {
    auto rep = optsva::testing::check_serializable(ps, kind, ExploreLimits{SIZE_MAX, 1});
    EXPECT_TRUE(rep.complete);
    EXPECT_FALSE(rep.failure) << rep.failure.value_or("");
    EXPECT_EQ(rep.programs, 16u);
  }
}
