// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include <atomic>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "optsva/sim_runtime.hpp"
#include "optsva/threaded_runtime.hpp"

using namespace optsva;

namespace {

// Three fibers that append their id twice, yielding in between.
std::vector<int> interleaving(SimOptions o) {
  SimRuntime rt(std::move(o));
  std::vector<int> seen;
  std::vector<std::function<void()>> fns;
  for (int i = 0; i < 3; ++i)
    fns.push_back([&, i] {
      seen.push_back(i);
      rt.yield();
      seen.push_back(i);
    });
  rt.run_threads(std::move(fns));
  return seen;
}

}  // namespace

TEST(SimRuntime, randomPolicyIsRepeatablePerSeed) {
  SimOptions o;
  o.seed = 42;
  EXPECT_EQ(interleaving(o), interleaving(o));
}

TEST(SimRuntime, deterministicPolicyRunsLowestIdFirst) {
  SimOptions o;
  o.policy = SimPolicy::deterministic;
  EXPECT_EQ(interleaving(o), (std::vector<int>{0, 0, 1, 1, 2, 2}));
}

TEST(SimRuntime, virtualTimeRunsSmallestClockFirst) {
  SimOptions o;
  o.policy = SimPolicy::virtual_time;
  SimRuntime rt(o);
  std::vector<int> seen;
  rt.run_threads({[&] {
                    rt.work(300);
                    seen.push_back(0);
                  },
                  [&] {
                    rt.work(100);
                    seen.push_back(1);
                  }});
  EXPECT_EQ(seen, (std::vector<int>{1, 0}));
  EXPECT_EQ(rt.makespan(), 300u);
}

TEST(SimRuntime, waiterInheritsNotifierClock) {
  SimOptions o;
  o.policy = SimPolicy::virtual_time;
  SimRuntime rt(o);
  Waitable w;
  bool flag = false;
  Tick woke = 0;
  rt.run_threads({[&] {
                    rt.wait_until(w, [&] { return flag; });
                    woke = rt.now();
                  },
                  [&] {
                    rt.work(250);
                    {
                      std::lock_guard<std::mutex> g(w.mu);
                      flag = true;
                    }
                    rt.notify(w);
                  }});
  EXPECT_EQ(woke, 250u);
}

TEST(SimRuntime, detectsDeadlock) {
  SimOptions o;
  o.policy = SimPolicy::deterministic;
  SimRuntime rt(o);
  Waitable w;
  w.name = "never";
  EXPECT_THROW(rt.run_threads({[&] { rt.wait_until(w, [] { return false; }); }}), DeadlockError);
}

TEST(SimRuntime, tasksRunWhenConditionHolds) {
  SimOptions o;
  o.policy = SimPolicy::deterministic;
  SimRuntime rt(o);
  Waitable w;
  int x = 0;
  int ran_with = -1;
  rt.run_threads({[&] {
    auto t = rt.spawn_when(w, [&] { return x == 2; }, [&] { ran_with = x; });
    for (int i = 0; i < 2; ++i) {
      {
        std::lock_guard<std::mutex> g(w.mu);
        ++x;
      }
      rt.notify(w);
    }
    rt.join(t);
  }});
  EXPECT_EQ(ran_with, 2);
}

TEST(SimRuntime, cancelledTaskNeverRuns) {
  SimOptions o;
  o.policy = SimPolicy::deterministic;
  SimRuntime rt(o);
  Waitable w;
  bool ran = false;
  rt.run_threads({[&] {
    auto t = rt.spawn_when(w, [] { return false; }, [&] { ran = true; });
    EXPECT_TRUE(rt.cancel(t));
    rt.join(t);
  }});
  EXPECT_FALSE(ran);
  EXPECT_EQ(rt.orphaned_tasks(), 0u);
}

TEST(SimRuntime, controlledPolicyNeedsChooser) {
  SimOptions o;
  o.policy = SimPolicy::controlled;
  EXPECT_THROW(SimRuntime{o}, ConfigError);
}

TEST(ExploreSchedules, countsEveryInterleaving) {
  // Two fibers with one yield each have C(4, 2) = 6 interleavings of their
  // four steps.
  std::set<std::vector<int>> distinct;
  auto st = explore_schedules([&](Chooser ch) {
    SimOptions o;
    o.policy = SimPolicy::controlled;
    o.chooser = std::move(ch);
    SimRuntime rt(o);
    std::vector<int> seen;
    std::vector<std::function<void()>> fns;
    for (int i = 0; i < 2; ++i)
      fns.push_back([&, i] {
        seen.push_back(i);
        rt.yield();
        seen.push_back(i);
      });
    rt.run_threads(std::move(fns));
    distinct.insert(seen);
  });
  EXPECT_TRUE(st.complete);
  EXPECT_EQ(st.schedules, 6u);
  EXPECT_EQ(distinct.size(), 6u);
}

TEST(ExploreSchedules, preemptionBoundLimitsSchedules) {
  auto count = [](std::size_t bound) {
    return explore_schedules(
               [&](Chooser ch) {
                 SimOptions o;
                 o.policy = SimPolicy::controlled;
                 o.chooser = std::move(ch);
                 SimRuntime rt(o);
                 std::vector<std::function<void()>> fns;
                 for (int i = 0; i < 2; ++i)
                   fns.push_back([&] {
                     rt.yield();
                     rt.yield();
                   });
                 rt.run_threads(std::move(fns));
               },
               ExploreLimits{SIZE_MAX, bound})
        .schedules;
  };
  // Without preemptions only the choice of the first fiber remains.
  EXPECT_EQ(count(0), 2u);
  EXPECT_LT(count(1), count(SIZE_MAX));
  EXPECT_EQ(count(SIZE_MAX), 20u);  // C(6, 3)
}

TEST(ExploreSchedules, stopsAtScheduleCap) {
  auto st = explore_schedules(
      [&](Chooser ch) {
        SimOptions o;
        o.policy = SimPolicy::controlled;
        o.chooser = std::move(ch);
        SimRuntime rt(o);
        rt.run_threads({[&] { rt.yield(); }, [&] { rt.yield(); }});
      },
      ExploreLimits{3, SIZE_MAX});
  EXPECT_FALSE(st.complete);
  EXPECT_EQ(st.schedules, 3u);
}

TEST(ThreadedRuntime, runsThreadsAndTasks) {
  ThreadedRuntime rt(2);
  Waitable w;
  std::atomic<int> done{0};
  int x = 0;
  rt.run_threads({[&] {
                    auto t = rt.spawn_when(w, [&] { return x == 1; }, [&] { ++done; });
                    rt.join(t);
                  },
                  [&] {
                    {
                      std::lock_guard<std::mutex> g(w.mu);
                      x = 1;
                    }
                    rt.notify(w);
                  }});
  EXPECT_EQ(done.load(), 1);
}
