// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Deterministic single-OS-thread runtime. Simulated threads and tasks are
// fibers; a policy decides which runnable fiber executes at each scheduling
// point. Used for reproducible stress runs, systematic schedule exploration,
// figure replays and virtual-time benchmarking.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "optsva/runtime.hpp"

namespace optsva {

enum class SimPolicy : std::uint8_t {
  random,         // uniform choice among runnable fibers
  deterministic,  // runnable tasks first, then lowest fiber id
  virtual_time,   // discrete-event: smallest clock first, ties as deterministic
  controlled,     // delegated to a chooser callback
};

class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// For SimPolicy::controlled: given the number of runnable fibers n (> 1) and
// the index of the fiber that ran last (n if it cannot continue), returns the
// index of the one to run. Fibers are ordered by id.
using Chooser = std::function<std::size_t(std::size_t n, std::size_t last)>;

struct SimOptions {
  SimPolicy policy = SimPolicy::random;
  std::uint64_t seed = 0;
  Chooser chooser;
};

class SimRuntime final : public Runtime {
 public:
  explicit SimRuntime(SimOptions opts = {});
  ~SimRuntime() override;

  SimRuntime(const SimRuntime&) = delete;
  SimRuntime& operator=(const SimRuntime&) = delete;

  void run_threads(std::vector<std::function<void()>> fns) override;
  void wait_until(Waitable& w, const std::function<bool()>& ready) override;
  void notify(Waitable& w) override;
  TaskRef spawn_when(Waitable& w, std::function<bool()> ready,
                     std::function<void()> body) override;
  bool cancel(const TaskRef& t) override;
  void join(const TaskRef& t) override;
  void yield() override;
  void work(Tick ticks) override;
  Tick now() const override;
  std::size_t orphaned_tasks() const override { return orphaned_; }

  // Largest clock reached by any fiber of the last run.
  Tick makespan() const { return makespan_; }
  // Number of scheduling decisions taken with more than one candidate.
  std::size_t choice_points() const { return choice_points_; }

 private:
  struct Fiber;
  struct SimTask;

  Fiber& make_fiber(std::function<void()> fn, Tick clock, std::shared_ptr<SimTask> task);
  void make_task_runnable(const std::shared_ptr<SimTask>& t, Tick clock);
  void suspend();
  Fiber* pick();
  [[noreturn]] void report_stall();
  void teardown();

  SimOptions opts_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Fiber>> fibers_;
  Fiber* current_ = nullptr;
  Fiber* last_ = nullptr;
  std::uint64_t next_id_ = 0;
  std::size_t orphaned_ = 0;
  Tick makespan_ = 0;
  std::size_t choice_points_ = 0;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Stateless depth-first enumeration of the schedules of a deterministic
// program under SimPolicy::controlled. `run_once` must build a fresh
// SimRuntime with the supplied chooser and execute the whole program.
//
// A preemption is a choice of some other fiber while the last one could have
// continued. With a finite `max_preemptions` only schedules with at most that
// many preemptions are enumerated, all of them.
struct ExplorationStats {
  std::size_t schedules = 0;
  bool complete = false;  // false if max_schedules stopped the search
};

struct ExploreLimits {
  std::size_t max_schedules = SIZE_MAX;
  std::size_t max_preemptions = SIZE_MAX;
};

ExplorationStats explore_schedules(const std::function<void(Chooser)>& run_once,
                                   ExploreLimits limits = {});

}  // namespace optsva
