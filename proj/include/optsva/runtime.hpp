// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Execution substrate shared by the engines: condition waits, notification,
// and condition-triggered tasks ("async run P when C" / "join with P").
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "optsva/types.hpp"

namespace optsva {

struct Task;
using TaskRef = std::shared_ptr<Task>;

// A notification channel. Conditions registered on it read state guarded by
// `mu`; whoever changes that state calls Runtime::notify after unlocking.
struct Waitable {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<TaskRef> pending;  // tasks whose wake condition has not held yet
  std::string name;
};

struct Task {
  enum class State : std::uint8_t { waiting, ready, running, done, cancelled };

  virtual ~Task() = default;

  std::function<bool()> ready;  // wake condition, evaluated under home->mu
  std::function<void()> body;
  Waitable* home = nullptr;
  std::atomic<State> state{State::waiting};
  Waitable finished;  // signalled when state becomes done or cancelled
  std::uint64_t id = 0;

  bool terminal() const {
    const State s = state.load();
    return s == State::done || s == State::cancelled;
  }
};

class Runtime {
 public:
  virtual ~Runtime() = default;

  // Runs every function on its own (real or simulated) thread and returns
  // once all of them have finished. Rethrows the first exception raised.
  virtual void run_threads(std::vector<std::function<void()>> fns) = 0;

  // Blocks until `ready` holds. Must be called with no engine locks held;
  // `ready` is evaluated with w.mu held.
  virtual void wait_until(Waitable& w, const std::function<bool()>& ready) = 0;

  // Re-evaluates waiters and tasks registered on w. Call after unlocking w.mu.
  virtual void notify(Waitable& w) = 0;

  // Schedules `body` to run once, after `ready` first holds.
  virtual TaskRef spawn_when(Waitable& w, std::function<bool()> ready,
                             std::function<void()> body) = 0;

  // Returns true if the body is guaranteed never to run.
  virtual bool cancel(const TaskRef& t) = 0;

  // Blocks until the task is done or cancelled. Idempotent.
  virtual void join(const TaskRef& t) = 0;

  // Scheduling point with no semantic effect.
  virtual void yield() {}

  // Accounts `ticks` of simulated computation to the calling thread.
  virtual void work(Tick ticks) { (void)ticks; }

  // Current time of the calling thread (virtual ticks or nanoseconds).
  virtual Tick now() const = 0;

  // Number of tasks that were still waiting when the runtime shut down.
  virtual std::size_t orphaned_tasks() const { return 0; }
};

}  // namespace optsva
