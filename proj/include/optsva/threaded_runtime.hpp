// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#pragma once

#include <chrono>
#include <deque>
#include <exception>
#include <thread>

#include "optsva/runtime.hpp"

namespace optsva {

// Real OS threads. Task bodies run on a fixed worker pool; bodies never block
// on conditions, so the pool cannot starve.
class ThreadedRuntime final : public Runtime {
 public:
  explicit ThreadedRuntime(std::size_t workers = 4,
                           std::chrono::milliseconds watchdog = std::chrono::seconds(60));
  ~ThreadedRuntime() override;

  ThreadedRuntime(const ThreadedRuntime&) = delete;
  ThreadedRuntime& operator=(const ThreadedRuntime&) = delete;

  void run_threads(std::vector<std::function<void()>> fns) override;
  void wait_until(Waitable& w, const std::function<bool()>& ready) override;
  void notify(Waitable& w) override;
  TaskRef spawn_when(Waitable& w, std::function<bool()> ready,
                     std::function<void()> body) override;
  bool cancel(const TaskRef& t) override;
  void join(const TaskRef& t) override;
  Tick now() const override;

 private:
  void dispatch(TaskRef t);
  void worker_loop();

  std::chrono::milliseconds watchdog_;
  std::chrono::steady_clock::time_point epoch_;
  std::mutex qmu_;
  std::condition_variable qcv_;
  std::deque<TaskRef> queue_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
  std::atomic<std::uint64_t> next_task_{1};
  std::mutex err_mu_;
  std::exception_ptr task_error_;
};

}  // namespace optsva
