// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/threaded_runtime.hpp"

#include <algorithm>
#include <stdexcept>

namespace optsva {

ThreadedRuntime::ThreadedRuntime(std::size_t workers, std::chrono::milliseconds watchdog)
    : watchdog_(watchdog), epoch_(std::chrono::steady_clock::now()) {
  workers = std::max<std::size_t>(workers, 1);
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadedRuntime::~ThreadedRuntime() {
  {
    std::lock_guard<std::mutex> g(qmu_);
    stopping_ = true;
  }
  qcv_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadedRuntime::run_threads(std::vector<std::function<void()>> fns) {
  std::vector<std::exception_ptr> errors(fns.size());
  std::vector<std::thread> threads;
  threads.reserve(fns.size());
  for (std::size_t i = 0; i < fns.size(); ++i) {
    threads.emplace_back([&, i] {
      try {
        fns[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::lock_guard<std::mutex> g(err_mu_);
  if (task_error_) std::rethrow_exception(std::exchange(task_error_, nullptr));
}

void ThreadedRuntime::wait_until(Waitable& w, const std::function<bool()>& ready) {
  std::unique_lock<std::mutex> lk(w.mu);
  if (!w.cv.wait_for(lk, watchdog_, ready))
    throw std::runtime_error("watchdog: thread blocked on '" + w.name + "'");
}

void ThreadedRuntime::notify(Waitable& w) {
  std::vector<TaskRef> fire;
  {
    std::lock_guard<std::mutex> g(w.mu);
    auto it = std::stable_partition(w.pending.begin(), w.pending.end(),
                                    [](const TaskRef& t) { return !t->ready(); });
    fire.assign(std::make_move_iterator(it), std::make_move_iterator(w.pending.end()));
    w.pending.erase(it, w.pending.end());
    for (auto& t : fire) t->state = Task::State::ready;
  }
  w.cv.notify_all();
  for (auto& t : fire) dispatch(std::move(t));
}

TaskRef ThreadedRuntime::spawn_when(Waitable& w, std::function<bool()> ready,
                                    std::function<void()> body) {
  auto t = std::make_shared<Task>();
  t->ready = std::move(ready);
  t->body = std::move(body);
  t->home = &w;
  t->id = next_task_++;
  t->finished.name = "task " + std::to_string(t->id);
  bool now_ready;
  {
    std::lock_guard<std::mutex> g(w.mu);
    now_ready = t->ready();
    if (now_ready)
      t->state = Task::State::ready;
    else
      w.pending.push_back(t);
  }
  if (now_ready) dispatch(t);
  return t;
}

bool ThreadedRuntime::cancel(const TaskRef& t) {
  bool cancelled = false;
  {
    std::lock_guard<std::mutex> g(t->home->mu);
    if (t->state == Task::State::waiting) {
      auto& p = t->home->pending;
      p.erase(std::remove(p.begin(), p.end(), t), p.end());
      std::lock_guard<std::mutex> f(t->finished.mu);
      t->state = Task::State::cancelled;
      cancelled = true;
    }
  }
  if (cancelled) t->finished.cv.notify_all();
  return cancelled || t->state == Task::State::cancelled;
}

void ThreadedRuntime::join(const TaskRef& t) {
  wait_until(t->finished, [&] { return t->terminal(); });
}

Tick ThreadedRuntime::now() const {
  return static_cast<Tick>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                               std::chrono::steady_clock::now() - epoch_)
                               .count());
}

void ThreadedRuntime::dispatch(TaskRef t) {
  {
    std::lock_guard<std::mutex> g(qmu_);
    queue_.push_back(std::move(t));
  }
  qcv_.notify_one();
}

void ThreadedRuntime::worker_loop() {
  for (;;) {
    TaskRef t;
    {
      std::unique_lock<std::mutex> lk(qmu_);
      qcv_.wait(lk, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      t = std::move(queue_.front());
      queue_.pop_front();
    }
    t->state = Task::State::running;
    try {
      t->body();
    } catch (...) {
      std::lock_guard<std::mutex> g(err_mu_);
      if (!task_error_) task_error_ = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> g(t->finished.mu);
      t->state = Task::State::done;
    }
    t->finished.cv.notify_all();
  }
}

}  // namespace optsva
