// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/sim_runtime.hpp"

#include <algorithm>
#include <exception>
#include <sstream>

#include <boost/context/fiber.hpp>
#include <boost/context/pooled_fixedsize_stack.hpp>

namespace optsva {

namespace ctx = boost::context;

namespace {
constexpr std::size_t kStackSize = 128 * 1024;

ctx::pooled_fixedsize_stack& stack_pool() {
  static thread_local ctx::pooled_fixedsize_stack pool(kStackSize);
  return pool;
}
}  // namespace

struct SimRuntime::SimTask : Task {
  Tick spawn_clock = 0;
  Fiber* fiber = nullptr;
};

struct SimRuntime::Fiber {
  enum class St : std::uint8_t { runnable, blocked, done };

  std::uint64_t id = 0;
  std::function<void()> fn;
  std::shared_ptr<SimTask> task;
  ctx::fiber context;
  bool started = false;
  St st = St::runnable;
  Waitable* wait_on = nullptr;
  const std::function<bool()>* pred = nullptr;
  Tick clock = 0;
  std::exception_ptr error;
};

struct SimRuntime::Impl {
  ctx::fiber sched;
  bool running = false;
  bool tearing_down = false;
  std::size_t waiting_tasks = 0;
};

SimRuntime::SimRuntime(SimOptions opts)
    : opts_(std::move(opts)), rng_(opts_.seed), impl_(std::make_unique<Impl>()) {
  if (opts_.policy == SimPolicy::controlled && !opts_.chooser)
    throw ConfigError("controlled policy needs a chooser");
}

SimRuntime::~SimRuntime() { teardown(); }

SimRuntime::Fiber& SimRuntime::make_fiber(std::function<void()> fn, Tick clock,
                                          std::shared_ptr<SimTask> task) {
  auto f = std::make_unique<Fiber>();
  f->id = next_id_++;
  f->fn = std::move(fn);
  f->task = std::move(task);
  f->clock = clock;
  fibers_.push_back(std::move(f));
  return *fibers_.back();
}

void SimRuntime::make_task_runnable(const std::shared_ptr<SimTask>& t, Tick clock) {
  SimTask* raw = t.get();
  Fiber& f = make_fiber(
      [this, raw] {
        raw->state = Task::State::running;
        raw->body();
        raw->state = Task::State::done;
        notify(raw->finished);
      },
      clock, t);
  t->fiber = &f;
}

void SimRuntime::suspend() {
  if (impl_->tearing_down) return;
  impl_->sched = std::move(impl_->sched).resume();
}

SimRuntime::Fiber* SimRuntime::pick() {
  std::vector<Fiber*> cand;
  for (auto& f : fibers_)
    if (f->st == Fiber::St::runnable) cand.push_back(f.get());
  if (cand.size() <= 1) return cand.empty() ? nullptr : cand.front();
  ++choice_points_;
  auto task_first = [](const Fiber* a, const Fiber* b) {
    const bool ta = a->task != nullptr, tb = b->task != nullptr;
    if (ta != tb) return ta;
    return a->id < b->id;
  };
  switch (opts_.policy) {
    case SimPolicy::random:
      return cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng_)];
    case SimPolicy::deterministic:
      return *std::min_element(cand.begin(), cand.end(), task_first);
    case SimPolicy::virtual_time:
      return *std::min_element(cand.begin(), cand.end(), [&](const Fiber* a, const Fiber* b) {
        if (a->clock != b->clock) return a->clock < b->clock;
        return task_first(a, b);
      });
    case SimPolicy::controlled: {
      std::sort(cand.begin(), cand.end(),
                [](const Fiber* a, const Fiber* b) { return a->id < b->id; });
      const auto last = static_cast<std::size_t>(
          std::find(cand.begin(), cand.end(), last_) - cand.begin());
      const std::size_t i = opts_.chooser(cand.size(), last);
      if (i >= cand.size()) throw std::out_of_range("chooser returned an invalid index");
      return cand[i];
    }
  }
  return cand.front();
}

void SimRuntime::run_threads(std::vector<std::function<void()>> fns) {
  if (impl_->running) throw UsageError("run_threads is not reentrant");
  impl_->running = true;
  struct Reset {
    Impl* impl;
    ~Reset() { impl->running = false; }
  } reset{impl_.get()};

  for (auto& fn : fns) make_fiber(std::move(fn), 0, nullptr);
  for (;;) {
    Fiber* f = pick();
    if (!f) {
      if (fibers_.empty()) break;
      report_stall();
    }
    current_ = f;
    if (!f->started) {
      f->started = true;
      f->context = ctx::fiber(std::allocator_arg, stack_pool(), [this, f](ctx::fiber&& s) {
        impl_->sched = std::move(s);
        try {
          f->fn();
        } catch (const ctx::detail::forced_unwind&) {
          throw;
        } catch (...) {
          f->error = std::current_exception();
        }
        f->st = Fiber::St::done;
        return std::move(impl_->sched);
      });
    }
    f->context = std::move(f->context).resume();
    current_ = nullptr;
    last_ = f->st == Fiber::St::runnable ? f : nullptr;
    makespan_ = std::max(makespan_, f->clock);
    if (f->error) {
      auto e = f->error;
      teardown();
      std::rethrow_exception(e);
    }
    if (f->st == Fiber::St::done) {
      fibers_.erase(std::find_if(fibers_.begin(), fibers_.end(),
                                 [f](const auto& p) { return p.get() == f; }));
    }
  }
  orphaned_ = impl_->waiting_tasks;
}

void SimRuntime::report_stall() {
  std::ostringstream os;
  bool lost = false;
  for (auto& f : fibers_) {
    if (f->st != Fiber::St::blocked) continue;
    bool holds;
    {
      std::lock_guard<std::mutex> g(f->wait_on->mu);
      holds = (*f->pred)();
    }
    lost = lost || holds;
    os << "\n  " << (f->task ? "task" : "thread") << " fiber " << f->id << " blocked on '"
       << f->wait_on->name << "'" << (holds ? " (condition holds: lost wakeup)" : "");
  }
  const std::string msg = (lost ? "lost wakeup" : "deadlock") + os.str();
  teardown();
  throw DeadlockError(msg);
}

void SimRuntime::teardown() {
  impl_->tearing_down = true;
  // Destroying a suspended fiber unwinds its stack.
  while (!fibers_.empty()) fibers_.pop_back();
  impl_->tearing_down = false;
  current_ = nullptr;
  last_ = nullptr;
}

void SimRuntime::wait_until(Waitable& w, const std::function<bool()>& ready) {
  if (!current_) throw UsageError("wait_until outside a simulated thread");
  for (;;) {
    {
      std::lock_guard<std::mutex> g(w.mu);
      if (ready()) return;
    }
    if (impl_->tearing_down) return;
    current_->st = Fiber::St::blocked;
    current_->wait_on = &w;
    current_->pred = &ready;
    suspend();
  }
}

void SimRuntime::notify(Waitable& w) {
  const Tick c = now();
  for (auto& f : fibers_) {
    if (f->st != Fiber::St::blocked || f->wait_on != &w) continue;
    std::lock_guard<std::mutex> g(w.mu);
    if ((*f->pred)()) {
      f->st = Fiber::St::runnable;
      f->wait_on = nullptr;
      f->pred = nullptr;
      f->clock = std::max(f->clock, c);
    }
  }
  std::vector<TaskRef> fire;
  {
    std::lock_guard<std::mutex> g(w.mu);
    auto it = std::stable_partition(w.pending.begin(), w.pending.end(),
                                    [](const TaskRef& t) { return !t->ready(); });
    fire.assign(std::make_move_iterator(it), std::make_move_iterator(w.pending.end()));
    w.pending.erase(it, w.pending.end());
  }
  for (auto& t : fire) {
    auto st = std::static_pointer_cast<SimTask>(t);
    st->state = Task::State::ready;
    --impl_->waiting_tasks;
    make_task_runnable(st, std::max(st->spawn_clock, c));
  }
}

TaskRef SimRuntime::spawn_when(Waitable& w, std::function<bool()> ready,
                               std::function<void()> body) {
  auto t = std::make_shared<SimTask>();
  t->ready = std::move(ready);
  t->body = std::move(body);
  t->home = &w;
  t->id = next_id_;
  t->spawn_clock = now();
  t->finished.name = "task";
  bool now_ready;
  {
    std::lock_guard<std::mutex> g(w.mu);
    now_ready = t->ready();
    if (!now_ready) w.pending.push_back(t);
  }
  if (now_ready) {
    t->state = Task::State::ready;
    make_task_runnable(t, t->spawn_clock);
  } else {
    ++impl_->waiting_tasks;
  }
  return t;
}

bool SimRuntime::cancel(const TaskRef& t) {
  auto st = std::static_pointer_cast<SimTask>(t);
  switch (st->state.load()) {
    case Task::State::waiting: {
      {
        std::lock_guard<std::mutex> g(st->home->mu);
        auto& p = st->home->pending;
        p.erase(std::remove(p.begin(), p.end(), t), p.end());
      }
      --impl_->waiting_tasks;
      st->state = Task::State::cancelled;
      return true;
    }
    case Task::State::ready: {
      Fiber* f = st->fiber;
      if (f->started) return false;
      fibers_.erase(std::find_if(fibers_.begin(), fibers_.end(),
                                 [f](const auto& p) { return p.get() == f; }));
      st->fiber = nullptr;
      st->state = Task::State::cancelled;
      return true;
    }
    case Task::State::cancelled:
      return true;
    default:
      return false;
  }
}

void SimRuntime::join(const TaskRef& t) {
  wait_until(t->finished, [&] { return t->terminal(); });
}

void SimRuntime::yield() {
  if (!current_ || impl_->tearing_down) return;
  suspend();
}

void SimRuntime::work(Tick ticks) {
  if (!current_) return;
  current_->clock += ticks;
  yield();
}

Tick SimRuntime::now() const { return current_ ? current_->clock : 0; }

ExplorationStats explore_schedules(const std::function<void(Chooser)>& run_once,
                                   ExploreLimits limits) {
  // rank 0 continues the last fiber when it can; higher ranks take the other
  // fibers in id order.
  struct Choice {
    std::size_t rank, n, last, preemptions;  // preemptions taken before this choice
    std::size_t index() const {
      if (last >= n) return rank;
      if (rank == 0) return last;
      return rank <= last ? rank - 1 : rank;
    }
    bool preempts() const { return last < n && rank > 0; }
    std::size_t after() const { return preemptions + (preempts() ? 1 : 0); }
  };
  std::vector<Choice> path;
  ExplorationStats stats;
  for (;;) {
    std::size_t depth = 0;
    run_once([&](std::size_t n, std::size_t last) -> std::size_t {
      if (depth < path.size()) {
        const Choice& c = path[depth++];
        if (c.n != n || c.last != last)
          throw std::logic_error("schedule exploration: program is not deterministic");
        return c.index();
      }
      const std::size_t pre = path.empty() ? 0 : path.back().after();
      path.push_back({0, n, last, pre});
      ++depth;
      return path.back().index();
    });
    ++stats.schedules;
    path.resize(depth);
    auto exhausted = [&](const Choice& c) {
      if (c.rank + 1 == c.n) return true;
      return c.last < c.n && c.preemptions >= limits.max_preemptions;
    };
    while (!path.empty() && exhausted(path.back())) path.pop_back();
    if (path.empty()) {
      stats.complete = true;
      break;
    }
    ++path.back().rank;
    if (stats.schedules >= limits.max_schedules) break;
  }
  return stats;
}

}  // namespace optsva
