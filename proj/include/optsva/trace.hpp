// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Event vocabulary, trace recording, history projections and timing.
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optsva/types.hpp"

namespace optsva {

enum class EventKind : std::uint8_t {
  inv_start,
  resp_start,
  inv_read,
  resp_read,
  inv_write,
  resp_write,
  inv_tryc,
  resp_tryc,
  inv_trya,
  resp_trya,
  view,      // raw memory read
  rupdate,   // routine memory write
  aupdate,   // recovery memory write issued while aborting
  release,   // lv(x) set to the transaction's private version
  complete,  // ltv(x) set to the transaction's private version
};

enum class RespCode : std::uint8_t { none, ok, committed, aborted };

std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

bool is_invocation(EventKind k);
bool is_response(EventKind k);
inline bool is_api(EventKind k) { return is_invocation(k) || is_response(k); }
inline bool is_memory(EventKind k) {
  return k == EventKind::view || k == EventKind::rupdate || k == EventKind::aupdate;
}
inline bool is_update(EventKind k) { return k == EventKind::rupdate || k == EventKind::aupdate; }
inline bool is_marker(EventKind k) { return k == EventKind::release || k == EventKind::complete; }

struct Event {
  std::uint64_t seq = 0;
  TxnId txn = 0;
  EventKind kind = EventKind::inv_start;
  std::optional<VarId> var;
  std::optional<Value> value;
  RespCode outcome = RespCode::none;
  // Only on inv_start: executing process and declared access set.
  std::optional<std::uint32_t> proc;
  std::vector<Access> aset;
  // Wall-clock nanoseconds or virtual ticks, depending on the runtime.
  std::optional<Tick> time;

  bool operator==(const Event&) const = default;
};

std::string to_json_line(const Event& e);
Event event_from_json_line(std::string_view line);

void write_jsonl(std::ostream& os, const std::vector<Event>& events);
std::vector<Event> read_jsonl(std::istream& is);
void save_trace(const std::string& path, const std::vector<Event>& events);
std::vector<Event> load_trace(const std::string& path);

// Thread-safe append-only log. seq is the position in the log.
class TraceRecorder {
 public:
  using Clock = std::function<Tick()>;
  explicit TraceRecorder(Clock clock = {}) : clock_(std::move(clock)) {}

  std::uint64_t record(Event e);
  void seal();
  bool sealed() const { return sealed_.load(); }
  std::vector<Event> events() const;
  std::size_t size() const;
  void set_clock(Clock c) { clock_ = std::move(c); }

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
  std::atomic<bool> sealed_{false};
  Clock clock_;
};

// A history is the subsequence of a trace made of invocation and response
// events. It is represented by the same event type.
using History = std::vector<Event>;

History to_history(const std::vector<Event>& trace);
History project_txn(const History& h, TxnId t);
// Keeps only complete operation executions on x.
History project_var(const History& h, VarId x);

enum class OpKind : std::uint8_t { start, read, write, tryc, trya };

// One operation execution: an invocation and (if complete) its response.
struct OpExec {
  TxnId txn = 0;
  OpKind kind = OpKind::start;
  std::optional<VarId> var;
  Value arg = 0;           // written value
  Value result = 0;        // value returned by a read
  RespCode outcome = RespCode::none;
  std::size_t inv = 0;     // index of the invocation in the input sequence
  std::size_t resp = npos; // index of the response, npos if pending
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  bool complete() const { return resp != npos; }
};

// Pairs invocations with responses per transaction, in invocation order.
std::vector<OpExec> operations(const std::vector<Event>& events);

enum class TxnStatus : std::uint8_t { live, commit_pending, committed, aborted };
std::map<TxnId, TxnStatus> txn_status(const History& h);
std::vector<TxnId> txns_of(const std::vector<Event>& events);

// Aborts every live or commit-pending transaction.
History completion(const History& h);

struct WellFormedness {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};
WellFormedness check_well_formed(const History& h);
inline bool well_formed(const History& h) { return check_well_formed(h).ok; }
bool unique_writes(const History& h);

// Declared access sets, taken from inv_start events.
std::map<TxnId, std::vector<Access>> declared_asets(const std::vector<Event>& trace);

// Complete, non-aborted writes that bring a transaction's write count on a
// variable to its declared bound, mapped to the position of their response
// in `events`. Transactions missing from `asets` have none. Throws
// ConfigError if a transaction writes a variable more often than declared.
std::map<std::pair<TxnId, VarId>, std::size_t> closing_write_responses(
    const std::vector<Event>& events, const std::map<TxnId, std::vector<Access>>& asets);

struct Timing {
  std::uint64_t exec_time = 0;
  std::map<std::pair<TxnId, VarId>, std::uint64_t> release;
  std::map<std::pair<TxnId, VarId>, std::uint64_t> completion;
};
// Positions (seq) of lv and ltv updates and of the last event.
Timing timing(const std::vector<Event>& trace);
// Same, measured with the recorded time stamps instead of seq.
Timing timing_by_time(const std::vector<Event>& trace);

}  // namespace optsva
