// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/trace.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace optsva {

namespace {

constexpr std::array<std::string_view, 15> kKindNames = {
    "inv_start", "resp_start", "inv_read", "resp_read", "inv_write",
    "resp_write", "inv_tryc", "resp_tryc", "inv_trya", "resp_trya",
    "view", "rupdate", "aupdate", "release", "complete"};

std::string_view resp_name(RespCode c) {
  switch (c) {
    case RespCode::ok: return "ok";
    case RespCode::committed: return "C";
    case RespCode::aborted: return "A";
    case RespCode::none: break;
  }
  return "";
}

RespCode parse_resp(std::string_view s) {
  if (s == "ok") return RespCode::ok;
  if (s == "C") return RespCode::committed;
  if (s == "A") return RespCode::aborted;
  throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

// Invocation kind answered by a response kind.
EventKind invocation_of(EventKind resp) {
  return static_cast<EventKind>(static_cast<int>(resp) - 1);
}

OpKind op_kind_of(EventKind inv) {
  switch (inv) {
    case EventKind::inv_start: return OpKind::start;
    case EventKind::inv_read: return OpKind::read;
    case EventKind::inv_write: return OpKind::write;
    case EventKind::inv_tryc: return OpKind::tryc;
    default: return OpKind::trya;
  }
}

}  // namespace

std::string_view to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  return std::nullopt;
}

bool is_invocation(EventKind k) {
  return k == EventKind::inv_start || k == EventKind::inv_read || k == EventKind::inv_write ||
         k == EventKind::inv_tryc || k == EventKind::inv_trya;
}

bool is_response(EventKind k) {
  return k == EventKind::resp_start || k == EventKind::resp_read || k == EventKind::resp_write ||
         k == EventKind::resp_tryc || k == EventKind::resp_trya;
}

std::string to_json_line(const Event& e) {
  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["txn"] = e.txn;
  j["kind"] = std::string(to_string(e.kind));
  if (e.var) j["var"] = *e.var;
  if (e.value) j["value"] = *e.value;
  if (e.outcome != RespCode::none) j["outcome"] = std::string(resp_name(e.outcome));
  if (e.proc) j["proc"] = *e.proc;
  if (e.kind == EventKind::inv_start && (!e.aset.empty() || e.proc)) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& a : e.aset) arr.push_back({a.var, a.rub, a.wub});
    j["aset"] = std::move(arr);
  }
  if (e.time) j["time"] = *e.time;
  return j.dump();
}

Event event_from_json_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.txn = j.at("txn").get<TxnId>();
  const auto kind = parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown event kind in: " + std::string(line));
  e.kind = *kind;
  if (j.contains("var")) e.var = j["var"].get<VarId>();
  if (j.contains("value")) e.value = j["value"].get<Value>();
  if (j.contains("outcome")) e.outcome = parse_resp(j["outcome"].get<std::string>());
  if (j.contains("proc")) e.proc = j["proc"].get<std::uint32_t>();
  if (j.contains("aset")) {
    for (const auto& a : j["aset"]) {
      e.aset.push_back(Access{a.at(0).get<VarId>(), a.at(1).get<std::uint32_t>(),
                              a.at(2).get<std::uint32_t>()});
    }
  }
  if (j.contains("time")) e.time = j["time"].get<Tick>();
  return e;
}

void write_jsonl(std::ostream& os, const std::vector<Event>& events) {
  for (const auto& e : events) os << to_json_line(e) << '\n';
}

std::vector<Event> read_jsonl(std::istream& is) {
  std::vector<Event> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(event_from_json_line(line));
  }
  return out;
}

void save_trace(const std::string& path, const std::vector<Event>& events) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_jsonl(os, events);
}

std::vector<Event> load_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_jsonl(is);
}

std::uint64_t TraceRecorder::record(Event e) {
  std::lock_guard<std::mutex> g(mu_);
  if (sealed_.load()) throw std::logic_error("record on a sealed trace");
  e.seq = events_.size();
  if (clock_ && !e.time) e.time = clock_();
  events_.push_back(std::move(e));
  return events_.back().seq;
}

void TraceRecorder::seal() { sealed_.store(true); }

std::vector<Event> TraceRecorder::events() const {
  std::lock_guard<std::mutex> g(mu_);
  return events_;
}

std::size_t TraceRecorder::size() const {
  std::lock_guard<std::mutex> g(mu_);
  return events_.size();
}

History to_history(const std::vector<Event>& trace) {
  History h;
  for (const auto& e : trace)
    if (is_api(e.kind)) h.push_back(e);
  return h;
}

History project_txn(const History& h, TxnId t) {
  History out;
  for (const auto& e : h)
    if (e.txn == t) out.push_back(e);
  return out;
}

History project_var(const History& h, VarId x) {
  std::vector<std::size_t> keep;
  for (const auto& op : operations(h)) {
    if (!op.complete() || !op.var || *op.var != x) continue;
    keep.push_back(op.inv);
    keep.push_back(op.resp);
  }
  std::sort(keep.begin(), keep.end());
  History out;
  for (auto i : keep) out.push_back(h[i]);
  return out;
}

std::vector<OpExec> operations(const std::vector<Event>& events) {
  std::vector<OpExec> ops;
  std::map<TxnId, std::size_t> pending;  // txn -> index into ops
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (is_invocation(e.kind)) {
      OpExec op;
      op.txn = e.txn;
      op.kind = op_kind_of(e.kind);
      op.var = e.var;
      if (e.kind == EventKind::inv_write && e.value) op.arg = *e.value;
      op.inv = i;
      pending[e.txn] = ops.size();
      ops.push_back(op);
    } else if (is_response(e.kind)) {
      auto it = pending.find(e.txn);
      if (it == pending.end()) continue;
      OpExec& op = ops[it->second];
      if (events[op.inv].kind != invocation_of(e.kind)) continue;
      op.resp = i;
      op.outcome = e.outcome;
      if (e.kind == EventKind::resp_read && e.value) op.result = *e.value;
      pending.erase(it);
    }
  }
  return ops;
}

std::map<TxnId, TxnStatus> txn_status(const History& h) {
  std::map<TxnId, TxnStatus> st;
  for (const auto& e : h) {
    if (!is_api(e.kind)) continue;
    auto [it, fresh] = st.emplace(e.txn, TxnStatus::live);
    if (it->second == TxnStatus::committed || it->second == TxnStatus::aborted) continue;
    if (e.kind == EventKind::inv_tryc) it->second = TxnStatus::commit_pending;
    if (is_response(e.kind) && e.outcome == RespCode::aborted) it->second = TxnStatus::aborted;
    if (e.kind == EventKind::resp_tryc && e.outcome == RespCode::committed)
      it->second = TxnStatus::committed;
  }
  return st;
}

std::vector<TxnId> txns_of(const std::vector<Event>& events) {
  std::vector<TxnId> out;
  std::set<TxnId> seen;
  for (const auto& e : events)
    if (seen.insert(e.txn).second) out.push_back(e.txn);
  return out;
}

History completion(const History& h) {
  History out = h;
  std::uint64_t next = h.empty() ? 0 : h.back().seq + 1;
  const auto ops = operations(h);
  const auto status = txn_status(h);
  for (TxnId t : txns_of(h)) {
    const auto s = status.at(t);
    if (s == TxnStatus::committed || s == TxnStatus::aborted) continue;
    const OpExec* last = nullptr;
    for (const auto& op : ops)
      if (op.txn == t) last = &op;
    Event r;
    r.txn = t;
    r.outcome = RespCode::aborted;
    if (last && !last->complete()) {
      const Event& inv = h[last->inv];
      r.kind = static_cast<EventKind>(static_cast<int>(inv.kind) + 1);
      r.var = inv.kind == EventKind::inv_read ? inv.var : std::nullopt;
    } else {
      Event inv;
      inv.txn = t;
      inv.kind = EventKind::inv_trya;
      inv.seq = next++;
      out.push_back(inv);
      r.kind = EventKind::resp_trya;
    }
    r.seq = next++;
    out.push_back(r);
  }
  return out;
}

WellFormedness check_well_formed(const History& h) {
  struct State {
    bool started = false;
    bool pending = false;
    EventKind pending_kind = EventKind::inv_start;
    bool finishing = false;  // tryC or tryA invoked
    bool done = false;
    std::size_t first = 0, last = 0;
    std::optional<std::uint32_t> proc;
  };
  std::map<TxnId, State> st;
  auto fail = [](std::string why) { return WellFormedness{false, std::move(why)}; };
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Event& e = h[i];
    if (!is_api(e.kind)) return fail("non-API event in history at seq " + std::to_string(e.seq));
    auto [it, fresh] = st.emplace(e.txn, State{});
    State& s = it->second;
    const std::string where = " (txn " + std::to_string(e.txn) + ", seq " + std::to_string(e.seq) + ")";
    if (fresh) {
      s.first = i;
      if (e.kind != EventKind::inv_start) return fail("does not start with start invocation" + where);
      s.proc = e.proc;
    }
    s.last = i;
    if (s.done) return fail("event after commit or abort response" + where);
    if (is_invocation(e.kind)) {
      if (s.pending) return fail("invocation while another operation is pending" + where);
      if (s.finishing) return fail("invocation after tryC or tryA" + where);
      if (e.kind == EventKind::inv_start && s.started) return fail("second start" + where);
      s.started = true;
      s.pending = true;
      s.pending_kind = e.kind;
      if (e.kind == EventKind::inv_tryc || e.kind == EventKind::inv_trya) s.finishing = true;
    } else {
      if (!s.pending || invocation_of(e.kind) != s.pending_kind)
        return fail("response without matching invocation" + where);
      s.pending = false;
      if (e.outcome == RespCode::aborted || e.outcome == RespCode::committed) s.done = true;
    }
  }
  // Transactions of one process must not overlap.
  std::map<std::uint32_t, std::vector<std::pair<std::size_t, std::size_t>>> by_proc;
  for (const auto& [t, s] : st)
    if (s.proc) by_proc[*s.proc].push_back({s.first, s.last});
  for (auto& [p, spans] : by_proc) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t k = 1; k < spans.size(); ++k)
      if (spans[k].first < spans[k - 1].second)
        return fail("transactions of process " + std::to_string(p) + " overlap");
  }
  return {};
}

bool unique_writes(const History& h) {
  std::map<VarId, std::set<Value>> seen;
  for (const auto& op : operations(h)) {
    if (op.kind != OpKind::write || !op.complete() || op.outcome != RespCode::ok) continue;
    if (op.arg == 0) return false;
    if (!seen[op.var.value_or(0)].insert(op.arg).second) return false;
  }
  return true;
}

std::map<TxnId, std::vector<Access>> declared_asets(const std::vector<Event>& trace) {
  std::map<TxnId, std::vector<Access>> out;
  for (const auto& e : trace)
    if (e.kind == EventKind::inv_start) out[e.txn] = e.aset;
  return out;
}

std::map<std::pair<TxnId, VarId>, std::size_t> closing_write_responses(
    const std::vector<Event>& events, const std::map<TxnId, std::vector<Access>>& asets) {
  std::map<std::pair<TxnId, VarId>, std::size_t> out;
  std::map<std::pair<TxnId, VarId>, std::uint32_t> count;
  for (const auto& op : operations(events)) {
    if (op.kind != OpKind::write || !op.var) continue;
    const auto it = asets.find(op.txn);
    if (it == asets.end()) continue;
    const auto a = std::find_if(it->second.begin(), it->second.end(),
                                [&](const Access& d) { return d.var == *op.var; });
    const std::uint32_t wub = a == it->second.end() ? 0 : a->wub;
    const auto key = std::make_pair(op.txn, *op.var);
    const std::uint32_t n = ++count[key];
    if (n > wub)
      throw ConfigError("txn " + std::to_string(op.txn) + " writes var " +
                        std::to_string(*op.var) + " more often than declared");
    if (n == wub && op.complete() && op.outcome == RespCode::ok) out[key] = op.resp;
  }
  return out;
}

namespace {
template <class Stamp>
Timing timing_with(const std::vector<Event>& trace, Stamp stamp) {
  Timing t;
  for (const auto& e : trace) {
    const std::uint64_t s = stamp(e);
    t.exec_time = std::max(t.exec_time, s);
    if (!e.var) continue;
    if (e.kind == EventKind::release) t.release.emplace(std::make_pair(e.txn, *e.var), s);
    if (e.kind == EventKind::complete) t.completion.emplace(std::make_pair(e.txn, *e.var), s);
  }
  return t;
}
}  // namespace

Timing timing(const std::vector<Event>& trace) {
  return timing_with(trace, [](const Event& e) { return e.seq; });
}

Timing timing_by_time(const std::vector<Event>& trace) {
  return timing_with(trace, [](const Event& e) { return e.time.value_or(0); });
}

}  // namespace optsva
