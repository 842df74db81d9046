// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/luopacity.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include <json.hpp>

#include "optsva/harmony.hpp"

namespace optsva {

namespace {

using Decided = std::set<std::pair<TxnId, VarId>>;

std::map<TxnId, std::vector<Access>> asets_of(const ProgramModel& p) {
  std::map<TxnId, std::vector<Access>> out;
  for (const auto& t : p.txns) out[t.id] = t.aset;
  return out;
}

// Real-time order over a (completed) history: a precedes b iff a's last
// event comes before b's first.
class RealTime {
 public:
  explicit RealTime(const History& h) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      first_.emplace(h[i].txn, i);
      last_[h[i].txn] = i;
    }
  }
  bool before(TxnId a, TxnId b) const {
    const auto la = last_.find(a), fb = first_.find(b);
    return la != last_.end() && fb != first_.end() && la->second < fb->second;
  }

 private:
  std::map<TxnId, std::size_t> first_, last_;
};

bool committed_in(const History& hc, TxnId t) {
  const auto st = txn_status(hc);
  const auto it = st.find(t);
  return it != st.end() && it->second == TxnStatus::committed;
}

void append(History& out, const History& part) { out.insert(out.end(), part.begin(), part.end()); }

// Transactions reachable from each transaction along "is virtually viewed
// by" edges: l virtually views k if l views a value after k routinely
// wrote it.
std::map<TxnId, std::set<TxnId>> chain_reach(const std::vector<Event>& tr) {
  std::map<std::pair<VarId, Value>, std::vector<std::size_t>> rsets;
  std::map<TxnId, std::set<TxnId>> succ;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Event& e = tr[i];
    if (!e.var || !e.value) continue;
    if (e.kind == EventKind::rupdate) rsets[{*e.var, *e.value}].push_back(i);
    if (e.kind == EventKind::view) {
      const auto it = rsets.find({*e.var, *e.value});
      if (it == rsets.end()) continue;
      for (std::size_t u : it->second)
        if (tr[u].txn != e.txn) succ[tr[u].txn].insert(e.txn);
    }
  }
  std::map<TxnId, std::set<TxnId>> reach;
  for (const auto& [s, _] : succ) {
    auto& r = reach[s];
    std::vector<TxnId> todo{s};
    while (!todo.empty()) {
      const TxnId u = todo.back();
      todo.pop_back();
      const auto it = succ.find(u);
      if (it == succ.end()) continue;
      for (TxnId w : it->second)
        if (r.insert(w).second) todo.push_back(w);
    }
  }
  return reach;
}

// Per-transaction material shared by every candidate order of one history.
struct Universe {
  Universe(const History& h, const ProgramModel& p, const std::vector<Event>& tr)
      : hc(completion(h)), rt(hc), reach(chain_reach(tr)) {
    decided = closing_writes(p, h);
    for (const auto& [t, x] : decided) decided_txns.insert(t);
    const auto st = txn_status(hc);
    for (TxnId t : txns_of(hc)) {
      txns.push_back(t);
      whole[t] = project_txn(hc, t);
      dc[t] = decided_completion(hc, t, decided);
      committed[t] = st.at(t) == TxnStatus::committed;
    }
  }

  History hc;
  RealTime rt;
  Decided decided;
  std::set<TxnId> decided_txns;
  std::vector<TxnId> txns;
  std::map<TxnId, History> whole, dc;
  std::map<TxnId, bool> committed;
  std::map<TxnId, std::set<TxnId>> reach;

  bool aborted(TxnId t) const { return !committed.at(t); }
  bool chain(TxnId from, TxnId to) const {
    const auto it = reach.find(from);
    return it != reach.end() && it->second.count(to) > 0;
  }
};

// What the transaction at `pos` in `order` may see. Committed
// transactions see committed predecessors only. Others also see the decided
// completion of uncommitted predecessors: with `direct`, of every decided one
// that does not precede them in real time; otherwise of those linked to them
// by a view chain, unless aborted before they started.
History visible_of(const Universe& u, const std::vector<TxnId>& order, std::size_t pos,
                   bool direct) {
  const TxnId i = order[pos];
  History out;
  for (std::size_t k = 0; k < pos; ++k) {
    const TxnId t = order[k];
    if (u.committed.at(t)) {
      append(out, u.whole.at(t));
    } else if (!u.committed.at(i)) {
      const bool include = direct ? u.decided_txns.count(t) && !u.rt.before(t, i)
                                  : !(u.aborted(t) && u.rt.before(t, i)) && u.chain(t, i);
      if (include) append(out, u.dc.at(t));
    }
  }
  append(out, u.whole.at(i));
  return out;
}

}  // namespace

std::set<std::pair<TxnId, VarId>> closing_writes(const ProgramModel& p, const History& h) {
  std::set<std::pair<TxnId, VarId>> out;
  for (const auto& [key, _] : closing_write_responses(h, asets_of(p))) out.insert(key);
  return out;
}

SeqHistory sequential(const History& hc, const std::vector<TxnId>& order) {
  SeqHistory s;
  s.order = order;
  for (TxnId t : order) append(s.events, project_txn(hc, t));
  return s;
}

std::optional<SeqHistory> build_seq(const History& h, const std::vector<Event>& tr) {
  const History hc = completion(h);
  const RealTime rt(hc);
  const IsolationOrder iso(tr);
  const std::vector<TxnId> txns = txns_of(hc);

  std::map<VarId, std::set<TxnId>> writers, accessors;
  for (const auto& op : operations(hc))
    if (op.kind == OpKind::write && op.complete() && op.outcome == RespCode::ok)
      writers[*op.var].insert(op.txn);
  for (const auto& e : tr)
    if ((e.kind == EventKind::view || e.kind == EventKind::rupdate) && e.var)
      accessors[*e.var].insert(e.txn);

  auto rule3 = [&](TxnId i, TxnId j) {
    for (const auto& [x, ws] : writers)
      if (ws.count(j) && accessors[x].count(i)) return true;
    return false;
  };

  std::map<TxnId, std::set<TxnId>> succ;
  std::map<TxnId, std::size_t> indeg;
  for (TxnId t : txns) indeg[t] = 0;
  for (TxnId i : txns) {
    for (TxnId j : txns) {
      if (i == j) continue;
      bool edge = false;
      if (rt.before(i, j) || rt.before(j, i)) {
        edge = rt.before(i, j);
      } else if (iso.precedes(i, j) || iso.precedes(j, i)) {
        if (iso.precedes(i, j) && iso.precedes(j, i)) return std::nullopt;
        edge = iso.precedes(i, j);
      } else {
        edge = rule3(i, j);
      }
      if (edge && succ[i].insert(j).second) ++indeg[j];
    }
  }
  std::vector<TxnId> order;
  std::set<TxnId> ready;
  for (auto [t, d] : indeg)
    if (d == 0) ready.insert(t);
  while (!ready.empty()) {
    const TxnId t = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(t);
    for (TxnId w : succ[t])
      if (--indeg[w] == 0) ready.insert(w);
  }
  if (order.size() != txns.size()) return std::nullopt;
  return sequential(hc, order);
}

History decided_completion(const History& h, TxnId t, const Decided& decided) {
  const History ht = project_txn(h, t);
  History out;
  std::vector<std::size_t> keep;
  for (const auto& op : operations(ht)) {
    if (op.kind == OpKind::start) {
      keep.push_back(op.inv);
      if (op.complete()) keep.push_back(op.resp);
    } else if (op.var && op.complete() && decided.count({t, *op.var})) {
      keep.push_back(op.inv);
      keep.push_back(op.resp);
    }
  }
  std::sort(keep.begin(), keep.end());
  for (std::size_t i : keep) out.push_back(ht[i]);
  Event inv;
  inv.txn = t;
  inv.kind = EventKind::inv_tryc;
  inv.seq = ht.empty() ? 0 : ht.back().seq + 1;
  Event resp = inv;
  resp.kind = EventKind::resp_tryc;
  resp.outcome = RespCode::committed;
  resp.seq = inv.seq + 1;
  out.push_back(inv);
  out.push_back(resp);
  return out;
}

History vis(const SeqHistory& s, TxnId i) {
  History out;
  for (TxnId t : s.order) {
    const History ht = project_txn(s.events, t);
    if (t == i) {
      append(out, ht);
      break;
    }
    if (committed_in(ht, t)) append(out, ht);
  }
  return out;
}

History lvis(const SeqHistory& s, TxnId i, const std::vector<Event>& tr, const ProgramModel& p) {
  const Universe u(to_history(tr), p, tr);
  const auto pos = std::find(s.order.begin(), s.order.end(), i) - s.order.begin();
  return visible_of(u, s.order, static_cast<std::size_t>(pos), false);
}

History luvis(const SeqHistory& s, TxnId i, const History& h, const ProgramModel& p) {
  const Universe u(h, p, {});
  const auto pos = std::find(s.order.begin(), s.order.end(), i) - s.order.begin();
  return visible_of(u, s.order, static_cast<std::size_t>(pos), true);
}

bool legal(const History& sh) {
  std::map<VarId, Value> mem;
  for (const auto& op : operations(sh)) {
    if (!op.complete() || op.outcome != RespCode::ok || !op.var) continue;
    if (op.kind == OpKind::write) {
      if (!in_domain(op.arg)) return false;
      mem[*op.var] = op.arg;
    } else if (op.kind == OpKind::read) {
      const auto it = mem.find(*op.var);
      if (op.result != (it == mem.end() ? 0 : it->second)) return false;
    }
  }
  return true;
}

std::string_view to_string(LuVerdict v) {
  switch (v) {
    case LuVerdict::opaque: return "opaque";
    case LuVerdict::not_opaque: return "not_opaque";
    case LuVerdict::bound_exceeded: return "bound_exceeded";
  }
  return "";
}

std::string LuResult::to_json() const {
  nlohmann::ordered_json j;
  j["verdict"] = std::string(to_string(verdict));
  j["lu_opaque"] = ok();
  if (!witness.empty()) j["witness"] = witness;
  j["by_construction"] = by_construction;
  if (failing_prefix) j["failing_prefix"] = *failing_prefix;
  if (!reason.empty()) j["reason"] = reason;
  return j.dump(2);
}

LuResult check_final_state_lu_opaque(const History& h, const ProgramModel& p,
                                     const std::vector<Event>& tr, const LuOptions& o) {
  LuResult res;
  const auto wf = check_well_formed(h);
  if (!wf) {
    res.verdict = LuVerdict::not_opaque;
    res.reason = "malformed history: " + wf.reason;
    return res;
  }
  const Universe u(h, p, tr);
  if (u.txns.size() > o.max_txns) {
    res.verdict = LuVerdict::bound_exceeded;
    res.reason = std::to_string(u.txns.size()) + " transactions exceed the bound of " +
                 std::to_string(o.max_txns);
    return res;
  }

  if (o.construction) {
    if (const auto s = build_seq(h, tr)) {
      bool ok = true;
      for (TxnId t : s->order) {
        const History seen = u.committed.at(t) ? vis(*s, t) : lvis(*s, t, tr, p);
        if (!legal(seen)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        res.witness = s->order;
        res.by_construction = true;
        return res;
      }
    }
  }

  // Depth-first over real-time-respecting orders; a transaction's legality
  // depends only on the transactions placed before it, so a failing
  // placement prunes the whole subtree.
  std::vector<TxnId> order;
  std::set<TxnId> placed;
  std::function<bool()> dfs = [&]() -> bool {
    if (order.size() == u.txns.size()) return true;
    for (TxnId t : u.txns) {
      if (placed.count(t)) continue;
      bool blocked = false;
      for (TxnId q : u.txns)
        if (q != t && !placed.count(q) && u.rt.before(q, t)) blocked = true;
      if (blocked) continue;
      order.push_back(t);
      placed.insert(t);
      if (legal(visible_of(u, order, order.size() - 1, o.direct_visibility)) && dfs()) return true;
      placed.erase(t);
      order.pop_back();
    }
    return false;
  };
  if (dfs()) {
    res.witness = order;
    return res;
  }
  res.verdict = LuVerdict::not_opaque;
  res.reason = "no legal sequential equivalent";
  return res;
}

LuResult check_lu_opaque(const History& h, const ProgramModel& p, const std::vector<Event>& tr,
                         const LuOptions& o) {
  LuResult last;
  for (std::size_t k = 1; k <= h.size(); ++k) {
    const History prefix(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(k));
    const std::uint64_t cut = prefix.back().seq;
    std::vector<Event> tr_prefix;
    for (const auto& e : tr)
      if (e.seq <= cut) tr_prefix.push_back(e);
    last = check_final_state_lu_opaque(prefix, p, tr_prefix, o);
    if (!last.ok()) {
      last.failing_prefix = k;
      return last;
    }
  }
  return last;
}

}  // namespace optsva
