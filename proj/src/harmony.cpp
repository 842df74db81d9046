// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/harmony.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <utility>

#include <json.hpp>

namespace optsva {

namespace {

constexpr std::array<std::string_view, 19> kRuleNames = {
    "minimalism",
    "isolation",
    "view_consonance",
    "routine_update_consonance",
    "recovery_update_consonance",
    "nonlocal_read_consonance",
    "local_read_consonance",
    "write_consonance",
    "committed_write_obbligato",
    "closing_write_obbligato",
    "view_write_obbligato",
    "decisiveness",
    "abort_accord",
    "commit_accord",
    "coherence",
    "abort_coda",
    "chain_isolation",
    "chain_self_containment",
    "unique_writes",
};

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

bool is_view_or_rset(EventKind k) { return k == EventKind::view || k == EventKind::rupdate; }

std::string var_name(VarId x) { return "x" + std::to_string(x); }

}  // namespace

std::string_view to_string(Rule r) { return kRuleNames[static_cast<std::size_t>(r)]; }

std::optional<Rule> parse_rule(std::string_view s) {
  for (std::size_t i = 0; i < kRuleNames.size(); ++i)
    if (kRuleNames[i] == s) return static_cast<Rule>(i);
  return std::nullopt;
}

const std::vector<Rule>& all_rules() {
  static const std::vector<Rule> rules = [] {
    std::vector<Rule> v;
    for (std::size_t i = 0; i < kRuleNames.size(); ++i) v.push_back(static_cast<Rule>(i));
    return v;
  }();
  return rules;
}

bool ViolationReport::has(Rule r) const {
  return std::any_of(violations.begin(), violations.end(),
                     [r](const Violation& v) { return v.rule == r; });
}

std::set<Rule> ViolationReport::rules() const {
  std::set<Rule> out;
  for (const auto& v : violations) out.insert(v.rule);
  return out;
}

void ViolationReport::merge(ViolationReport other) {
  for (auto& v : other.violations) violations.push_back(std::move(v));
  bound_exceeded = bound_exceeded || other.bound_exceeded;
  if (!structural_error) structural_error = std::move(other.structural_error);
}

std::string ViolationReport::to_json() const {
  nlohmann::ordered_json j;
  j["harmonious"] = ok();
  j["bound_exceeded"] = bound_exceeded;
  if (structural_error) j["structural_error"] = *structural_error;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& v : violations)
    arr.push_back({{"rule", std::string(to_string(v.rule))},
                   {"seqs", v.seqs},
                   {"explanation", v.explanation}});
  j["violations"] = std::move(arr);
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Isolation order

IsolationOrder::IsolationOrder(const std::vector<Event>& trace) {
  std::map<VarId, std::map<TxnId, std::size_t>> first;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Event& e = trace[i];
    if (!is_view_or_rset(e.kind) || !e.var) continue;
    first[*e.var].emplace(e.txn, i);
    index_.emplace(e.txn, index_.size());
  }
  const std::size_t n = index_.size();
  // Bit 1: a before b on some variable; bit 2: a after b on some variable.
  std::vector<std::vector<std::uint8_t>> rel(n, std::vector<std::uint8_t>(n, 0));
  for (auto& [x, m] : first) {
    std::vector<std::pair<std::size_t, TxnId>> order;
    for (auto [t, i] : m) order.push_back({i, t});
    std::sort(order.begin(), order.end());
    auto& list = per_var_[x];
    auto& pos = pos_[x];
    for (auto [i, t] : order) {
      pos[t] = list.size();
      list.push_back(t);
    }
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        const std::size_t ia = index_[list[a]], ib = index_[list[b]];
        rel[ia][ib] |= 1;
        rel[ib][ia] |= 2;
      }
    }
  }
  direct_.assign(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) direct_[a][b] = rel[a][b] == 1;
  closure_.assign(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> todo{s};
    while (!todo.empty()) {
      const std::size_t u = todo.back();
      todo.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (direct_[u][v] && !closure_[s][v]) {
          closure_[s][v] = true;
          todo.push_back(v);
        }
      }
    }
  }
}

bool IsolationOrder::before(VarId x, TxnId a, TxnId b) const {
  const auto it = pos_.find(x);
  if (it == pos_.end()) return false;
  const auto pa = it->second.find(a), pb = it->second.find(b);
  if (pa == it->second.end() || pb == it->second.end()) return false;
  return pa->second < pb->second;
}

bool IsolationOrder::direct(TxnId a, TxnId b) const {
  const auto ia = index_.find(a), ib = index_.find(b);
  if (ia == index_.end() || ib == index_.end()) return false;
  return direct_[ia->second][ib->second];
}

bool IsolationOrder::precedes(TxnId a, TxnId b) const {
  const auto ia = index_.find(a), ib = index_.find(b);
  if (ia == index_.end() || ib == index_.end()) return false;
  return closure_[ia->second][ib->second];
}

// ---------------------------------------------------------------------------
// Shared trace index

namespace {

struct TxnInfo {
  std::size_t commit = npos;  // position of the C response
  std::size_t abort = npos;   // position of the A response
  bool committed() const { return commit != npos; }
  bool aborted() const { return abort != npos; }
  std::size_t terminated() const { return std::min(commit, abort); }
};

// Memory events of one transaction on one variable.
struct MemInfo {
  std::vector<std::size_t> views, rsets, asets;
};

struct Index {
  explicit Index(const std::vector<Event>& trace) : ev(trace), iso(trace) {
    ops = operations(ev);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const Event& e = ev[i];
      TxnInfo& t = txns[e.txn];
      if (is_response(e.kind) && e.outcome == RespCode::committed) t.commit = i;
      if (is_response(e.kind) && e.outcome == RespCode::aborted) t.abort = i;
      if (!is_memory(e.kind)) continue;
      const VarId x = *e.var;
      MemInfo& m = mem[{e.txn, x}];
      if (e.kind == EventKind::view) {
        m.views.push_back(i);
        views[x].push_back(i);
        pref[i] = last_update.count(x) ? last_update[x] : npos;
      } else {
        (e.kind == EventKind::rupdate ? m.rsets : m.asets).push_back(i);
        (e.kind == EventKind::rupdate ? rsets : asets)[x].push_back(i);
        last_update[x] = i;
        if (e.kind == EventKind::rupdate) rset_by_value[{x, *e.value}].push_back(i);
      }
    }
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const OpExec& op = ops[k];
      if (op.kind == OpKind::write && op.var) writes[{op.txn, *op.var}].push_back(k);
    }
    closing = closing_write_responses(ev, declared_asets(ev));
  }

  std::uint64_t seq(std::size_t i) const { return ev[i].seq; }
  Value val(std::size_t i) const { return ev[i].value.value_or(0); }
  TxnId txn(std::size_t i) const { return ev[i].txn; }
  VarId var(std::size_t i) const { return *ev[i].var; }

  const MemInfo* mem_of(TxnId t, VarId x) const {
    const auto it = mem.find({t, x});
    return it == mem.end() ? nullptr : &it->second;
  }
  const TxnInfo& info(TxnId t) const { return txns.at(t); }

  // Latest write operation by t on x invoked before position `before`.
  const OpExec* latest_write(TxnId t, VarId x, std::size_t before) const {
    const auto it = writes.find({t, x});
    if (it == writes.end()) return nullptr;
    const OpExec* best = nullptr;
    for (std::size_t k : it->second)
      if (ops[k].inv < before) best = &ops[k];
    return best;
  }

  static bool write_consonant(const OpExec& w) {
    return w.complete() && w.outcome == RespCode::ok && w.arg != 0 && in_domain(w.arg);
  }

  // The update that view i sees is a routine update by another transaction
  // with the same value.
  std::optional<std::size_t> viewed_rset(std::size_t i) const {
    const std::size_t u = pref.at(i);
    if (u == npos || ev[u].kind != EventKind::rupdate || txn(u) == txn(i) || val(u) != val(i))
      return std::nullopt;
    return u;
  }

  const std::vector<Event>& ev;
  IsolationOrder iso;
  std::vector<OpExec> ops;
  std::map<TxnId, TxnInfo> txns;
  std::map<std::pair<TxnId, VarId>, MemInfo> mem;
  std::map<VarId, std::vector<std::size_t>> views, rsets, asets;
  std::map<std::pair<VarId, Value>, std::vector<std::size_t>> rset_by_value;
  std::map<std::size_t, std::size_t> pref;  // view -> prefacing update or npos
  std::map<VarId, std::size_t> last_update;
  std::map<std::pair<TxnId, VarId>, std::vector<std::size_t>> writes;  // indices into ops
  std::map<std::pair<TxnId, VarId>, std::size_t> closing;
};

class Checker {
 public:
  Checker(const Index& ix, const HarmonyOptions& o, ViolationReport& r) : ix_(ix), o_(o), r_(r) {}

  bool want(Rule rule) const { return o_.only.empty() || o_.only.count(rule) > 0; }

  void flag(Rule rule, std::vector<std::size_t> at, std::string why) {
    Violation v{rule, {}, std::move(why)};
    for (std::size_t i : at) v.seqs.push_back(ix_.seq(i));
    r_.violations.push_back(std::move(v));
  }

  std::string ev_str(std::size_t i) const {
    const Event& e = ix_.ev[i];
    std::string s(to_string(e.kind));
    s += "_" + std::to_string(e.txn);
    if (e.var) s += "(" + var_name(*e.var) + (e.value ? "," + std::to_string(*e.value) : "") + ")";
    return s + "@" + std::to_string(e.seq);
  }

  // -- event rules ----------------------------------------------------------

  void minimalism() {
    for (const auto& [key, m] : ix_.mem) {
      const auto check = [&](const std::vector<std::size_t>& v, const char* what) {
        if (v.size() > 1)
          flag(Rule::minimalism, v,
               "txn " + std::to_string(key.first) + " has " + std::to_string(v.size()) + " " +
                   what + " events on " + var_name(key.second));
      };
      check(m.views, "view");
      check(m.rsets, "routine update");
      check(m.asets, "recovery update");
    }
  }

  void isolation() {
    std::map<VarId, std::map<TxnId, std::pair<std::size_t, std::size_t>>> span;
    for (std::size_t i = 0; i < ix_.ev.size(); ++i) {
      const Event& e = ix_.ev[i];
      if (!is_view_or_rset(e.kind)) continue;
      auto [it, fresh] = span[*e.var].emplace(e.txn, std::make_pair(i, i));
      if (!fresh) it->second.second = i;
    }
    for (const auto& [x, m] : span) {
      std::vector<std::pair<std::pair<std::size_t, std::size_t>, TxnId>> order;
      for (const auto& [t, s] : m) order.push_back({s, t});
      std::sort(order.begin(), order.end());
      std::size_t reach = npos;  // position in `order` holding the furthest end so far
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (reach != npos && order[reach].first.second > order[k].first.first) {
          flag(Rule::isolation, {order[k].first.first, order[reach].first.second},
               "txns " + std::to_string(order[reach].second) + " and " +
                   std::to_string(order[k].second) + " interleave their accesses to " +
                   var_name(x));
        }
        if (reach == npos || order[k].first.second > order[reach].first.second) reach = k;
      }
    }
  }

  void unique() {
    std::map<VarId, std::map<Value, std::size_t>> seen;
    for (const auto& op : ix_.ops) {
      if (op.kind != OpKind::write || !op.complete() || op.outcome != RespCode::ok) continue;
      if (op.arg == 0) {
        flag(Rule::unique_writes, {op.inv}, "write of the initial value 0");
        continue;
      }
      auto [it, fresh] = seen[*op.var].emplace(op.arg, op.inv);
      if (!fresh)
        flag(Rule::unique_writes, {it->second, op.inv},
             "value " + std::to_string(op.arg) + " written twice to " + var_name(*op.var));
    }
  }

  bool view_consonant(std::size_t i) const {
    const std::size_t u = ix_.pref.at(i);
    const Value v = ix_.val(i);
    if (u == npos) return v == 0;
    if (ix_.txn(u) == ix_.txn(i) || ix_.val(u) != v) return false;
    if (ix_.ev[u].kind == EventKind::aupdate) return true;
    // Routine: must be the supplier's ultimate routine update on x.
    return v != 0 && ix_.mem_of(ix_.txn(u), ix_.var(u))->rsets.back() == u;
  }

  // A view is non-local if its transaction has not updated x before it.
  bool view_nonlocal(std::size_t i) const {
    const MemInfo* m = ix_.mem_of(ix_.txn(i), ix_.var(i));
    return m->rsets.empty() || m->rsets.front() > i;
  }

  void view_consonance() {
    for (const auto& [x, vs] : ix_.views) {
      for (std::size_t i : vs) {
        if (view_consonant(i)) continue;
        const std::size_t u = ix_.pref.at(i);
        flag(Rule::view_consonance, u == npos ? std::vector<std::size_t>{i} : std::vector{u, i},
             ev_str(i) + (u == npos ? " has no preceding update but a nonzero value"
                                    : " is not justified by " + ev_str(u)));
      }
    }
  }

  // The write that instigates routine update u, if any.
  const OpExec* instigator(std::size_t u) const {
    const OpExec* w = ix_.latest_write(ix_.txn(u), ix_.var(u), u);
    return w && w->arg == ix_.val(u) ? w : nullptr;
  }

  void routine_consonance() {
    for (const auto& [x, us] : ix_.rsets) {
      for (std::size_t u : us) {
        const OpExec* w = instigator(u);
        if (!w)
          flag(Rule::routine_update_consonance, {u}, ev_str(u) + " is not instigated by a write");
        else if (!Index::write_consonant(*w))
          flag(Rule::routine_update_consonance, {w->inv, u},
               ev_str(u) + " is instigated by a write that is not consonant");
      }
    }
  }

  void recovery_consonance() {
    for (const auto& [x, as] : ix_.asets) {
      for (std::size_t a : as) {
        const TxnId t = ix_.txn(a);
        const MemInfo& m = *ix_.mem_of(t, x);
        const std::size_t first = std::min({m.views.empty() ? npos : m.views.front(),
                                            m.rsets.empty() ? npos : m.rsets.front(),
                                            m.asets.front()});
        const bool has_view = !m.views.empty() && m.views.front() == first;
        const std::size_t v = has_view ? first : npos;
        auto fail = [&](std::vector<std::size_t> at, const std::string& why) {
          flag(Rule::recovery_update_consonance, std::move(at), ev_str(a) + " " + why);
        };
        if (!has_view || !view_consonant(v) || !view_nonlocal(v)) {
          fail({a}, "is not conservative: no consonant initial view of " + var_name(x));
          continue;
        }
        if (ix_.val(v) != ix_.val(a)) fail({v, a}, "does not restore the value of " + ev_str(v));
        if (m.rsets.empty() || m.rsets.front() > a)
          fail({a}, "is not needed: no earlier routine update");
        if (ix_.info(t).commit != npos && ix_.info(t).commit > a)
          fail({a, ix_.info(t).commit}, "is not dooming: the transaction commits afterwards");
        for (const auto* list : {&m.views, &m.rsets, &m.asets})
          for (std::size_t e : *list)
            if (e > a) fail({a, e}, "is not ending: followed by " + ev_str(e));
        for (std::size_t b : as) {
          if (b > v && b < a && ix_.iso.before(x, ix_.txn(b), t))
            fail({v, b, a}, "is not clean: " + ev_str(b) + " intervenes");
        }
      }
    }
  }

  void read_consonance() {
    for (const auto& op : ix_.ops) {
      if (op.kind != OpKind::read || !op.complete() || op.outcome != RespCode::ok) continue;
      const VarId x = *op.var;
      const OpExec* w = ix_.latest_write(op.txn, x, op.inv);
      if (w) {
        if (w->arg != op.result || !Index::write_consonant(*w))
          flag(Rule::local_read_consonance, {w->inv, op.resp},
               "local read of " + var_name(x) + " by txn " + std::to_string(op.txn) +
                   " returns " + std::to_string(op.result) + " instead of its own write");
        continue;
      }
      // Non-local: depends on the transaction's own consonant non-local view;
      // updates by other transactions after the view do not matter.
      const MemInfo* m = ix_.mem_of(op.txn, x);
      bool ok = false;
      if (m) {
        for (std::size_t v : m->views) {
          if (v > op.resp || ix_.val(v) != op.result) continue;
          const bool own_update_between = std::any_of(
              m->rsets.begin(), m->rsets.end(), [&](std::size_t u) { return u > v && u < op.resp; });
          if (!own_update_between && view_consonant(v) && view_nonlocal(v)) ok = true;
        }
      }
      if (!ok)
        flag(Rule::nonlocal_read_consonance, {op.resp},
             "read of " + var_name(x) + " by txn " + std::to_string(op.txn) + " returns " +
                 std::to_string(op.result) + " without a matching consonant view");
    }
  }

  void write_consonance() {
    for (const auto& op : ix_.ops) {
      if (op.kind != OpKind::write || !op.complete() || op.outcome != RespCode::ok) continue;
      if (!Index::write_consonant(op))
        flag(Rule::write_consonance, {op.inv, op.resp},
             "write of " + std::to_string(op.arg) + " to " + var_name(*op.var) +
                 " is outside the domain");
    }
  }

  // -- commit rules ---------------------------------------------------------

  void committed_obbligato() {
    for (const auto& [key, list] : ix_.writes) {
      const auto [t, x] = key;
      const TxnInfo& info = ix_.info(t);
      if (!info.committed()) continue;
      // The last successful write on x is the one whose value must reach
      // memory; earlier ones are overwritten locally.
      const OpExec* last = nullptr;
      for (std::size_t k : list)
        if (ix_.ops[k].complete() && ix_.ops[k].outcome == RespCode::ok) last = &ix_.ops[k];
      if (!last) continue;
      const MemInfo* m = ix_.mem_of(t, x);
      bool ok = false;
      if (m)
        for (std::size_t u : m->rsets)
          if (u < info.commit && instigator(u) == last) ok = true;
      if (!ok)
        flag(Rule::committed_write_obbligato, {last->inv, info.commit},
             "committed txn " + std::to_string(t) + " never applied its write to " + var_name(x));
    }
  }

  // Whether view v (by another transaction) could have observed the effect
  // of transaction t: t had not yet aborted.
  bool potentially_viewed(TxnId t, std::size_t v) const {
    const TxnInfo& info = ix_.info(t);
    return !info.aborted() || v < info.abort;
  }

  void closing_obbligato() {
    for (const auto& [key, resp] : ix_.closing) {
      const auto [t, x] = key;
      const OpExec* w = nullptr;
      for (std::size_t k : ix_.writes.at(key))
        if (ix_.ops[k].resp == resp) w = &ix_.ops[k];
      const auto vit = ix_.views.find(x);
      if (!w || vit == ix_.views.end()) continue;
      const MemInfo* m = ix_.mem_of(t, x);
      for (std::size_t v : vit->second) {
        const TxnId j = ix_.txn(v);
        if (j == t || !ix_.iso.precedes(t, j) || !potentially_viewed(t, v)) continue;
        bool ok = false;
        if (m)
          for (std::size_t u : m->rsets)
            if (u < v && instigator(u) == w) ok = true;
        if (!ok)
          flag(Rule::closing_write_obbligato, {w->inv, v},
               "closing write of txn " + std::to_string(t) + " on " + var_name(x) +
                   " not applied before " + ev_str(v));
      }
    }
  }

  void view_obbligato() {
    for (const auto& [key, list] : ix_.writes) {
      const auto [t, x] = key;
      const auto vit = ix_.views.find(x);
      if (vit == ix_.views.end()) continue;
      bool any_ok = false;
      for (std::size_t k : list)
        if (ix_.ops[k].complete() && ix_.ops[k].outcome == RespCode::ok) any_ok = true;
      if (!any_ok) continue;
      const MemInfo* m = ix_.mem_of(t, x);
      const TxnInfo& info = ix_.info(t);
      for (std::size_t v : vit->second) {
        const TxnId j = ix_.txn(v);
        if (j == t || !ix_.iso.precedes(t, j)) continue;
        bool ok = info.aborted() && info.abort < v;
        if (m) {
          for (const auto* l : {&m->rsets, &m->asets})
            for (std::size_t u : *l)
              if (u < v) ok = true;
        }
        if (!ok)
          flag(Rule::view_write_obbligato, {ix_.ops[list.front()].inv, v},
               "txn " + std::to_string(t) + " wrote " + var_name(x) + " but " + ev_str(v) +
                   " precedes any update or abort of it");
      }
    }
  }

  void decisiveness() {
    for (const auto& [x, vs] : ix_.views) {
      for (std::size_t v : vs) {
        const auto u = ix_.viewed_rset(v);
        if (!u) continue;
        const TxnId j = ix_.txn(*u);
        const auto c = ix_.closing.find({j, x});
        const bool decided = c != ix_.closing.end() && c->second < v;
        const std::size_t commit = ix_.info(j).commit;
        const bool committed_between = commit != npos && commit > *u && commit < v;
        if (!decided && !committed_between)
          flag(Rule::decisiveness, {*u, v},
               ev_str(v) + " sees " + ev_str(*u) + " before its writer decided on " +
                   var_name(x) + " or committed");
      }
    }
  }

  void accords() {
    for (const auto& [x, vs] : ix_.views) {
      for (std::size_t v : vs) {
        const auto u = ix_.viewed_rset(v);
        if (!u) continue;
        const TxnId i = ix_.txn(*u), j = ix_.txn(v);
        const TxnInfo &si = ix_.info(i), &sj = ix_.info(j);
        if (want(Rule::abort_accord) && si.aborted() && sj.committed())
          flag(Rule::abort_accord, {*u, v, si.abort, sj.commit},
               "txn " + std::to_string(j) + " commits after viewing aborted txn " +
                   std::to_string(i));
        if (want(Rule::commit_accord) && sj.committed() && !si.committed())
          flag(Rule::commit_accord, {*u, v, sj.commit},
               "txn " + std::to_string(j) + " commits but its supplier txn " + std::to_string(i) +
                   " does not");
      }
    }
    if (!want(Rule::abort_accord)) return;
    for (const auto& [x, as] : ix_.asets) {
      for (std::size_t a : as) {
        const TxnId i = ix_.txn(a);
        const MemInfo& m = *ix_.mem_of(i, x);
        for (std::size_t u : m.rsets) {
          if (u > a) continue;
          for (std::size_t e = u + 1; e < a; ++e) {
            const Event& ev = ix_.ev[e];
            if (ev.txn == i || !is_view_or_rset(ev.kind) || ev.var != x) continue;
            if (ix_.info(ev.txn).committed())
              flag(Rule::abort_accord, {u, e, a, ix_.info(ev.txn).commit},
                   "txn " + std::to_string(ev.txn) + " accessed " + var_name(x) +
                       " between an update and a recovery of txn " + std::to_string(i) +
                       " and still committed");
          }
        }
      }
    }
  }

  void coherence() {
    for (const auto& [x, list] : ix_.iso.per_var()) {
      // Latest termination among predecessors that updated x; a predecessor
      // that only viewed x has no effect to settle.
      std::size_t worst = 0;
      TxnId worst_txn = 0;
      bool any = false;
      for (TxnId j : list) {
        const TxnInfo& sj = ix_.info(j);
        if (any && sj.committed() && !(worst < sj.commit))
          flag(Rule::coherence, {sj.commit},
               "txn " + std::to_string(j) + " commits before its predecessor txn " +
                   std::to_string(worst_txn) + " on " + var_name(x) + " terminated");
        const MemInfo* m = ix_.mem_of(j, x);
        if (m && !m->rsets.empty()) {
          const std::size_t term = ix_.info(j).terminated();
          if (!any || term > worst) {
            worst = term;
            worst_txn = j;
          }
          any = true;
        }
      }
    }
  }

  void abort_coda() {
    for (const auto& [key, m] : ix_.mem) {
      const auto [t, x] = key;
      const TxnInfo& info = ix_.info(t);
      const auto ait = ix_.asets.find(x);
      const std::vector<std::size_t> none;
      const auto& as = ait == ix_.asets.end() ? none : ait->second;
      auto cleaner = [&](std::size_t a) {
        const TxnId l = ix_.txn(a);
        return l == t || ix_.iso.before(x, l, t);
      };
      if (info.aborted() && !m.rsets.empty()) {
        const std::size_t u = m.rsets.front();
        const bool ok = std::any_of(as.begin(), as.end(), [&](std::size_t a) {
          return a > u && a < info.abort && cleaner(a);
        });
        if (!ok)
          flag(Rule::abort_coda, {u, info.abort},
               "aborted txn " + std::to_string(t) + " left its update of " + var_name(x) +
                   " unrecovered");
      }
      // A committed transaction never reverts its own state of x. Reverts by
      // other transactions are the business of abort accord.
      if (info.committed()) {
        std::size_t e = npos;
        for (const auto* l : {&m.views, &m.rsets})
          if (!l->empty()) e = std::min(e, l->front());
        if (e == npos) continue;
        for (std::size_t a : m.asets)
          if (a > e)
            flag(Rule::abort_coda, {e, a},
                 "committed txn " + std::to_string(t) + " has its state of " + var_name(x) +
                     " reverted by " + ev_str(a));
      }
    }
  }

  // -- chain rules ----------------------------------------------------------

  void chains() {
    // Edge k -> l iff l virtually views k.
    std::map<TxnId, std::set<TxnId>> succ;
    std::set<TxnId> nodes;
    for (const auto& [x, vs] : ix_.views) {
      for (std::size_t v : vs) {
        const auto it = ix_.rset_by_value.find({x, ix_.val(v)});
        if (it == ix_.rset_by_value.end()) continue;
        for (std::size_t u : it->second)
          if (u < v && ix_.txn(u) != ix_.txn(v)) succ[ix_.txn(u)].insert(ix_.txn(v));
      }
    }
    for (const auto& [t, _] : ix_.txns) nodes.insert(t);
    std::map<TxnId, std::set<TxnId>> reach;
    std::size_t work = 0;
    for (TxnId s : nodes) {
      auto& r = reach[s];
      std::vector<TxnId> todo{s};
      while (!todo.empty()) {
        const TxnId u = todo.back();
        todo.pop_back();
        const auto it = succ.find(u);
        if (it == succ.end()) continue;
        for (TxnId w : it->second) {
          if (!r.insert(w).second) continue;
          todo.push_back(w);
          if (++work > o_.max_chain_nodes) {
            r_.bound_exceeded = true;
            return;
          }
        }
      }
    }
    auto reaches = [&](TxnId a, TxnId b) { return reach[a].count(b) > 0; };

    if (want(Rule::chain_isolation)) {
      std::map<TxnId, std::size_t> last_vr;
      for (std::size_t i = 0; i < ix_.ev.size(); ++i)
        if (is_view_or_rset(ix_.ev[i].kind)) last_vr[ix_.txn(i)] = i;
      for (const auto& [x, us] : ix_.rsets) {
        const auto ait = ix_.asets.find(x);
        if (ait == ix_.asets.end()) continue;
        for (std::size_t u : us) {
          const TxnId k = ix_.txn(u);
          // First recovery that rolls k's value back.
          std::size_t b = npos;
          for (std::size_t a : ait->second) {
            if (a < u || ix_.val(a) == ix_.val(u)) continue;
            const TxnId l = ix_.txn(a);
            if (l == k || ix_.iso.before(x, l, k)) {
              b = a;
              break;
            }
          }
          if (b == npos) continue;
          std::vector<TxnId> members{k};
          for (TxnId m : reach[k]) members.push_back(m);
          for (TxnId m : members) {
            const auto it = last_vr.find(m);
            if (it == last_vr.end() || it->second < b) continue;
            flag(Rule::chain_isolation, {u, b, it->second},
                 "txn " + std::to_string(m) + " in a view chain from txn " + std::to_string(k) +
                     " accesses memory after " + ev_str(b) + " rolled back " + ev_str(u));
          }
        }
      }
    }

    if (want(Rule::chain_self_containment)) {
      for (const auto& [x, us] : ix_.rsets) {
        const auto vit = ix_.views.find(x);
        if (vit == ix_.views.end()) continue;
        for (std::size_t u : us) {
          const TxnId k = ix_.txn(u);
          for (std::size_t v : vit->second) {
            const TxnId l = ix_.txn(v);
            if (v < u || l == k || ix_.val(v) == ix_.val(u)) continue;
            const bool fwd = reaches(k, l);
            if (!fwd && !reaches(l, k)) continue;
            bool ok = false;
            if (fwd) {
              const auto it = ix_.rset_by_value.find({x, ix_.val(v)});
              if (it != ix_.rset_by_value.end()) {
                for (std::size_t w : it->second) {
                  const TxnId m = ix_.txn(w);
                  if (w > u && w < v && m != k && m != l && reaches(k, m) && reaches(m, l))
                    ok = true;
                }
              }
            }
            if (!ok)
              flag(Rule::chain_self_containment, {u, v},
                   ev_str(v) + " in a view chain with txn " + std::to_string(k) +
                       " sees a value from outside the chain after " + ev_str(u));
          }
        }
      }
    }
  }

 private:
  const Index& ix_;
  const HarmonyOptions& o_;
  ViolationReport& r_;
};

// Builds the index or records why the trace cannot be checked.
std::optional<Index> prepare(const std::vector<Event>& trace, ViolationReport& r) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].seq <= trace[i - 1].seq) {
      r.structural_error = "events out of seq order at seq " + std::to_string(trace[i].seq);
      return std::nullopt;
    }
  }
  for (const auto& e : trace) {
    if (is_memory(e.kind) && (!e.var || !e.value)) {
      r.structural_error = "memory event without variable or value at seq " + std::to_string(e.seq);
      return std::nullopt;
    }
    if ((is_marker(e.kind) || e.kind == EventKind::inv_read || e.kind == EventKind::inv_write) &&
        !e.var) {
      r.structural_error = "event without variable at seq " + std::to_string(e.seq);
      return std::nullopt;
    }
  }
  const auto wf = check_well_formed(to_history(trace));
  if (!wf) {
    r.structural_error = wf.reason;
    return std::nullopt;
  }
  try {
    return std::optional<Index>(std::in_place, trace);
  } catch (const ConfigError& e) {
    r.structural_error = e.what();
    return std::nullopt;
  }
}

}  // namespace

ViolationReport check_event_rules(const std::vector<Event>& trace, const HarmonyOptions& o) {
  ViolationReport r;
  const auto ix = prepare(trace, r);
  if (!ix) return r;
  Checker c(*ix, o, r);
  if (c.want(Rule::minimalism)) c.minimalism();
  if (c.want(Rule::isolation)) c.isolation();
  if (c.want(Rule::unique_writes)) c.unique();
  if (c.want(Rule::view_consonance)) c.view_consonance();
  if (c.want(Rule::routine_update_consonance)) c.routine_consonance();
  if (c.want(Rule::recovery_update_consonance)) c.recovery_consonance();
  if (c.want(Rule::nonlocal_read_consonance) || c.want(Rule::local_read_consonance)) {
    c.read_consonance();
    std::erase_if(r.violations, [&](const Violation& v) { return !c.want(v.rule); });
  }
  if (c.want(Rule::write_consonance)) c.write_consonance();
  return r;
}

ViolationReport check_commit_rules(const std::vector<Event>& trace, const HarmonyOptions& o) {
  ViolationReport r;
  const auto ix = prepare(trace, r);
  if (!ix) return r;
  Checker c(*ix, o, r);
  if (c.want(Rule::committed_write_obbligato)) c.committed_obbligato();
  if (c.want(Rule::closing_write_obbligato)) c.closing_obbligato();
  if (c.want(Rule::view_write_obbligato)) c.view_obbligato();
  if (c.want(Rule::decisiveness)) c.decisiveness();
  if (c.want(Rule::abort_accord) || c.want(Rule::commit_accord)) c.accords();
  if (c.want(Rule::coherence)) c.coherence();
  if (c.want(Rule::abort_coda)) c.abort_coda();
  return r;
}

ViolationReport check_chain_consistency(const std::vector<Event>& trace, const HarmonyOptions& o) {
  ViolationReport r;
  const auto ix = prepare(trace, r);
  if (!ix) return r;
  Checker c(*ix, o, r);
  if (c.want(Rule::chain_isolation) || c.want(Rule::chain_self_containment)) c.chains();
  return r;
}

ViolationReport check_harmony(const std::vector<Event>& trace, const HarmonyOptions& o) {
  ViolationReport r = check_event_rules(trace, o);
  if (r.structural_error) return r;
  r.merge(check_commit_rules(trace, o));
  r.merge(check_chain_consistency(trace, o));
  return r;
}

}  // namespace optsva
