// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/replay.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "optsva/sim_runtime.hpp"

namespace optsva {

namespace {

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T number(const std::string& tok, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ConfigError("line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

class Parser {
 public:
  Script run(std::string_view text) {
    std::size_t line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line;
      parse_line(text.substr(pos, end - pos), line);
      pos = end + 1;
    }
    for (auto& ops : s_.ops) ops = with_starts(ops);
    return std::move(s_);
  }

 private:
  [[noreturn]] static void fail(std::size_t line, const std::string& what) {
    throw ConfigError("line " + std::to_string(line) + ": " + what);
  }

  VarId var(const std::string& name) {
    auto it = std::find(s_.vars.begin(), s_.vars.end(), name);
    if (it != s_.vars.end()) return static_cast<VarId>(it - s_.vars.begin());
    s_.vars.push_back(name);
    return static_cast<VarId>(s_.vars.size() - 1);
  }

  std::size_t thread(const std::string& name) {
    auto it = std::find(s_.threads.begin(), s_.threads.end(), name);
    if (it != s_.threads.end()) return static_cast<std::size_t>(it - s_.threads.begin());
    s_.threads.push_back(name);
    s_.ops.emplace_back();
    return s_.threads.size() - 1;
  }

  // x:r1:w2, either bound may be omitted.
  Access declaration(const std::string& tok, std::size_t line) {
    std::vector<std::string> parts;
    std::stringstream ss(tok);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.empty() || parts[0].empty()) fail(line, "bad declaration '" + tok + "'");
    Access a;
    a.var = var(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const std::string& p = parts[i];
      if (p.size() < 2 || (p[0] != 'r' && p[0] != 'w'))
        fail(line, "bad bound '" + p + "' in '" + tok + "'");
      (p[0] == 'r' ? a.rub : a.wub) = number<std::uint32_t>(p.substr(1), line);
    }
    return a;
  }

  void parse_line(std::string_view raw, std::size_t line) {
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto colon = raw.find(':');
    auto head = tokenize(raw.substr(0, colon == std::string_view::npos ? raw.size() : colon));
    if (head.empty()) return;
    if (head[0] != "thread" || head.size() != 2 || colon == std::string_view::npos)
      fail(line, "expected 'thread <name>: <op>'");
    const std::size_t t = thread(head[1]);
    auto tok = tokenize(raw.substr(colon + 1));
    if (tok.empty()) fail(line, "missing operation");
    ScriptOp op;
    op.line = line;
    const std::string& k = tok[0];
    auto arity = [&](std::size_t n) {
      if (tok.size() != n + 1) fail(line, "'" + k + "' takes " + std::to_string(n) + " argument(s)");
    };
    if (k == "start") {
      op.kind = ScriptOp::Kind::start;
      for (std::size_t i = 1; i < tok.size(); ++i) op.aset.push_back(declaration(tok[i], line));
    } else if (k == "read") {
      arity(1);
      op.kind = ScriptOp::Kind::read;
      op.var = var(tok[1]);
    } else if (k == "write") {
      arity(2);
      op.kind = ScriptOp::Kind::write;
      op.var = var(tok[1]);
      op.value = number<Value>(tok[2], line);
    } else if (k == "commit" || k == "abort") {
      arity(0);
      op.kind = k == "commit" ? ScriptOp::Kind::commit : ScriptOp::Kind::abort;
    } else if (k == "barrier") {
      arity(1);
      op.kind = ScriptOp::Kind::barrier;
      op.barrier = tok[1];
    } else if (k == "work") {
      arity(1);
      op.kind = ScriptOp::Kind::work;
      op.ticks = number<Tick>(tok[1], line);
    } else {
      fail(line, "unknown operation '" + k + "'");
    }
    s_.ops[t].push_back(std::move(op));
  }

  // Inserts implicit starts and fills counted bounds.
  static std::vector<ScriptOp> with_starts(const std::vector<ScriptOp>& in) {
    std::vector<ScriptOp> out;
    std::optional<std::size_t> open;  // index of the current start in out
    std::map<VarId, Access> counted;
    auto close = [&](std::size_t line) {
      if (!open) fail(line, "commit or abort outside a transaction");
      ScriptOp& st = out[*open];
      if (st.aset.empty())
        for (auto& [x, a] : counted) st.aset.push_back(a);
      counted.clear();
      open.reset();
    };
    for (const ScriptOp& op : in) {
      switch (op.kind) {
        case ScriptOp::Kind::start:
          if (open) fail(op.line, "start inside a transaction");
          open = out.size();
          out.push_back(op);
          continue;
        case ScriptOp::Kind::read:
        case ScriptOp::Kind::write: {
          if (!open) {
            ScriptOp st;
            st.kind = ScriptOp::Kind::start;
            st.line = op.line;
            open = out.size();
            out.push_back(st);
          }
          Access& a = counted[op.var];
          a.var = op.var;
          ++(op.kind == ScriptOp::Kind::read ? a.rub : a.wub);
          break;
        }
        case ScriptOp::Kind::commit:
        case ScriptOp::Kind::abort:
          out.push_back(op);
          close(op.line);
          continue;
        default:
          break;
      }
      out.push_back(op);
    }
    if (open) fail(out[*open].line, "transaction never ends");
    return out;
  }

  Script s_;
};

struct Barrier {
  Waitable w;
  std::size_t participants = 0;
  std::size_t arrivals = 0;
};

}  // namespace

Script parse_script(std::string_view text) { return Parser().run(text); }

Script load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str());
}

const ReplayTxn& ReplayResult::txn(std::string_view thread, std::size_t k) const {
  for (const auto& t : txns)
    if (t.thread == thread && t.index == k) return t;
  throw std::out_of_range("no transaction " + std::to_string(k) + " on thread " + std::string(thread));
}

ReplayResult replay(const Script& s, const ReplayOptions& o) {
  SimOptions so;
  so.policy = SimPolicy::virtual_time;
  SimRuntime rt(so);
  TraceRecorder rec([&rt] { return rt.now(); });
  auto engine = make_engine(o.engine, EngineOptions{s.vars.size(), &rt, &rec});

  std::map<std::string, Barrier> barriers;
  for (const auto& ops : s.ops) {
    std::set<std::string> named;
    for (const auto& op : ops)
      if (op.kind == ScriptOp::Kind::barrier) named.insert(op.barrier);
    for (const auto& b : named) ++barriers[b].participants;
  }
  for (auto& [name, b] : barriers) b.w.name = "barrier " + name;

  std::vector<std::vector<ReplayTxn>> runs(s.ops.size());
  std::vector<std::function<void()>> fns;
  for (std::size_t t = 0; t < s.ops.size(); ++t) {
    fns.push_back([&, t] {
      std::map<std::string, std::size_t> arrived;
      std::unique_ptr<Txn> txn;
      bool ended = true;  // current transaction already returned aborted
      for (const ScriptOp& op : s.ops[t]) {
        switch (op.kind) {
          case ScriptOp::Kind::start:
            txn = engine->start(TxnDescriptor{op.aset, static_cast<std::uint32_t>(t)});
            runs[t].push_back(ReplayTxn{s.threads[t], runs[t].size(), txn->id(), Outcome::ok, {}});
            ended = false;
            break;
          case ScriptOp::Kind::read:
            if (ended) break;
            if (auto r = txn->read(op.var); r.aborted()) {
              runs[t].back().outcome = Outcome::aborted;
              ended = true;
            } else {
              runs[t].back().reads.push_back(r.value);
              rt.work(o.latency);
            }
            break;
          case ScriptOp::Kind::write:
            if (ended) break;
            if (txn->write(op.var, op.value) == Outcome::aborted) {
              runs[t].back().outcome = Outcome::aborted;
              ended = true;
            } else {
              rt.work(o.latency);
            }
            break;
          case ScriptOp::Kind::commit:
          case ScriptOp::Kind::abort:
            if (!ended)
              runs[t].back().outcome = op.kind == ScriptOp::Kind::commit ? txn->commit() : txn->abort();
            ended = true;
            break;
          case ScriptOp::Kind::barrier: {
            Barrier& b = barriers.at(op.barrier);
            const std::size_t k = ++arrived[op.barrier];
            {
              std::lock_guard<std::mutex> g(b.w.mu);
              ++b.arrivals;
            }
            rt.notify(b.w);
            rt.wait_until(b.w, [&b, k] { return b.arrivals >= k * b.participants; });
            break;
          }
          case ScriptOp::Kind::work:
            rt.work(op.ticks);
            break;
        }
      }
    });
  }
  rt.run_threads(std::move(fns));
  rec.seal();

  ReplayResult res;
  res.trace = rec.events();
  for (auto& per : runs)
    for (auto& r : per) res.txns.push_back(std::move(r));
  for (VarId x = 0; x < s.vars.size(); ++x) res.final_values.push_back(engine->cell(x).value);
  res.makespan = rt.makespan();
  return res;
}

}  // namespace optsva
