// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/workload.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <sstream>

namespace optsva {

namespace {

std::vector<Access> declare(const std::vector<ProgOp>& ops) {
  std::map<VarId, Access> m;
  for (const auto& op : ops) {
    if (op.kind != ProgOp::Kind::read && op.kind != ProgOp::Kind::write) continue;
    Access& a = m[op.var];
    a.var = op.var;
    (op.kind == ProgOp::Kind::read ? a.rub : a.wub) += 1;
  }
  std::vector<Access> out;
  for (auto& [x, a] : m) out.push_back(a);
  return out;
}

bool chance(std::mt19937_64& rng, double p) {
  return p > 0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

// Cuts the script at a random point and ends it with a manual abort.
void maybe_abort(std::mt19937_64& rng, double p, std::vector<ProgOp>& ops) {
  if (chance(rng, p)) {
    ops.resize(uniform(rng, 0, ops.size()));
    ops.push_back(ProgOp{ProgOp::Kind::abort, 0, 0});
  } else {
    ops.push_back(ProgOp{ProgOp::Kind::commit, 0, 0});
  }
}

}  // namespace

std::string WorkloadSpec::label() const {
  std::ostringstream os;
  os << (ops_per_txn <= 5 ? "short" : "long") << '-' << read_weight << ':' << write_weight << '-'
     << "hot" << hot_size;
  return os.str();
}

ProgramModel generate(const WorkloadSpec& s) {
  if (s.read_weight + s.write_weight == 0) throw ConfigError("read and write weights are both 0");
  if (s.hot_size == 0 && s.mild_fraction + s.cold_fraction < 1.0)
    throw ConfigError("hot array is empty");
  if ((s.mild_fraction > 0 && s.mild_size == 0) || (s.cold_fraction > 0 && s.cold_size == 0))
    throw ConfigError("operation fraction set for an empty array");
  if (s.mild_fraction + s.cold_fraction > 1.0) throw ConfigError("array fractions exceed 1");

  std::mt19937_64 rng(s.seed);
  const double p_write = static_cast<double>(s.write_weight) / (s.read_weight + s.write_weight);
  const VarId mild_base = s.hot_size;
  const VarId cold_base = mild_base + s.threads * s.mild_size;

  ProgramModel p;
  p.vars = cold_base + s.threads * s.cold_size;
  Value next_value = 1;
  TxnId next_id = 1;
  std::vector<std::deque<VarId>> recent(s.threads);
  // Transactions are emitted thread by thread; ids follow emission order.
  for (std::uint32_t t = 0; t < s.threads; ++t) {
    for (std::uint32_t k = 0; k < s.txns_per_thread; ++k) {
      std::vector<ProgOp> ops;
      for (std::uint32_t i = 0; i < s.ops_per_txn; ++i) {
        ProgOp op;
        op.kind = chance(rng, p_write) ? ProgOp::Kind::write : ProgOp::Kind::read;
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (u < s.cold_fraction) {
          op.var = cold_base + t * s.cold_size + uniform(rng, 0, s.cold_size - 1);
        } else if (u < s.cold_fraction + s.mild_fraction) {
          op.var = mild_base + t * s.mild_size + uniform(rng, 0, s.mild_size - 1);
        } else {
          auto& r = recent[t];
          if (!r.empty() && chance(rng, s.locality))
            op.var = r[uniform(rng, 0, r.size() - 1)];
          else
            op.var = static_cast<VarId>(uniform(rng, 0, s.hot_size - 1));
          r.erase(std::remove(r.begin(), r.end(), op.var), r.end());
          r.push_back(op.var);
          while (r.size() > s.history) r.pop_front();
        }
        if (op.kind == ProgOp::Kind::write) op.value = next_value++;
        ops.push_back(op);
      }
      TxnProgram txn;
      txn.id = next_id++;
      txn.thread = t;
      txn.aset = declare(ops);
      maybe_abort(rng, s.abort_probability, ops);
      txn.ops = std::move(ops);
      p.txns.push_back(std::move(txn));
    }
  }
  return p;
}

ProgramModel generate_small(const SmallSpec& s) {
  std::mt19937_64 rng(s.seed);
  const auto n = static_cast<std::uint32_t>(uniform(rng, s.min_txns, s.max_txns));
  const auto nv = static_cast<std::uint32_t>(uniform(rng, s.min_vars, s.max_vars));
  const auto threads = static_cast<std::uint32_t>(uniform(rng, 1, n));
  ProgramModel p;
  p.vars = nv;
  Value next_value = 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    TxnProgram t;
    t.id = i + 1;
    t.thread = i < threads ? i : static_cast<std::uint32_t>(uniform(rng, 0, threads - 1));
    std::vector<VarId> vars;
    for (VarId x = 0; x < nv; ++x)
      if (chance(rng, 0.6)) vars.push_back(x);
    if (vars.empty()) vars.push_back(static_cast<VarId>(uniform(rng, 0, nv - 1)));
    std::vector<ProgOp> ops;
    const auto len = uniform(rng, 1, s.max_ops);
    for (std::uint64_t k = 0; k < len; ++k) {
      ProgOp op;
      op.var = vars[uniform(rng, 0, vars.size() - 1)];
      op.kind = chance(rng, 0.5) ? ProgOp::Kind::write : ProgOp::Kind::read;
      if (op.kind == ProgOp::Kind::write)
        op.value = chance(rng, s.bad_write_probability) ? 0 : next_value++;
      ops.push_back(op);
    }
    t.aset = declare(ops);
    for (auto& a : t.aset) {
      if (chance(rng, s.loose_bound_probability)) ++(chance(rng, 0.5) ? a.rub : a.wub);
    }
    // Occasionally declare a variable that the script never touches.
    for (VarId x = 0; x < nv; ++x) {
      if (t.access(x) || !chance(rng, 0.1)) continue;
      const auto kind = uniform(rng, 0, 2);
      t.aset.push_back(Access{x, kind == 1 ? 0u : 1u, kind == 0 ? 0u : 1u});
    }
    std::sort(t.aset.begin(), t.aset.end(),
              [](const Access& a, const Access& b) { return a.var < b.var; });
    maybe_abort(rng, s.abort_probability, ops);
    t.ops = std::move(ops);
    p.txns.push_back(std::move(t));
  }
  // Keep per-thread execution order equal to id order.
  std::stable_sort(p.txns.begin(), p.txns.end(),
                   [](const TxnProgram& a, const TxnProgram& b) { return a.thread < b.thread; });
  return p;
}

std::vector<BenchConfig> bench_configs() {
  return {
      {"short-5:1-high", 5, 5, 1, 20, true},  {"short-1:5-high", 5, 1, 5, 20, true},
      {"long-5:1-high", 10, 5, 1, 20, true},  {"long-1:5-high", 10, 1, 5, 20, true},
      {"short-5:1-low", 5, 5, 1, 80, false},  {"short-1:5-low", 5, 1, 5, 80, false},
      {"long-5:1-low", 10, 5, 1, 80, false},  {"long-1:5-low", 10, 1, 5, 80, false},
  };
}

}  // namespace optsva
