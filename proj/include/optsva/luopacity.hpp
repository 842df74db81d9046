// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Brute-force last-use opacity for small histories. A history is last-use
// opaque if every prefix has a sequential equivalent of its completion that
// preserves real-time order, in which committed transactions are legal and
// every other transaction is legal against what it may see: committed
// predecessors plus the decided parts of live or overlapping aborted ones.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "optsva/program.hpp"
#include "optsva/trace.hpp"

namespace optsva {

// A sequential history: whole transactions one after another.
struct SeqHistory {
  std::vector<TxnId> order;
  History events;
};

// (txn, var) pairs for which the transaction executed a complete write that
// reached the declared write bound, i.e. decided on the variable.
std::set<std::pair<TxnId, VarId>> closing_writes(const ProgramModel& p, const History& h);

// Sequential equivalent of completion(h) ordered by real time, then
// isolation order in `tr`, then viewers before writers. Returns nullopt when
// the rules conflict.
std::optional<SeqHistory> build_seq(const History& h, const std::vector<Event>& tr);

// Concatenates the subhistories of the given order of transactions of the
// completed history hc.
SeqHistory sequential(const History& hc, const std::vector<TxnId>& order);

// Decided subhistory completion of t: its start, its operations on decided
// variables, and a successful commit.
History decided_completion(const History& h, TxnId t, const std::set<std::pair<TxnId, VarId>>& decided);

// Committed predecessors of i in s, plus i itself.
History vis(const SeqHistory& s, TxnId i);
// Last-use visible history of i built from trace information: committed
// predecessors whole, aborted real-time predecessors excluded, and the
// decided completion of any other predecessor linked to i by a view chain.
History lvis(const SeqHistory& s, TxnId i, const std::vector<Event>& tr, const ProgramModel& p);
// Same, by the direct definition: decided completion of every uncommitted
// predecessor in s that is decided and does not precede i in real time.
History luvis(const SeqHistory& s, TxnId i, const History& h, const ProgramModel& p);

// Every successful read returns the latest preceding successful write to
// its variable (0 if none), and every written value is in the domain.
bool legal(const History& sh);

enum class LuVerdict { opaque, not_opaque, bound_exceeded };
std::string_view to_string(LuVerdict v);

struct LuOptions {
  std::size_t max_txns = 5;
  // Try the trace-guided construction before enumerating.
  bool construction = true;
  // Enumerate with luvis instead of the chain-based lvis rules. Stricter:
  // a decided transaction that aborted while overlapping a reader becomes
  // visible to it even if the reader never saw its values.
  bool direct_visibility = false;
};

struct LuResult {
  LuVerdict verdict = LuVerdict::opaque;
  std::vector<TxnId> witness;      // order of S for the checked (last) prefix
  bool by_construction = false;    // witness found without enumeration
  std::optional<std::size_t> failing_prefix;  // events in the shortest bad prefix
  std::string reason;
  bool ok() const { return verdict == LuVerdict::opaque; }
  std::string to_json() const;
};

LuResult check_final_state_lu_opaque(const History& h, const ProgramModel& p,
                                     const std::vector<Event>& tr, const LuOptions& o = {});
LuResult check_lu_opaque(const History& h, const ProgramModel& p, const std::vector<Event>& tr,
                         const LuOptions& o = {});

}  // namespace optsva
