// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Executable trace predicates whose conjunction is harmony: minimalism,
// isolation, consonance, obbligato, decisiveness, the accords, coherence,
// abort coda, chain consistency and unique writes.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "optsva/trace.hpp"

namespace optsva {

// Stable rule identifiers, as they appear in reports and on the CLI.
enum class Rule : std::uint8_t {
  minimalism,
  isolation,
  view_consonance,
  routine_update_consonance,
  recovery_update_consonance,
  nonlocal_read_consonance,
  local_read_consonance,
  write_consonance,
  committed_write_obbligato,
  closing_write_obbligato,
  view_write_obbligato,
  decisiveness,
  abort_accord,
  commit_accord,
  coherence,
  abort_coda,
  chain_isolation,
  chain_self_containment,
  unique_writes,
};

std::string_view to_string(Rule r);
std::optional<Rule> parse_rule(std::string_view s);
const std::vector<Rule>& all_rules();

struct Violation {
  Rule rule;
  std::vector<std::uint64_t> seqs;  // offending events
  std::string explanation;
};

struct ViolationReport {
  std::vector<Violation> violations;
  // Chain enumeration gave up; chain rules were not fully evaluated.
  bool bound_exceeded = false;
  // Malformed input; no rule was evaluated.
  std::optional<std::string> structural_error;

  bool ok() const { return violations.empty() && !bound_exceeded && !structural_error; }
  bool has(Rule r) const;
  std::set<Rule> rules() const;
  void merge(ViolationReport other);
  std::string to_json() const;
};

struct HarmonyOptions {
  // Evaluate only these rules (all if empty).
  std::set<Rule> only;
  // Upper bound on (source, reachable) pairs explored for view chains.
  std::size_t max_chain_nodes = 100000;
};

// Variable isolation order: for each variable, the transactions that viewed
// or routinely updated it, in the order of their accesses. `direct` and
// `precedes` are the derived direct order and its transitive closure.
class IsolationOrder {
 public:
  explicit IsolationOrder(const std::vector<Event>& trace);

  const std::map<VarId, std::vector<TxnId>>& per_var() const { return per_var_; }
  bool before(VarId x, TxnId a, TxnId b) const;
  bool direct(TxnId a, TxnId b) const;
  bool precedes(TxnId a, TxnId b) const;

 private:
  std::map<VarId, std::vector<TxnId>> per_var_;
  std::map<VarId, std::map<TxnId, std::size_t>> pos_;
  std::map<TxnId, std::size_t> index_;
  std::vector<std::vector<bool>> direct_, closure_;
};

// Minimalism, isolation, unique writes and all consonance rules.
ViolationReport check_event_rules(const std::vector<Event>& trace, const HarmonyOptions& o = {});
// Obbligato, decisiveness, accords, coherence and abort coda.
ViolationReport check_commit_rules(const std::vector<Event>& trace, const HarmonyOptions& o = {});
// Chain isolation and chain self-containment over all view chains.
ViolationReport check_chain_consistency(const std::vector<Event>& trace,
                                        const HarmonyOptions& o = {});
// Conjunction of the three; an empty report means the trace is harmonious.
ViolationReport check_harmony(const std::vector<Event>& trace, const HarmonyOptions& o = {});

}  // namespace optsva
