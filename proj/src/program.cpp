// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/program.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace optsva {

using nlohmann::ordered_json;

const Access* TxnProgram::access(VarId x) const {
  for (const auto& a : aset)
    if (a.var == x) return &a;
  return nullptr;
}

const TxnProgram* ProgramModel::find(TxnId id) const {
  for (const auto& t : txns)
    if (t.id == id) return &t;
  return nullptr;
}

std::uint32_t ProgramModel::num_threads() const {
  std::uint32_t n = 0;
  for (const auto& t : txns) n = std::max(n, t.thread + 1);
  return n;
}

void validate(const ProgramModel& p) {
  std::set<TxnId> ids;
  for (const auto& t : p.txns) {
    const std::string who = "txn " + std::to_string(t.id);
    if (!ids.insert(t.id).second) throw ConfigError("duplicate " + who);
    std::set<VarId> declared;
    for (const auto& a : t.aset) {
      if (a.var >= p.vars) throw ConfigError(who + ": unknown variable " + std::to_string(a.var));
      if (!declared.insert(a.var).second) throw ConfigError(who + ": variable declared twice");
    }
    if (t.ops.empty() || (t.ops.back().kind != ProgOp::Kind::commit &&
                          t.ops.back().kind != ProgOp::Kind::abort))
      throw ConfigError(who + ": script must end with commit or abort");
    std::map<VarId, std::pair<std::uint32_t, std::uint32_t>> used;
    for (std::size_t i = 0; i < t.ops.size(); ++i) {
      const ProgOp& op = t.ops[i];
      const bool last = i + 1 == t.ops.size();
      if (op.kind == ProgOp::Kind::commit || op.kind == ProgOp::Kind::abort) {
        if (!last) throw ConfigError(who + ": operations after commit or abort");
        continue;
      }
      const Access* a = t.access(op.var);
      if (!a) throw ConfigError(who + ": variable " + std::to_string(op.var) + " not declared");
      auto& [r, w] = used[op.var];
      if (op.kind == ProgOp::Kind::read && ++r > a->rub)
        throw ConfigError(who + ": read bound exceeded on " + std::to_string(op.var));
      if (op.kind == ProgOp::Kind::write && ++w > a->wub)
        throw ConfigError(who + ": write bound exceeded on " + std::to_string(op.var));
    }
  }
}

namespace {

std::string kind_name(ProgOp::Kind k) {
  switch (k) {
    case ProgOp::Kind::read: return "read";
    case ProgOp::Kind::write: return "write";
    case ProgOp::Kind::commit: return "commit";
    case ProgOp::Kind::abort: return "abort";
  }
  return "";
}

ProgOp::Kind parse_kind(const std::string& s) {
  if (s == "read") return ProgOp::Kind::read;
  if (s == "write") return ProgOp::Kind::write;
  if (s == "commit") return ProgOp::Kind::commit;
  if (s == "abort") return ProgOp::Kind::abort;
  throw ConfigError("unknown op '" + s + "'");
}

}  // namespace

std::string to_json(const ProgramModel& p) {
  ordered_json j;
  j["vars"] = p.vars;
  auto txns = ordered_json::array();
  for (const auto& t : p.txns) {
    ordered_json jt;
    jt["id"] = t.id;
    jt["thread"] = t.thread;
    auto aset = ordered_json::array();
    for (const auto& a : t.aset) aset.push_back({{"var", a.var}, {"rub", a.rub}, {"wub", a.wub}});
    jt["aset"] = std::move(aset);
    auto ops = ordered_json::array();
    for (const auto& op : t.ops) {
      ordered_json jo;
      jo["op"] = kind_name(op.kind);
      if (op.kind == ProgOp::Kind::read || op.kind == ProgOp::Kind::write) jo["var"] = op.var;
      if (op.kind == ProgOp::Kind::write) jo["value"] = op.value;
      ops.push_back(std::move(jo));
    }
    jt["ops"] = std::move(ops);
    txns.push_back(std::move(jt));
  }
  j["txns"] = std::move(txns);
  return j.dump(1);
}

ProgramModel program_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ProgramModel p;
  p.vars = j.at("vars").get<std::size_t>();
  for (const auto& jt : j.at("txns")) {
    TxnProgram t;
    t.id = jt.at("id").get<TxnId>();
    t.thread = jt.value("thread", 0u);
    for (const auto& a : jt.at("aset"))
      t.aset.push_back(Access{a.at("var").get<VarId>(), a.value("rub", 0u), a.value("wub", 0u)});
    for (const auto& jo : jt.at("ops")) {
      ProgOp op;
      op.kind = parse_kind(jo.at("op").get<std::string>());
      op.var = jo.value("var", 0u);
      op.value = jo.value("value", Value{0});
      t.ops.push_back(op);
    }
    p.txns.push_back(std::move(t));
  }
  validate(p);
  return p;
}

void save_program(const std::string& path, const ProgramModel& p) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << to_json(p) << '\n';
}

ProgramModel load_program(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return program_from_json(ss.str());
}

}  // namespace optsva
