// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Transactional programs: per-transaction operation scripts with declared
// access sets. Shared by the workload generator, the runner and the
// last-use opacity checker.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "optsva/types.hpp"

namespace optsva {

struct ProgOp {
  enum class Kind : std::uint8_t { read, write, commit, abort };
  Kind kind = Kind::read;
  VarId var = 0;
  Value value = 0;  // writes only

  bool operator==(const ProgOp&) const = default;
};

struct TxnProgram {
  TxnId id = 0;
  std::uint32_t thread = 0;
  std::vector<Access> aset;
  std::vector<ProgOp> ops;  // ends with commit or abort

  const Access* access(VarId x) const;
  bool operator==(const TxnProgram&) const = default;
};

struct ProgramModel {
  std::size_t vars = 0;
  std::vector<TxnProgram> txns;  // per thread, in execution order

  const TxnProgram* find(TxnId id) const;
  std::uint32_t num_threads() const;
  bool operator==(const ProgramModel&) const = default;
};

// Throws ConfigError if a script exceeds its bounds, touches an undeclared
// or unknown variable, or does not end with commit or abort.
void validate(const ProgramModel& p);

std::string to_json(const ProgramModel& p);
ProgramModel program_from_json(const std::string& text);
void save_program(const std::string& path, const ProgramModel& p);
ProgramModel load_program(const std::string& path);

}  // namespace optsva
