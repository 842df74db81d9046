// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace optsva {

using VarId = std::uint32_t;
using TxnId = std::uint64_t;
using Value = std::int64_t;
using Version = std::uint64_t;
using Tick = std::uint64_t;

enum class Outcome : std::uint8_t { ok, committed, aborted };

struct ReadResult {
  Outcome outcome = Outcome::ok;
  Value value = 0;
  bool aborted() const { return outcome == Outcome::aborted; }
};

// One declared variable of a transaction: upper bounds on reads and writes.
struct Access {
  VarId var = 0;
  std::uint32_t rub = 0;
  std::uint32_t wub = 0;
  bool operator==(const Access&) const = default;
};

struct TxnDescriptor {
  std::vector<Access> aset;
  // Process (thread) that executes the transaction; informational.
  std::uint32_t proc = 0;
};

// Values written by programs must be strictly positive. Zero is the initial
// value of every variable and negative values are outside the domain.
inline bool in_domain(Value v) { return v > 0; }

// Programmer errors. Distinct from a transaction returning Aborted.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};
class UpperBoundError : public UsageError {
 public:
  using UsageError::UsageError;
};
class AccessSetError : public UsageError {
 public:
  using UsageError::UsageError;
};
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace optsva
