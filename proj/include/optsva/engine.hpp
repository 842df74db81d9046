// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Common transactional API of the OptSVA engine and the SVA baseline.
#pragma once

#include <memory>
#include <string_view>

#include "optsva/runtime.hpp"
#include "optsva/trace.hpp"
#include "optsva/types.hpp"

namespace optsva {

enum class TxnState : std::uint8_t { active, committed, aborted };
enum class EngineKind : std::uint8_t { optsva, sva };

std::string_view to_string(EngineKind k);
EngineKind parse_engine_kind(std::string_view s);

// A running transaction. A handle is driven by one thread at a time.
class Txn {
 public:
  virtual ~Txn() = default;

  virtual TxnId id() const = 0;
  virtual TxnState state() const = 0;
  // Private version drawn for x at start.
  virtual Version pv(VarId x) const = 0;

  virtual ReadResult read(VarId x) = 0;
  virtual Outcome write(VarId x, Value v) = 0;
  // tryC: returns committed or aborted.
  virtual Outcome commit() = 0;
  // tryA: always returns aborted.
  virtual Outcome abort() = 0;
};

struct CellSnapshot {
  Value value = 0;
  Version gv = 0, lv = 0, ltv = 0, cv = 0;
};

struct EngineOptions {
  std::size_t num_vars = 0;
  Runtime* runtime = nullptr;
  TraceRecorder* recorder = nullptr;  // optional
};

class Engine {
 public:
  virtual ~Engine() = default;

  // Draws private versions for every declared variable. Throws ConfigError
  // for unknown or duplicated variables.
  virtual std::unique_ptr<Txn> start(const TxnDescriptor& desc) = 0;

  virtual EngineKind kind() const = 0;
  virtual std::size_t num_vars() const = 0;
  virtual CellSnapshot cell(VarId x) const = 0;
};

std::unique_ptr<Engine> make_optsva(const EngineOptions& opts);
std::unique_ptr<Engine> make_sva(const EngineOptions& opts);
std::unique_ptr<Engine> make_engine(EngineKind kind, const EngineOptions& opts);

}  // namespace optsva
