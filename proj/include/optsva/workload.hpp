// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// EigenBench-style workload generation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optsva/program.hpp"

namespace optsva {

struct WorkloadSpec {
  std::uint32_t threads = 8;
  std::uint32_t txns_per_thread = 10;
  std::uint32_t ops_per_txn = 10;
  // Read-to-write ratio, e.g. 5:1 or 1:5.
  std::uint32_t read_weight = 5;
  std::uint32_t write_weight = 1;
  std::uint32_t hot_size = 20;
  // Mild variables are shared but accessed only through a thread's own
  // slice; cold variables are private to a thread. Fractions of operations.
  std::uint32_t mild_size = 0;
  std::uint32_t cold_size = 0;
  double mild_fraction = 0.0;
  double cold_fraction = 0.0;
  double locality = 0.5;
  std::uint32_t history = 5;
  // Probability that a transaction ends in a manual abort at a random point.
  double abort_probability = 0.0;
  std::uint64_t seed = 1;

  std::string label() const;
};

// Deterministic for a given spec. Written values are globally unique and
// positive; declared bounds equal the generated per-variable counts (a
// transaction cut short by a manual abort keeps its full declaration).
ProgramModel generate(const WorkloadSpec& spec);

// Small randomized programs for safety stress runs: 2-5 transactions over
// 1-3 variables, with loose bounds, unaccessed declarations, manual aborts
// and occasional out-of-domain writes.
struct SmallSpec {
  std::uint32_t min_txns = 2, max_txns = 5;
  std::uint32_t min_vars = 1, max_vars = 3;
  std::uint32_t max_ops = 4;
  double abort_probability = 0.2;
  double loose_bound_probability = 0.25;
  double bad_write_probability = 0.02;
  std::uint64_t seed = 1;
};
ProgramModel generate_small(const SmallSpec& spec);

// The eight parameter combinations of the SVA-vs-OptSVA comparison: length
// (short 5 / long 10 operations), read-to-write ratio (5:1 / 1:5) and
// contention (high 20 / low 80 hot variables).
struct BenchConfig {
  std::string name;
  std::uint32_t ops;
  std::uint32_t read_weight, write_weight;
  std::uint32_t hot;
  bool high_contention;
};
std::vector<BenchConfig> bench_configs();

}  // namespace optsva
