// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
//
// Benchmark records, CSV round trips, SVA-vs-OptSVA comparison tables and
// the static chart written next to them.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "optsva/runner.hpp"
#include "optsva/workload.hpp"

namespace optsva {

// One engine run of one generated workload.
struct RunRecord {
  std::string config;  // e.g. short-5:1-high
  std::string engine;
  std::uint64_t seed = 0;
  std::uint32_t threads = 0;
  std::uint32_t txns_per_thread = 0;
  std::uint32_t ops = 0;
  std::string rw;  // "5:1"
  std::uint32_t hot = 0;
  Tick latency = 0;
  Tick makespan = 0;
  std::uint64_t exec_time = 0;
  std::uint64_t wall_ns = 0;
  std::uint64_t operations = 0;
  double throughput = 0.0;
  std::uint64_t committed = 0;
  std::uint64_t forced_aborts = 0;
  std::uint64_t manual_aborts = 0;
};

RunRecord make_record(const std::string& config, const WorkloadSpec& spec, Tick latency,
                      const RunMetrics& m);

std::string csv_header();
std::string to_csv_row(const RunRecord& r);
void write_csv(std::ostream& os, const std::vector<RunRecord>& rs);
// Columns are matched by header name. Throws ConfigError on malformed rows.
std::vector<RunRecord> read_csv(std::istream& is);

// Means over all seeds of one configuration.
struct ComparisonRow {
  std::string config;
  std::size_t sva_runs = 0, optsva_runs = 0;
  double sva_makespan = 0, optsva_makespan = 0;
  double sva_wall_ms = 0, optsva_wall_ms = 0;
  // (SVA - OptSVA) / SVA * 100 on mean makespan.
  double gain_pct = 0;
};

// One row per configuration that has runs of both engines, in order of
// first appearance.
std::vector<ComparisonRow> compare(const std::vector<RunRecord>& rs);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_json(const std::vector<ComparisonRow>& rows);
std::string comparison_svg(const std::vector<ComparisonRow>& rows);
// Writes report.csv, report.json and report.svg into dir (created if needed).
void write_report(const std::string& dir, const std::vector<ComparisonRow>& rows);

struct SweepSpec {
  std::uint32_t threads = 8;
  std::uint32_t txns_per_thread = 10;
  std::uint64_t first_seed = 1;
  std::uint32_t seeds = 30;
  Tick latency = 100;
};
// Runs both engines on every benchmark configuration and seed in virtual time
// with identical private versions.
std::vector<RunRecord> sweep(const SweepSpec& s);

WorkloadSpec workload_for(const BenchConfig& c, std::uint32_t threads,
                          std::uint32_t txns_per_thread, std::uint64_t seed);

}  // namespace optsva
