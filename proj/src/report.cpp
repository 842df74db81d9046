// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace optsva {

namespace {

const std::vector<std::string>& columns() {
  static const std::vector<std::string> c = {
      "config",   "engine",      "seed",      "threads",    "txns_per_thread", "ops",
      "rw",       "hot",         "latency",   "makespan",   "exec_time",       "wall_ns",
      "operations", "throughput", "committed", "forced_aborts", "manual_aborts"};
  return c;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_num(const std::string& s, const std::string& col) {
  std::istringstream is(s);
  T v{};
  if (!(is >> v) || !is.eof()) throw ConfigError("bad value '" + s + "' in column " + col);
  return v;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

RunRecord make_record(const std::string& config, const WorkloadSpec& spec, Tick latency,
                      const RunMetrics& m) {
  RunRecord r;
  r.config = config;
  r.engine = m.engine;
  r.seed = spec.seed;
  r.threads = spec.threads;
  r.txns_per_thread = spec.txns_per_thread;
  r.ops = spec.ops_per_txn;
  r.rw = std::to_string(spec.read_weight) + ":" + std::to_string(spec.write_weight);
  r.hot = spec.hot_size;
  r.latency = latency;
  r.makespan = m.makespan;
  r.exec_time = m.exec_time;
  r.wall_ns = m.wall_ns;
  r.operations = m.operations;
  r.throughput = m.throughput;
  r.committed = m.committed;
  r.forced_aborts = m.forced_aborts;
  r.manual_aborts = m.manual_aborts;
  return r;
}

std::string csv_header() {
  std::string h;
  for (const auto& c : columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

std::string to_csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.config << ',' << r.engine << ',' << r.seed << ',' << r.threads << ',' << r.txns_per_thread
     << ',' << r.ops << ',' << r.rw << ',' << r.hot << ',' << r.latency << ',' << r.makespan << ','
     << r.exec_time << ',' << r.wall_ns << ',' << r.operations << ',' << fixed(r.throughput, 1) << ','
     << r.committed << ',' << r.forced_aborts << ',' << r.manual_aborts;
  return os.str();
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& rs) {
  os << csv_header() << '\n';
  for (const auto& r : rs) os << to_csv_row(r) << '\n';
}

std::vector<RunRecord> read_csv(std::istream& is) {
  std::vector<RunRecord> out;
  std::string line;
  std::map<std::string, std::size_t> col;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < f.size(); ++i) col[f[i]] = i;
      for (const auto& c : columns())
        if (!col.count(c)) throw ConfigError("csv header lacks column " + c);
      continue;
    }
    if (f.size() != col.size()) throw ConfigError("csv row has " + std::to_string(f.size()) + " fields");
    if (f == split(csv_header())) continue;  // header repeated by concatenation
    auto get = [&](const std::string& c) -> const std::string& { return f[col.at(c)]; };
    RunRecord r;
    r.config = get("config");
    r.engine = get("engine");
    r.seed = parse_num<std::uint64_t>(get("seed"), "seed");
    r.threads = parse_num<std::uint32_t>(get("threads"), "threads");
    r.txns_per_thread = parse_num<std::uint32_t>(get("txns_per_thread"), "txns_per_thread");
    r.ops = parse_num<std::uint32_t>(get("ops"), "ops");
    r.rw = get("rw");
    r.hot = parse_num<std::uint32_t>(get("hot"), "hot");
    r.latency = parse_num<Tick>(get("latency"), "latency");
    r.makespan = parse_num<Tick>(get("makespan"), "makespan");
    r.exec_time = parse_num<std::uint64_t>(get("exec_time"), "exec_time");
    r.wall_ns = parse_num<std::uint64_t>(get("wall_ns"), "wall_ns");
    r.operations = parse_num<std::uint64_t>(get("operations"), "operations");
    r.throughput = parse_num<double>(get("throughput"), "throughput");
    r.committed = parse_num<std::uint64_t>(get("committed"), "committed");
    r.forced_aborts = parse_num<std::uint64_t>(get("forced_aborts"), "forced_aborts");
    r.manual_aborts = parse_num<std::uint64_t>(get("manual_aborts"), "manual_aborts");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ComparisonRow> compare(const std::vector<RunRecord>& rs) {
  std::vector<std::string> order;
  std::map<std::string, ComparisonRow> acc;
  for (const auto& r : rs) {
    if (!acc.count(r.config)) order.push_back(r.config);
    ComparisonRow& c = acc[r.config];
    c.config = r.config;
    const double wall = static_cast<double>(r.wall_ns) / 1e6;
    if (r.engine == "sva") {
      ++c.sva_runs;
      c.sva_makespan += static_cast<double>(r.makespan);
      c.sva_wall_ms += wall;
    } else if (r.engine == "optsva") {
      ++c.optsva_runs;
      c.optsva_makespan += static_cast<double>(r.makespan);
      c.optsva_wall_ms += wall;
    }
  }
  std::vector<ComparisonRow> out;
  for (const auto& name : order) {
    ComparisonRow c = acc[name];
    if (c.sva_runs == 0 || c.optsva_runs == 0) continue;
    c.sva_makespan /= static_cast<double>(c.sva_runs);
    c.sva_wall_ms /= static_cast<double>(c.sva_runs);
    c.optsva_makespan /= static_cast<double>(c.optsva_runs);
    c.optsva_wall_ms /= static_cast<double>(c.optsva_runs);
    c.gain_pct = c.sva_makespan > 0 ? (c.sva_makespan - c.optsva_makespan) / c.sva_makespan * 100 : 0;
    out.push_back(c);
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "config,sva_runs,optsva_runs,sva_makespan,optsva_makespan,gain_pct,sva_wall_ms,optsva_wall_ms\n";
  for (const auto& r : rows)
    os << r.config << ',' << r.sva_runs << ',' << r.optsva_runs << ',' << fixed(r.sva_makespan, 1) << ','
       << fixed(r.optsva_makespan, 1) << ',' << fixed(r.gain_pct, 1) << ',' << fixed(r.sva_wall_ms, 3)
       << ',' << fixed(r.optsva_wall_ms, 3) << '\n';
  return os.str();
}

std::string comparison_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"config", r.config},
                 {"sva_runs", r.sva_runs},
                 {"optsva_runs", r.optsva_runs},
                 {"sva_makespan", r.sva_makespan},
                 {"optsva_makespan", r.optsva_makespan},
                 {"gain_pct", r.gain_pct},
                 {"sva_wall_ms", r.sva_wall_ms},
                 {"optsva_wall_ms", r.optsva_wall_ms}});
  return j.dump(2) + "\n";
}

// Grouped bars of mean makespan per configuration, gain printed above.
std::string comparison_svg(const std::vector<ComparisonRow>& rows) {
  const double group = 110, bar = 36, left = 70, top = 40, plot_h = 260;
  const double width = left + group * static_cast<double>(std::max<std::size_t>(rows.size(), 1)) + 20;
  const double height = top + plot_h + 90;
  double peak = 1;
  for (const auto& r : rows) peak = std::max({peak, r.sva_makespan, r.optsva_makespan});
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">Mean logical makespan (ticks): SVA vs OptSVA</text>\n";
  const double base = top + plot_h;
  os << "<line x1=\"" << left << "\" y1=\"" << base << "\" x2=\"" << width - 10 << "\" y2=\"" << base
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << base
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = base - plot_h * t / 4;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
       << fixed(peak * t / 4, 0) << "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double x = left + 10 + group * static_cast<double>(i);
    const double hs = plot_h * r.sva_makespan / peak, ho = plot_h * r.optsva_makespan / peak;
    os << "<rect x=\"" << x << "\" y=\"" << base - hs << "\" width=\"" << bar << "\" height=\"" << hs
       << "\" fill=\"#9e9e9e\"><title>SVA " << fixed(r.sva_makespan, 1) << "</title></rect>\n";
    os << "<rect x=\"" << x + bar + 4 << "\" y=\"" << base - ho << "\" width=\"" << bar << "\" height=\""
       << ho << "\" fill=\"#1f77b4\"><title>OptSVA " << fixed(r.optsva_makespan, 1) << "</title></rect>\n";
    os << "<text x=\"" << x + bar + 2 << "\" y=\"" << base - std::max(hs, ho) - 6
       << "\" text-anchor=\"middle\">" << fixed(r.gain_pct, 1) << "%</text>\n";
    os << "<text x=\"" << x + bar + 2 << "\" y=\"" << base + 16 << "\" text-anchor=\"middle\">"
       << escape_xml(r.config) << "</text>\n";
  }
  const double ly = base + 50;
  os << "<rect x=\"" << left << "\" y=\"" << ly - 10 << "\" width=\"12\" height=\"12\" fill=\"#9e9e9e\"/>"
     << "<text x=\"" << left + 16 << "\" y=\"" << ly << "\">SVA</text>\n";
  os << "<rect x=\"" << left + 60 << "\" y=\"" << ly - 10
     << "\" width=\"12\" height=\"12\" fill=\"#1f77b4\"/><text x=\"" << left + 76 << "\" y=\"" << ly
     << "\">OptSVA (label: gain %)</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_report(const std::string& dir, const std::vector<ComparisonRow>& rows) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw ConfigError("cannot write " + name + " in " + dir);
    out << text;
  };
  put("report.csv", comparison_csv(rows));
  put("report.json", comparison_json(rows));
  put("report.svg", comparison_svg(rows));
}

WorkloadSpec workload_for(const BenchConfig& c, std::uint32_t threads, std::uint32_t txns_per_thread,
                          std::uint64_t seed) {
  WorkloadSpec w;
  w.threads = threads;
  w.txns_per_thread = txns_per_thread;
  w.ops_per_txn = c.ops;
  w.read_weight = c.read_weight;
  w.write_weight = c.write_weight;
  w.hot_size = c.hot;
  w.seed = seed;
  return w;
}

std::vector<RunRecord> sweep(const SweepSpec& s) {
  std::vector<RunRecord> out;
  for (const auto& c : bench_configs()) {
    for (std::uint64_t seed = s.first_seed; seed < s.first_seed + s.seeds; ++seed) {
      const WorkloadSpec w = workload_for(c, s.threads, s.txns_per_thread, seed);
      const ProgramModel p = generate(w);
      for (EngineKind k : {EngineKind::sva, EngineKind::optsva}) {
        RunOptions o;
        o.engine = k;
        o.latency = s.latency;
        o.record = false;
        o.ordered_starts = true;
        out.push_back(make_record(c.name, w, s.latency, run_program(p, o).metrics));
      }
    }
  }
  return out;
}

}  // namespace optsva
