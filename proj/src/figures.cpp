// Copyright (c) 2026 The optsva authors.
// SPDX-License-Identifier: MIT
#include "optsva/figures.hpp"

namespace optsva {

namespace {

using Failure = std::optional<std::string>;

// Position of the n-th event of txn `t` matching kind (and var / value).
class Finder {
 public:
  explicit Finder(const ReplayResult& r) : r_(r) {}

  std::size_t at(std::string_view thread, EventKind k, std::size_t nth = 0,
                 std::optional<Value> value = {}) const {
    const TxnId t = r_.txn(thread).id;
    for (std::size_t i = 0; i < r_.trace.size(); ++i) {
      const Event& e = r_.trace[i];
      if (e.txn != t || e.kind != k || (value && e.value != value)) continue;
      if (nth-- == 0) return i;
    }
    throw std::out_of_range(std::string(to_string(k)) + " of " + std::string(thread) + " not found");
  }

  const Event& operator[](std::size_t i) const { return r_.trace[i]; }

 private:
  const ReplayResult& r_;
};

Failure expect(bool ok, const std::string& what) {
  if (ok) return std::nullopt;
  return what;
}

Failure guarded(const ReplayResult& r, const std::function<Failure(const Finder&)>& f) {
  try {
    return f(Finder(r));
  } catch (const std::out_of_range& e) {
    return std::string("missing event: ") + e.what();
  }
}

std::vector<FigureCheck> build() {
  std::vector<FigureCheck> v;
  v.push_back({"access-control", "j's read of x waits for i's commit and returns 1; k commits meanwhile",
               [](const ReplayResult& r) {
                 return guarded(r, [](const Finder& f) -> Failure {
                   const auto ci = f.at("i", EventKind::resp_tryc);
                   const auto rj_inv = f.at("j", EventKind::inv_read);
                   const auto rj = f.at("j", EventKind::resp_read);
                   const auto ck = f.at("k", EventKind::resp_tryc);
                   if (auto e = expect(rj_inv < ci && ci < rj, "j's read does not span i's commit")) return e;
                   if (auto e = expect(f[rj].value == 1, "j's read does not return 1")) return e;
                   return expect(ck < ci, "k does not commit before i");
                 });
               }});
  v.push_back({"early-release", "j's read follows i's update of x and returns before i commits",
               [](const ReplayResult& r) {
                 return guarded(r, [](const Finder& f) -> Failure {
                   const auto ui = f.at("i", EventKind::rupdate);
                   const auto rj = f.at("j", EventKind::resp_read);
                   const auto ci = f.at("i", EventKind::resp_tryc);
                   if (auto e = expect(ui < rj && rj < ci, "j's read is not between i's update and commit"))
                     return e;
                   return expect(f[rj].value == 1, "j's read does not return 1");
                 });
               }});
  v.push_back({"commit-order", "j invokes tryC before i commits but completes only after it",
               [](const ReplayResult& r) {
                 return guarded(r, [&r](const Finder& f) -> Failure {
                   const auto ci = f.at("i", EventKind::resp_tryc);
                   const auto cj_inv = f.at("j", EventKind::inv_tryc);
                   const auto cj = f.at("j", EventKind::resp_tryc);
                   if (auto e = expect(cj_inv < ci && ci < cj, "j's tryC does not wait for i's commit"))
                     return e;
                   return expect(r.txn("i").outcome == Outcome::committed &&
                                     r.txn("j").outcome == Outcome::committed,
                                 "not both committed");
                 });
               }});
  v.push_back({"forced-abort", "j reads i's released 1, i aborts, j's tryC returns aborted",
               [](const ReplayResult& r) {
                 return guarded(r, [&r](const Finder& f) -> Failure {
                   const auto rj = f.at("j", EventKind::resp_read);
                   const auto ai = f.at("i", EventKind::resp_trya);
                   const auto cj = f.at("j", EventKind::resp_tryc);
                   if (auto e = expect(f[rj].value == 1 && rj < ai, "j did not read 1 before i aborted"))
                     return e;
                   return expect(ai < cj && f[cj].outcome == RespCode::aborted &&
                                     r.txn("j").outcome == Outcome::aborted,
                                 "j's tryC does not return aborted after i's abort");
                 });
               }});
  v.push_back({"read-only", "k reads and writes x before i and j commit; j still reads 1",
               [](const ReplayResult& r) {
                 return guarded(r, [](const Finder& f) -> Failure {
                   const auto rk = f.at("k", EventKind::resp_read);
                   const auto uk = f.at("k", EventKind::rupdate);
                   const auto ci = f.at("i", EventKind::resp_tryc);
                   const auto cj = f.at("j", EventKind::resp_tryc);
                   const auto ck = f.at("k", EventKind::resp_tryc);
                   const auto rj2 = f.at("j", EventKind::resp_read, 1);
                   if (auto e = expect(f[rk].value == 1 && rk < ci && uk < ci,
                                       "k does not access x before i commits"))
                     return e;
                   if (auto e = expect(uk < rj2 && f[rj2].value == 1,
                                       "j's late read does not return its buffered 1"))
                     return e;
                   return expect(f[ck].outcome == RespCode::committed && f[cj].outcome == RespCode::committed,
                                 "k or j did not commit");
                 });
               }});
  v.push_back({"initial-writes", "j's write returns before i releases x; x gets 2 only afterwards",
               [](const ReplayResult& r) {
                 return guarded(r, [](const Finder& f) -> Failure {
                   const auto wj = f.at("j", EventKind::resp_write);
                   const auto rel_i = f.at("i", EventKind::release);
                   const auto uj = f.at("j", EventKind::rupdate);
                   const auto rj = f.at("j", EventKind::resp_read);
                   if (auto e = expect(wj < rel_i && rel_i < uj, "j's write is not buffered across i's release"))
                     return e;
                   return expect(f[rj].value == 2, "j's read does not return its own 2");
                 });
               }});
  v.push_back({"final-writes", "i's read after its release returns 1 although j already wrote 2",
               [](const ReplayResult& r) {
                 return guarded(r, [](const Finder& f) -> Failure {
                   const auto rel_i = f.at("i", EventKind::release);
                   const auto uj = f.at("j", EventKind::rupdate, 0, 2);
                   const auto ri2 = f.at("i", EventKind::resp_read, 1);
                   const auto ci = f.at("i", EventKind::resp_tryc);
                   if (auto e = expect(rel_i < uj && uj < ri2 && ri2 < ci, "events out of order")) return e;
                   return expect(f[ri2].value == 1, "i's read does not return 1");
                 });
               }});
  return v;
}

}  // namespace

const std::vector<FigureCheck>& figure_checks() {
  static const std::vector<FigureCheck> checks = build();
  return checks;
}

}  // namespace optsva
