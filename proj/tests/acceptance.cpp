/*
 * Copyright 2026 The memcam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Acceptance suite: one PASS/FAIL line per criterion. Expected values are
// written out here as literals rather than taken from the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "memcam/cam.hpp"
#include "memcam/crossbar.hpp"
#include "memcam/error.hpp"
#include "memcam/hybrid.hpp"
#include "memcam/model.hpp"

using namespace memcam;

namespace {

// Pinned tolerances.
constexpr double kFastLimitS = 1.0;        // criteria 1 and 2
constexpr double kEnergyRelTol = 1e-9;     // criterion 3
constexpr double kTraceLimitS = 60.0;      // criterion 5, per structure
constexpr double kLifetimeScaleTol = 0.10; // criterion 6
constexpr double kMemCamMinMinutes = 10.0; // criterion 7
constexpr double kMemCamMaxMinutes = 60.0;
constexpr double kCrossoverLo = 1e14;      // criterion 9
constexpr double kCrossoverHi = 1e18;
constexpr double kFlatTol = 0.10;
constexpr double kTbMinYears = 60.0;       // criterion 10

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::size_t> powers_of_two() {
  std::vector<std::size_t> v;
  for (std::size_t k = 2; k <= 1024; k *= 2) v.push_back(k);
  return v;
}

// 1 ------------------------------------------------------------------------
Outcome tcam_truth_table() {
  const auto t0 = std::chrono::steady_clock::now();
  // Rows: DX, D0, K -> stored<key, stored>key. DX=1 stores a don't-care.
  const int rows[8][5] = {{0, 0, 0, 0, 0}, {0, 0, 1, 1, 0}, {0, 1, 0, 0, 1}, {0, 1, 1, 0, 0},
                          {1, 0, 0, 0, 0}, {1, 0, 1, 0, 0}, {1, 1, 0, 0, 0}, {1, 1, 1, 0, 0}};
  const StepProgram p = compile_tcam_compare();
  int ok = 0;
  for (const auto& r : rows) {
    CrossbarArray a(1, tcam_col::kWidth);
    a.write_external(0, tcam_col::DX, r[0]);
    a.write_external(0, tcam_col::D0, r[1]);
    a.write_external(0, tcam_col::K, r[2]);
    a.execute_program(p);
    ok += a.peek(0, tcam_col::M3) == static_cast<bool>(r[3]) && a.peek(0, tcam_col::M4) == static_cast<bool>(r[4]);
  }
  const double s = seconds_since(t0);
  return {ok == 8 && p.step_count() == 11 && s < kFastLimitS,
          std::to_string(ok) + "/8 rows, " + std::to_string(p.step_count()) + " steps, " + num(s) + " s"};
}

// 2 ------------------------------------------------------------------------
Outcome step_count_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  int ok = 0, total = 0;
  std::string first_bad;
  for (std::size_t k : powers_of_two()) {
    const double lg = std::log2(static_cast<double>(k));
    for (CamMode mode : {CamMode::Tcam, CamMode::Cam}) {
      CrossbarArray a(1, k * cell_width(mode));
      const double got = a.execute_program(compile_search(mode, k)).elapsed_ns;
      const double want = (mode == CamMode::Tcam ? 22.0 : 16.0) + 20.0 * lg;
      ++total;
      if (got == want) {
        ++ok;
      } else if (first_bad.empty()) {
        first_bad = "; K=" + std::to_string(k) + " got " + num(got);
      }
    }
  }
  const double s = seconds_since(t0);
  return {ok == total && s < kFastLimitS,
          std::to_string(ok) + "/" + std::to_string(total) + " exact" + first_bad + ", " + num(s) + " s"};
}

// 3 ------------------------------------------------------------------------
Outcome energy_calibration() {
  double worst = 0;
  for (CamMode mode : {CamMode::Tcam, CamMode::Cam}) {
    CrossbarConfig cfg;
    cfg.energy = calibrated_energy(mode);
    for (std::size_t k : powers_of_two()) {
      CrossbarArray a(1, k * cell_width(mode), cfg);
      const ExecStats st = a.execute_program(compile_search(mode, k));
      const double per_bit = energy_of(st, cfg.energy) / static_cast<double>(k);
      const double want = (mode == CamMode::Tcam ? 0.83 : 0.44) + 0.82 * std::log2(static_cast<double>(k));
      worst = std::max(worst, std::abs(per_bit - want) / want);
    }
  }
  return {worst <= kEnergyRelTol, "max relative error " + num(worst)};
}

// 4 ------------------------------------------------------------------------
Outcome combination_law() {
  const std::size_t w = tcam_col::kWidth;
  const StepProgram round = compile_combine_round(CamMode::Tcam, 2, 1);
  int law_ok = 0;
  for (int hi = 0; hi < 3; ++hi) {   // 0 equal, 1 less, 2 greater
    for (int lo = 0; lo < 3; ++lo) {
      CrossbarArray a(1, 2 * w);
      a.write_external(0, tcam_col::M3, hi == 1);
      a.write_external(0, tcam_col::M4, hi == 2);
      a.write_external(0, w + tcam_col::M3, lo == 1);
      a.write_external(0, w + tcam_col::M4, lo == 2);
      a.execute_program(round);
      const int want = hi != 0 ? hi : lo;
      law_ok += a.peek(0, w + tcam_col::M3) == (want == 1) && a.peek(0, w + tcam_col::M4) == (want == 2);
    }
  }
  std::mt19937_64 rng(4);
  std::size_t pairs = 0, ok = 0;
  for (std::size_t k : {8, 16, 32, 64}) {
    const std::uint64_t mask = k == 64 ? ~0ULL : (1ULL << k) - 1;
    constexpr std::size_t kEntries = 250;
    CrossbarArray a(kEntries, k * w);
    CamPartition part(a, CamMode::Tcam, k, kEntries);
    std::vector<std::uint64_t> v(kEntries);
    std::vector<TernaryWord> words;
    for (auto& x : v) {
      x = rng() & mask;
      words.push_back(to_word(x, k));
    }
    part.store_entries(words);
    for (int q = 0; q < 40; ++q) {
      const std::uint64_t key = q % 4 == 0 ? v[rng() % kEntries] : rng() & mask;
      const auto res = part.search(to_word(key, k));
      for (std::size_t i = 0; i < kEntries; ++i) {
        ++pairs;
        ok += res[i].less == (v[i] < key) && res[i].greater == (v[i] > key) && res[i].equal == (v[i] == key);
      }
    }
  }
  return {law_ok == 9 && ok == pairs && round.step_count() <= 10,
          std::to_string(law_ok) + "/9 merge combinations, " + std::to_string(ok) + "/" + std::to_string(pairs) +
              " entry comparisons, round of " + std::to_string(round.step_count()) + " steps"};
}

// 5 and 6 ------------------------------------------------------------------
struct TraceRun {
  bool match = true;
  double seconds = 0;
  std::size_t point_max = 0;
  std::size_t range_max = 0;
  std::size_t ops = 0;
};

TraceRun oracle_trace(IndexKind kind) {
  const auto t0 = std::chrono::steady_clock::now();
  HybridIndexConfig c;
  c.kind = kind;
  c.key_bits = 32;
  c.level_u = 6;
  c.T = 10;
  c.B = 16;
  c.partitions = 64;
  c.support_range = true;
  std::mt19937_64 rng(0xACCE55 + static_cast<int>(kind));
  const std::uint64_t mask = 0xffffffffULL;
  std::map<std::uint64_t, std::uint64_t> m;
  std::vector<Record> recs;
  while (m.size() < 10000) {
    const std::uint64_t k = rng() & mask, ref = rng();
    if (m.emplace(k, ref).second) recs.push_back({k, ref});
  }
  HybridIndex idx(c, recs);
  TraceRun run;
  std::vector<std::uint64_t> live;
  for (const auto& kv : m) live.push_back(kv.first);
  for (int i = 0; i < 100000; ++i) {
    ++run.ops;
    const unsigned op = rng() % 10;
    if (op < 4) {
      const std::uint64_t k = rng() % 2 ? live[rng() % live.size()] : rng() & mask;
      const auto got = idx.point_query(k);
      const auto it = m.find(k);
      run.match &= it == m.end() ? !got : got == it->second;
      run.point_max = std::max(run.point_max, idx.last_op().compute_partitions.size());
    } else if (op < 6) {
      const std::uint64_t lo = rng() & mask;
      const std::uint64_t hi = lo + std::min<std::uint64_t>(mask - lo, rng() % (1ULL << 23));
      const auto got = idx.range_query(lo, hi);
      std::size_t j = 0;
      for (auto it = m.lower_bound(lo); it != m.end() && it->first <= hi; ++it, ++j) {
        run.match &= j < got.size() && got[j].key == it->first && got[j].ref == it->second;
      }
      run.match &= j == got.size();
      run.range_max = std::max(run.range_max, idx.last_op().compute_partitions.size());
    } else if (op < 8) {
      std::uint64_t k = rng() & mask;
      while (m.count(k)) k = rng() & mask;
      const std::uint64_t ref = rng();
      idx.insert(k, ref);
      m.emplace(k, ref);
      live.push_back(k);
    } else if (!live.empty()) {
      const std::size_t at = rng() % live.size();
      idx.erase(live[at]);
      m.erase(live[at]);
      live[at] = live.back();
      live.pop_back();
    }
  }
  idx.check_invariants();
  std::vector<Record> want;
  for (const auto& [k, v] : m) want.push_back({k, v});
  run.match &= idx.records() == want;
  run.seconds = seconds_since(t0);
  return run;
}

std::vector<std::pair<IndexKind, TraceRun>> g_runs;

Outcome oracle_equivalence() {
  bool pass = true;
  std::string detail;
  for (IndexKind k : {IndexKind::HashCam, IndexKind::TTreeCam, IndexKind::TBTree, IndexKind::TBTreeCam}) {
    TraceRun r;
    try {
      r = oracle_trace(k);
    } catch (const Error& e) {
      r.match = false;
      detail += std::string(to_string(k)) + " threw '" + e.what() + "'; ";
    }
    g_runs.emplace_back(k, r);
    pass &= r.match && r.seconds < kTraceLimitS;
    detail += std::string(to_string(k)) + (r.match ? " match " : " MISMATCH ") + num(r.seconds) + " s; ";
  }
  detail += "1e5 ops over 1e4 keys each";
  return {pass, detail};
}

double hash_lifetime(std::size_t partitions) {
  HybridIndexConfig c;
  c.kind = IndexKind::HashCam;
  c.hash = HashKind::Uniform;
  c.key_bits = 16;
  c.partitions = partitions;
  std::mt19937_64 rng(66);
  std::map<std::uint64_t, std::uint64_t> m;
  while (m.size() < 1024) m.emplace(rng() & 0xffff, rng());
  std::vector<Record> recs;
  for (const auto& [k, v] : m) recs.push_back({k, v});
  HybridIndex idx(c, recs);
  for (int i = 0; i < 32000; ++i) (void)idx.point_query(rng() & 0xffff);
  return idx.wear_report(1e6).projected_lifetime_s;
}

Outcome locality_and_wear() {
  bool local = !g_runs.empty();
  std::string detail;
  for (const auto& [k, r] : g_runs) {
    local &= r.point_max <= 1 && r.range_max <= 2;
    detail += std::string(to_string(k)) + " point<=" + std::to_string(r.point_max) + " range<=" +
              std::to_string(r.range_max) + "; ";
  }
  const double base = hash_lifetime(2);
  double worst = 0;
  detail += "lifetime/L(P=2):";
  for (std::size_t p : {4, 8, 16}) {
    const double ratio = hash_lifetime(p) / base;
    const double want = static_cast<double>(p) / 2;
    worst = std::max(worst, std::abs(ratio - want) / want);
    detail += " P=" + std::to_string(p) + " " + num(ratio);
  }
  detail += " (worst deviation " + num(100 * worst) + "%)";
  return {local && worst <= kLifetimeScaleTol, detail};
}

// 7 ------------------------------------------------------------------------
Outcome memcam_lifetime() {
  // One 64-bit TCAM partition searched back to back.
  const std::size_t k = 64, entries = 256, searches = 512;
  CrossbarArray a(entries, k * tcam_col::kWidth);
  CamPartition part(a, CamMode::Tcam, k, entries);
  std::mt19937_64 rng(7);
  std::vector<TernaryWord> words;
  for (std::size_t i = 0; i < entries; ++i) words.push_back(to_word(rng(), k));
  part.store_entries(words);
  const std::uint64_t before = a.max_write_count();
  for (std::size_t i = 0; i < searches; ++i) part.search(to_word(rng(), k));
  const double per_search = static_cast<double>(a.max_write_count() - before) / searches;
  const double period_s = 142e-9; // internal TCAM search time at K = 64
  const double minutes = 1e10 * period_s / per_search / 60;
  ModelParams p;
  p.cam_mode = CamMode::Tcam;
  const double model_minutes = *lifetime_years(p, Structure::MemCam) * 365 * 24 * 60;
  return {minutes >= kMemCamMinMinutes && minutes <= kMemCamMaxMinutes,
          "simulated " + num(minutes) + " min (" + num(per_search) + " writes on the hottest cell per search), "
          "model " + num(model_minutes) + " min; one write per search would give " + num(1e10 * period_s / 60) +
              " min"};
}

// 8 ------------------------------------------------------------------------
Outcome analytic_orderings() {
  int ok = 0, total = 0;
  std::string first;
  for (double t = 10; t <= 120; t += 10) {
    ModelParams p;
    p.t_access_ns = t;
    const double cmos = avg_search_time(p, Structure::CmosTTree);
    const double mem = avg_search_time(p, Structure::MemTTree);
    const double tb = avg_search_time(p, Structure::TBTree);
    const double hc = avg_search_time(p, Structure::HashCam);
    const double tc = avg_search_time(p, Structure::TTreeCam);
    const double tbc = avg_search_time(p, Structure::TBTreeCam);
    const double lo = std::min(cmos, mem), hi = std::max(cmos, mem);
    const bool good = hc < lo && tc < lo && tb > std::max({hi, hc, tc, tbc}) && tbc > lo && tbc < hi;
    ++total;
    ok += good;
    if (!good && first.empty()) {
      first = "; at T_access=" + num(t) + ": cmos " + num(cmos) + ", mem " + num(mem) + ", tb " + num(tb) +
              ", hc " + num(hc) + ", tc " + num(tc) + ", tbc " + num(tbc);
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " T_access points ordered" + first};
}

// 9 ------------------------------------------------------------------------
Outcome crossover() {
  ModelParams p;
  p.t_access_ns = 10;
  std::vector<double> grid;
  for (int i = 0; i <= 44; ++i) grid.push_back(1e9 * std::pow(10.0, i / 4.0));
  std::optional<double> cross;
  bool above_seen = false;
  std::map<Structure, std::pair<double, double>> span;
  for (double n : grid) {
    p.n_records = n;
    const double tbc = avg_search_time(p, Structure::TBTreeCam);
    const double mem = avg_search_time(p, Structure::MemTTree);
    if (tbc >= mem) above_seen = true;
    if (above_seen && tbc < mem && !cross) cross = n;
    for (Structure s : {Structure::HashCam, Structure::TTreeCam, Structure::TBTreeCam}) {
      const double v = avg_search_time(p, s);
      auto it = span.find(s);
      if (it == span.end()) {
        span[s] = {v, v};
      } else {
        it->second = {std::min(it->second.first, v), std::max(it->second.second, v)};
      }
    }
  }
  double spread = 0;
  for (const auto& [s, mm] : span) spread = std::max(spread, (mm.second - mm.first) / mm.first);
  const bool located = cross && *cross >= kCrossoverLo && *cross <= kCrossoverHi;
  p.n_records = 1e9;
  std::string where = cross ? "crossover at N_R=" + num(*cross)
                            : (above_seen ? "TB+-tree-CAM never drops below the memristor T-tree"
                                          : "no crossover: TB+-tree-CAM is already below the memristor T-tree at "
                                            "N_R=1e9 (" + num(avg_search_time(p, Structure::TBTreeCam)) + " vs " +
                                                num(avg_search_time(p, Structure::MemTTree)) + " ns)");
  return {located && spread < kFlatTol, where + "; CAM-backed spread " + num(100 * spread) + "%"};
}

// 10 -----------------------------------------------------------------------
Outcome lifetime_ordering() {
  bool pass = true;
  std::string detail;
  for (double t : {10.0, 60.0, 120.0}) {
    ModelParams p;
    p.t_access_ns = t;
    const double tc = *lifetime_years(p, Structure::TTreeCam);
    const double hc = *lifetime_years(p, Structure::HashCam);
    const double tbc = *lifetime_years(p, Structure::TBTreeCam);
    const double tb = *lifetime_years(p, Structure::TBTree);
    pass &= tc < hc && hc < tbc && tbc < tb && tbc > kTbMinYears && tb > kTbMinYears;
    if (!detail.empty()) detail += "; ";
    detail += "T=" + num(t) + ": " + num(tc) + " < " + num(hc) + " < " + num(tbc) + " < " + num(tb) + " y";
  }
  return {pass, detail};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"TCAM truth table", tcam_truth_table},
      {"step-count identity", step_count_identity},
      {"energy calibration", energy_calibration},
      {"combination law", combination_law},
      {"hybrid-index oracle equivalence", oracle_equivalence},
      {"locality and wear scaling", locality_and_wear},
      {"MemCAM lifetime", memcam_lifetime},
      {"analytic orderings", analytic_orderings},
      {"N_R crossover", crossover},
      {"lifetime ordering", lifetime_ordering},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu: %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
