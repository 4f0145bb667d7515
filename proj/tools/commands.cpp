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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include "memcam/cam.hpp"
#include "memcam/crossbar.hpp"
#include "memcam/error.hpp"
#include "memcam/hybrid.hpp"
#include "memcam/model.hpp"

namespace memcam::cli {

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// ------------------------------------------------------------- programs

struct Programs {
  StepProgram tcam_compare = compile_tcam_compare(1);
  StepProgram cam_compare = compile_cam_compare(1);
  StepProgram tcam_round = compile_combine_round(CamMode::Tcam, 2, 1);
  StepProgram cam_round = compile_combine_round(CamMode::Cam, 2, 1);
};

void drop_last(StepProgram& p) {
  if (!p.steps.empty()) p.steps.pop_back();
}

// Points the first IMPLY at a different antecedent column.
void swap_src(StepProgram& p, std::size_t width) {
  for (auto& step : p.steps) {
    for (auto& op : step) {
      if (op.kind != OpKind::Imply) continue;
      for (std::size_t c = 0; c < width; ++c) {
        if (c == op.src || c == op.dst) continue;
        bool used = false;
        for (const auto& other : step) used |= other.src == c || other.dst == c;
        if (used) continue;
        op.src = c;
        return;
      }
    }
  }
}

const std::vector<std::pair<std::string, void (*)(Programs&)>>& mutations() {
  static const std::vector<std::pair<std::string, void (*)(Programs&)>> table = {
      {"tcam-compare-drop-step", [](Programs& p) { drop_last(p.tcam_compare); }},
      {"tcam-compare-swap-src", [](Programs& p) { swap_src(p.tcam_compare, tcam_col::kWidth); }},
      {"cam-compare-drop-step", [](Programs& p) { drop_last(p.cam_compare); }},
      {"tcam-combine-drop-step", [](Programs& p) { drop_last(p.tcam_round); }},
      {"cam-combine-swap-src", [](Programs& p) { swap_src(p.cam_round, 2 * cam_col::kWidth); }},
  };
  return table;
}

// ---------------------------------------------------------------- checks

CheckResult tcam_truth_table(const Programs& p) {
  CheckResult r{"tcam-truth-table", true, ""};
  int ok = 0;
  for (int dx = 0; dx <= 1; ++dx) {
    for (int d0 = 0; d0 <= 1; ++d0) {
      for (int k = 0; k <= 1; ++k) {
        CrossbarArray a(1, tcam_col::kWidth);
        a.write_external(0, tcam_col::DX, dx);
        a.write_external(0, tcam_col::D0, d0);
        a.write_external(0, tcam_col::K, k);
        a.execute_program(p.tcam_compare);
        const bool less = a.peek(0, tcam_col::M3);
        const bool greater = a.peek(0, tcam_col::M4);
        const bool want_less = !dx && !d0 && k;
        const bool want_greater = !dx && d0 && !k;
        if (less == want_less && greater == want_greater) {
          ++ok;
        } else if (r.pass) {
          r.pass = false;
          r.detail = "DX=" + std::to_string(dx) + " D0=" + std::to_string(d0) + " K=" + std::to_string(k) +
                     " gave M3=" + std::to_string(less) + " M4=" + std::to_string(greater) + "; ";
        }
      }
    }
  }
  r.detail += std::to_string(ok) + "/8 rows";
  return r;
}

CheckResult cam_truth_table(const Programs& p) {
  CheckResult r{"cam-truth-table", true, ""};
  int ok = 0;
  for (int d = 0; d <= 1; ++d) {
    for (int k = 0; k <= 1; ++k) {
      CrossbarArray a(1, cam_col::kWidth);
      a.write_external(0, cam_col::D, d);
      a.write_external(0, cam_col::K, k);
      a.execute_program(p.cam_compare);
      const bool mismatch = a.peek(0, cam_col::M1);
      if (mismatch == (d != k) && !a.peek(0, cam_col::M3)) {
        ++ok;
      } else {
        r.pass = false;
      }
    }
  }
  r.detail = std::to_string(ok) + "/4 rows";
  return r;
}

// Signal encoding per cell: 0 equal, 1 less, 2 greater.
CheckResult tcam_combine_law(const Programs& p) {
  CheckResult r{"tcam-combine-law", true, ""};
  int ok = 0;
  const std::size_t w = tcam_col::kWidth;
  for (int hi = 0; hi < 3; ++hi) {
    for (int lo = 0; lo < 3; ++lo) {
      CrossbarArray a(1, 2 * w);
      a.write_external(0, tcam_col::M3, hi == 1);
      a.write_external(0, tcam_col::M4, hi == 2);
      a.write_external(0, w + tcam_col::M3, lo == 1);
      a.write_external(0, w + tcam_col::M4, lo == 2);
      a.execute_program(p.tcam_round);
      const int got = a.peek(0, w + tcam_col::M3) ? (a.peek(0, w + tcam_col::M4) ? -1 : 1)
                                                   : (a.peek(0, w + tcam_col::M4) ? 2 : 0);
      const int want = hi != 0 ? hi : lo;
      if (got == want) {
        ++ok;
      } else {
        r.pass = false;
      }
    }
  }
  r.detail = std::to_string(ok) + "/9 combinations";
  return r;
}

CheckResult cam_combine_law(const Programs& p) {
  CheckResult r{"cam-combine-law", true, ""};
  int ok = 0;
  const std::size_t w = cam_col::kWidth;
  for (int hi = 0; hi <= 1; ++hi) {
    for (int lo = 0; lo <= 1; ++lo) {
      CrossbarArray a(1, 2 * w);
      a.write_external(0, cam_col::M1, hi);
      a.write_external(0, w + cam_col::M1, lo);
      a.execute_program(p.cam_round);
      if (a.peek(0, w + cam_col::M1) == (hi || lo) && !a.peek(0, w + cam_col::M3)) {
        ++ok;
      } else {
        r.pass = false;
      }
    }
  }
  r.detail = std::to_string(ok) + "/4 combinations";
  return r;
}

std::vector<std::size_t> key_sizes() {
  std::vector<std::size_t> out;
  for (std::size_t k = 2; k <= 1024; k *= 2) out.push_back(k);
  return out;
}

CheckResult step_count(CamMode mode) {
  CheckResult r{std::string(to_string(mode)) + "-step-count", true, ""};
  const auto form = cam_latency_form(mode);
  for (std::size_t k : key_sizes()) {
    const StepProgram prog = compile_search(mode, k);
    CrossbarArray a(1, k * cell_width(mode));
    const ExecStats st = a.execute_program(prog);
    const double want = form.base_ns + form.per_round_ns * static_cast<double>(log2_exact(k));
    if (st.elapsed_ns != want) {
      r.pass = false;
      r.detail = "K=" + std::to_string(k) + " measured " + fmt(st.elapsed_ns) + " ns, want " + fmt(want);
      return r;
    }
  }
  r.detail = "K=2..1024 exact";
  return r;
}

CheckResult energy(CamMode mode) {
  CheckResult r{std::string(to_string(mode)) + "-energy", true, ""};
  const auto form = cam_energy_form(mode);
  CrossbarConfig cfg;
  cfg.energy = calibrated_energy(mode);
  double worst = 0;
  for (std::size_t k : key_sizes()) {
    CrossbarArray a(1, k * cell_width(mode), cfg);
    const ExecStats st = a.execute_program(compile_search(mode, k));
    const double per_bit = st.energy_fj / static_cast<double>(k);
    const double want = form.base_fj + form.per_round_fj * static_cast<double>(log2_exact(k));
    worst = std::max(worst, std::abs(per_bit - want) / want);
  }
  r.pass = worst <= 1e-9;
  r.detail = "max relative error " + fmt(worst);
  return r;
}

int three_way(std::uint64_t stored, std::uint64_t key) { return stored < key ? 1 : (stored > key ? 2 : 0); }

CheckResult entry_compare(CamMode mode) {
  CheckResult r{std::string(to_string(mode)) + "-entry-compare", true, ""};
  std::mt19937_64 rng(0xC0FFEE);
  std::size_t pairs = 0, ok = 0;
  for (std::size_t k : {8, 16, 32, 64}) {
    const std::uint64_t mask = k == 64 ? ~0ULL : (1ULL << k) - 1;
    constexpr std::size_t kEntries = 256;
    CrossbarArray a(kEntries, k * cell_width(mode));
    CamPartition part(a, mode, k, kEntries);
    std::vector<std::uint64_t> values(kEntries);
    std::vector<TernaryWord> words;
    for (auto& v : values) {
      v = rng() & mask;
      words.push_back(to_word(v, k));
    }
    part.store_entries(words);
    for (int q = 0; q < 40; ++q) {
      // Every fourth key equals a stored entry so equality is exercised.
      const std::uint64_t key = q % 4 == 0 ? values[rng() % kEntries] : (rng() & mask);
      const auto res = part.search(to_word(key, k));
      for (std::size_t i = 0; i < kEntries; ++i) {
        ++pairs;
        const int want = three_way(values[i], key);
        const bool good = mode == CamMode::Tcam
                              ? (res[i].less == (want == 1) && res[i].greater == (want == 2) &&
                                 res[i].equal == (want == 0))
                              : (res[i].equal == (want == 0) && !res[i].less && !res[i].greater);
        ok += good;
      }
    }
  }
  r.pass = ok == pairs;
  r.detail = std::to_string(ok) + "/" + std::to_string(pairs) + " pairs";
  return r;
}

CheckResult program_validation() {
  CheckResult r{"program-validation", true, ""};
  std::size_t n = 0;
  try {
    for (CamMode mode : {CamMode::Tcam, CamMode::Cam}) {
      for (std::size_t k : key_sizes()) {
        compile_search(mode, k).validate(1, k * cell_width(mode));
        ++n;
      }
    }
  } catch (const ProgramError& e) {
    r.pass = false;
    r.detail = e.what();
    return r;
  }
  r.detail = std::to_string(n) + " programs";
  return r;
}

} // namespace

const std::vector<std::string>& mutation_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& m : mutations()) out.push_back(m.first);
    return out;
  }();
  return names;
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "tcam-truth-table", "cam-truth-table",   "tcam-combine-law",   "cam-combine-law",
      "tcam-step-count",  "cam-step-count",    "tcam-energy",        "cam-energy",
      "tcam-entry-compare", "cam-entry-compare", "program-validation",
  };
  return names;
}

std::vector<CheckResult> run_checks(const std::string& mutation) {
  Programs p;
  if (!mutation.empty()) {
    const auto& table = mutations();
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& m) { return m.first == mutation; });
    if (it == table.end()) throw InvalidArgument("unknown mutation '" + mutation + "'");
    it->second(p);
  }
  std::vector<CheckResult> out;
  auto guarded = [&](const std::string& name, auto&& check) {
    try {
      out.push_back(check());
    } catch (const Error& e) {
      out.push_back({name, false, e.what()});
    }
  };
  guarded("tcam-truth-table", [&] { return tcam_truth_table(p); });
  guarded("cam-truth-table", [&] { return cam_truth_table(p); });
  guarded("tcam-combine-law", [&] { return tcam_combine_law(p); });
  guarded("cam-combine-law", [&] { return cam_combine_law(p); });
  guarded("tcam-step-count", [&] { return step_count(CamMode::Tcam); });
  guarded("cam-step-count", [&] { return step_count(CamMode::Cam); });
  guarded("tcam-energy", [&] { return energy(CamMode::Tcam); });
  guarded("cam-energy", [&] { return energy(CamMode::Cam); });
  guarded("tcam-entry-compare", [&] { return entry_compare(CamMode::Tcam); });
  guarded("cam-entry-compare", [&] { return entry_compare(CamMode::Cam); });
  guarded("program-validation", [&] { return program_validation(); });
  return out;
}

int cmd_verify(std::ostream& out, const std::string& mutation) {
  bool all = true;
  for (const auto& c : run_checks(mutation)) {
    out << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    all &= c.pass;
  }
  return all ? kOk : kCheckFailed;
}

// ----------------------------------------------------------------- bench

namespace {

struct OpTally {
  std::size_t count = 0;
  double latency_ns = 0;
  std::size_t max_compute = 0;

  void add(const OpTrace& t) {
    ++count;
    latency_ns += t.latency_ns();
    max_compute = std::max(max_compute, t.compute_partitions.size());
  }
  [[nodiscard]] double mean() const { return count ? latency_ns / static_cast<double>(count) : 0.0; }
};

// Live key set with O(1) random pick and removal.
class KeyBag {
public:
  void add(std::uint64_t k) {
    pos_[k] = keys_.size();
    keys_.push_back(k);
  }
  void remove(std::uint64_t k) {
    const std::size_t i = pos_.at(k);
    pos_[keys_.back()] = i;
    keys_[i] = keys_.back();
    keys_.pop_back();
    pos_.erase(k);
  }
  [[nodiscard]] bool empty() const { return keys_.empty(); }
  std::uint64_t pick(std::mt19937_64& rng) const { return keys_[rng() % keys_.size()]; }

private:
  std::vector<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, std::size_t> pos_;
};

} // namespace

int cmd_bench(std::ostream& out, const RunSettings& s, const BenchOptions& opt) {
  const HybridIndexConfig& cfg = s.index;
  cfg.validate();
  const BenchConfig& b = s.bench;
  if (b.point_weight < 0 || b.range_weight < 0 || b.insert_weight < 0 || b.delete_weight < 0) {
    throw ConfigError("bench weights must be non-negative");
  }
  const std::uint64_t key_mask = cfg.key_bits == 64 ? ~0ULL : (1ULL << cfg.key_bits) - 1;
  if (static_cast<double>(b.n_keys) > 0.5 * static_cast<double>(key_mask)) {
    throw ConfigError("bench.n_keys too large for index.key_bits");
  }
  std::mt19937_64 rng(opt.seed);
  std::map<std::uint64_t, std::uint64_t> oracle;
  KeyBag bag;
  std::vector<Record> recs;
  while (oracle.size() < b.n_keys) {
    const std::uint64_t k = rng() & key_mask;
    const std::uint64_t ref = rng();
    if (oracle.emplace(k, ref).second) {
      recs.push_back({k, ref});
      bag.add(k);
    }
  }
  HybridIndex idx(cfg, recs);

  const bool ranges = !(cfg.kind == IndexKind::HashCam && cfg.hash == HashKind::Uniform);
  const double range_w = ranges ? b.range_weight : 0.0;
  const std::uint64_t width =
      b.range_width ? b.range_width
                    : std::max<std::uint64_t>(1, key_mask / std::max<std::uint64_t>(1, b.n_keys) * 16);
  std::discrete_distribution<int> pick_op({b.point_weight, range_w, b.insert_weight, b.delete_weight});

  OpTally point, range, ins, del;
  std::size_t rejected = 0;
  bool match = true;
  for (std::size_t i = 0; i < b.n_ops; ++i) {
    if (b.rotate_every && i > 0 && i % b.rotate_every == 0) idx.rotate_partitions();
    switch (pick_op(rng)) {
    case 0: {
      const std::uint64_t k = (!bag.empty() && rng() % 2) ? bag.pick(rng) : (rng() & key_mask);
      const auto got = idx.point_query(k);
      const auto it = oracle.find(k);
      match &= it == oracle.end() ? !got : (got && *got == it->second);
      point.add(idx.last_op());
      break;
    }
    case 1: {
      const std::uint64_t lo = rng() & key_mask;
      const std::uint64_t hi = lo + std::min(key_mask - lo, rng() % (width + 1));
      const auto got = idx.range_query(lo, hi);
      std::size_t j = 0;
      bool same = true;
      for (auto it = oracle.lower_bound(lo); it != oracle.end() && it->first <= hi; ++it, ++j) {
        same &= j < got.size() && got[j].key == it->first && got[j].ref == it->second;
      }
      match &= same && j == got.size();
      range.add(idx.last_op());
      break;
    }
    case 2: {
      std::uint64_t k = rng() & key_mask;
      while (oracle.count(k)) k = rng() & key_mask;
      const std::uint64_t ref = rng();
      try {
        idx.insert(k, ref);
      } catch (const CapacityError&) {
        ++rejected;
        break;
      }
      oracle.emplace(k, ref);
      bag.add(k);
      ins.add(idx.last_op());
      break;
    }
    default: {
      if (bag.empty()) break;
      const std::uint64_t k = bag.pick(rng);
      idx.erase(k);
      oracle.erase(k);
      bag.remove(k);
      del.add(idx.last_op());
      break;
    }
    }
  }
  try {
    idx.check_invariants();
  } catch (const Error&) {
    match = false;
  }
  std::vector<Record> want;
  for (const auto& [k, v] : oracle) want.push_back({k, v});
  match &= idx.records() == want;

  double lifetime = std::numeric_limits<double>::infinity();
  std::uint64_t max_writes = 0;
  if (idx.query_count() > 0) {
    const WearStats ws = idx.wear_report(b.query_rate);
    lifetime = ws.projected_lifetime_s;
    max_writes = ws.max_cell_writes;
    if (opt.wear_out) {
      *opt.wear_out << wear_csv_header() << '\n';
      for (const auto& w : ws.slots) *opt.wear_out << wear_csv_row(w) << '\n';
    }
  }
  if (opt.stats_out) {
    *opt.stats_out << stats_csv_header() << '\n' << stats_csv_row(idx.totals()) << '\n';
  }

  out << "structure,n_keys,n_ops,seed,point_ops,range_ops,insert_ops,delete_ops,rejected_inserts,"
         "mean_point_ns,mean_range_ns,mean_insert_ns,mean_delete_ns,max_point_compute_partitions,"
         "max_range_compute_partitions,partitions,max_cell_writes,projected_lifetime_s,oracle_match\n";
  out << to_string(cfg.kind) << ',' << b.n_keys << ',' << b.n_ops << ',' << opt.seed << ',' << point.count << ','
      << range.count << ',' << ins.count << ',' << del.count << ',' << rejected << ',' << fmt(point.mean()) << ','
      << fmt(range.mean()) << ',' << fmt(ins.mean()) << ',' << fmt(del.mean()) << ',' << point.max_compute << ','
      << range.max_compute << ',' << idx.partition_count() << ',' << max_writes << ',' << fmt(lifetime) << ','
      << (match ? "true" : "false") << '\n';
  return match ? kOk : kCheckFailed;
}

int cmd_sweep(std::ostream& out, const RunSettings& s) {
  const auto rows = sweep(s.model, s.grid);
  out << sweep_csv_header() << '\n';
  for (const auto& r : rows) out << sweep_csv_row(r) << '\n';
  return kOk;
}

// ----------------------------------------------------------------- trace

namespace {

std::vector<std::string> column_names(CamMode mode) {
  if (mode == CamMode::Tcam) return {"D0", "DX", "K", "M1", "M2", "M3", "M4"};
  return {"D", "K", "M1", "M2", "M3"};
}

// Documentation-only voltage view: column c is driven through line Y<c+1>.
std::string voltage_view(const Step& step) {
  std::map<std::size_t, Voltage> v;
  for (const auto& op : step) {
    if (op.kind == OpKind::Imply) {
      v[op.src] = Voltage::Cond;
      v[op.dst] = Voltage::Set;
    } else {
      v[op.dst] = Voltage::Clear;
    }
  }
  std::string s;
  for (const auto& [col, volt] : v) {
    if (!s.empty()) s += ' ';
    s += "Y" + std::to_string(col + 1) + "=" + std::string(to_string(volt));
  }
  return s;
}

std::string scratch_state(const CrossbarArray& a, CamMode mode, std::size_t cells) {
  const auto names = column_names(mode);
  const std::size_t w = cell_width(mode);
  const std::size_t first = mode == CamMode::Tcam ? tcam_col::M1 : cam_col::M1;
  std::string s;
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t j = first; j < w; ++j) {
      if (!s.empty()) s += ' ';
      if (cells > 1) s += "c" + std::to_string(c) + ".";
      s += names[j] + "=" + (a.peek(0, c * w + j) ? "1" : "0");
    }
  }
  return s;
}

void load_exemplar(CrossbarArray& a, CamMode mode, const TernaryWord& stored, const TernaryWord& key) {
  const std::size_t w = cell_width(mode);
  for (std::size_t c = 0; c < stored.size(); ++c) {
    if (mode == CamMode::Tcam) {
      const TernaryCode code = encode_ternary(stored[c]);
      a.write_external(0, c * w + tcam_col::D0, code.d0);
      a.write_external(0, c * w + tcam_col::DX, code.dx);
    } else {
      if (stored[c] == Trit::X) throw InvalidArgument("binary CAM cannot store X");
      a.write_external(0, c * w + cam_col::D, stored[c] == Trit::One);
    }
    if (key[c] == Trit::X) throw InvalidArgument("search key cannot contain X");
    a.write_external(0, c * w + key_col(mode), key[c] == Trit::One);
  }
}

} // namespace

const std::vector<std::string>& trace_programs() {
  static const std::vector<std::string> names = {"tcam-compare", "cam-compare", "combine-round", "tcam-search",
                                                 "cam-search"};
  return names;
}

int cmd_trace(std::ostream& out, std::ostream& note, const std::string& program, const TraceOptions& opt) {
  CamMode mode = CamMode::Tcam;
  std::string stored_s, key_s;
  if (program == "tcam-compare") {
    stored_s = "0", key_s = "1";
  } else if (program == "cam-compare") {
    mode = CamMode::Cam, stored_s = "1", key_s = "0";
  } else if (program == "combine-round") {
    stored_s = "10", key_s = "01";
  } else if (program == "tcam-search") {
    stored_s = "1X01", key_s = "1011";
  } else if (program == "cam-search") {
    mode = CamMode::Cam, stored_s = "1001", key_s = "1011";
  } else {
    throw InvalidArgument("unknown program '" + program + "'");
  }
  const TernaryWord stored = parse_word(opt.stored.value_or(stored_s));
  const TernaryWord key = parse_word(opt.key.value_or(key_s));
  const std::size_t cells = stored.size();
  if (key.size() != cells) throw InvalidArgument("stored word and key differ in length");
  const bool single = program == "tcam-compare" || program == "cam-compare";
  if (single && cells != 1) throw InvalidArgument(program + " traces one cell");
  if (program == "combine-round" && cells != 2) throw InvalidArgument("combine-round traces two cells");
  if (!is_power_of_two(cells)) throw InvalidArgument("word length must be a power of two");

  CrossbarArray a(1, cells * cell_width(mode));
  load_exemplar(a, mode, stored, key);
  StepProgram prog;
  if (program == "combine-round") {
    a.execute_program(compile_compare(mode, cells));
    prog = compile_combine_round(mode, cells, 1);
  } else if (single) {
    prog = compile_compare(mode, 1);
  } else {
    prog = compile_search(mode, cells);
  }
  note << "# " << prog.name << " stored=" << to_string(stored) << " key=" << to_string(key)
       << " (Y-line mapping is illustrative)\n";
  for (std::size_t i = 0; i < prog.steps.size(); ++i) {
    a.execute_step(prog.steps[i], prog.masks);
    out << trace_step(i + 1, prog.steps[i], prog.masks) << " | " << voltage_view(prog.steps[i]) << " | "
        << scratch_state(a, mode, cells) << '\n';
  }
  return kOk;
}

} // namespace memcam::cli
