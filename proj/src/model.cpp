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

#include "memcam/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>

#include "memcam/error.hpp"

namespace memcam {

namespace {

constexpr double kSecondsPerYear = 365.0 * 24 * 3600;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double pow2(int e) { return std::ldexp(1.0, e); }

} // namespace

LatencyClosedForm cam_latency_form(CamMode mode) {
  return mode == CamMode::Tcam ? LatencyClosedForm{22, 20} : LatencyClosedForm{16, 20};
}

EnergyClosedForm cam_energy_form(CamMode mode) {
  return mode == CamMode::Tcam ? EnergyClosedForm{0.83, 0.82} : EnergyClosedForm{0.44, 0.82};
}

double cam_latency(std::uint64_t key_bits, CamMode mode) {
  if (key_bits < 2 || !is_power_of_two(key_bits)) {
    throw InvalidArgument("key_bits must be a power of two >= 2");
  }
  const auto f = cam_latency_form(mode);
  return f.base_ns + f.per_round_ns * static_cast<double>(log2_exact(key_bits));
}

double cam_energy(std::uint64_t key_bits, CamMode mode) {
  if (key_bits < 2 || !is_power_of_two(key_bits)) {
    throw InvalidArgument("key_bits must be a power of two >= 2");
  }
  const auto f = cam_energy_form(mode);
  return f.base_fj + f.per_round_fj * static_cast<double>(log2_exact(key_bits));
}

std::string_view to_string(Structure s) {
  switch (s) {
  case Structure::CmosTTree:
    return "cmos-ttree";
  case Structure::MemTTree:
    return "mem-ttree";
  case Structure::TBTree:
    return "tb-tree";
  case Structure::HashCam:
    return "hash-cam";
  case Structure::TTreeCam:
    return "ttree-cam";
  case Structure::TBTreeCam:
    return "tb-tree-cam";
  case Structure::MemCam:
    return "memcam";
  }
  return "?";
}

Structure parse_structure(std::string_view s) {
  for (Structure k : {Structure::CmosTTree, Structure::MemTTree, Structure::TBTree,
                      Structure::HashCam, Structure::TTreeCam, Structure::TBTreeCam,
                      Structure::MemCam}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown structure '" + std::string(s) + "'");
}

const std::vector<Structure>& sweep_structures() {
  static const std::vector<Structure> all = {Structure::CmosTTree, Structure::MemTTree,
                                             Structure::TBTree,    Structure::HashCam,
                                             Structure::TTreeCam,  Structure::TBTreeCam};
  return all;
}

void ModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw InvalidArgument(std::string(name) + " must be positive");
  };
  positive(n_records, "n_records");
  positive(T, "T");
  positive(B, "B");
  positive(node_time_u_ns, "node_time_u_ns");
  positive(node_time_lt_cmos_ns, "node_time_lt_cmos_ns");
  positive(t_access_ns, "t_access_ns");
  positive(step_time_ns, "step_time_ns");
  positive(endurance, "endurance");
  positive(hash_partitions, "hash_partitions");
  if (level_u < 1) throw InvalidArgument("level_u must be at least 1");
  if (B < 2) throw InvalidArgument("B must be at least 2");
  if (key_bits < 2 || !is_power_of_two(key_bits)) {
    throw InvalidArgument("key_bits must be a power of two >= 2");
  }
  if (query_rate < 0) throw InvalidArgument("query_rate must be non-negative");
  if (cam_subtree_root_depth < 0) throw InvalidArgument("cam_subtree_root_depth must be >= 0");
  if (wear_per_search && !(*wear_per_search > 0)) {
    throw InvalidArgument("wear_per_search must be positive");
  }
}

double record_nodes(const ModelParams& p, TreeKind kind) {
  p.validate();
  if (kind == TreeKind::TTree) return p.n_records / p.T;
  const double upper = pow2(p.level_u) - 1;
  const double lower_records = p.n_records - upper * p.T;
  if (lower_records < 0) {
    throw InvalidArgument("upper levels need " + fmt(upper * p.T) + " records, only " +
                          fmt(p.n_records) + " given");
  }
  return upper + lower_records / p.B;
}

int lower_levels(const ModelParams& p, TreeKind kind) {
  p.validate();
  if (kind == TreeKind::TTree) {
    const double nt = p.n_records / p.T;
    if (nt <= pow2(p.level_u) - 1) return 0;
    const int levels = static_cast<int>(std::ceil(std::log2(nt))) - p.level_u;
    if (levels < 0) throw InvalidArgument("negative lower level count");
    return levels;
  }
  record_nodes(p, kind); // precondition check
  const double per_tree = (p.n_records - (pow2(p.level_u) - 1) * p.T) / pow2(p.level_u);
  if (per_tree <= 1) return 0;
  // Nudge before ceil so exact powers of B do not round up through log error.
  const double l = std::log(per_tree) / std::log(p.B);
  return static_cast<int>(std::ceil(l - 1e-12));
}

double node_time_memristor(const ModelParams& p) {
  return 3 * p.t_access_ns + cam_latency(64, CamMode::Cam);
}

double node_time_ltb(const ModelParams& p) { return node_time_memristor(p); }

double memcam_search_time(const ModelParams& p) {
  if (p.memcam_search_time_ns) return *p.memcam_search_time_ns;
  return 3 * p.t_access_ns + cam_latency(p.key_bits, p.cam_mode);
}

double hash_time(const ModelParams& p) { return p.hash_time_ns.value_or(p.node_time_u_ns); }

double avg_time_t(const ModelParams& p, double nlt) {
  const double nt = record_nodes(p, TreeKind::TTree);
  const double nu = p.node_time_u_ns;
  const int lu = p.level_u;
  if (nt <= pow2(lu) - 1) {
    // Whole tree lives in the upper levels: exact mean depth of a complete tree.
    const int L = std::max(1, static_cast<int>(std::ceil(std::log2(nt + 1))));
    return nu * ((L - 2) * pow2(L - 1) + 1 + L * (nt - pow2(L - 1) + 1)) / nt;
  }
  const int llt = lower_levels(p, TreeKind::TTree);
  const double sum = nu * ((lu - 1) * pow2(lu) + 1) + nu * lu * (nt - pow2(lu) + 1) +
                     nlt * ((llt - 2) * pow2(lu + llt - 1) + pow2(lu)) +
                     nlt * llt * (nt - (pow2(lu + llt - 1) - 1));
  return sum / nt;
}

double avg_time_tb(const ModelParams& p) {
  const double ntb = record_nodes(p, TreeKind::TBTree);
  const int ltb = lower_levels(p, TreeKind::TBTree);
  const double nu = p.node_time_u_ns;
  const int lu = p.level_u;
  const double sum = nu * ((lu - 1) * pow2(lu) + 1) + nu * lu * (ntb - pow2(lu) + 1) +
                     node_time_ltb(p) * ltb * (ntb - pow2(lu) + 1);
  return sum / ntb;
}

double avg_time_hc(const ModelParams& p) { return hash_time(p) + memcam_search_time(p); }

double avg_time_tc(const ModelParams& p) {
  return p.node_time_u_ns * p.level_u + memcam_search_time(p);
}

double avg_time_tbc(const ModelParams& p, int depth) {
  const int ltb = lower_levels(p, TreeKind::TBTree);
  if (depth < 0 || depth > ltb) {
    throw InvalidArgument("cam_subtree_root_depth " + std::to_string(depth) + " outside [0, " +
                          std::to_string(ltb) + "]");
  }
  if (depth == ltb) return avg_time_tb(p);
  return p.node_time_u_ns * p.level_u + depth * node_time_ltb(p) + memcam_search_time(p);
}

double avg_search_time(const ModelParams& p, Structure s) {
  p.validate();
  switch (s) {
  case Structure::CmosTTree:
    return avg_time_t(p, p.node_time_lt_cmos_ns);
  case Structure::MemTTree:
    return avg_time_t(p, node_time_memristor(p));
  case Structure::TBTree:
    return avg_time_tb(p);
  case Structure::HashCam:
    return avg_time_hc(p);
  case Structure::TTreeCam:
    return avg_time_tc(p);
  case Structure::TBTreeCam:
    return avg_time_tbc(p, std::min(p.cam_subtree_root_depth, lower_levels(p, TreeKind::TBTree)));
  case Structure::MemCam:
    return cam_latency(p.key_bits, p.cam_mode);
  }
  throw InvalidArgument("unsupported structure");
}

double effective_partitions(const ModelParams& p, Structure s) {
  switch (s) {
  case Structure::HashCam:
    return p.hash_partitions;
  case Structure::TTreeCam:
    return pow2(p.level_u);
  case Structure::TBTree:
    return record_nodes(p, TreeKind::TBTree) - (pow2(p.level_u) - 1);
  case Structure::TBTreeCam: {
    const int d = std::min(p.cam_subtree_root_depth, lower_levels(p, TreeKind::TBTree));
    const double leaves = record_nodes(p, TreeKind::TBTree) - (pow2(p.level_u) - 1);
    return std::min(pow2(p.level_u) * std::pow(p.B, d), leaves);
  }
  case Structure::MemCam:
    return 1;
  case Structure::CmosTTree:
  case Structure::MemTTree:
    break;
  }
  throw InvalidArgument("structure has no CAM partitions");
}

double measured_wear_per_search(CamMode mode, std::uint64_t key_bits) {
  static std::mutex mu;
  static std::map<std::pair<int, std::uint64_t>, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto k = std::make_pair(static_cast<int>(mode), key_bits);
  if (auto it = cache.find(k); it != cache.end()) return it->second;

  constexpr std::size_t kEntries = 64;
  constexpr std::size_t kSearches = 256;
  CrossbarArray array(kEntries, key_bits * cell_width(mode));
  CamPartition part(array, mode, key_bits, kEntries);
  std::mt19937_64 rng(0x5eed);
  const std::uint64_t mask = key_bits == 64 ? ~0ULL : ((1ULL << key_bits) - 1);
  std::vector<TernaryWord> words;
  for (std::size_t i = 0; i < kEntries; ++i) words.push_back(to_word(rng() & mask, key_bits));
  part.store_entries(words);
  std::vector<std::uint64_t> before(array.rows() * array.cols());
  for (std::size_t r = 0; r < array.rows(); ++r) {
    for (std::size_t c = 0; c < array.cols(); ++c) before[r * array.cols() + c] = array.write_count(r, c);
  }
  for (std::size_t i = 0; i < kSearches; ++i) part.search(to_word(rng() & mask, key_bits));
  std::uint64_t worst = 0;
  for (std::size_t r = 0; r < array.rows(); ++r) {
    for (std::size_t c = 0; c < array.cols(); ++c) {
      worst = std::max(worst, array.write_count(r, c) - before[r * array.cols() + c]);
    }
  }
  const double w = static_cast<double>(worst) / kSearches;
  cache.emplace(k, w);
  return w;
}

double lifetime_seconds(double endurance, double period_s, double partitions, double touched,
                        double wear_per_search) {
  if (!(partitions > 0)) throw InvalidArgument("lifetime needs at least one partition");
  if (!(wear_per_search > 0) || !(touched > 0)) {
    throw InvalidArgument("wear per search and partitions touched must be positive");
  }
  return endurance * period_s * partitions / (wear_per_search * touched);
}

std::optional<double> lifetime_years(const ModelParams& p, Structure s) {
  p.validate();
  if (s == Structure::CmosTTree || s == Structure::MemTTree) return std::nullopt;
  const double avg_s = avg_search_time(p, s) * 1e-9;
  const double period = p.query_rate > 0 ? std::max(1.0 / p.query_rate, avg_s) : avg_s;
  const double w = p.wear_per_search ? *p.wear_per_search : measured_wear_per_search(p.cam_mode, 64);
  return lifetime_seconds(p.endurance, period, effective_partitions(p, s), 1.0, w) /
         kSecondsPerYear;
}

double default_footprint_bytes(Structure s) {
  switch (s) {
  case Structure::CmosTTree:
    return 128e9 / 5.4e9;
  case Structure::MemTTree:
    return 8e12 / 3.4e11;
  case Structure::HashCam:
  case Structure::TTreeCam:
  case Structure::MemCam:
    return 1e12 / 6.9e10;
  case Structure::TBTree:
  case Structure::TBTreeCam:
    return 1e12 / 2.8e10;
  }
  throw InvalidArgument("unsupported structure");
}

double capacity_estimate(double budget, Structure s) {
  if (budget < 0) throw InvalidArgument("storage budget must be non-negative");
  return budget / default_footprint_bytes(s);
}

std::vector<SweepRow> sweep(const ModelParams& base, const SweepGrid& grid) {
  if (grid.structures.empty() || grid.n_records.empty() || grid.t_access_ns.empty() ||
      grid.key_bits.empty()) {
    throw InvalidArgument("sweep grid has an empty axis");
  }
  std::vector<SweepRow> rows;
  for (Structure s : grid.structures) {
    for (double n : grid.n_records) {
      for (double t : grid.t_access_ns) {
        for (std::uint64_t k : grid.key_bits) {
          ModelParams p = base;
          p.n_records = n;
          p.t_access_ns = t;
          p.key_bits = k;
          rows.push_back({s, n, t, k, avg_search_time(p, s), lifetime_years(p, s)});
        }
      }
    }
  }
  return rows;
}

std::string sweep_csv_header() {
  return "structure,n_records,t_access_ns,k_bits,avg_time_ns,lifetime_years";
}

std::string sweep_csv_row(const SweepRow& r) {
  return std::string(to_string(r.structure)) + ',' + fmt(r.n_records) + ',' + fmt(r.t_access_ns) +
         ',' + std::to_string(r.key_bits) + ',' + fmt(r.avg_time_ns) + ',' +
         (r.lifetime_years ? fmt(*r.lifetime_years) : std::string("NA"));
}

} // namespace memcam
