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

/**
 * @file model.hpp
 * @brief Closed-form search-time, energy, capacity and lifetime model for the
 *        memory-resident and hybrid index structures.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memcam/cam.hpp"

namespace memcam {

struct LatencyClosedForm {
  double base_ns;
  double per_round_ns;
};

struct EnergyClosedForm {
  double base_fj;
  double per_round_fj;
};

LatencyClosedForm cam_latency_form(CamMode mode);
EnergyClosedForm cam_energy_form(CamMode mode);

/// Internal search time in ns for a key_bits-wide word. Throws on non-power-of-two.
double cam_latency(std::uint64_t key_bits, CamMode mode);
/// fJ per stored bit per search.
double cam_energy(std::uint64_t key_bits, CamMode mode);

enum class Structure : std::uint8_t {
  CmosTTree,
  MemTTree,
  TBTree,
  HashCam,
  TTreeCam,
  TBTreeCam,
  MemCam,
};

std::string_view to_string(Structure s);
Structure parse_structure(std::string_view s);
/// The six structures compared in the sweeps, in output order.
const std::vector<Structure>& sweep_structures();

enum class TreeKind : std::uint8_t { TTree, TBTree };

struct ModelParams {
  double n_records = 1e9;
  double T = 10;
  double B = 80;
  int level_u = 17;
  double node_time_u_ns = 16;
  double node_time_lt_cmos_ns = 60;
  double t_access_ns = 10;
  double step_time_ns = 2;
  std::uint64_t key_bits = 64;
  CamMode cam_mode = CamMode::Cam;
  /// Defaults to node_time_u_ns when unset.
  std::optional<double> hash_time_ns;
  /// Overrides the composed MemCAM search time when set.
  std::optional<double> memcam_search_time_ns;
  /// Depth of the CAM-searched subtree root inside each B+-tree.
  int cam_subtree_root_depth = 1;
  /// Hash table entries (= CAM partitions) for Hash-CAM.
  double hash_partitions = 1048576;
  double endurance = 1e10;
  /// Searches per second; 0 means back-to-back searches.
  double query_rate = 0;
  /// Max-wear-cell writes per search; measured from the simulator when unset.
  std::optional<double> wear_per_search;

  void validate() const;
};

double record_nodes(const ModelParams& p, TreeKind kind);
int lower_levels(const ModelParams& p, TreeKind kind);

/// Memristor node visit: one key write, two reads and a 64-bit CAM compare.
double node_time_memristor(const ModelParams& p);
double node_time_ltb(const ModelParams& p);
double memcam_search_time(const ModelParams& p);
double hash_time(const ModelParams& p);

double avg_time_t(const ModelParams& p, double node_time_lt);
double avg_time_tb(const ModelParams& p);
double avg_time_hc(const ModelParams& p);
double avg_time_tc(const ModelParams& p);
/// Depth 0 equals avg_time_tc; the leaf depth equals avg_time_tb.
double avg_time_tbc(const ModelParams& p, int cam_subtree_root_depth);
double avg_search_time(const ModelParams& p, Structure s);

/// Lower-level units that share the search wear under uniform load.
double effective_partitions(const ModelParams& p, Structure s);

/// Max-cell writes per search measured on a simulated CAM partition.
double measured_wear_per_search(CamMode mode, std::uint64_t key_bits);

double lifetime_seconds(double endurance, double period_s, double partitions, double touched,
                        double wear_per_search);
/// Empty for the memory-resident T-trees, which do not compute in memristors.
std::optional<double> lifetime_years(const ModelParams& p, Structure s);

/// Bytes per record back-derived from the storage budgets and record counts.
double default_footprint_bytes(Structure s);
double capacity_estimate(double storage_budget_bytes, Structure s);

struct SweepGrid {
  std::vector<Structure> structures;
  std::vector<double> n_records;
  std::vector<double> t_access_ns;
  std::vector<std::uint64_t> key_bits;
};

struct SweepRow {
  Structure structure;
  double n_records;
  double t_access_ns;
  std::uint64_t key_bits;
  double avg_time_ns;
  std::optional<double> lifetime_years;
};

/// Rows ordered by structure, then n_records, t_access, key_bits.
std::vector<SweepRow> sweep(const ModelParams& base, const SweepGrid& grid);
std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& r);

} // namespace memcam
