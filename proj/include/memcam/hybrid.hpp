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
 * @file hybrid.hpp
 * @brief Hybrid indexes: a host-resident upper level (hash table or T-tree)
 *        routing each operation to one of many memristor-resident lower
 *        partitions (CAM blocks or unsorted B+-trees).
 *
 * Every partition lives in its own physical slot, a crossbar of identical
 * geometry. Rotation shifts partitions across slots so that search wear is
 * spread over the physical arrays.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memcam/cam.hpp"
#include "memcam/crossbar.hpp"

namespace memcam {

enum class IndexKind : std::uint8_t { HashCam, TTreeCam, TBTree, TBTreeCam };

std::string_view to_string(IndexKind k);
IndexKind parse_index_kind(std::string_view s);

enum class HashKind : std::uint8_t { Uniform, UniformOrderPreserving };

std::string_view to_string(HashKind h);
HashKind parse_hash_kind(std::string_view s);

struct HybridIndexConfig {
  IndexKind kind = IndexKind::TTreeCam;
  int level_u = 3;
  std::size_t T = 10;
  std::size_t B = 16;
  /// B+-tree levels walked node by node before one CAM search over the leaves
  /// below. 0 searches all leaves of the tree at once; values at or beyond
  /// the leaf level walk to a single leaf.
  int cam_subtree_root_depth = 1;
  /// Hash table entries; only used by HashCam.
  std::size_t partitions = 8;
  HashKind hash = HashKind::UniformOrderPreserving;
  /// HashCam only: refuse to build unless the hash preserves order.
  bool support_range = false;
  std::size_t key_bits = 32;
  /// Rows per physical slot; 0 sizes slots from the initial data.
  std::size_t partition_rows = 0;
  CrossbarConfig crossbar{};

  void validate() const;
};

struct Record {
  std::uint64_t key = 0;
  std::uint64_t ref = 0;
  friend bool operator==(const Record&, const Record&) = default;
};

/// What the most recent operation did.
struct OpTrace {
  ExecStats mem;
  /// Upper-level node visits (or hash probes) charged at the host node time.
  std::size_t host_visits = 0;
  /// Logical partitions that ran compare programs.
  std::vector<std::size_t> compute_partitions;
  /// Logical partitions read out without computation.
  std::vector<std::size_t> read_partitions;

  [[nodiscard]] double latency_ns(double host_node_ns = 16.0) const {
    return mem.elapsed_ns + host_node_ns * static_cast<double>(host_visits);
  }
};

struct SlotWear {
  std::size_t slot = 0;
  std::uint64_t writes_total = 0;
  std::uint64_t max_cell_writes = 0;
  /// Seconds until the slot's most worn cell reaches endurance.
  double projected_lifetime_s = 0;
};

struct WearStats {
  std::vector<SlotWear> slots;
  std::uint64_t queries = 0;
  std::uint64_t max_cell_writes = 0;
  double projected_lifetime_s = 0;
};

std::string wear_csv_header();
std::string wear_csv_row(const SlotWear& w);

class HybridIndex {
public:
  /// Keys must be distinct and fit in key_bits.
  HybridIndex(const HybridIndexConfig& config, std::vector<Record> records);
  ~HybridIndex();
  HybridIndex(HybridIndex&&) noexcept;
  HybridIndex& operator=(HybridIndex&&) noexcept;

  [[nodiscard]] const HybridIndexConfig& config() const;

  std::optional<std::uint64_t> point_query(std::uint64_t key);
  /// Records with lo <= key <= hi, key ascending.
  std::vector<Record> range_query(std::uint64_t lo, std::uint64_t hi);
  void insert(std::uint64_t key, std::uint64_t ref);
  void erase(std::uint64_t key);
  void rotate_partitions();

  [[nodiscard]] WearStats wear_report(double query_rate) const;
  [[nodiscard]] const OpTrace& last_op() const;
  [[nodiscard]] const ExecStats& totals() const;
  [[nodiscard]] std::uint64_t query_count() const;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t partition_count() const;
  [[nodiscard]] std::size_t slot_count() const;
  /// Physical slot of each live logical partition (-1 for retired ids).
  [[nodiscard]] std::vector<long> slot_map() const;
  [[nodiscard]] std::size_t upper_node_count() const;
  [[nodiscard]] std::size_t upper_record_count() const;
  /// Height of the upper T-tree (0 for hash kinds or an empty tree).
  [[nodiscard]] int upper_height() const;
  /// Record counts per live logical partition.
  [[nodiscard]] std::vector<std::size_t> partition_sizes() const;
  /// Every record, key ascending, from host state.
  [[nodiscard]] std::vector<Record> records() const;
  /// Crossbar of a physical slot, for inspection.
  [[nodiscard]] const CrossbarArray& slot_array(std::size_t slot) const;

  /// Throws Error describing the first broken structural invariant, including
  /// any mismatch between host mirrors and array contents.
  void check_invariants() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace memcam
