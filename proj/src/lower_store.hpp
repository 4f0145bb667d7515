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

// Lower-level partition stores and the slot pool backing them.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "memcam/cam.hpp"
#include "memcam/crossbar.hpp"
#include "memcam/hybrid.hpp"

namespace memcam::detail {

class SlotPool {
public:
  SlotPool(std::size_t rows, std::size_t cols, CrossbarConfig config)
      : rows_(rows), cols_(cols), config_(config) {}

  /// Returns a free slot (reusing retired ones first) now owned by owner.
  std::size_t acquire(std::size_t owner);
  void release(std::size_t slot);
  CrossbarArray& array(std::size_t slot) { return *arrays_.at(slot); }
  [[nodiscard]] const CrossbarArray& array(std::size_t slot) const { return *arrays_.at(slot); }
  [[nodiscard]] std::size_t size() const { return arrays_.size(); }
  [[nodiscard]] long owner(std::size_t slot) const { return owner_.at(slot); }
  void set_owner(std::size_t slot, long owner) { owner_.at(slot) = owner; }
  [[nodiscard]] std::size_t rows() const { return rows_; }

private:
  std::size_t rows_;
  std::size_t cols_;
  CrossbarConfig config_;
  std::vector<std::unique_ptr<CrossbarArray>> arrays_;
  std::vector<long> owner_;
};

class LowerStore {
public:
  virtual ~LowerStore() = default;

  [[nodiscard]] virtual std::size_t size() const = 0;
  /// Host-side membership check.
  [[nodiscard]] virtual bool contains(std::uint64_t key) const = 0;
  [[nodiscard]] virtual bool can_insert(std::uint64_t key) const = 0;
  virtual void insert(const Record& r, ExecStats& st) = 0;
  virtual std::optional<std::uint64_t> erase(std::uint64_t key, ExecStats& st) = 0;

  /// Exact-match search in the array.
  virtual std::optional<std::uint64_t> point(std::uint64_t key, ExecStats& st) = 0;
  /// Records inside the bounds; absent bounds are open. Computes in the array.
  virtual void range_bound(std::optional<std::uint64_t> lo, std::optional<std::uint64_t> hi,
                           ExecStats& st, std::vector<Record>& out) = 0;
  /// Every record, through external reads only.
  virtual void drain(ExecStats& st, std::vector<Record>& out) = 0;

  [[nodiscard]] virtual std::vector<Record> sorted() const = 0;
  virtual void rebuild(const std::vector<Record>& sorted, ExecStats& st) = 0;
  virtual void relocate(CrossbarArray& dst, ExecStats& st) = 0;
  /// Empty string when consistent.
  [[nodiscard]] virtual std::string check() const = 0;
};

/// Flat CAM block: row i holds entry i, appended on insert and swap-removed
/// on delete.
class CamStore final : public LowerStore {
public:
  CamStore(CrossbarArray& array, CamMode mode, std::size_t key_bits);

  [[nodiscard]] std::size_t size() const override { return rows_.size(); }
  [[nodiscard]] bool contains(std::uint64_t key) const override { return pos_.count(key) != 0; }
  [[nodiscard]] bool can_insert(std::uint64_t) const override {
    return rows_.size() < part_.capacity();
  }
  void insert(const Record& r, ExecStats& st) override;
  std::optional<std::uint64_t> erase(std::uint64_t key, ExecStats& st) override;
  std::optional<std::uint64_t> point(std::uint64_t key, ExecStats& st) override;
  void range_bound(std::optional<std::uint64_t> lo, std::optional<std::uint64_t> hi, ExecStats& st,
                   std::vector<Record>& out) override;
  void drain(ExecStats& st, std::vector<Record>& out) override;
  [[nodiscard]] std::vector<Record> sorted() const override;
  void rebuild(const std::vector<Record>& sorted, ExecStats& st) override;
  void relocate(CrossbarArray& dst, ExecStats& st) override;
  [[nodiscard]] std::string check() const override;

private:
  CamPartition part_;
  std::size_t key_bits_;
  std::vector<Record> rows_;
  std::unordered_map<std::uint64_t, std::size_t> pos_;
};

/// B+-tree with unsorted nodes; node block b owns rows [b*B, (b+1)*B).
/// Internal entries hold the lower-bound key of their child, 0 on the
/// leftmost path.
class BPlusStore final : public LowerStore {
public:
  BPlusStore(CrossbarArray& array, std::size_t key_bits, std::size_t B, int cam_depth);

  [[nodiscard]] std::size_t size() const override { return count_; }
  [[nodiscard]] bool contains(std::uint64_t key) const override;
  [[nodiscard]] bool can_insert(std::uint64_t key) const override;
  void insert(const Record& r, ExecStats& st) override;
  std::optional<std::uint64_t> erase(std::uint64_t key, ExecStats& st) override;
  std::optional<std::uint64_t> point(std::uint64_t key, ExecStats& st) override;
  void range_bound(std::optional<std::uint64_t> lo, std::optional<std::uint64_t> hi, ExecStats& st,
                   std::vector<Record>& out) override;
  void drain(ExecStats& st, std::vector<Record>& out) override;
  [[nodiscard]] std::vector<Record> sorted() const override;
  void rebuild(const std::vector<Record>& sorted, ExecStats& st) override;
  void relocate(CrossbarArray& dst, ExecStats& st) override;
  [[nodiscard]] std::string check() const override;

  /// Levels including the leaves.
  [[nodiscard]] int height() const;
  [[nodiscard]] std::size_t used_blocks() const;

  /// Node blocks needed to bulk load n records.
  static std::size_t blocks_for(std::size_t n, std::size_t B);

private:
  struct Node {
    bool used = false;
    bool leaf = true;
    std::vector<std::uint64_t> keys;
    std::vector<std::uint64_t> vals; // record refs, or child blocks
    long parent = -1;
    long prev = -1;
    long next = -1;
  };

  [[nodiscard]] std::size_t min_fill() const { return (B_ + 1) / 2; }
  [[nodiscard]] std::size_t free_blocks() const;
  std::size_t alloc(bool leaf);
  void release(std::size_t b);
  void write_row(std::size_t b, std::size_t j, ExecStats& st);
  void append(std::size_t b, std::uint64_t key, std::uint64_t val, ExecStats& st);
  void remove_at(std::size_t b, std::size_t j, ExecStats& st);

  [[nodiscard]] std::size_t child_slot(const Node& n, std::uint64_t x) const;
  [[nodiscard]] std::size_t find_leaf(std::uint64_t x) const;
  [[nodiscard]] std::size_t leftmost_leaf(std::size_t b) const;
  [[nodiscard]] std::size_t rightmost_leaf(std::size_t b) const;
  [[nodiscard]] std::size_t index_in_parent(std::size_t b) const;
  [[nodiscard]] RowMask subtree_mask(std::size_t b) const;
  [[nodiscard]] RowMask leaf_mask(std::size_t b) const;

  /// Walks the CAM-searched internal levels for x; returns the node whose
  /// leaves get the final CAM search.
  std::size_t descend(std::uint64_t x, ExecStats& st);
  /// (row, match) pairs for the rows of mask.
  std::vector<std::pair<std::size_t, EntryMatch>> search(std::uint64_t x, const RowMask& mask,
                                                         ExecStats& st);
  void drain_leaf(std::size_t b, ExecStats& st, std::vector<Record>& out);
  void split_insert(std::size_t b, std::uint64_t key, std::uint64_t val, ExecStats& st);
  void fix_underflow(std::size_t b, ExecStats& st);
  void bulk_load(const std::vector<Record>& sorted);

  CamPartition part_;
  std::size_t key_bits_;
  std::size_t B_;
  std::size_t max_blocks_;
  int cam_depth_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> free_;
  std::size_t root_ = 0;
  std::size_t count_ = 0;
};

/// Splits n items into groups of between ceil(B/2) and B (a single smaller
/// group when n is small), aiming at 75% fill.
std::vector<std::size_t> fill_groups(std::size_t n, std::size_t B);

} // namespace memcam::detail
