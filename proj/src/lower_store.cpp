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

#include "lower_store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memcam/error.hpp"

namespace memcam::detail {

namespace {

TernaryWord word_of(std::uint64_t key, std::size_t bits) { return to_word(key, bits); }

bool by_key(const Record& a, const Record& b) { return a.key < b.key; }

// Reads the stored-bit column of every cell over rows; returns the decoded keys
// in row order.
std::vector<std::uint64_t> read_keys(CamPartition& part, const RowMask& rows, ExecStats& st) {
  std::vector<std::uint64_t> keys(rows.count(), 0);
  const std::size_t w = cell_width(part.mode());
  const std::size_t d = part.mode() == CamMode::Tcam ? tcam_col::D0 : cam_col::D;
  for (std::size_t i = 0; i < part.key_bits(); ++i) {
    const std::vector<bool> bits = part.array().read_column(part.col0() + i * w + d, rows, st);
    for (std::size_t r = 0; r < bits.size(); ++r) keys[r] = (keys[r] << 1) | (bits[r] ? 1U : 0U);
  }
  return keys;
}

} // namespace

// --------------------------------------------------------------- SlotPool

std::size_t SlotPool::acquire(std::size_t owner) {
  for (std::size_t s = 0; s < owner_.size(); ++s) {
    if (owner_[s] < 0) {
      owner_[s] = static_cast<long>(owner);
      return s;
    }
  }
  arrays_.push_back(std::make_unique<CrossbarArray>(rows_, cols_, config_));
  owner_.push_back(static_cast<long>(owner));
  return arrays_.size() - 1;
}

void SlotPool::release(std::size_t slot) { owner_.at(slot) = -1; }

std::vector<std::size_t> fill_groups(std::size_t n, std::size_t B) {
  if (n == 0) return {};
  if (n <= B) return {n};
  const std::size_t min_fill = (B + 1) / 2;
  const std::size_t target = std::max(min_fill, (3 * B) / 4);
  std::size_t m = static_cast<std::size_t>(std::llround(static_cast<double>(n) / target));
  m = std::clamp(m, (n + B - 1) / B, n / min_fill);
  std::vector<std::size_t> sizes(m, n / m);
  for (std::size_t i = 0; i < n % m; ++i) ++sizes[i];
  return sizes;
}

// --------------------------------------------------------------- CamStore

CamStore::CamStore(CrossbarArray& array, CamMode mode, std::size_t key_bits)
    : part_(array, mode, key_bits, array.rows()), key_bits_(key_bits) {}

void CamStore::insert(const Record& r, ExecStats& st) {
  if (!can_insert(r.key)) throw CapacityError("CAM partition full");
  st += part_.write_entry(rows_.size(), word_of(r.key, key_bits_));
  pos_[r.key] = rows_.size();
  rows_.push_back(r);
}

std::optional<std::uint64_t> CamStore::erase(std::uint64_t key, ExecStats& st) {
  auto it = pos_.find(key);
  if (it == pos_.end()) return std::nullopt;
  const std::size_t j = it->second;
  const std::uint64_t ref = rows_[j].ref;
  pos_.erase(it);
  const std::size_t last = rows_.size() - 1;
  if (j != last) {
    rows_[j] = rows_[last];
    pos_[rows_[j].key] = j;
    st += part_.write_entry(j, word_of(rows_[j].key, key_bits_));
  }
  rows_.pop_back();
  part_.truncate(rows_.size());
  return ref;
}

std::optional<std::uint64_t> CamStore::point(std::uint64_t key, ExecStats& st) {
  if (rows_.empty()) return std::nullopt;
  const auto res = part_.search(word_of(key, key_bits_), RowMask::range(0, rows_.size()), &st);
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (res[i].equal) return rows_[i].ref;
  }
  return std::nullopt;
}

void CamStore::range_bound(std::optional<std::uint64_t> lo, std::optional<std::uint64_t> hi,
                           ExecStats& st, std::vector<Record>& out) {
  if (part_.mode() != CamMode::Tcam) {
    throw UnsupportedOperation("range search needs a ternary (ordered) CAM partition");
  }
  if (rows_.empty()) return;
  const RowMask all = RowMask::range(0, rows_.size());
  std::vector<bool> keep(rows_.size(), true);
  if (lo) {
    const auto res = part_.search(word_of(*lo, key_bits_), all, &st);
    for (std::size_t i = 0; i < res.size(); ++i) keep[i] = keep[i] && !res[i].less;
  }
  if (hi) {
    const auto res = part_.search(word_of(*hi, key_bits_), all, &st);
    for (std::size_t i = 0; i < res.size(); ++i) keep[i] = keep[i] && !res[i].greater;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (keep[i]) out.push_back(rows_[i]);
  }
}

void CamStore::drain(ExecStats& st, std::vector<Record>& out) {
  if (rows_.empty()) return;
  const auto keys = read_keys(part_, RowMask::range(0, rows_.size()), st);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keys[i] != rows_[i].key) throw Error("CAM partition row " + std::to_string(i) + " disagrees with its host mirror");
    out.push_back(rows_[i]);
  }
}

std::vector<Record> CamStore::sorted() const {
  std::vector<Record> v = rows_;
  std::sort(v.begin(), v.end(), by_key);
  return v;
}

void CamStore::rebuild(const std::vector<Record>& sorted, ExecStats& st) {
  if (sorted.size() > part_.capacity()) throw CapacityError("CAM partition full");
  rows_ = sorted;
  pos_.clear();
  std::vector<TernaryWord> words;
  words.reserve(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    pos_[rows_[i].key] = i;
    words.push_back(word_of(rows_[i].key, key_bits_));
  }
  st += part_.store_entries(words);
}

void CamStore::relocate(CrossbarArray& dst, ExecStats& st) {
  part_ = CamPartition(dst, part_.mode(), key_bits_, dst.rows());
  const std::vector<Record> keep = rows_;
  rebuild(keep, st);
}

std::string CamStore::check() const {
  if (part_.size() != rows_.size() || pos_.size() != rows_.size()) return "CAM partition size mismatch";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (part_.stored(i) != word_of(rows_[i].key, key_bits_)) {
      return "CAM row " + std::to_string(i) + " does not hold key " + std::to_string(rows_[i].key);
    }
    auto it = pos_.find(rows_[i].key);
    if (it == pos_.end() || it->second != i) return "CAM position map stale";
  }
  return {};
}

// ------------------------------------------------------------- BPlusStore

BPlusStore::BPlusStore(CrossbarArray& array, std::size_t key_bits, std::size_t B, int cam_depth)
    : part_(array, CamMode::Tcam, key_bits, array.rows()), key_bits_(key_bits), B_(B),
      max_blocks_(array.rows() / B), cam_depth_(cam_depth) {
  if (B < 3) throw InvalidArgument("B+-tree order must be at least 3");
  if (max_blocks_ == 0) throw CapacityError("slot smaller than one B+-tree node");
  root_ = alloc(true);
}

std::size_t BPlusStore::blocks_for(std::size_t n, std::size_t B) {
  std::size_t level = std::max<std::size_t>(1, fill_groups(n, B).size());
  std::size_t total = level;
  while (level > 1) {
    level = fill_groups(level, B).size();
    total += level;
  }
  return total;
}

std::size_t BPlusStore::free_blocks() const { return free_.size() + (max_blocks_ - nodes_.size()); }

std::size_t BPlusStore::used_blocks() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.used; }));
}

std::size_t BPlusStore::alloc(bool leaf) {
  std::size_t b;
  if (!free_.empty()) {
    b = free_.back();
    free_.pop_back();
  } else if (nodes_.size() < max_blocks_) {
    b = nodes_.size();
    nodes_.emplace_back();
  } else {
    throw CapacityError("B+-tree partition has no free node block");
  }
  nodes_[b] = Node{};
  nodes_[b].used = true;
  nodes_[b].leaf = leaf;
  return b;
}

void BPlusStore::release(std::size_t b) {
  nodes_[b] = Node{};
  free_.push_back(b);
}

void BPlusStore::write_row(std::size_t b, std::size_t j, ExecStats& st) {
  st += part_.write_entry(b * B_ + j, word_of(nodes_[b].keys[j], key_bits_));
}

void BPlusStore::append(std::size_t b, std::uint64_t key, std::uint64_t val, ExecStats& st) {
  Node& n = nodes_[b];
  n.keys.push_back(key);
  n.vals.push_back(val);
  if (!n.leaf) nodes_[val].parent = static_cast<long>(b);
  write_row(b, n.keys.size() - 1, st);
}

void BPlusStore::remove_at(std::size_t b, std::size_t j, ExecStats& st) {
  Node& n = nodes_[b];
  const std::size_t last = n.keys.size() - 1;
  if (j != last) {
    n.keys[j] = n.keys[last];
    n.vals[j] = n.vals[last];
    write_row(b, j, st);
  }
  n.keys.pop_back();
  n.vals.pop_back();
}

std::size_t BPlusStore::child_slot(const Node& n, std::uint64_t x) const {
  std::size_t best = n.keys.size();
  for (std::size_t j = 0; j < n.keys.size(); ++j) {
    if (n.keys[j] <= x && (best == n.keys.size() || n.keys[j] > n.keys[best])) best = j;
  }
  if (best == n.keys.size()) throw Error("B+-tree routing found no child");
  return best;
}

std::size_t BPlusStore::find_leaf(std::uint64_t x) const {
  std::size_t b = root_;
  while (!nodes_[b].leaf) b = nodes_[b].vals[child_slot(nodes_[b], x)];
  return b;
}

std::size_t BPlusStore::leftmost_leaf(std::size_t b) const {
  while (!nodes_[b].leaf) {
    const Node& n = nodes_[b];
    b = n.vals[std::min_element(n.keys.begin(), n.keys.end()) - n.keys.begin()];
  }
  return b;
}

std::size_t BPlusStore::rightmost_leaf(std::size_t b) const {
  while (!nodes_[b].leaf) {
    const Node& n = nodes_[b];
    b = n.vals[std::max_element(n.keys.begin(), n.keys.end()) - n.keys.begin()];
  }
  return b;
}

std::size_t BPlusStore::index_in_parent(std::size_t b) const {
  const Node& p = nodes_[static_cast<std::size_t>(nodes_[b].parent)];
  for (std::size_t j = 0; j < p.vals.size(); ++j) {
    if (p.vals[j] == b) return j;
  }
  throw Error("B+-tree parent link broken");
}

RowMask BPlusStore::leaf_mask(std::size_t b) const {
  return RowMask::range(b * B_, b * B_ + nodes_[b].keys.size());
}

RowMask BPlusStore::subtree_mask(std::size_t b) const {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::vector<std::size_t> stack{b};
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    const Node& n = nodes_[c];
    if (n.leaf) {
      if (!n.keys.empty()) ranges.emplace_back(c * B_, c * B_ + n.keys.size());
    } else {
      for (auto v : n.vals) stack.push_back(static_cast<std::size_t>(v));
    }
  }
  return RowMask(std::move(ranges));
}

std::vector<std::pair<std::size_t, EntryMatch>>
BPlusStore::search(std::uint64_t x, const RowMask& mask, ExecStats& st) {
  std::vector<std::pair<std::size_t, EntryMatch>> out;
  if (mask.empty()) return out;
  const auto res = part_.search(word_of(x, key_bits_), mask, &st);
  const auto rows = mask.rows();
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.emplace_back(rows[i], res[i]);
  return out;
}

std::size_t BPlusStore::descend(std::uint64_t x, ExecStats& st) {
  std::size_t b = root_;
  for (int level = 0; !nodes_[b].leaf && level < cam_depth_; ++level) {
    const Node& n = nodes_[b];
    // The CAM reports which separators are <= x; the controller keeps the
    // largest of them.
    std::size_t best = n.keys.size();
    for (const auto& [row, m] : search(x, RowMask::range(b * B_, b * B_ + n.keys.size()), st)) {
      const std::size_t j = row - b * B_;
      if (!m.greater && (best == n.keys.size() || n.keys[j] > n.keys[best])) best = j;
    }
    if (best == n.keys.size()) throw Error("B+-tree CAM routing found no child");
    b = n.vals[best];
  }
  return b;
}

bool BPlusStore::contains(std::uint64_t key) const {
  const Node& n = nodes_[find_leaf(key)];
  return std::find(n.keys.begin(), n.keys.end(), key) != n.keys.end();
}

std::optional<std::uint64_t> BPlusStore::point(std::uint64_t key, ExecStats& st) {
  if (count_ == 0) return std::nullopt;
  const std::size_t b = descend(key, st);
  const RowMask mask = nodes_[b].leaf ? leaf_mask(b) : subtree_mask(b);
  for (const auto& [row, m] : search(key, mask, st)) {
    if (m.equal) return nodes_[row / B_].vals[row % B_];
  }
  return std::nullopt;
}

void BPlusStore::drain_leaf(std::size_t b, ExecStats& st, std::vector<Record>& out) {
  const Node& n = nodes_[b];
  if (n.keys.empty()) return;
  const auto keys = read_keys(part_, leaf_mask(b), st);
  for (std::size_t j = 0; j < keys.size(); ++j) {
    if (keys[j] != n.keys[j]) throw Error("B+-tree leaf row disagrees with its host mirror");
    out.push_back({n.keys[j], n.vals[j]});
  }
}

void BPlusStore::range_bound(std::optional<std::uint64_t> lo, std::optional<std::uint64_t> hi,
                             ExecStats& st, std::vector<Record>& out) {
  if (count_ == 0) return;
  auto mask_of = [&](std::size_t b) { return nodes_[b].leaf ? leaf_mask(b) : subtree_mask(b); };
  auto collect = [&](std::size_t b, bool use_lo, bool use_hi) {
    const RowMask mask = mask_of(b);
    std::vector<std::pair<std::size_t, EntryMatch>> a, c;
    if (use_lo) a = search(*lo, mask, st);
    if (use_hi) c = search(*hi, mask, st);
    const auto rows = mask.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (use_lo && a[i].second.less) continue;
      if (use_hi && c[i].second.greater) continue;
      const Node& n = nodes_[rows[i] / B_];
      out.push_back({n.keys[rows[i] % B_], n.vals[rows[i] % B_]});
    }
  };

  const std::optional<std::size_t> lo_root = lo ? std::optional(descend(*lo, st)) : std::nullopt;
  const std::optional<std::size_t> hi_root = hi ? std::optional(descend(*hi, st)) : std::nullopt;
  if (lo_root && hi_root && *lo_root == *hi_root) {
    collect(*lo_root, true, true);
    return;
  }
  long cur;
  if (lo_root) {
    collect(*lo_root, true, false);
    cur = nodes_[rightmost_leaf(*lo_root)].next;
  } else {
    cur = static_cast<long>(leftmost_leaf(root_));
  }
  const long stop = hi_root ? static_cast<long>(leftmost_leaf(*hi_root)) : -1;
  while (cur >= 0 && cur != stop) {
    drain_leaf(static_cast<std::size_t>(cur), st, out);
    cur = nodes_[static_cast<std::size_t>(cur)].next;
  }
  if (hi_root) collect(*hi_root, false, true);
}

void BPlusStore::drain(ExecStats& st, std::vector<Record>& out) {
  if (count_ == 0) return;
  for (long cur = static_cast<long>(leftmost_leaf(root_)); cur >= 0;
       cur = nodes_[static_cast<std::size_t>(cur)].next) {
    drain_leaf(static_cast<std::size_t>(cur), st, out);
  }
}

bool BPlusStore::can_insert(std::uint64_t key) const {
  std::size_t b = find_leaf(key);
  std::size_t needed = 0;
  while (nodes_[b].keys.size() >= B_) {
    ++needed;
    if (b == root_) {
      ++needed;
      break;
    }
    b = static_cast<std::size_t>(nodes_[b].parent);
  }
  return needed <= free_blocks();
}

void BPlusStore::insert(const Record& r, ExecStats& st) {
  if (!can_insert(r.key)) throw CapacityError("B+-tree partition full");
  const std::size_t b = find_leaf(r.key);
  ++count_;
  if (nodes_[b].keys.size() < B_) {
    append(b, r.key, r.ref, st);
  } else {
    split_insert(b, r.key, r.ref, st);
  }
}

void BPlusStore::split_insert(std::size_t b, std::uint64_t key, std::uint64_t val, ExecStats& st) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> all;
  {
    const Node& n = nodes_[b];
    for (std::size_t j = 0; j < n.keys.size(); ++j) all.emplace_back(n.keys[j], n.vals[j]);
  }
  all.emplace_back(key, val);
  std::sort(all.begin(), all.end());
  const std::size_t mid = (all.size() + 1) / 2;

  const std::size_t r = alloc(nodes_[b].leaf);
  const std::vector<std::uint64_t> old_keys = nodes_[b].keys;
  Node& left = nodes_[b];
  left.keys.clear();
  left.vals.clear();
  for (std::size_t i = 0; i < mid; ++i) {
    left.keys.push_back(all[i].first);
    left.vals.push_back(all[i].second);
  }
  if (!nodes_[b].leaf) {
    for (auto v : nodes_[b].vals) nodes_[v].parent = static_cast<long>(b);
  }
  // Only rows whose content moved need rewriting.
  for (std::size_t j = 0; j < mid; ++j) {
    if (j >= old_keys.size() || old_keys[j] != nodes_[b].keys[j]) write_row(b, j, st);
  }
  for (std::size_t i = mid; i < all.size(); ++i) append(r, all[i].first, all[i].second, st);

  if (nodes_[b].leaf) {
    nodes_[r].next = nodes_[b].next;
    nodes_[r].prev = static_cast<long>(b);
    if (nodes_[b].next >= 0) nodes_[static_cast<std::size_t>(nodes_[b].next)].prev = static_cast<long>(r);
    nodes_[b].next = static_cast<long>(r);
  }
  const std::uint64_t sep = all[mid].first;

  if (b == root_) {
    const std::size_t nr = alloc(false);
    append(nr, 0, b, st);
    append(nr, sep, r, st);
    root_ = nr;
    return;
  }
  const std::size_t p = static_cast<std::size_t>(nodes_[b].parent);
  nodes_[r].parent = static_cast<long>(p);
  if (nodes_[p].keys.size() < B_) {
    append(p, sep, r, st);
  } else {
    split_insert(p, sep, r, st);
  }
}

std::optional<std::uint64_t> BPlusStore::erase(std::uint64_t key, ExecStats& st) {
  const std::size_t b = find_leaf(key);
  Node& n = nodes_[b];
  const auto it = std::find(n.keys.begin(), n.keys.end(), key);
  if (it == n.keys.end()) return std::nullopt;
  const std::size_t j = static_cast<std::size_t>(it - n.keys.begin());
  const std::uint64_t ref = n.vals[j];
  remove_at(b, j, st);
  --count_;
  if (b != root_ && nodes_[b].keys.size() < min_fill()) fix_underflow(b, st);
  return ref;
}

void BPlusStore::fix_underflow(std::size_t b, ExecStats& st) {
  const std::size_t p = static_cast<std::size_t>(nodes_[b].parent);
  const std::uint64_t sep = nodes_[p].keys[index_in_parent(b)];
  std::optional<std::size_t> ls, rs; // sibling slots in parent
  for (std::size_t j = 0; j < nodes_[p].keys.size(); ++j) {
    const std::uint64_t k = nodes_[p].keys[j];
    if (k < sep && (!ls || k > nodes_[p].keys[*ls])) ls = j;
    if (k > sep && (!rs || k < nodes_[p].keys[*rs])) rs = j;
  }
  const bool leaf = nodes_[b].leaf;

  if (rs && nodes_[nodes_[p].vals[*rs]].keys.size() > min_fill()) {
    const std::size_t r = nodes_[p].vals[*rs];
    const auto& rk = nodes_[r].keys;
    const std::size_t j = static_cast<std::size_t>(std::min_element(rk.begin(), rk.end()) - rk.begin());
    const std::uint64_t k = nodes_[r].keys[j], v = nodes_[r].vals[j];
    remove_at(r, j, st);
    append(b, k, v, st);
    const auto& rk2 = nodes_[r].keys;
    nodes_[p].keys[*rs] = *std::min_element(rk2.begin(), rk2.end());
    write_row(p, *rs, st);
    return;
  }
  if (ls && nodes_[nodes_[p].vals[*ls]].keys.size() > min_fill()) {
    const std::size_t l = nodes_[p].vals[*ls];
    const auto& lk = nodes_[l].keys;
    const std::size_t j = static_cast<std::size_t>(std::max_element(lk.begin(), lk.end()) - lk.begin());
    const std::uint64_t k = nodes_[l].keys[j], v = nodes_[l].vals[j];
    remove_at(l, j, st);
    append(b, k, v, st);
    const std::size_t jb = index_in_parent(b);
    nodes_[p].keys[jb] = k;
    write_row(p, jb, st);
    return;
  }

  // Merge the right node of the pair into the left one.
  std::size_t keep, gone;
  if (rs) {
    keep = b;
    gone = nodes_[p].vals[*rs];
  } else if (ls) {
    keep = nodes_[p].vals[*ls];
    gone = b;
  } else {
    return; // only child; the parent collapses below
  }
  for (std::size_t j = 0; j < nodes_[gone].keys.size(); ++j) {
    append(keep, nodes_[gone].keys[j], nodes_[gone].vals[j], st);
  }
  if (leaf) {
    nodes_[keep].next = nodes_[gone].next;
    if (nodes_[gone].next >= 0) nodes_[static_cast<std::size_t>(nodes_[gone].next)].prev = static_cast<long>(keep);
  }
  remove_at(p, index_in_parent(gone), st);
  release(gone);

  if (p == root_) {
    if (nodes_[p].keys.size() == 1) {
      root_ = nodes_[p].vals[0];
      nodes_[root_].parent = -1;
      release(p);
    }
  } else if (nodes_[p].keys.size() < min_fill()) {
    fix_underflow(p, st);
  }
}

void BPlusStore::bulk_load(const std::vector<Record>& sorted) {
  nodes_.clear();
  free_.clear();
  count_ = sorted.size();
  if (blocks_for(sorted.size(), B_) > max_blocks_) {
    throw CapacityError(std::to_string(sorted.size()) + " records need more node blocks than the slot holds");
  }
  struct Item {
    std::uint64_t min_key;
    std::size_t block;
  };
  std::vector<Item> level;
  std::size_t pos = 0;
  long prev = -1;
  for (std::size_t g : fill_groups(sorted.size(), B_)) {
    const std::size_t b = alloc(true);
    for (std::size_t i = 0; i < g; ++i, ++pos) {
      nodes_[b].keys.push_back(sorted[pos].key);
      nodes_[b].vals.push_back(sorted[pos].ref);
    }
    nodes_[b].prev = prev;
    if (prev >= 0) nodes_[static_cast<std::size_t>(prev)].next = static_cast<long>(b);
    prev = static_cast<long>(b);
    level.push_back({nodes_[b].keys.front(), b});
  }
  if (level.empty()) {
    root_ = alloc(true);
    return;
  }
  while (level.size() > 1) {
    std::vector<Item> up;
    std::size_t at = 0;
    for (std::size_t g : fill_groups(level.size(), B_)) {
      const std::size_t b = alloc(false);
      for (std::size_t i = 0; i < g; ++i, ++at) {
        nodes_[b].keys.push_back(at == 0 ? 0 : level[at].min_key);
        nodes_[b].vals.push_back(level[at].block);
        nodes_[level[at].block].parent = static_cast<long>(b);
      }
      up.push_back({nodes_[b].keys.front(), b});
    }
    level = std::move(up);
  }
  root_ = level.front().block;
}

void BPlusStore::rebuild(const std::vector<Record>& sorted, ExecStats& st) {
  bulk_load(sorted);
  for (std::size_t b = 0; b < nodes_.size(); ++b) {
    if (!nodes_[b].used) continue;
    for (std::size_t j = 0; j < nodes_[b].keys.size(); ++j) write_row(b, j, st);
  }
}

void BPlusStore::relocate(CrossbarArray& dst, ExecStats& st) {
  part_ = CamPartition(dst, CamMode::Tcam, key_bits_, dst.rows());
  for (std::size_t b = 0; b < nodes_.size(); ++b) {
    if (!nodes_[b].used) continue;
    for (std::size_t j = 0; j < nodes_[b].keys.size(); ++j) write_row(b, j, st);
  }
}

std::vector<Record> BPlusStore::sorted() const {
  std::vector<Record> v;
  v.reserve(count_);
  for (long cur = static_cast<long>(leftmost_leaf(root_)); cur >= 0;
       cur = nodes_[static_cast<std::size_t>(cur)].next) {
    const Node& n = nodes_[static_cast<std::size_t>(cur)];
    for (std::size_t j = 0; j < n.keys.size(); ++j) v.push_back({n.keys[j], n.vals[j]});
  }
  std::sort(v.begin(), v.end(), by_key);
  return v;
}

int BPlusStore::height() const {
  int h = 1;
  for (std::size_t b = root_; !nodes_[b].leaf; b = nodes_[b].vals.front()) ++h;
  return h;
}

std::string BPlusStore::check() const {
  if (nodes_[root_].parent != -1) return "B+-tree root has a parent";
  std::size_t records = 0;
  int leaf_depth = -1;
  std::string err;
  // (block, depth, lower bound, upper bound exclusive or none)
  struct Frame {
    std::size_t b;
    int depth;
    std::uint64_t lo;
    std::optional<std::uint64_t> hi;
  };
  std::vector<Frame> stack{{root_, 0, 0, std::nullopt}};
  std::vector<std::size_t> leaves_in_order;
  while (!stack.empty() && err.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const Node& n = nodes_[f.b];
    if (!n.used) return "B+-tree references a free block";
    if (n.keys.size() > B_) return "B+-tree node over capacity";
    if (f.b != root_ && n.keys.size() < min_fill()) return "B+-tree node under minimum fill";
    if (!n.leaf && f.b == root_ && n.keys.size() < 2) return "B+-tree internal root with one child";
    for (std::size_t j = 0; j < n.keys.size(); ++j) {
      if (part_.stored(f.b * B_ + j) != word_of(n.keys[j], key_bits_)) {
        return "B+-tree row " + std::to_string(f.b * B_ + j) + " disagrees with host mirror";
      }
    }
    if (n.leaf) {
      if (leaf_depth < 0) leaf_depth = f.depth;
      if (leaf_depth != f.depth) return "B+-tree leaves at different depths";
      for (auto k : n.keys) {
        if (k < f.lo || (f.hi && k >= *f.hi)) return "B+-tree key outside its separator range";
      }
      records += n.keys.size();
      continue;
    }
    std::vector<std::size_t> order(n.keys.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return n.keys[a] < n.keys[b]; });
    if (n.keys[order.front()] != f.lo) return "B+-tree node min separator differs from its own";
    for (std::size_t i = order.size(); i-- > 0;) {
      const std::size_t j = order[i];
      if (nodes_[n.vals[j]].parent != static_cast<long>(f.b)) return "B+-tree parent pointer stale";
      const std::optional<std::uint64_t> hi =
          i + 1 < order.size() ? std::optional(n.keys[order[i + 1]]) : f.hi;
      stack.push_back({n.vals[j], f.depth + 1, n.keys[j], hi});
    }
  }
  if (records != count_) return "B+-tree record count mismatch";
  // Leaf chain must visit leaves in key order and cover all records.
  std::size_t chained = 0;
  std::optional<std::uint64_t> last;
  long prev = -1;
  for (long cur = static_cast<long>(leftmost_leaf(root_)); cur >= 0;
       cur = nodes_[static_cast<std::size_t>(cur)].next) {
    const Node& n = nodes_[static_cast<std::size_t>(cur)];
    if (n.prev != prev) return "B+-tree leaf chain back link broken";
    prev = cur;
    if (!n.keys.empty()) {
      const auto [mn, mx] = std::minmax_element(n.keys.begin(), n.keys.end());
      if (last && *mn <= *last) return "B+-tree leaf chain out of order";
      last = *mx;
    }
    chained += n.keys.size();
  }
  if (chained != count_) return "B+-tree leaf chain misses records";
  return {};
}

} // namespace memcam::detail
