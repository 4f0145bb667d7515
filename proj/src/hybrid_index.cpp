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

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lower_store.hpp"
#include "memcam/error.hpp"
#include "memcam/hybrid.hpp"

namespace memcam {

using detail::BPlusStore;
using detail::CamStore;
using detail::LowerStore;
using detail::SlotPool;

std::string_view to_string(IndexKind k) {
  switch (k) {
  case IndexKind::HashCam:
    return "hash-cam";
  case IndexKind::TTreeCam:
    return "ttree-cam";
  case IndexKind::TBTree:
    return "tb-tree";
  case IndexKind::TBTreeCam:
    return "tb-tree-cam";
  }
  return "?";
}

IndexKind parse_index_kind(std::string_view s) {
  for (IndexKind k : {IndexKind::HashCam, IndexKind::TTreeCam, IndexKind::TBTree, IndexKind::TBTreeCam}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown index structure '" + std::string(s) + "'");
}

std::string_view to_string(HashKind h) {
  return h == HashKind::Uniform ? "uniform" : "uniform_order_preserving";
}

HashKind parse_hash_kind(std::string_view s) {
  if (s == "uniform") return HashKind::Uniform;
  if (s == "uniform_order_preserving") return HashKind::UniformOrderPreserving;
  throw InvalidArgument("unknown hash '" + std::string(s) + "'");
}

void HybridIndexConfig::validate() const {
  if (level_u < 1) throw InvalidArgument("level_u must be at least 1");
  if (level_u > 30) throw InvalidArgument("level_u above 30 is not supported");
  if (T < 1) throw InvalidArgument("T must be at least 1");
  if (B < 3) throw InvalidArgument("B must be at least 3");
  if (cam_subtree_root_depth < 0) throw InvalidArgument("cam_subtree_root_depth must be >= 0");
  if (partitions < 1) throw InvalidArgument("partitions must be at least 1");
  if (!is_power_of_two(key_bits) || key_bits < 2 || key_bits > 64) {
    throw InvalidArgument("key_bits must be a power of two in [2, 64]");
  }
  if (kind == IndexKind::HashCam && support_range && hash != HashKind::UniformOrderPreserving) {
    throw InvalidArgument("hash-cam range queries need an order-preserving hash");
  }
  crossbar.endurance.validate();
}

std::string wear_csv_header() { return "partition,writes_total,max_cell_writes,projected_lifetime_s"; }

std::string wear_csv_row(const SlotWear& w) {
  char buf[64];
  if (std::isinf(w.projected_lifetime_s)) {
    std::snprintf(buf, sizeof buf, "inf");
  } else {
    std::snprintf(buf, sizeof buf, "%.10g", w.projected_lifetime_s);
  }
  return std::to_string(w.slot) + ',' + std::to_string(w.writes_total) + ',' +
         std::to_string(w.max_cell_writes) + ',' + buf;
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Link {
  bool node = false;
  std::size_t id = 0;
};

struct TNode {
  std::vector<Record> recs; // sorted
  Link left;
  Link right;
  int height = 1;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

bool by_key(const Record& a, const Record& b) { return a.key < b.key; }

} // namespace

struct HybridIndex::Impl {
  HybridIndexConfig cfg;
  CamMode mode = CamMode::Tcam;
  std::unique_ptr<SlotPool> pool;
  std::vector<std::unique_ptr<LowerStore>> parts;
  std::vector<std::size_t> slot_of;
  std::vector<TNode> tnodes;
  std::vector<std::size_t> free_tnodes;
  std::vector<bool> tnode_live;
  Link root{false, 0};
  std::size_t n_records = 0;
  OpTrace last;
  ExecStats totals;
  std::uint64_t queries = 0;

  [[nodiscard]] bool is_hash() const { return cfg.kind == IndexKind::HashCam; }

  // -------------------------------------------------------------- stores

  std::unique_ptr<LowerStore> make_store(CrossbarArray& a) const {
    switch (cfg.kind) {
    case IndexKind::HashCam:
    case IndexKind::TTreeCam:
      return std::make_unique<CamStore>(a, mode, cfg.key_bits);
    case IndexKind::TBTree:
      return std::make_unique<BPlusStore>(a, cfg.key_bits, cfg.B, INT_MAX);
    case IndexKind::TBTreeCam:
      return std::make_unique<BPlusStore>(a, cfg.key_bits, cfg.B, cfg.cam_subtree_root_depth);
    }
    throw InvalidArgument("unknown index kind");
  }

  std::size_t new_partition() {
    const std::size_t id = parts.size();
    const std::size_t slot = pool->acquire(id);
    parts.push_back(make_store(pool->array(slot)));
    slot_of.push_back(slot);
    return id;
  }

  void retire(std::size_t id) {
    pool->release(slot_of[id]);
    parts[id].reset();
    slot_of[id] = kNone;
  }

  std::size_t slot_rows(std::size_t max_initial) const {
    if (cfg.partition_rows > 0) return cfg.partition_rows;
    if (cfg.kind == IndexKind::TBTree || cfg.kind == IndexKind::TBTreeCam) {
      const std::size_t blocks = 2 * BPlusStore::blocks_for(std::max(max_initial, cfg.T + 2), cfg.B) + 4;
      return blocks * cfg.B;
    }
    return std::max<std::size_t>(64, round_up(2 * max_initial + cfg.T + 2, 64));
  }

  std::size_t bucket(std::uint64_t key) const {
    const std::uint64_t P = cfg.partitions;
    if (cfg.hash == HashKind::Uniform) return static_cast<std::size_t>(splitmix64(key) % P);
    const unsigned __int128 prod = static_cast<unsigned __int128>(key) * P;
    return static_cast<std::size_t>(prod >> cfg.key_bits);
  }

  // ------------------------------------------------------------ T-tree

  int height(Link l) const { return l.node ? tnodes[l.id].height : 0; }

  void update(std::size_t id) {
    tnodes[id].height = 1 + std::max(height(tnodes[id].left), height(tnodes[id].right));
  }

  std::size_t new_tnode() {
    std::size_t id;
    if (!free_tnodes.empty()) {
      id = free_tnodes.back();
      free_tnodes.pop_back();
      tnodes[id] = TNode{};
      tnode_live[id] = true;
    } else {
      id = tnodes.size();
      tnodes.emplace_back();
      tnode_live.push_back(true);
    }
    return id;
  }

  void free_tnode(std::size_t id) {
    tnodes[id] = TNode{};
    tnode_live[id] = false;
    free_tnodes.push_back(id);
  }

  Link rotate_right(std::size_t id) {
    const std::size_t l = tnodes[id].left.id;
    tnodes[id].left = tnodes[l].right;
    tnodes[l].right = {true, id};
    update(id);
    update(l);
    return {true, l};
  }

  Link rotate_left(std::size_t id) {
    const std::size_t r = tnodes[id].right.id;
    tnodes[id].right = tnodes[r].left;
    tnodes[r].left = {true, id};
    update(id);
    update(r);
    return {true, r};
  }

  Link rebalance(std::size_t id) {
    update(id);
    const int bf = height(tnodes[id].left) - height(tnodes[id].right);
    if (bf > 1) {
      const std::size_t l = tnodes[id].left.id;
      if (height(tnodes[l].left) < height(tnodes[l].right)) tnodes[id].left = rotate_left(l);
      return rotate_right(id);
    }
    if (bf < -1) {
      const std::size_t r = tnodes[id].right.id;
      if (height(tnodes[r].right) < height(tnodes[r].left)) tnodes[id].right = rotate_right(r);
      return rotate_left(id);
    }
    return {true, id};
  }

  Link build_tree(long lo, long hi, std::vector<std::vector<Record>>& node_recs) {
    if (lo > hi) return {false, static_cast<std::size_t>(lo)};
    const long mid = lo + (hi - lo) / 2;
    const std::size_t id = new_tnode();
    tnodes[id].recs = std::move(node_recs[static_cast<std::size_t>(mid)]);
    const Link l = build_tree(lo, mid - 1, node_recs);
    const Link r = build_tree(mid + 1, hi, node_recs);
    tnodes[id].left = l;
    tnodes[id].right = r;
    update(id);
    return {true, id};
  }

  std::size_t rightmost_partition(Link l) const {
    while (l.node) l = tnodes[l.id].right;
    return l.id;
  }

  std::size_t leftmost_partition(Link l) const {
    while (l.node) l = tnodes[l.id].left;
    return l.id;
  }

  /// Partition the key routes to, or kNone when it lands inside a node.
  std::size_t route(std::uint64_t key, std::size_t* visits, const Record** hit) const {
    if (hit) *hit = nullptr;
    if (is_hash()) {
      if (visits) ++*visits;
      return bucket(key);
    }
    Link cur = root;
    while (cur.node) {
      if (visits) ++*visits;
      const TNode& n = tnodes[cur.id];
      if (key < n.recs.front().key) {
        cur = n.left;
      } else if (key > n.recs.back().key) {
        cur = n.right;
      } else {
        auto it = std::lower_bound(n.recs.begin(), n.recs.end(), Record{key, 0}, by_key);
        if (hit && it != n.recs.end() && it->key == key) *hit = &*it;
        return kNone;
      }
    }
    return cur.id;
  }

  bool contains(std::uint64_t key) const {
    const Record* hit = nullptr;
    const std::size_t p = route(key, nullptr, &hit);
    return p == kNone ? hit != nullptr : parts[p]->contains(key);
  }

  Link split_partition(std::size_t p, const Record& rec, ExecStats& st) {
    std::vector<Record> recs = parts[p]->sorted();
    recs.insert(std::upper_bound(recs.begin(), recs.end(), rec, by_key), rec);
    const std::size_t n = recs.size();
    if (n < cfg.T + 2) throw CapacityError("partition slot too small to split");
    const std::size_t m0 = (n - cfg.T) / 2;
    const std::vector<Record> left(recs.begin(), recs.begin() + static_cast<long>(m0));
    const std::vector<Record> right(recs.begin() + static_cast<long>(m0 + cfg.T), recs.end());
    parts[p]->rebuild(left, st);
    const std::size_t q = new_partition();
    parts[q]->rebuild(right, st);
    const std::size_t id = new_tnode();
    tnodes[id].recs.assign(recs.begin() + static_cast<long>(m0), recs.begin() + static_cast<long>(m0 + cfg.T));
    tnodes[id].left = {false, p};
    tnodes[id].right = {false, q};
    update(id);
    return {true, id};
  }

  Link insert_rec(Link l, const Record& rec, ExecStats& st) {
    if (!l.node) {
      if (parts[l.id]->can_insert(rec.key)) {
        parts[l.id]->insert(rec, st);
        return l;
      }
      return split_partition(l.id, rec, st);
    }
    const std::size_t id = l.id;
    if (rec.key < tnodes[id].recs.front().key) {
      const Link c = insert_rec(tnodes[id].left, rec, st);
      tnodes[id].left = c;
    } else if (rec.key > tnodes[id].recs.back().key) {
      const Link c = insert_rec(tnodes[id].right, rec, st);
      tnodes[id].right = c;
    } else {
      auto& recs = tnodes[id].recs;
      recs.insert(std::upper_bound(recs.begin(), recs.end(), rec, by_key), rec);
      if (recs.size() > cfg.T) {
        // A full node hands its minimum to the gap on its left.
        const Record spill = recs.front();
        recs.erase(recs.begin());
        const Link c = insert_rec(tnodes[id].left, spill, st);
        tnodes[id].left = c;
      }
    }
    return rebalance(id);
  }

  void refill(std::size_t id, ExecStats& st) {
    if (tnodes[id].recs.size() >= cfg.T) return;
    const std::size_t pl = rightmost_partition(tnodes[id].left);
    if (parts[pl]->size() > 0) {
      const Record r = parts[pl]->sorted().back();
      parts[pl]->erase(r.key, st);
      tnodes[id].recs.insert(tnodes[id].recs.begin(), r);
      return;
    }
    const std::size_t pr = leftmost_partition(tnodes[id].right);
    if (parts[pr]->size() > 0) {
      const Record r = parts[pr]->sorted().front();
      parts[pr]->erase(r.key, st);
      tnodes[id].recs.push_back(r);
    }
  }

  Link fix_rightmost(Link l, ExecStats& st) {
    const std::size_t id = l.id;
    if (tnodes[id].right.node) {
      const Link c = fix_rightmost(tnodes[id].right, st);
      tnodes[id].right = c;
      return rebalance(id);
    }
    refill(id, st);
    if (tnodes[id].recs.empty()) return remove_empty(id, st);
    return rebalance(id);
  }

  Link fix_leftmost(Link l, ExecStats& st) {
    const std::size_t id = l.id;
    if (tnodes[id].left.node) {
      const Link c = fix_leftmost(tnodes[id].left, st);
      tnodes[id].left = c;
      return rebalance(id);
    }
    refill(id, st);
    if (tnodes[id].recs.empty()) return remove_empty(id, st);
    return rebalance(id);
  }

  // Node id is empty and both neighbouring gaps are empty.
  Link remove_empty(std::size_t id, ExecStats& st) {
    const Link l = tnodes[id].left;
    const Link r = tnodes[id].right;
    if (!l.node && !r.node) {
      std::vector<Record> merged = parts[l.id]->sorted();
      const std::vector<Record> more = parts[r.id]->sorted();
      if (!more.empty()) {
        merged.insert(merged.end(), more.begin(), more.end());
        parts[l.id]->rebuild(merged, st);
      }
      retire(r.id);
      free_tnode(id);
      return l;
    }
    if (l.node) {
      // Take over the whole predecessor node; it then repairs itself.
      std::size_t p = l.id;
      while (tnodes[p].right.node) p = tnodes[p].right.id;
      tnodes[id].recs = std::move(tnodes[p].recs);
      tnodes[p].recs.clear();
      const Link c = fix_rightmost(l, st);
      tnodes[id].left = c;
    } else {
      std::size_t s = r.id;
      while (tnodes[s].left.node) s = tnodes[s].left.id;
      tnodes[id].recs = std::move(tnodes[s].recs);
      tnodes[s].recs.clear();
      const Link c = fix_leftmost(r, st);
      tnodes[id].right = c;
    }
    return rebalance(id);
  }

  Link erase_rec(Link l, std::uint64_t key, ExecStats& st) {
    if (!l.node) {
      parts[l.id]->erase(key, st);
      return l;
    }
    const std::size_t id = l.id;
    if (key < tnodes[id].recs.front().key) {
      const Link c = erase_rec(tnodes[id].left, key, st);
      tnodes[id].left = c;
    } else if (key > tnodes[id].recs.back().key) {
      const Link c = erase_rec(tnodes[id].right, key, st);
      tnodes[id].right = c;
    } else {
      auto& recs = tnodes[id].recs;
      recs.erase(std::lower_bound(recs.begin(), recs.end(), Record{key, 0}, by_key));
      refill(id, st);
      if (tnodes[id].recs.empty()) return remove_empty(id, st);
    }
    return rebalance(id);
  }

  // ------------------------------------------------------------ queries

  void begin_op() { last = OpTrace{}; }
  void end_op() { totals += last.mem; }

  void note_compute(std::size_t p, std::uint64_t steps_before) {
    if (last.mem.step_count > steps_before &&
        std::find(last.compute_partitions.begin(), last.compute_partitions.end(), p) ==
            last.compute_partitions.end()) {
      last.compute_partitions.push_back(p);
    }
  }

  void visit_partition(std::size_t p, std::uint64_t lo, std::uint64_t hi, std::size_t pl,
                       std::size_t ph, std::vector<Record>& out) {
    if (p == pl || p == ph) {
      const std::uint64_t before = last.mem.step_count;
      parts[p]->range_bound(p == pl ? std::optional(lo) : std::nullopt,
                            p == ph ? std::optional(hi) : std::nullopt, last.mem, out);
      note_compute(p, before);
    } else {
      parts[p]->drain(last.mem, out);
      if (parts[p]->size() > 0) last.read_partitions.push_back(p);
    }
  }

  void collect(Link l, std::uint64_t lo, std::uint64_t hi, std::size_t pl, std::size_t ph,
               std::vector<Record>& out) {
    if (!l.node) {
      visit_partition(l.id, lo, hi, pl, ph, out);
      return;
    }
    ++last.host_visits;
    const TNode& n = tnodes[l.id];
    if (lo < n.recs.front().key) collect(n.left, lo, hi, pl, ph, out);
    for (const auto& r : tnodes[l.id].recs) {
      if (r.key >= lo && r.key <= hi) out.push_back(r);
    }
    if (hi > tnodes[l.id].recs.back().key) collect(tnodes[l.id].right, lo, hi, pl, ph, out);
  }

  void in_order(Link l, std::vector<Record>& out) const {
    if (!l.node) {
      const auto v = parts[l.id]->sorted();
      out.insert(out.end(), v.begin(), v.end());
      return;
    }
    in_order(tnodes[l.id].left, out);
    out.insert(out.end(), tnodes[l.id].recs.begin(), tnodes[l.id].recs.end());
    in_order(tnodes[l.id].right, out);
  }

  // --------------------------------------------------------- invariants

  void check_tree(Link l, std::optional<std::uint64_t> lo, std::optional<std::uint64_t> hi,
                  std::vector<std::size_t>& seen_parts, std::size_t& seen_nodes,
                  std::size_t& recs) const {
    auto in_bounds = [&](std::uint64_t k) { return (!lo || k > *lo) && (!hi || k < *hi); };
    if (!l.node) {
      if (l.id >= parts.size() || !parts[l.id]) throw Error("T-tree links a retired partition");
      seen_parts.push_back(l.id);
      for (const auto& r : parts[l.id]->sorted()) {
        if (!in_bounds(r.key)) throw Error("partition key outside its gap");
      }
      recs += parts[l.id]->size();
      return;
    }
    if (!tnode_live[l.id]) throw Error("T-tree links a freed node");
    const TNode& n = tnodes[l.id];
    ++seen_nodes;
    if (n.recs.empty() || n.recs.size() > cfg.T) throw Error("T-node occupancy out of range");
    for (std::size_t i = 0; i < n.recs.size(); ++i) {
      if (!in_bounds(n.recs[i].key)) throw Error("T-node key outside subtree bounds");
      if (i > 0 && n.recs[i - 1].key >= n.recs[i].key) throw Error("T-node keys unsorted");
    }
    if (n.height != 1 + std::max(height(n.left), height(n.right))) throw Error("T-node height stale");
    if (std::abs(height(n.left) - height(n.right)) > 1) throw Error("T-tree out of balance");
    recs += n.recs.size();
    check_tree(n.left, lo, n.recs.front().key, seen_parts, seen_nodes, recs);
    check_tree(n.right, n.recs.back().key, hi, seen_parts, seen_nodes, recs);
  }
};

// ------------------------------------------------------------------- API

HybridIndex::HybridIndex(const HybridIndexConfig& config, std::vector<Record> records)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  config.validate();
  m.cfg = config;
  m.mode = (config.kind == IndexKind::HashCam && config.hash == HashKind::Uniform) ? CamMode::Cam
                                                                                  : CamMode::Tcam;
  std::sort(records.begin(), records.end(), by_key);
  const std::uint64_t limit = config.key_bits == 64 ? ~0ULL : ((1ULL << config.key_bits) - 1);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].key > limit) throw InvalidArgument("key " + std::to_string(records[i].key) + " exceeds key_bits");
    if (i > 0 && records[i - 1].key == records[i].key) {
      throw InvalidArgument("duplicate key " + std::to_string(records[i].key));
    }
  }
  m.n_records = records.size();
  const std::size_t cols = config.key_bits * cell_width(m.mode);
  ExecStats st;

  if (m.is_hash()) {
    std::vector<std::vector<Record>> buckets(config.partitions);
    for (const auto& r : records) buckets[m.bucket(r.key)].push_back(r);
    std::size_t biggest = 0;
    for (const auto& b : buckets) biggest = std::max(biggest, b.size());
    m.pool = std::make_unique<SlotPool>(m.slot_rows(biggest), cols, config.crossbar);
    for (std::size_t p = 0; p < config.partitions; ++p) {
      m.new_partition();
      m.parts[p]->rebuild(buckets[p], st);
    }
  } else {
    int levels = 0;
    const double n = static_cast<double>(records.size());
    for (int L = 1; L <= config.level_u; ++L) {
      if ((std::ldexp(1.0, L) - 1) * static_cast<double>(config.T) < n) levels = L;
    }
    const std::size_t U = (std::size_t{1} << levels) - 1;
    const std::size_t rest = records.size() - U * config.T;
    const std::size_t gaps = U + 1;
    std::vector<std::vector<Record>> gap_recs(gaps), node_recs(U);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < gaps; ++g) {
      const std::size_t take = rest / gaps + (g < rest % gaps ? 1 : 0);
      gap_recs[g].assign(records.begin() + static_cast<long>(pos), records.begin() + static_cast<long>(pos + take));
      pos += take;
      if (g < U) {
        node_recs[g].assign(records.begin() + static_cast<long>(pos), records.begin() + static_cast<long>(pos + config.T));
        pos += config.T;
      }
    }
    std::size_t biggest = 0;
    for (const auto& g : gap_recs) biggest = std::max(biggest, g.size());
    m.pool = std::make_unique<SlotPool>(m.slot_rows(biggest), cols, config.crossbar);
    for (std::size_t g = 0; g < gaps; ++g) {
      m.new_partition();
      m.parts[g]->rebuild(gap_recs[g], st);
    }
    m.root = m.build_tree(0, static_cast<long>(U) - 1, node_recs);
  }
  m.totals += st;
}

HybridIndex::~HybridIndex() = default;
HybridIndex::HybridIndex(HybridIndex&&) noexcept = default;
HybridIndex& HybridIndex::operator=(HybridIndex&&) noexcept = default;

const HybridIndexConfig& HybridIndex::config() const { return impl_->cfg; }

std::optional<std::uint64_t> HybridIndex::point_query(std::uint64_t key) {
  Impl& m = *impl_;
  m.begin_op();
  ++m.queries;
  const Record* hit = nullptr;
  const std::size_t p = m.route(key, &m.last.host_visits, &hit);
  std::optional<std::uint64_t> out;
  if (p == kNone) {
    if (hit) out = hit->ref;
  } else {
    const std::uint64_t before = m.last.mem.step_count;
    out = m.parts[p]->point(key, m.last.mem);
    m.note_compute(p, before);
  }
  m.end_op();
  return out;
}

std::vector<Record> HybridIndex::range_query(std::uint64_t lo, std::uint64_t hi) {
  Impl& m = *impl_;
  if (lo > hi) throw InvalidArgument("range lower bound above upper bound");
  if (m.is_hash() && m.cfg.hash != HashKind::UniformOrderPreserving) {
    throw UnsupportedOperation("hash-cam with a non order-preserving hash supports point search only");
  }
  m.begin_op();
  ++m.queries;
  std::vector<Record> out;
  const std::size_t pl = m.route(lo, &m.last.host_visits, nullptr);
  const std::size_t ph = m.route(hi, &m.last.host_visits, nullptr);
  if (m.is_hash()) {
    for (std::size_t b = pl; b <= ph; ++b) m.visit_partition(b, lo, hi, pl, ph, out);
  } else {
    m.collect(m.root, lo, hi, pl, ph, out);
  }
  std::sort(out.begin(), out.end(), by_key);
  m.end_op();
  return out;
}

void HybridIndex::insert(std::uint64_t key, std::uint64_t ref) {
  Impl& m = *impl_;
  const std::uint64_t limit = m.cfg.key_bits == 64 ? ~0ULL : ((1ULL << m.cfg.key_bits) - 1);
  if (key > limit) throw InvalidArgument("key " + std::to_string(key) + " exceeds key_bits");
  if (m.contains(key)) throw InvalidArgument("duplicate key " + std::to_string(key));
  m.begin_op();
  const Record rec{key, ref};
  if (m.is_hash()) {
    ++m.last.host_visits;
    const std::size_t p = m.bucket(key);
    if (!m.parts[p]->can_insert(key)) throw CapacityError("hash partition " + std::to_string(p) + " is full");
    m.parts[p]->insert(rec, m.last.mem);
  } else {
    m.root = m.insert_rec(m.root, rec, m.last.mem);
  }
  ++m.n_records;
  m.end_op();
}

void HybridIndex::erase(std::uint64_t key) {
  Impl& m = *impl_;
  if (!m.contains(key)) throw InvalidArgument("key " + std::to_string(key) + " not present");
  m.begin_op();
  if (m.is_hash()) {
    ++m.last.host_visits;
    m.parts[m.bucket(key)]->erase(key, m.last.mem);
  } else {
    m.root = m.erase_rec(m.root, key, m.last.mem);
  }
  --m.n_records;
  m.end_op();
}

void HybridIndex::rotate_partitions() {
  Impl& m = *impl_;
  m.begin_op();
  const std::size_t S = m.pool->size();
  if (S >= 2) {
    std::vector<long> owners(S, -1);
    for (std::size_t s = 0; s < S; ++s) owners[(s + 1) % S] = m.pool->owner(s);
    for (std::size_t s = 0; s < S; ++s) m.pool->set_owner(s, owners[s]);
    for (std::size_t id = 0; id < m.parts.size(); ++id) {
      if (!m.parts[id]) continue;
      m.slot_of[id] = (m.slot_of[id] + 1) % S;
      m.parts[id]->relocate(m.pool->array(m.slot_of[id]), m.last.mem);
    }
  }
  m.end_op();
}

WearStats HybridIndex::wear_report(double query_rate) const {
  const Impl& m = *impl_;
  if (!(query_rate > 0)) throw InvalidArgument("query_rate must be positive");
  if (m.queries == 0) throw InvalidArgument("wear report needs at least one query");
  WearStats ws;
  ws.queries = m.queries;
  ws.projected_lifetime_s = std::numeric_limits<double>::infinity();
  const double seconds = static_cast<double>(m.queries) / query_rate;
  const double endurance = static_cast<double>(m.cfg.crossbar.endurance.endurance_limit);
  for (std::size_t s = 0; s < m.pool->size(); ++s) {
    const CrossbarArray& a = m.pool->array(s);
    SlotWear w;
    w.slot = s;
    w.writes_total = a.total_writes();
    w.max_cell_writes = a.max_write_count();
    w.projected_lifetime_s = w.max_cell_writes == 0
                                 ? std::numeric_limits<double>::infinity()
                                 : endurance * seconds / static_cast<double>(w.max_cell_writes);
    ws.max_cell_writes = std::max(ws.max_cell_writes, w.max_cell_writes);
    ws.projected_lifetime_s = std::min(ws.projected_lifetime_s, w.projected_lifetime_s);
    ws.slots.push_back(w);
  }
  return ws;
}

const OpTrace& HybridIndex::last_op() const { return impl_->last; }
const ExecStats& HybridIndex::totals() const { return impl_->totals; }
std::uint64_t HybridIndex::query_count() const { return impl_->queries; }
std::size_t HybridIndex::size() const { return impl_->n_records; }

std::size_t HybridIndex::partition_count() const {
  return static_cast<std::size_t>(std::count_if(impl_->parts.begin(), impl_->parts.end(),
                                                [](const auto& p) { return p != nullptr; }));
}

std::size_t HybridIndex::slot_count() const { return impl_->pool->size(); }

std::vector<long> HybridIndex::slot_map() const {
  std::vector<long> out;
  for (auto s : impl_->slot_of) out.push_back(s == kNone ? -1 : static_cast<long>(s));
  return out;
}

std::size_t HybridIndex::upper_node_count() const {
  return static_cast<std::size_t>(std::count(impl_->tnode_live.begin(), impl_->tnode_live.end(), true));
}

std::size_t HybridIndex::upper_record_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < impl_->tnodes.size(); ++i) {
    if (impl_->tnode_live[i]) n += impl_->tnodes[i].recs.size();
  }
  return n;
}

int HybridIndex::upper_height() const { return impl_->is_hash() ? 0 : impl_->height(impl_->root); }

std::vector<std::size_t> HybridIndex::partition_sizes() const {
  std::vector<std::size_t> out;
  for (const auto& p : impl_->parts) {
    if (p) out.push_back(p->size());
  }
  return out;
}

std::vector<Record> HybridIndex::records() const {
  const Impl& m = *impl_;
  std::vector<Record> out;
  if (m.is_hash()) {
    for (const auto& p : m.parts) {
      const auto v = p->sorted();
      out.insert(out.end(), v.begin(), v.end());
    }
    std::sort(out.begin(), out.end(), by_key);
  } else {
    m.in_order(m.root, out);
  }
  return out;
}

const CrossbarArray& HybridIndex::slot_array(std::size_t slot) const { return impl_->pool->array(slot); }

void HybridIndex::check_invariants() const {
  const Impl& m = *impl_;
  std::vector<std::size_t> seen;
  std::size_t recs = 0;
  if (m.is_hash()) {
    for (std::size_t p = 0; p < m.parts.size(); ++p) {
      seen.push_back(p);
      for (const auto& r : m.parts[p]->sorted()) {
        if (m.bucket(r.key) != p) throw Error("record stored in the wrong hash partition");
      }
      recs += m.parts[p]->size();
    }
  } else {
    std::size_t nodes = 0;
    m.check_tree(m.root, std::nullopt, std::nullopt, seen, nodes, recs);
    if (nodes != upper_node_count()) throw Error("unreachable T-tree nodes");
  }
  if (recs != m.n_records) throw Error("record count mismatch");
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw Error("partition linked twice");
  if (seen.size() != partition_count()) throw Error("live partition not linked from the upper level");
  for (std::size_t id = 0; id < m.parts.size(); ++id) {
    if (!m.parts[id]) continue;
    if (m.pool->owner(m.slot_of[id]) != static_cast<long>(id)) throw Error("slot ownership stale");
    const std::string err = m.parts[id]->check();
    if (!err.empty()) throw Error("partition " + std::to_string(id) + ": " + err);
  }
}

} // namespace memcam
