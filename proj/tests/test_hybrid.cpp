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
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "memcam/error.hpp"
#include "memcam/hybrid.hpp"

using namespace memcam;

namespace {

std::vector<Record> random_records(std::mt19937_64& rng, std::size_t n, std::size_t key_bits,
                                   std::map<std::uint64_t, std::uint64_t>* oracle = nullptr) {
  const std::uint64_t mask = key_bits == 64 ? ~0ULL : (1ULL << key_bits) - 1;
  std::map<std::uint64_t, std::uint64_t> m;
  while (m.size() < n) m.emplace(rng() & mask, rng());
  std::vector<Record> out;
  for (const auto& [k, v] : m) out.push_back({k, v});
  std::shuffle(out.begin(), out.end(), rng);
  if (oracle) *oracle = m;
  return out;
}

HybridIndexConfig small_config(IndexKind kind) {
  HybridIndexConfig c;
  c.kind = kind;
  c.key_bits = 16;
  c.level_u = 3;
  c.T = 4;
  c.B = 4;
  c.partitions = 8;
  return c;
}

std::vector<Record> oracle_range(const std::map<std::uint64_t, std::uint64_t>& m, std::uint64_t lo,
                                 std::uint64_t hi) {
  std::vector<Record> out;
  for (auto it = m.lower_bound(lo); it != m.end() && it->first <= hi; ++it) out.push_back({it->first, it->second});
  return out;
}

const IndexKind kAllKinds[] = {IndexKind::HashCam, IndexKind::TTreeCam, IndexKind::TBTree, IndexKind::TBTreeCam};

} // namespace

TEST_CASE("build shape for a T-tree over CAM partitions") {
  std::mt19937_64 rng(1);
  HybridIndexConfig c;
  c.kind = IndexKind::TTreeCam;
  c.level_u = 3;
  c.T = 10;
  HybridIndex idx(c, random_records(rng, 10000, 32));
  CHECK(idx.partition_count() == 8);
  CHECK(idx.upper_node_count() == 7);
  CHECK(idx.upper_record_count() == 70);
  CHECK(idx.upper_height() == 3);
  const auto sizes = idx.partition_sizes();
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  idx.check_invariants();
}

TEST_CASE("single record builds one partition") {
  for (IndexKind k : kAllKinds) {
    HybridIndex idx(small_config(k), {{42, 7}});
    CHECK(idx.size() == 1);
    CHECK(idx.point_query(42) == 7u);
    CHECK_FALSE(idx.point_query(41));
    if (k != IndexKind::HashCam) CHECK(idx.partition_count() == 1);
    idx.check_invariants();
  }
}

TEST_CASE("build rejects bad input") {
  CHECK_THROWS_AS(HybridIndex(small_config(IndexKind::TTreeCam), {{1, 1}, {1, 2}}), InvalidArgument);
  CHECK_THROWS_AS(HybridIndex(small_config(IndexKind::TBTree), {{1u << 16, 1}}), InvalidArgument);
  HybridIndexConfig c = small_config(IndexKind::HashCam);
  c.hash = HashKind::Uniform;
  c.support_range = true;
  CHECK_THROWS_AS(HybridIndex(c, {}), InvalidArgument);
  c = small_config(IndexKind::TTreeCam);
  c.level_u = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = small_config(IndexKind::TTreeCam);
  c.key_bits = 24;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("plain hash supports point search only") {
  std::mt19937_64 rng(2);
  HybridIndexConfig c = small_config(IndexKind::HashCam);
  c.hash = HashKind::Uniform;
  HybridIndex idx(c, random_records(rng, 200, 16));
  CHECK_THROWS_AS(idx.range_query(0, 100), UnsupportedOperation);
}

TEST_CASE("point queries, updates and their errors") {
  std::mt19937_64 rng(3);
  for (IndexKind k : kAllKinds) {
    CAPTURE(to_string(k));
    std::map<std::uint64_t, std::uint64_t> m;
    auto recs = random_records(rng, 300, 16, &m);
    HybridIndex idx(small_config(k), recs);
    const auto [key, ref] = *m.begin();
    CHECK(idx.point_query(key) == ref);
    std::uint64_t absent = 0;
    while (m.count(absent)) ++absent;
    CHECK_FALSE(idx.point_query(absent));
    idx.insert(absent, 99);
    CHECK(idx.point_query(absent) == 99u);
    CHECK_THROWS_AS(idx.insert(absent, 1), InvalidArgument);
    idx.erase(key);
    CHECK_FALSE(idx.point_query(key));
    CHECK_THROWS_AS(idx.erase(key), InvalidArgument);
    CHECK(idx.size() == 300);
    idx.check_invariants();
  }
}

TEST_CASE("range queries against a sorted-array scan") {
  std::mt19937_64 rng(4);
  for (IndexKind k : kAllKinds) {
    CAPTURE(to_string(k));
    HybridIndexConfig c = small_config(k);
    c.key_bits = 32;
    c.level_u = 5;
    c.T = 10;
    c.B = 16;
    c.partitions = 32;
    std::map<std::uint64_t, std::uint64_t> m;
    HybridIndex idx(c, random_records(rng, 10000, 32, &m));
    std::vector<Record> sorted;
    for (const auto& [key, ref] : m) sorted.push_back({key, ref});
    CHECK(idx.range_query(0, 0xffffffffULL) == sorted);
    // Between two adjacent keys.
    const auto a = std::next(m.begin(), 100)->first;
    const auto b = std::next(m.begin(), 101)->first;
    if (b > a + 1) CHECK(idx.range_query(a + 1, b - 1).empty());
    CHECK_THROWS_AS(idx.range_query(5, 4), InvalidArgument);
    bool all = true;
    for (int q = 0; q < 1000; ++q) {
      const std::uint64_t lo = rng() & 0xffffffffULL;
      const std::uint64_t hi = std::min<std::uint64_t>(0xffffffffULL, lo + rng() % (1ULL << 24));
      all &= idx.range_query(lo, hi) == oracle_range(m, lo, hi);
      all &= idx.last_op().compute_partitions.size() <= 2;
    }
    CHECK(all);
  }
}

TEST_CASE("random mixed traces match an ordered map and keep locality") {
  for (IndexKind k : kAllKinds) {
    CAPTURE(to_string(k));
    std::mt19937_64 rng(5);
    HybridIndexConfig c = small_config(k);
    c.partition_rows = (k == IndexKind::TBTree || k == IndexKind::TBTreeCam) ? 96 : 64;
    c.partitions = 16;
    std::map<std::uint64_t, std::uint64_t> m;
    HybridIndex idx(c, random_records(rng, 400, 16, &m));
    bool ok = true;
    std::size_t point_max = 0, range_max = 0;
    for (int i = 0; i < 6000; ++i) {
      const std::uint64_t key = rng() & 0xffff;
      const int grow = i < 3000 ? 3 : 1;
      switch (rng() % 6) {
      case 0:
      case 1: {
        const auto got = idx.point_query(key);
        const auto it = m.find(key);
        ok &= it == m.end() ? !got : got == it->second;
        point_max = std::max(point_max, idx.last_op().compute_partitions.size());
        break;
      }
      case 2: {
        const std::uint64_t hi = std::min<std::uint64_t>(0xffff, key + rng() % 3000);
        ok &= idx.range_query(key, hi) == oracle_range(m, key, hi);
        range_max = std::max(range_max, idx.last_op().compute_partitions.size());
        break;
      }
      default:
        if (rng() % 4 < static_cast<unsigned>(grow)) {
          if (m.count(key)) break;
          try {
            idx.insert(key, key + 1);
            m[key] = key + 1;
          } catch (const CapacityError&) {
            REQUIRE(k == IndexKind::HashCam);
          }
        } else if (!m.empty()) {
          auto it = m.lower_bound(key);
          if (it == m.end()) it = m.begin();
          idx.erase(it->first);
          m.erase(it);
        }
      }
      if (i % 250 == 0) {
        idx.check_invariants();
        idx.rotate_partitions();
      }
    }
    idx.check_invariants();
    CHECK(ok);
    CHECK(point_max <= 1);
    CHECK(range_max <= 2);
    std::vector<Record> want;
    for (const auto& [key, ref] : m) want.push_back({key, ref});
    CHECK(idx.records() == want);
  }
}

TEST_CASE("T-tree grows and shrinks through partition splits and merges") {
  for (IndexKind k : {IndexKind::TTreeCam, IndexKind::TBTree, IndexKind::TBTreeCam}) {
    CAPTURE(to_string(k));
    std::mt19937_64 rng(6);
    HybridIndexConfig c = small_config(k);
    c.level_u = 1;
    c.partition_rows = k == IndexKind::TTreeCam ? 64 : 48;
    HybridIndex idx(c, {});
    CHECK(idx.partition_count() == 1);
    std::vector<std::uint64_t> keys;
    for (int i = 0; i < 1500; ++i) {
      const std::uint64_t key = rng() & 0xffff;
      if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
      idx.insert(key, key);
      keys.push_back(key);
    }
    idx.check_invariants();
    CHECK(idx.upper_node_count() > 10);
    CHECK(idx.partition_count() == idx.upper_node_count() + 1);
    const int h = idx.upper_height();
    CHECK(h <= static_cast<int>(std::ceil(1.45 * std::log2(idx.upper_node_count() + 2))));
    std::shuffle(keys.begin(), keys.end(), rng);
    for (auto key : keys) idx.erase(key);
    idx.check_invariants();
    CHECK(idx.size() == 0);
    CHECK(idx.upper_node_count() == 0);
    CHECK(idx.partition_count() == 1);
  }
}

TEST_CASE("hash partition overflow is a capacity error") {
  HybridIndexConfig c = small_config(IndexKind::HashCam);
  c.partitions = 1;
  c.partition_rows = 4;
  HybridIndex idx(c, {{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  CHECK_THROWS_AS(idx.insert(5, 5), CapacityError);
  CHECK(idx.size() == 4);
}

TEST_CASE("rotation is invisible to queries and cyclic") {
  std::mt19937_64 rng(7);
  for (IndexKind k : kAllKinds) {
    std::map<std::uint64_t, std::uint64_t> m;
    HybridIndexConfig c = small_config(k);
    c.support_range = k == IndexKind::HashCam;
    HybridIndex idx(c, random_records(rng, 500, 16, &m));
    const auto start = idx.slot_map();
    const auto all = idx.range_query(0, 0xffff);
    for (std::size_t r = 0; r < idx.slot_count(); ++r) {
      idx.rotate_partitions();
      if (r + 1 < idx.slot_count()) CHECK(idx.slot_map() != start);
      CHECK(idx.point_query(m.begin()->first) == m.begin()->second);
    }
    CHECK(idx.slot_map() == start);
    CHECK(idx.range_query(0, 0xffff) == all);
    idx.check_invariants();
  }
}

TEST_CASE("rotation levels skewed wear across slots") {
  std::mt19937_64 rng(8);
  HybridIndexConfig c = small_config(IndexKind::HashCam);
  c.partitions = 4;
  c.key_bits = 16;
  std::map<std::uint64_t, std::uint64_t> m;
  HybridIndex idx(c, random_records(rng, 400, 16, &m));
  std::vector<std::uint64_t> keys;
  for (const auto& kv : m) keys.push_back(kv.first);
  // Nine in ten queries hit the lowest-keyed quarter of the key space.
  const std::size_t cycles = 3, per_rotation = 200;
  for (std::size_t r = 0; r < cycles * idx.slot_count(); ++r) {
    for (std::size_t q = 0; q < per_rotation; ++q) {
      const std::uint64_t key = rng() % 10 ? rng() % 0x4000 : rng() & 0xffff;
      (void)idx.point_query(key);
    }
    idx.rotate_partitions();
  }
  const WearStats ws = idx.wear_report(1e6);
  double sum = 0, mx = 0;
  for (const auto& s : ws.slots) {
    sum += static_cast<double>(s.writes_total);
    mx = std::max(mx, static_cast<double>(s.writes_total));
  }
  CHECK(mx / (sum / static_cast<double>(ws.slots.size())) <= 1.2);
}

TEST_CASE("uniform point queries spread like a multinomial") {
  std::mt19937_64 rng(9);
  HybridIndexConfig c = small_config(IndexKind::HashCam);
  c.hash = HashKind::Uniform;
  c.partitions = 8;
  HybridIndex idx(c, random_records(rng, 400, 16));
  const int q = 8000;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < q; ++i) {
    (void)idx.point_query(rng() & 0xffff);
    REQUIRE(idx.last_op().compute_partitions.size() == 1);
    ++counts[idx.last_op().compute_partitions[0]];
  }
  const double mean = q / 8.0, sigma = std::sqrt(q * (1.0 / 8) * (7.0 / 8));
  for (int n : counts) CHECK(std::abs(n - mean) <= 3 * sigma);
}

TEST_CASE("projected lifetime doubles with the partition count") {
  auto lifetime_for = [](std::size_t p) {
    std::mt19937_64 rng(10);
    HybridIndexConfig c = small_config(IndexKind::HashCam);
    c.hash = HashKind::Uniform;
    c.partitions = p;
    HybridIndex idx(c, random_records(rng, 512, 16));
    for (int i = 0; i < 16000; ++i) (void)idx.point_query(rng() & 0xffff);
    return idx.wear_report(1e6).projected_lifetime_s;
  };
  CHECK(lifetime_for(8) / lifetime_for(4) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("TB+-tree-CAM depth extremes reproduce the neighbouring structures") {
  std::mt19937_64 rng(11);
  std::map<std::uint64_t, std::uint64_t> m;
  const auto recs = random_records(rng, 2000, 16, &m);
  auto run = [&](IndexKind kind, int depth) {
    HybridIndexConfig c = small_config(kind);
    c.level_u = 4;
    c.cam_subtree_root_depth = depth;
    c.partition_rows = 1024;
    HybridIndex idx(c, recs);
    std::mt19937_64 ops(12);
    std::vector<std::vector<std::size_t>> touched;
    std::vector<std::vector<Record>> results;
    for (int i = 0; i < 600; ++i) {
      const std::uint64_t key = ops() & 0xffff;
      if (i % 3 == 0) {
        results.push_back(idx.range_query(key, std::min<std::uint64_t>(0xffff, key + 2000)));
      } else {
        const auto r = idx.point_query(key);
        results.push_back(r ? std::vector<Record>{{key, *r}} : std::vector<Record>{});
      }
      touched.push_back(idx.last_op().compute_partitions);
      touched.push_back(idx.last_op().read_partitions);
    }
    return std::make_pair(results, touched);
  };
  CHECK(run(IndexKind::TBTreeCam, 0) == run(IndexKind::TTreeCam, 0));
  CHECK(run(IndexKind::TBTreeCam, 64) == run(IndexKind::TBTree, 0));
}

TEST_CASE("wear report") {
  std::mt19937_64 rng(13);
  HybridIndex idx(small_config(IndexKind::TTreeCam), random_records(rng, 200, 16));
  CHECK_THROWS_AS((void)idx.wear_report(1e6), InvalidArgument);
  (void)idx.point_query(5);
  CHECK_THROWS_AS((void)idx.wear_report(0), InvalidArgument);
  const WearStats ws = idx.wear_report(1e3);
  CHECK(ws.slots.size() == idx.slot_count());
  CHECK(ws.queries == 1);
  CHECK(wear_csv_header() == "partition,writes_total,max_cell_writes,projected_lifetime_s");
  const SlotWear w{3, 10, 4, 2.5e9};
  CHECK(wear_csv_row(w) == "3,10,4,2500000000");
}
