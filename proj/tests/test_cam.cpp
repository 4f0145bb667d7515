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

#include <random>

#include "doctest.h"
#include "memcam/cam.hpp"
#include "memcam/error.hpp"
#include "memcam/model.hpp"

using namespace memcam;

namespace {

// Lexicographic three-way compare with don't-care symbols treated as equal.
int ternary_oracle(const TernaryWord& stored, const TernaryWord& key) {
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (stored[i] == Trit::X || stored[i] == key[i]) continue;
    return stored[i] == Trit::Zero ? -1 : 1;
  }
  return 0;
}

TernaryWord random_word(std::mt19937_64& rng, std::size_t bits, bool allow_x) {
  TernaryWord w(bits);
  for (auto& t : w) t = static_cast<Trit>(rng() % (allow_x ? 3 : 2));
  return w;
}

} // namespace

TEST_CASE("ternary encoding and words") {
  CHECK(encode_ternary(Trit::Zero) == TernaryCode{false, false});
  CHECK(encode_ternary(Trit::One) == TernaryCode{false, true});
  CHECK(encode_ternary(Trit::X) == TernaryCode{true, false});
  CHECK(to_string(to_word(5, 4)) == "0101");
  CHECK(to_string(to_word(5, 0b1100, 4)) == "01XX");
  CHECK(parse_word("1X0") == TernaryWord{Trit::One, Trit::X, Trit::Zero});
  CHECK_THROWS_AS(parse_word("102"), InvalidArgument);
  CHECK(parse_cam_mode("tcam") == CamMode::Tcam);
  CHECK_THROWS_AS(parse_cam_mode("dram"), InvalidArgument);
}

TEST_CASE("TCAM cell match signals for every stored and key symbol") {
  CrossbarArray a(1, tcam_col::kWidth);
  const StepProgram p = compile_tcam_compare();
  CHECK(p.step_count() == 11);
  // (DX, D0, K) -> (M3 less, M4 greater)
  const int table[8][5] = {{0, 0, 0, 0, 0}, {0, 0, 1, 1, 0}, {0, 1, 0, 0, 1}, {0, 1, 1, 0, 0},
                           {1, 0, 0, 0, 0}, {1, 0, 1, 0, 0}, {1, 1, 0, 0, 0}, {1, 1, 1, 0, 0}};
  for (const auto& row : table) {
    a.write_external(0, tcam_col::DX, row[0]);
    a.write_external(0, tcam_col::D0, row[1]);
    a.write_external(0, tcam_col::K, row[2]);
    a.execute_program(p);
    CHECK(a.peek(0, tcam_col::M3) == static_cast<bool>(row[3]));
    CHECK(a.peek(0, tcam_col::M4) == static_cast<bool>(row[4]));
    // The stored symbol survives; the key column doubles as scratch.
    CHECK(a.peek(0, tcam_col::DX) == static_cast<bool>(row[0]));
    CHECK(a.peek(0, tcam_col::D0) == static_cast<bool>(row[1]));
  }
}

TEST_CASE("CAM cell mismatch signal") {
  CrossbarArray a(1, cam_col::kWidth);
  const StepProgram p = compile_cam_compare();
  CHECK(p.step_count() == 8);
  for (int d = 0; d <= 1; ++d) {
    for (int k = 0; k <= 1; ++k) {
      a.write_external(0, cam_col::D, d);
      a.write_external(0, cam_col::K, k);
      a.execute_program(p);
      CHECK(a.peek(0, cam_col::M1) == (d != k));
      CHECK_FALSE(a.peek(0, cam_col::M3));
    }
  }
}

TEST_CASE("combination round merges two groups lexicographically") {
  const StepProgram p = compile_combine_round(CamMode::Tcam, 2, 1);
  CHECK(p.step_count() <= 10);
  const std::size_t w = tcam_col::kWidth;
  for (int hi = 0; hi < 3; ++hi) {
    for (int lo = 0; lo < 3; ++lo) {
      CrossbarArray a(1, 2 * w);
      a.write_external(0, tcam_col::M3, hi == 1);
      a.write_external(0, tcam_col::M4, hi == 2);
      a.write_external(0, w + tcam_col::M3, lo == 1);
      a.write_external(0, w + tcam_col::M4, lo == 2);
      a.execute_program(p);
      const int want = hi ? hi : lo;
      CHECK(a.peek(0, w + tcam_col::M3) == (want == 1));
      CHECK(a.peek(0, w + tcam_col::M4) == (want == 2));
    }
  }
}

TEST_CASE("search latency and step counts follow the closed forms") {
  for (std::size_t k = 2; k <= 1024; k *= 2) {
    const double lg = static_cast<double>(log2_exact(k));
    CHECK(compile_search(CamMode::Tcam, k).step_count() == 11 + 10 * log2_exact(k));
    CHECK(compile_search(CamMode::Cam, k).step_count() == 8 + 10 * log2_exact(k));
    CrossbarArray t(1, k * tcam_col::kWidth), c(1, k * cam_col::kWidth);
    CHECK(t.execute_program(compile_search(CamMode::Tcam, k)).elapsed_ns == 22 + 20 * lg);
    CHECK(c.execute_program(compile_search(CamMode::Cam, k)).elapsed_ns == 16 + 20 * lg);
    CHECK(cam_latency(k, CamMode::Tcam) == 22 + 20 * lg);
  }
  CHECK(cam_latency(64, CamMode::Tcam) == 142);
  CHECK(cam_latency(64, CamMode::Cam) == 136);
  CHECK(cam_latency(2, CamMode::Tcam) == 42);
  CHECK_THROWS_AS(cam_latency(48, CamMode::Cam), InvalidArgument);
  CHECK_THROWS_AS(compile_search(CamMode::Cam, 3), InvalidArgument);
}

TEST_CASE("calibrated energy reproduces the per-bit closed forms") {
  for (CamMode mode : {CamMode::Tcam, CamMode::Cam}) {
    CrossbarConfig cfg;
    cfg.energy = calibrated_energy(mode);
    for (std::size_t k = 2; k <= 1024; k *= 2) {
      CrossbarArray a(3, k * cell_width(mode), cfg);
      const ExecStats st = a.execute_program(compile_search(mode, k), RowMask::single(1));
      const double per_bit = st.energy_fj / static_cast<double>(k);
      CHECK(per_bit == doctest::Approx(cam_energy(k, mode)).epsilon(1e-9));
    }
  }
  CHECK(cam_energy(64, CamMode::Cam) == doctest::Approx(5.36));
}

TEST_CASE("ternary entry search agrees with the lexicographic oracle") {
  std::mt19937_64 rng(3);
  for (std::size_t k : {1, 2, 8, 16, 64}) {
    const std::size_t n = 100;
    CrossbarArray a(n + 5, k * tcam_col::kWidth + 3);
    CamPartition part(a, CamMode::Tcam, k, n + 2, 2, 3);
    std::vector<TernaryWord> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back(random_word(rng, k, true));
    part.store_entries(words);
    for (int q = 0; q < 20; ++q) {
      const TernaryWord key = random_word(rng, k, false);
      ExecStats st;
      const auto res = part.search(key, &st);
      REQUIRE(res.size() == n);
      for (std::size_t i = 0; i < n; ++i) {
        const int want = ternary_oracle(words[i], key);
        CHECK(res[i].less == (want < 0));
        CHECK(res[i].greater == (want > 0));
        CHECK(res[i].equal == (want == 0));
      }
      CHECK(st.external_writes == k);
      CHECK(st.external_reads == 2);
    }
  }
}

TEST_CASE("binary CAM search reports equality only") {
  std::mt19937_64 rng(5);
  const std::size_t k = 16, n = 70;
  CrossbarArray a(n, k * cam_col::kWidth);
  CamPartition part(a, CamMode::Cam, k, n);
  std::vector<TernaryWord> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back(to_word(rng() % 8, k));
  part.store_entries(words);
  ExecStats st;
  const auto res = part.search(to_word(3, k), &st);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(res[i].equal == (words[i] == to_word(3, k)));
    CHECK_FALSE(res[i].less);
    CHECK_FALSE(res[i].greater);
  }
  CHECK(st.external_reads == 1);
  CHECK_THROWS_AS(part.write_entry(0, parse_word("X000000000000000")), InvalidArgument);
}

TEST_CASE("masked search touches only the selected rows") {
  const std::size_t k = 8;
  CrossbarArray a(64, k * tcam_col::kWidth);
  CamPartition part(a, CamMode::Tcam, k, 64);
  std::vector<TernaryWord> words;
  for (std::uint64_t i = 0; i < 64; ++i) words.push_back(to_word(i, k));
  part.store_entries(words);
  const auto before = a.write_count(40, tcam_col::M1);
  const auto res = part.search(to_word(10, k), RowMask({{8, 12}, {20, 21}}));
  REQUIRE(res.size() == 5);
  CHECK(res[2].equal);
  CHECK(res[0].less);
  CHECK(res[4].greater);
  CHECK(a.write_count(40, tcam_col::M1) == before);
  CHECK_THROWS_AS(part.search(to_word(1, k), RowMask::range(60, 70)), InvalidArgument);
}

TEST_CASE("partition bounds") {
  CrossbarArray a(4, 2 * tcam_col::kWidth);
  CHECK_THROWS_AS(CamPartition(a, CamMode::Tcam, 2, 5), CapacityError);
  CHECK_THROWS_AS(CamPartition(a, CamMode::Tcam, 3, 1), InvalidArgument);
  CamPartition part(a, CamMode::Tcam, 2, 4);
  CHECK_THROWS_AS(part.write_entry(4, to_word(0, 2)), CapacityError);
  CHECK_THROWS_AS(part.write_entry(0, to_word(0, 3)), InvalidArgument);
  part.write_entry(2, parse_word("1X"));
  CHECK(part.size() == 3);
  CHECK(to_string(part.stored(2)) == "1X");
}
