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
 * @file cam.hpp
 * @brief CAM / TCAM compare and match-combination microcode, and a
 *        partition-level search over a crossbar region.
 *
 * A stored word occupies one row; bit i (i = 0 is the most significant) sits
 * in a group of cell_width(mode) adjacent columns. "less" in a match signal
 * means the stored word is below the key.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "memcam/crossbar.hpp"

namespace memcam {

enum class CamMode : std::uint8_t { Cam, Tcam };

std::string_view to_string(CamMode m);
CamMode parse_cam_mode(std::string_view s);

enum class Trit : std::uint8_t { Zero, One, X };

struct TernaryCode {
  bool dx = false;
  bool d0 = false;
  friend bool operator==(const TernaryCode&, const TernaryCode&) = default;
};

/// 0 -> (0,0), 1 -> (0,1), X -> (1,0).
TernaryCode encode_ternary(Trit t);

/// Most significant symbol first.
using TernaryWord = std::vector<Trit>;

TernaryWord to_word(std::uint64_t value, std::size_t bits);
/// Bits set in care_mask are compared; the others become X.
TernaryWord to_word(std::uint64_t value, std::uint64_t care_mask, std::size_t bits);
/// Parses "01X1" style strings.
TernaryWord parse_word(std::string_view s);
std::string to_string(const TernaryWord& w);

namespace tcam_col {
inline constexpr std::size_t D0 = 0, DX = 1, K = 2, M1 = 3, M2 = 4, M3 = 5, M4 = 6;
inline constexpr std::size_t kWidth = 7;
} // namespace tcam_col

namespace cam_col {
inline constexpr std::size_t D = 0, K = 1, M1 = 2, M2 = 3, M3 = 4;
inline constexpr std::size_t kWidth = 5;
} // namespace cam_col

[[nodiscard]] std::size_t cell_width(CamMode m);
/// Column holding the "less" (TCAM) or mismatch (CAM) signal of a cell.
[[nodiscard]] std::size_t less_col(CamMode m);
[[nodiscard]] std::size_t greater_col(CamMode m);
[[nodiscard]] std::size_t key_col(CamMode m);

struct CellMatch {
  bool less = false;
  bool greater = false;
  [[nodiscard]] bool equal() const { return !less && !greater; }
  friend bool operator==(const CellMatch&, const CellMatch&) = default;
};

/// In CAM mode only equality is known: less and greater are both reported 0
/// and equal carries the result.
struct EntryMatch {
  bool less = false;
  bool greater = false;
  bool equal = false;
  friend bool operator==(const EntryMatch&, const EntryMatch&) = default;
};

// Compiled programs act on key_bits cells laid out from col0 and use mask 0
// for every op, so one compilation serves any set of rows.

StepProgram compile_tcam_compare(std::size_t key_bits = 1, std::size_t col0 = 0);
StepProgram compile_cam_compare(std::size_t key_bits = 1, std::size_t col0 = 0);
StepProgram compile_compare(CamMode mode, std::size_t key_bits = 1, std::size_t col0 = 0);

/// Round r (1-based) of recursive doubling over key_bits cells. Cells a and
/// b = a + 2^(r-1) are paired inside each aligned block of 2^r cells; b
/// receives the merged signal, so after the last round cell key_bits-1
/// holds the entry result.
StepProgram compile_combine_round(CamMode mode, std::size_t key_bits = 2, std::size_t round = 1,
                                  std::size_t col0 = 0);

/// Compare followed by all log2(key_bits) combination rounds.
StepProgram compile_search(CamMode mode, std::size_t key_bits, std::size_t col0 = 0);

/// Per-event coefficients fitted to the per-bit closed forms of the compiled
/// programs. cond events carry no energy; see README for why the fitted clear
/// coefficient is negative.
EnergyParams calibrated_energy(CamMode mode);

[[nodiscard]] bool is_power_of_two(std::size_t v);
[[nodiscard]] std::size_t log2_exact(std::size_t v);

/// A block of rows x (key_bits * cell_width) columns inside a crossbar.
class CamPartition {
public:
  CamPartition(CrossbarArray& array, CamMode mode, std::size_t key_bits, std::size_t capacity,
               std::size_t row0 = 0, std::size_t col0 = 0);

  [[nodiscard]] CamMode mode() const { return mode_; }
  [[nodiscard]] std::size_t key_bits() const { return key_bits_; }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t row0() const { return row0_; }
  [[nodiscard]] std::size_t col0() const { return col0_; }
  [[nodiscard]] CrossbarArray& array() { return *array_; }
  [[nodiscard]] const StepProgram& program() const { return program_; }

  /// Replaces the contents with words, entry i at row0 + i.
  ExecStats store_entries(const std::vector<TernaryWord>& words);
  /// Writes entry index; size() becomes at least index + 1.
  ExecStats write_entry(std::size_t index, const TernaryWord& word);
  /// Shrinks the logical size; cells beyond it are left as they are.
  void truncate(std::size_t n);

  /// Searches every stored entry.
  std::vector<EntryMatch> search(const TernaryWord& key, ExecStats* stats = nullptr);
  /// Searches only the entries in rows (indices relative to row0); results
  /// follow rows.rows() order.
  std::vector<EntryMatch> search(const TernaryWord& key, const RowMask& rows,
                                 ExecStats* stats = nullptr);

  /// Decodes entry index from the stored D columns (host-side peek).
  [[nodiscard]] TernaryWord stored(std::size_t index) const;

private:
  void check_word(const TernaryWord& w, bool allow_x) const;

  CrossbarArray* array_;
  CamMode mode_;
  std::size_t key_bits_;
  std::size_t capacity_;
  std::size_t row0_;
  std::size_t col0_;
  std::size_t size_ = 0;
  StepProgram program_;
};

} // namespace memcam
