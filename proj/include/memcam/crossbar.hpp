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
 * @file crossbar.hpp
 * @brief Row-parallel step-program interpreter over a memristor crossbar.
 *
 * Cells are stored column-major as 64-bit row words. Each micro-op acts on
 * whole columns restricted to a row mask, which is how a single voltage on a
 * column line drives every selected row at once.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "memcam/device.hpp"

namespace memcam {

/// A set of active rows, kept as sorted disjoint half-open ranges.
class RowMask {
public:
  RowMask() = default;
  explicit RowMask(std::vector<std::pair<std::size_t, std::size_t>> ranges);

  static RowMask range(std::size_t begin, std::size_t end);
  static RowMask single(std::size_t row) { return range(row, row + 1); }

  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>>& ranges() const {
    return ranges_;
  }
  /// (word index, bit mask) pairs covering the active rows, word ascending.
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::uint64_t>>& words() const {
    return words_;
  }
  [[nodiscard]] std::size_t count() const { return count_; }
  [[nodiscard]] bool empty() const { return count_ == 0; }
  [[nodiscard]] bool contains(std::size_t row) const;
  /// One past the highest active row, 0 when empty.
  [[nodiscard]] std::size_t end_row() const;
  [[nodiscard]] std::vector<std::size_t> rows() const;

  /// "a-b,c" style, inclusive bounds.
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const RowMask& a, const RowMask& b) { return a.ranges_ == b.ranges_; }

private:
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
  std::vector<std::pair<std::size_t, std::uint64_t>> words_;
  std::size_t count_ = 0;
};

enum class OpKind : std::uint8_t { Clear, Imply };

struct MicroOp {
  OpKind kind = OpKind::Clear;
  std::size_t src = 0; // ignored for Clear
  std::size_t dst = 0;
  std::size_t mask = 0; // index into StepProgram::masks

  static MicroOp clear(std::size_t dst, std::size_t mask = 0) {
    return {OpKind::Clear, 0, dst, mask};
  }
  static MicroOp imply(std::size_t src, std::size_t dst, std::size_t mask = 0) {
    return {OpKind::Imply, src, dst, mask};
  }

  friend bool operator==(const MicroOp&, const MicroOp&) = default;
};

using Step = std::vector<MicroOp>;

/// Steps run in order; the ops inside one step run simultaneously. Masks are
/// referenced by index so a compiled program can be rebound to new rows.
struct StepProgram {
  std::string name;
  std::vector<Step> steps;
  std::vector<RowMask> masks;

  [[nodiscard]] std::size_t step_count() const { return steps.size(); }

  /// Throws ProgramError on any line-sharing violation, bad mask index, or a
  /// column/row outside (rows, cols).
  void validate(std::size_t rows, std::size_t cols) const;

  /// Appends other's steps, remapping its mask indices after ours.
  void append(const StepProgram& other);
};

struct EnergyParams {
  double set_fj = 0.0;
  double clear_fj = 0.0;
  double cond_fj = 0.0;
};

struct ExecStats {
  std::uint64_t step_count = 0;
  double elapsed_ns = 0.0;
  std::uint64_t set_events = 0;
  std::uint64_t clear_events = 0;
  std::uint64_t cond_events = 0;
  std::uint64_t external_reads = 0;
  std::uint64_t external_writes = 0;
  double energy_fj = 0.0;

  ExecStats& operator+=(const ExecStats& o);
  friend ExecStats operator+(ExecStats a, const ExecStats& b) { return a += b; }
  friend bool operator==(const ExecStats&, const ExecStats&) = default;
};

/// Linear energy over device events. External accesses carry no energy term.
[[nodiscard]] double energy_of(const ExecStats& stats, const EnergyParams& params);

[[nodiscard]] std::string stats_csv_header();
[[nodiscard]] std::string stats_csv_row(const ExecStats& stats);

struct CrossbarConfig {
  double step_time_ns = 2.0;
  double t_access_ns = 10.0;
  EnduranceConfig endurance{};
  EnergyParams energy{};
};

class CrossbarArray {
public:
  CrossbarArray(std::size_t rows, std::size_t cols, CrossbarConfig config = {});

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] const CrossbarConfig& config() const { return config_; }

  /// Validates first, so a rejected step leaves the grid untouched.
  ExecStats execute_step(const Step& step, const std::vector<RowMask>& masks);
  ExecStats execute_program(const StepProgram& program);
  /// Same, with mask 0 replaced by rows.
  ExecStats execute_program(const StepProgram& program, const RowMask& rows);

  ExecStats write_external(std::size_t row, std::size_t col, bool bit);
  bool read_external(std::size_t row, std::size_t col, ExecStats& acc);
  /// One column-line access driving every row in the mask.
  ExecStats write_column(std::size_t col, const RowMask& rows, bool bit);
  /// One column-line access sensing every row in the mask; result follows
  /// RowMask::rows() order.
  std::vector<bool> read_column(std::size_t col, const RowMask& rows, ExecStats& acc);

  /// Host-side peek used by tests and traces; not an array access.
  [[nodiscard]] bool peek(std::size_t row, std::size_t col) const;
  [[nodiscard]] MemristorCell cell(std::size_t row, std::size_t col) const;
  [[nodiscard]] std::uint64_t write_count(std::size_t row, std::size_t col) const;
  [[nodiscard]] std::uint64_t max_write_count() const;
  [[nodiscard]] std::uint64_t total_writes() const;

  /// Running total of everything executed on this array.
  [[nodiscard]] const ExecStats& totals() const { return totals_; }

  /// True when both grids hold identical values (wear ignored).
  [[nodiscard]] bool same_values(const CrossbarArray& other) const;

private:
  static constexpr int kCounterBits = 32;

  std::uint64_t& word(std::size_t col, std::size_t w) { return bits_[col * words_ + w]; }
  [[nodiscard]] std::uint64_t word(std::size_t col, std::size_t w) const {
    return bits_[col * words_ + w];
  }
  ExecStats run_step(const Step& step, const std::vector<RowMask>& masks);
  void check_cell(std::size_t row, std::size_t col) const;
  void check_mask(const RowMask& mask) const;
  // Commits new & m into (col, w) and charges wear for masked rows m.
  void commit(std::size_t col, std::size_t w, std::uint64_t m, std::uint64_t next);
  void bump_wear(std::size_t col, std::size_t w, std::uint64_t m);
  ExecStats external_access(bool write, std::uint64_t n);

  std::size_t rows_;
  std::size_t cols_;
  std::size_t words_;
  CrossbarConfig config_;
  std::vector<std::uint64_t> bits_;
  // Bit-sliced counters: plane k of (col, w) at ((col*words_+w)*32 + k).
  std::vector<std::uint64_t> wear_;
  ExecStats totals_;
};

/// One line per step: ops joined by " ; ".
[[nodiscard]] std::string trace_step(std::size_t index, const Step& step,
                                     const std::vector<RowMask>& masks);
void write_trace(std::ostream& os, const StepProgram& program);

} // namespace memcam
