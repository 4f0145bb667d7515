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

#include "memcam/crossbar.hpp"

#include <algorithm>
#include <bit>
#include <ostream>
#include <sstream>

#include "memcam/error.hpp"

namespace memcam {

namespace {

constexpr std::size_t kWordBits = 64;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

} // namespace

// ---------------------------------------------------------------- RowMask

RowMask::RowMask(std::vector<std::pair<std::size_t, std::size_t>> ranges) {
  std::erase_if(ranges, [](const auto& r) { return r.first >= r.second; });
  std::sort(ranges.begin(), ranges.end());
  for (const auto& r : ranges) {
    if (!ranges_.empty() && r.first <= ranges_.back().second) {
      ranges_.back().second = std::max(ranges_.back().second, r.second);
    } else {
      ranges_.push_back(r);
    }
  }
  for (const auto& [b, e] : ranges_) {
    count_ += e - b;
    for (std::size_t row = b; row < e;) {
      std::size_t w = row / kWordBits;
      std::size_t lo = row % kWordBits;
      std::size_t hi = std::min(e - w * kWordBits, kWordBits);
      std::uint64_t bits = (hi == kWordBits ? ~0ULL : ((1ULL << hi) - 1)) & ~((1ULL << lo) - 1);
      if (!words_.empty() && words_.back().first == w) {
        words_.back().second |= bits;
      } else {
        words_.emplace_back(w, bits);
      }
      row = w * kWordBits + hi;
    }
  }
}

RowMask RowMask::range(std::size_t begin, std::size_t end) { return RowMask({{begin, end}}); }

bool RowMask::contains(std::size_t row) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), row,
                             [](std::size_t r, const auto& rg) { return r < rg.first; });
  if (it == ranges_.begin()) return false;
  --it;
  return row < it->second;
}

std::size_t RowMask::end_row() const { return ranges_.empty() ? 0 : ranges_.back().second; }

std::vector<std::size_t> RowMask::rows() const {
  std::vector<std::size_t> out;
  out.reserve(count_);
  for (const auto& [b, e] : ranges_) {
    for (std::size_t r = b; r < e; ++r) out.push_back(r);
  }
  return out;
}

std::string RowMask::to_string() const {
  if (ranges_.empty()) return "none";
  std::string out;
  for (const auto& [b, e] : ranges_) {
    if (!out.empty()) out += ',';
    out += std::to_string(b);
    if (e - b > 1) out += '-' + std::to_string(e - 1);
  }
  return out;
}

// ----------------------------------------------------------- StepProgram

namespace {

void validate_steps(const std::string& name, const std::vector<Step>& steps,
                    const std::vector<RowMask>& masks, std::size_t rows, std::size_t cols) {
  auto fail = [&](std::size_t i, const std::string& what) {
    throw ProgramError(name + ": step " + std::to_string(i + 1) + ": " + what);
  };
  for (const auto& m : masks) {
    if (m.end_row() > rows) {
      throw ProgramError(name + ": row mask " + m.to_string() + " exceeds " +
                         std::to_string(rows) + " rows");
    }
  }
  std::vector<std::uint8_t> role(cols, 0); // bit0 = destination, bit1 = source
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& op : steps[i]) {
      if (op.mask >= masks.size()) fail(i, "mask index out of range");
      if (op.dst >= cols) fail(i, "destination column " + std::to_string(op.dst) + " out of range");
      if (role[op.dst] & 1) fail(i, "column " + std::to_string(op.dst) + " driven twice");
      role[op.dst] |= 1;
      if (op.kind == OpKind::Imply) {
        if (op.src >= cols) fail(i, "source column " + std::to_string(op.src) + " out of range");
        if (op.src == op.dst) fail(i, "implication with src == dst");
        role[op.src] |= 2;
      }
    }
    for (const auto& op : steps[i]) {
      if (role[op.dst] == 3) {
        fail(i, "column " + std::to_string(op.dst) + " is both source and destination");
      }
    }
    for (const auto& op : steps[i]) {
      role[op.dst] = 0;
      if (op.kind == OpKind::Imply) role[op.src] = 0;
    }
  }
}

} // namespace

void StepProgram::validate(std::size_t rows, std::size_t cols) const {
  validate_steps(name, steps, masks, rows, cols);
}

void StepProgram::append(const StepProgram& other) {
  const std::size_t base = masks.size();
  masks.insert(masks.end(), other.masks.begin(), other.masks.end());
  for (Step s : other.steps) {
    for (auto& op : s) op.mask += base;
    steps.push_back(std::move(s));
  }
}

// -------------------------------------------------------------- ExecStats

ExecStats& ExecStats::operator+=(const ExecStats& o) {
  step_count += o.step_count;
  elapsed_ns += o.elapsed_ns;
  set_events += o.set_events;
  clear_events += o.clear_events;
  cond_events += o.cond_events;
  external_reads += o.external_reads;
  external_writes += o.external_writes;
  energy_fj += o.energy_fj;
  return *this;
}

double energy_of(const ExecStats& s, const EnergyParams& p) {
  return p.set_fj * static_cast<double>(s.set_events) +
         p.clear_fj * static_cast<double>(s.clear_events) +
         p.cond_fj * static_cast<double>(s.cond_events);
}

std::string stats_csv_header() {
  return "step_count,elapsed_ns,set_events,clear_events,cond_events,external_reads,"
         "external_writes,energy_fj";
}

std::string stats_csv_row(const ExecStats& s) {
  return std::to_string(s.step_count) + ',' + format_double(s.elapsed_ns) + ',' +
         std::to_string(s.set_events) + ',' + std::to_string(s.clear_events) + ',' +
         std::to_string(s.cond_events) + ',' + std::to_string(s.external_reads) + ',' +
         std::to_string(s.external_writes) + ',' + format_double(s.energy_fj);
}

// ---------------------------------------------------------- CrossbarArray

CrossbarArray::CrossbarArray(std::size_t rows, std::size_t cols, CrossbarConfig config)
    : rows_(rows), cols_(cols), words_((rows + kWordBits - 1) / kWordBits),
      config_(config) {
  config_.endurance.validate();
  if (rows == 0 || cols == 0) throw InvalidArgument("crossbar dimensions must be positive");
  bits_.assign(cols_ * words_, 0);
  wear_.assign(cols_ * words_ * kCounterBits, 0);
}

void CrossbarArray::check_cell(std::size_t row, std::size_t col) const {
  if (row >= rows_ || col >= cols_) {
    throw InvalidArgument("cell (" + std::to_string(row) + ", " + std::to_string(col) +
                          ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                          " array");
  }
}

void CrossbarArray::check_mask(const RowMask& mask) const {
  if (mask.end_row() > rows_) {
    throw InvalidArgument("row mask " + mask.to_string() + " outside array");
  }
}

void CrossbarArray::bump_wear(std::size_t col, std::size_t w, std::uint64_t m) {
  std::uint64_t* plane = &wear_[(col * words_ + w) * kCounterBits];
  for (int k = 0; k < kCounterBits && m != 0; ++k) {
    const std::uint64_t carry = plane[k] & m;
    plane[k] ^= m;
    m = carry;
  }
}

void CrossbarArray::commit(std::size_t col, std::size_t w, std::uint64_t m, std::uint64_t next) {
  std::uint64_t& cur = word(col, w);
  const std::uint64_t updated = (cur & ~m) | (next & m);
  const std::uint64_t charged =
      config_.endurance.wear_policy == WearPolicy::CountApplications ? m : (cur ^ updated);
  if (charged != 0) bump_wear(col, w, charged);
  cur = updated;
}

ExecStats CrossbarArray::run_step(const Step& step, const std::vector<RowMask>& masks) {
  ExecStats d;
  d.step_count = 1;
  d.elapsed_ns = config_.step_time_ns;
  for (const auto& op : step) {
    const RowMask& m = masks[op.mask];
    if (op.kind == OpKind::Clear) {
      for (const auto& [w, bits] : m.words()) commit(op.dst, w, bits, 0);
      d.clear_events += m.count();
    } else {
      for (const auto& [w, bits] : m.words()) {
        commit(op.dst, w, bits, ~word(op.src, w) | word(op.dst, w));
      }
      d.set_events += m.count();
      d.cond_events += m.count();
    }
  }
  d.energy_fj = energy_of(d, config_.energy);
  return d;
}

ExecStats CrossbarArray::execute_step(const Step& step, const std::vector<RowMask>& masks) {
  validate_steps("step", {step}, masks, rows_, cols_);
  ExecStats d = run_step(step, masks);
  totals_ += d;
  return d;
}

ExecStats CrossbarArray::execute_program(const StepProgram& program) {
  program.validate(rows_, cols_);
  ExecStats total;
  for (const auto& step : program.steps) total += run_step(step, program.masks);
  totals_ += total;
  return total;
}

ExecStats CrossbarArray::execute_program(const StepProgram& program, const RowMask& rows) {
  std::vector<RowMask> masks = program.masks;
  if (masks.empty()) {
    masks.push_back(rows);
  } else {
    masks[0] = rows;
  }
  validate_steps(program.name, program.steps, masks, rows_, cols_);
  ExecStats total;
  for (const auto& step : program.steps) total += run_step(step, masks);
  totals_ += total;
  return total;
}

ExecStats CrossbarArray::external_access(bool write, std::uint64_t n) {
  ExecStats d;
  (write ? d.external_writes : d.external_reads) = n;
  d.elapsed_ns = config_.t_access_ns * static_cast<double>(n);
  totals_ += d;
  return d;
}

ExecStats CrossbarArray::write_external(std::size_t row, std::size_t col, bool bit) {
  check_cell(row, col);
  commit(col, row / kWordBits, 1ULL << (row % kWordBits), bit ? ~0ULL : 0);
  return external_access(true, 1);
}

bool CrossbarArray::read_external(std::size_t row, std::size_t col, ExecStats& acc) {
  check_cell(row, col);
  acc += external_access(false, 1);
  return peek(row, col);
}

ExecStats CrossbarArray::write_column(std::size_t col, const RowMask& rows, bool bit) {
  check_cell(0, col);
  check_mask(rows);
  for (const auto& [w, bits] : rows.words()) commit(col, w, bits, bit ? ~0ULL : 0);
  return external_access(true, 1);
}

std::vector<bool> CrossbarArray::read_column(std::size_t col, const RowMask& rows,
                                             ExecStats& acc) {
  check_cell(0, col);
  check_mask(rows);
  std::vector<bool> out;
  out.reserve(rows.count());
  for (std::size_t r : rows.rows()) out.push_back(peek(r, col));
  acc += external_access(false, 1);
  return out;
}

bool CrossbarArray::peek(std::size_t row, std::size_t col) const {
  check_cell(row, col);
  return (word(col, row / kWordBits) >> (row % kWordBits)) & 1U;
}

std::uint64_t CrossbarArray::write_count(std::size_t row, std::size_t col) const {
  check_cell(row, col);
  const std::uint64_t* plane = &wear_[(col * words_ + row / kWordBits) * kCounterBits];
  const unsigned b = row % kWordBits;
  std::uint64_t n = 0;
  for (int k = 0; k < kCounterBits; ++k) n |= ((plane[k] >> b) & 1ULL) << k;
  return n;
}

MemristorCell CrossbarArray::cell(std::size_t row, std::size_t col) const {
  return MemristorCell(peek(row, col), write_count(row, col));
}

std::uint64_t CrossbarArray::max_write_count() const {
  std::uint64_t best = 0;
  for (std::size_t g = 0; g < cols_ * words_; ++g) {
    const std::uint64_t* plane = &wear_[g * kCounterBits];
    // Highest non-zero plane bounds the maximum; scan bits only within it.
    int top = kCounterBits - 1;
    while (top >= 0 && plane[top] == 0) --top;
    if (top < 0 || (1ULL << (top + 1)) - 1 <= best) continue;
    std::uint64_t any = 0;
    for (int k = 0; k <= top; ++k) any |= plane[k];
    while (any != 0) {
      const unsigned b = static_cast<unsigned>(std::countr_zero(any));
      any &= any - 1;
      std::uint64_t n = 0;
      for (int k = 0; k <= top; ++k) n |= ((plane[k] >> b) & 1ULL) << k;
      best = std::max(best, n);
    }
  }
  return best;
}

std::uint64_t CrossbarArray::total_writes() const {
  std::uint64_t sum = 0;
  for (std::size_t g = 0; g < cols_ * words_; ++g) {
    for (int k = 0; k < kCounterBits; ++k) {
      sum += static_cast<std::uint64_t>(std::popcount(wear_[g * kCounterBits + k])) << k;
    }
  }
  return sum;
}

bool CrossbarArray::same_values(const CrossbarArray& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && bits_ == other.bits_;
}

// ------------------------------------------------------------------ trace

std::string trace_step(std::size_t index, const Step& step, const std::vector<RowMask>& masks) {
  std::string line = "step=" + std::to_string(index);
  bool first = true;
  for (const auto& op : step) {
    line += first ? " " : " ; ";
    first = false;
    line += op.kind == OpKind::Imply ? "op=IMPLY src=" + std::to_string(op.src)
                                     : std::string("op=CLEAR src=-");
    line += " dst=" + std::to_string(op.dst);
    line += " rows=" + (op.mask < masks.size() ? masks[op.mask].to_string() : "?");
  }
  return line;
}

void write_trace(std::ostream& os, const StepProgram& program) {
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    os << trace_step(i + 1, program.steps[i], program.masks) << '\n';
  }
}

} // namespace memcam
