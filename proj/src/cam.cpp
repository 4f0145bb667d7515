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

#include "memcam/cam.hpp"

#include <algorithm>

#include "memcam/error.hpp"
#include "memcam/model.hpp"

namespace memcam {

std::string_view to_string(CamMode m) { return m == CamMode::Cam ? "cam" : "tcam"; }

CamMode parse_cam_mode(std::string_view s) {
  if (s == "cam" || s == "CAM") return CamMode::Cam;
  if (s == "tcam" || s == "TCAM") return CamMode::Tcam;
  throw InvalidArgument("unknown CAM mode '" + std::string(s) + "'");
}

TernaryCode encode_ternary(Trit t) {
  switch (t) {
  case Trit::Zero:
    return {false, false};
  case Trit::One:
    return {false, true};
  case Trit::X:
    return {true, false};
  }
  return {};
}

TernaryWord to_word(std::uint64_t value, std::size_t bits) {
  return to_word(value, ~0ULL, bits);
}

TernaryWord to_word(std::uint64_t value, std::uint64_t care_mask, std::size_t bits) {
  if (bits == 0 || bits > 64) throw InvalidArgument("word width must be in [1, 64]");
  TernaryWord w(bits);
  for (std::size_t i = 0; i < bits; ++i) {
    const unsigned shift = static_cast<unsigned>(bits - 1 - i);
    if (!((care_mask >> shift) & 1U)) {
      w[i] = Trit::X;
    } else {
      w[i] = ((value >> shift) & 1U) ? Trit::One : Trit::Zero;
    }
  }
  return w;
}

TernaryWord parse_word(std::string_view s) {
  TernaryWord w;
  w.reserve(s.size());
  for (char c : s) {
    switch (c) {
    case '0':
      w.push_back(Trit::Zero);
      break;
    case '1':
      w.push_back(Trit::One);
      break;
    case 'x':
    case 'X':
      w.push_back(Trit::X);
      break;
    default:
      throw InvalidArgument("bad ternary symbol '" + std::string(1, c) + "'");
    }
  }
  return w;
}

std::string to_string(const TernaryWord& w) {
  std::string s;
  s.reserve(w.size());
  for (Trit t : w) s += t == Trit::Zero ? '0' : t == Trit::One ? '1' : 'X';
  return s;
}

std::size_t cell_width(CamMode m) { return m == CamMode::Tcam ? tcam_col::kWidth : cam_col::kWidth; }
std::size_t less_col(CamMode m) { return m == CamMode::Tcam ? tcam_col::M3 : cam_col::M1; }
std::size_t greater_col(CamMode m) { return m == CamMode::Tcam ? tcam_col::M4 : cam_col::M3; }
std::size_t key_col(CamMode m) { return m == CamMode::Tcam ? tcam_col::K : cam_col::K; }

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t log2_exact(std::size_t v) {
  if (!is_power_of_two(v)) throw InvalidArgument(std::to_string(v) + " is not a power of two");
  std::size_t n = 0;
  while (v > 1) {
    v >>= 1;
    ++n;
  }
  return n;
}

namespace {

// Emits one step per entry of `ops`, replicated across all key_bits cells.
struct CellOp {
  OpKind kind;
  std::size_t src;
  std::size_t dst;
};

StepProgram replicate(std::string name, std::size_t key_bits, std::size_t width, std::size_t col0,
                      const std::vector<std::vector<CellOp>>& steps) {
  StepProgram p;
  p.name = std::move(name);
  p.masks.push_back(RowMask::single(0));
  for (const auto& cell_step : steps) {
    Step s;
    for (std::size_t i = 0; i < key_bits; ++i) {
      const std::size_t base = col0 + i * width;
      for (const auto& op : cell_step) {
        s.push_back(op.kind == OpKind::Clear ? MicroOp::clear(base + op.dst)
                                             : MicroOp::imply(base + op.src, base + op.dst));
      }
    }
    p.steps.push_back(std::move(s));
  }
  return p;
}

constexpr CellOp clr(std::size_t c) { return {OpKind::Clear, 0, c}; }
constexpr CellOp imp(std::size_t p, std::size_t q) { return {OpKind::Imply, p, q}; }

} // namespace

StepProgram compile_tcam_compare(std::size_t key_bits, std::size_t col0) {
  using namespace tcam_col;
  // M3 = !DX & !D0 & K, M4 = !DX & D0 & !K; D0 and DX only ever sensed.
  return replicate("tcam-compare", key_bits, kWidth, col0,
                   {
                       {clr(M1), clr(M2), clr(M3), clr(M4)},
                       {imp(D0, M1)}, // M1 = !D0
                       {imp(K, M2)},  // M2 = !K
                       {imp(M1, M2)}, // M2 = D0 | !K
                       {imp(D0, K)},  // K = !D0 | K
                       {imp(DX, M4)}, // M4 = !DX
                       {imp(M4, M2)}, // M2 = DX | D0 | !K
                       {imp(M4, K)},  // K = DX | !D0 | K
                       {clr(M4)},
                       {imp(M2, M3)}, // M3 = !M2
                       {imp(K, M4)},  // M4 = !K
                   });
}

StepProgram compile_cam_compare(std::size_t key_bits, std::size_t col0) {
  using namespace cam_col;
  // M1 = D ^ K; M3 stays 0 so the combination rounds can share the TCAM law.
  return replicate("cam-compare", key_bits, kWidth, col0,
                   {
                       {clr(M1), clr(M2), clr(M3)},
                       {imp(D, M1)},  // M1 = !D
                       {imp(K, M2)},  // M2 = !K
                       {imp(M1, M2)}, // M2 = D | !K
                       {imp(D, K)},   // K = !D | K
                       {clr(M1)},
                       {imp(K, M1)},  // M1 = D & !K
                       {imp(M2, M1)}, // M1 |= !D & K
                   });
}

StepProgram compile_compare(CamMode mode, std::size_t key_bits, std::size_t col0) {
  return mode == CamMode::Tcam ? compile_tcam_compare(key_bits, col0)
                               : compile_cam_compare(key_bits, col0);
}

StepProgram compile_combine_round(CamMode mode, std::size_t key_bits, std::size_t round,
                                  std::size_t col0) {
  const std::size_t levels = log2_exact(key_bits);
  if (round == 0 || round > levels) {
    throw InvalidArgument("combine round " + std::to_string(round) + " outside [1, " +
                          std::to_string(levels) + "]");
  }
  const std::size_t w = cell_width(mode);
  const std::size_t L = less_col(mode);
  const std::size_t G = greater_col(mode);
  const std::size_t S1 = mode == CamMode::Tcam ? tcam_col::M1 : cam_col::K;
  const std::size_t S2 = mode == CamMode::Tcam ? tcam_col::M2 : cam_col::M2;
  const std::size_t s = std::size_t{1} << (round - 1);

  struct Pair {
    std::size_t a;
    std::size_t b;
  };
  std::vector<Pair> pairs;
  for (std::size_t base = 0; base < key_bits; base += 2 * s) {
    for (std::size_t t = 0; t < s; ++t) {
      pairs.push_back({col0 + (base + t) * w, col0 + (base + s + t) * w});
    }
  }

  // Merge law: Lb' = La | (!Ga & Lb), Gb' = Ga | (!La & Gb). Cell a's
  // signals are consumed as scratch.
  StepProgram p;
  p.name = "combine-round";
  p.masks.push_back(RowMask::single(0));
  auto emit = [&](auto&& per_pair) {
    Step st;
    for (const auto& pr : pairs) per_pair(st, pr.a, pr.b);
    p.steps.push_back(std::move(st));
  };
  emit([&](Step& st, std::size_t, std::size_t b) {
    st.push_back(MicroOp::clear(b + S1));
    st.push_back(MicroOp::clear(b + S2));
  });
  emit([&](Step& st, std::size_t a, std::size_t b) { st.push_back(MicroOp::imply(a + L, b + S1)); });
  emit([&](Step& st, std::size_t a, std::size_t b) { st.push_back(MicroOp::imply(a + G, b + S2)); });
  // Ga := !Lb | Ga, La := !Gb | La
  emit([&](Step& st, std::size_t a, std::size_t b) { st.push_back(MicroOp::imply(b + L, a + G)); });
  emit([&](Step& st, std::size_t a, std::size_t b) { st.push_back(MicroOp::imply(b + G, a + L)); });
  emit([&](Step& st, std::size_t, std::size_t b) {
    st.push_back(MicroOp::clear(b + L));
    st.push_back(MicroOp::clear(b + G));
  });
  emit([&](Step& st, std::size_t, std::size_t b) { st.push_back(MicroOp::imply(b + S1, b + L)); });
  emit([&](Step& st, std::size_t a, std::size_t b) { st.push_back(MicroOp::imply(a + G, b + L)); });
  emit([&](Step& st, std::size_t, std::size_t b) { st.push_back(MicroOp::imply(b + S2, b + G)); });
  emit([&](Step& st, std::size_t a, std::size_t b) { st.push_back(MicroOp::imply(a + L, b + G)); });
  return p;
}

StepProgram compile_search(CamMode mode, std::size_t key_bits, std::size_t col0) {
  const std::size_t levels = log2_exact(key_bits);
  StepProgram p = compile_compare(mode, key_bits, col0);
  for (std::size_t r = 1; r <= levels; ++r) {
    StepProgram round = compile_combine_round(mode, key_bits, r, col0);
    // Every sub-program uses mask 0; keep a single shared mask.
    for (auto& st : round.steps) p.steps.push_back(std::move(st));
  }
  p.name = std::string(to_string(mode)) + "-search";
  return p;
}

EnergyParams calibrated_energy(CamMode mode) {
  auto count = [](const StepProgram& p, OpKind k) {
    double n = 0;
    for (const auto& st : p.steps) {
      for (const auto& op : st) n += op.kind == k ? 1.0 : 0.0;
    }
    return n;
  };
  const StepProgram cmp = compile_compare(mode, 1);
  const StepProgram pair = compile_combine_round(mode, 2, 1);
  // Per stored bit: compare events once, plus half a pair per round.
  const double cs = count(cmp, OpKind::Imply), cc = count(cmp, OpKind::Clear);
  const double ps = count(pair, OpKind::Imply) / 2, pc = count(pair, OpKind::Clear) / 2;
  const EnergyClosedForm f = cam_energy_form(mode);
  const double det = cs * pc - cc * ps;
  EnergyParams e;
  e.set_fj = (f.base_fj * pc - cc * f.per_round_fj) / det;
  e.clear_fj = (cs * f.per_round_fj - f.base_fj * ps) / det;
  e.cond_fj = 0.0;
  return e;
}

// ------------------------------------------------------------ CamPartition

CamPartition::CamPartition(CrossbarArray& array, CamMode mode, std::size_t key_bits,
                           std::size_t capacity, std::size_t row0, std::size_t col0)
    : array_(&array), mode_(mode), key_bits_(key_bits), capacity_(capacity), row0_(row0),
      col0_(col0) {
  if (!is_power_of_two(key_bits) || key_bits > 64) {
    throw InvalidArgument("key_bits must be a power of two no larger than 64");
  }
  if (row0 + capacity > array.rows() || col0 + key_bits * cell_width(mode) > array.cols()) {
    throw CapacityError("partition region exceeds the crossbar");
  }
  program_ = compile_search(mode, key_bits, col0);
}

void CamPartition::check_word(const TernaryWord& w, bool allow_x) const {
  if (w.size() != key_bits_) {
    throw InvalidArgument("word has " + std::to_string(w.size()) + " symbols, partition expects " +
                          std::to_string(key_bits_));
  }
  if (!allow_x) {
    for (Trit t : w) {
      if (t == Trit::X) throw InvalidArgument("don't-care symbol not allowed here");
    }
  }
}

ExecStats CamPartition::write_entry(std::size_t index, const TernaryWord& word) {
  if (index >= capacity_) {
    throw CapacityError("entry " + std::to_string(index) + " beyond partition capacity " +
                        std::to_string(capacity_));
  }
  check_word(word, mode_ == CamMode::Tcam);
  ExecStats st;
  const std::size_t w = cell_width(mode_);
  for (std::size_t i = 0; i < key_bits_; ++i) {
    const std::size_t base = col0_ + i * w;
    if (mode_ == CamMode::Tcam) {
      const TernaryCode c = encode_ternary(word[i]);
      st += array_->write_external(row0_ + index, base + tcam_col::D0, c.d0);
      st += array_->write_external(row0_ + index, base + tcam_col::DX, c.dx);
    } else {
      st += array_->write_external(row0_ + index, base + cam_col::D, word[i] == Trit::One);
    }
  }
  size_ = std::max(size_, index + 1);
  return st;
}

ExecStats CamPartition::store_entries(const std::vector<TernaryWord>& words) {
  if (words.size() > capacity_) {
    throw CapacityError(std::to_string(words.size()) + " entries exceed partition capacity " +
                        std::to_string(capacity_));
  }
  size_ = 0;
  ExecStats st;
  for (std::size_t i = 0; i < words.size(); ++i) st += write_entry(i, words[i]);
  return st;
}

void CamPartition::truncate(std::size_t n) {
  if (n > size_) throw InvalidArgument("truncate cannot grow a partition");
  size_ = n;
}

std::vector<EntryMatch> CamPartition::search(const TernaryWord& key, ExecStats* stats) {
  if (size_ == 0) {
    check_word(key, false);
    return {};
  }
  return search(key, RowMask::range(0, size_), stats);
}

std::vector<EntryMatch> CamPartition::search(const TernaryWord& key, const RowMask& rows,
                                             ExecStats* stats) {
  check_word(key, false);
  if (rows.end_row() > capacity_) throw InvalidArgument("search rows beyond partition capacity");
  if (rows.empty()) return {};
  std::vector<std::pair<std::size_t, std::size_t>> abs;
  abs.reserve(rows.ranges().size());
  for (const auto& [b, e] : rows.ranges()) abs.emplace_back(b + row0_, e + row0_);
  const RowMask mask(std::move(abs));

  const std::size_t w = cell_width(mode_);
  ExecStats st;
  for (std::size_t i = 0; i < key_bits_; ++i) {
    st += array_->write_column(col0_ + i * w + key_col(mode_), mask, key[i] == Trit::One);
  }
  st += array_->execute_program(program_, mask);
  const std::size_t last = col0_ + (key_bits_ - 1) * w;
  const std::vector<bool> lo = array_->read_column(last + less_col(mode_), mask, st);
  std::vector<EntryMatch> out(lo.size());
  if (mode_ == CamMode::Tcam) {
    const std::vector<bool> hi = array_->read_column(last + greater_col(mode_), mask, st);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = {lo[i], hi[i], !lo[i] && !hi[i]};
    }
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {false, false, !lo[i]};
  }
  if (stats) *stats += st;
  return out;
}

TernaryWord CamPartition::stored(std::size_t index) const {
  if (index >= capacity_) throw InvalidArgument("no entry " + std::to_string(index));
  TernaryWord word(key_bits_);
  const std::size_t w = cell_width(mode_);
  for (std::size_t i = 0; i < key_bits_; ++i) {
    const std::size_t base = col0_ + i * w;
    if (mode_ == CamMode::Tcam) {
      const bool dx = array_->peek(row0_ + index, base + tcam_col::DX);
      const bool d0 = array_->peek(row0_ + index, base + tcam_col::D0);
      word[i] = dx ? Trit::X : d0 ? Trit::One : Trit::Zero;
    } else {
      word[i] = array_->peek(row0_ + index, base + cam_col::D) ? Trit::One : Trit::Zero;
    }
  }
  return word;
}

} // namespace memcam
