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
 * @file device.hpp
 * @brief Ideal binary memristor: state, the voltage alphabet, material
 *        implication, and endurance bookkeeping.
 *
 * A closed (low-resistance) device reads as 1, an open one as 0. V_COND is a
 * sensing voltage and never changes state; V_SET on the consequent of an
 * implication pair closes it unless the antecedent is closed; V_CLEAR always
 * opens the device.
 */

#pragma once

#include <cstdint>
#include <string_view>

namespace memcam {

enum class Voltage : std::uint8_t { Zero, Cond, Set, Clear };

std::string_view to_string(Voltage v);

enum class WearPolicy : std::uint8_t {
  /// Only state flips consume endurance.
  CountTransitions,
  /// Every V_SET / V_CLEAR application consumes endurance, flip or not.
  CountApplications,
};

struct EnduranceConfig {
  std::uint64_t endurance_limit = 10'000'000'000ULL;
  WearPolicy wear_policy = WearPolicy::CountTransitions;

  void validate() const;
};

class MemristorCell {
public:
  constexpr MemristorCell() = default;
  constexpr explicit MemristorCell(bool value, std::uint64_t write_count = 0)
      : value_(value), write_count_(write_count) {}

  [[nodiscard]] constexpr bool value() const { return value_; }
  [[nodiscard]] constexpr std::uint64_t write_count() const { return write_count_; }

  /// Applies a writing voltage (V_SET with the given next state, or
  /// V_CLEAR) and charges the wear ledger per policy.
  void apply_write(bool next, WearPolicy policy);

  friend constexpr bool operator==(const MemristorCell&, const MemristorCell&) = default;

private:
  bool value_ = false;
  std::uint64_t write_count_ = 0;
};

/// q <- (NOT p) OR q. p is sensed with V_COND and left untouched.
/// Throws InvalidArgument when p and q are the same device.
void imply(const MemristorCell& p, MemristorCell& q,
           WearPolicy policy = WearPolicy::CountTransitions);

void clear(MemristorCell& m, WearPolicy policy = WearPolicy::CountTransitions);

[[nodiscard]] inline bool read(const MemristorCell& m) { return m.value(); }

} // namespace memcam
