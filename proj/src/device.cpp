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

#include "memcam/device.hpp"

#include "memcam/error.hpp"

namespace memcam {

std::string_view to_string(Voltage v) {
  switch (v) {
  case Voltage::Zero:
    return "0";
  case Voltage::Cond:
    return "V_COND";
  case Voltage::Set:
    return "V_SET";
  case Voltage::Clear:
    return "V_CLEAR";
  }
  return "?";
}

void EnduranceConfig::validate() const {
  if (endurance_limit == 0) {
    throw InvalidArgument("endurance_limit must be positive");
  }
}

void MemristorCell::apply_write(bool next, WearPolicy policy) {
  if (policy == WearPolicy::CountApplications || next != value_) {
    ++write_count_;
  }
  value_ = next;
}

void imply(const MemristorCell& p, MemristorCell& q, WearPolicy policy) {
  if (&p == &q) {
    throw InvalidArgument("imply: antecedent and consequent are the same device");
  }
  q.apply_write(!p.value() || q.value(), policy);
}

void clear(MemristorCell& m, WearPolicy policy) { m.apply_write(false, policy); }

} // namespace memcam
