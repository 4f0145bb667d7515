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

#include "memcam/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>

namespace memcam {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view v) {
  v = trim(v);
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_uint(std::string_view v) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size() && !v.empty()) return out;
  // Accept integral scientific notation such as 1e4.
  const double d = parse_double(v);
  if (d < 0 || d != std::floor(d) || d > 1.8e19) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return static_cast<std::uint64_t>(d);
}

int parse_int(std::string_view v) {
  v = trim(v);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected true or false, got '" + std::string(v) + "'");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <class F>
auto rethrow_as_config(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

using Setter = std::function<void(RunSettings&, std::string_view)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"index.structure", [](RunSettings& s, std::string_view v) {
         s.index.kind = rethrow_as_config([&] { return parse_index_kind(trim(v)); });
       }},
      {"index.level_u", [](RunSettings& s, std::string_view v) { s.index.level_u = parse_int(v); }},
      {"index.T", [](RunSettings& s, std::string_view v) { s.index.T = parse_uint(v); }},
      {"index.B", [](RunSettings& s, std::string_view v) { s.index.B = parse_uint(v); }},
      {"index.cam_subtree_root_depth",
       [](RunSettings& s, std::string_view v) { s.index.cam_subtree_root_depth = parse_int(v); }},
      {"index.partitions", [](RunSettings& s, std::string_view v) { s.index.partitions = parse_uint(v); }},
      {"index.hash", [](RunSettings& s, std::string_view v) {
         s.index.hash = rethrow_as_config([&] { return parse_hash_kind(trim(v)); });
       }},
      {"index.support_range", [](RunSettings& s, std::string_view v) { s.index.support_range = parse_bool(v); }},
      {"index.key_bits", [](RunSettings& s, std::string_view v) { s.index.key_bits = parse_uint(v); }},
      {"index.partition_rows", [](RunSettings& s, std::string_view v) { s.index.partition_rows = parse_uint(v); }},
      {"crossbar.t_access_ns", [](RunSettings& s, std::string_view v) { s.index.crossbar.t_access_ns = parse_double(v); }},
      {"crossbar.step_time_ns", [](RunSettings& s, std::string_view v) { s.index.crossbar.step_time_ns = parse_double(v); }},
      {"crossbar.endurance_limit",
       [](RunSettings& s, std::string_view v) { s.index.crossbar.endurance.endurance_limit = parse_uint(v); }},
      {"crossbar.wear_policy", [](RunSettings& s, std::string_view v) {
         v = trim(v);
         if (v == "transitions") {
           s.index.crossbar.endurance.wear_policy = WearPolicy::CountTransitions;
         } else if (v == "applications") {
           s.index.crossbar.endurance.wear_policy = WearPolicy::CountApplications;
         } else {
           throw ConfigError("expected transitions or applications, got '" + std::string(v) + "'");
         }
       }},
      {"bench.n_keys", [](RunSettings& s, std::string_view v) { s.bench.n_keys = parse_uint(v); }},
      {"bench.n_ops", [](RunSettings& s, std::string_view v) { s.bench.n_ops = parse_uint(v); }},
      {"bench.point_weight", [](RunSettings& s, std::string_view v) { s.bench.point_weight = parse_double(v); }},
      {"bench.range_weight", [](RunSettings& s, std::string_view v) { s.bench.range_weight = parse_double(v); }},
      {"bench.insert_weight", [](RunSettings& s, std::string_view v) { s.bench.insert_weight = parse_double(v); }},
      {"bench.delete_weight", [](RunSettings& s, std::string_view v) { s.bench.delete_weight = parse_double(v); }},
      {"bench.range_width", [](RunSettings& s, std::string_view v) { s.bench.range_width = parse_uint(v); }},
      {"bench.rotate_every", [](RunSettings& s, std::string_view v) { s.bench.rotate_every = parse_uint(v); }},
      {"bench.query_rate", [](RunSettings& s, std::string_view v) { s.bench.query_rate = parse_double(v); }},
      {"model.n_records", [](RunSettings& s, std::string_view v) { s.model.n_records = parse_double(v); }},
      {"model.T", [](RunSettings& s, std::string_view v) { s.model.T = parse_double(v); }},
      {"model.B", [](RunSettings& s, std::string_view v) { s.model.B = parse_double(v); }},
      {"model.level_u", [](RunSettings& s, std::string_view v) { s.model.level_u = parse_int(v); }},
      {"model.node_time_u_ns", [](RunSettings& s, std::string_view v) { s.model.node_time_u_ns = parse_double(v); }},
      {"model.node_time_lt_cmos_ns",
       [](RunSettings& s, std::string_view v) { s.model.node_time_lt_cmos_ns = parse_double(v); }},
      {"model.t_access_ns", [](RunSettings& s, std::string_view v) { s.model.t_access_ns = parse_double(v); }},
      {"model.step_time_ns", [](RunSettings& s, std::string_view v) { s.model.step_time_ns = parse_double(v); }},
      {"model.key_bits", [](RunSettings& s, std::string_view v) { s.model.key_bits = parse_uint(v); }},
      {"model.cam_mode", [](RunSettings& s, std::string_view v) {
         s.model.cam_mode = rethrow_as_config([&] { return parse_cam_mode(trim(v)); });
       }},
      {"model.hash_time_ns", [](RunSettings& s, std::string_view v) { s.model.hash_time_ns = parse_double(v); }},
      {"model.memcam_search_time_ns",
       [](RunSettings& s, std::string_view v) { s.model.memcam_search_time_ns = parse_double(v); }},
      {"model.cam_subtree_root_depth",
       [](RunSettings& s, std::string_view v) { s.model.cam_subtree_root_depth = parse_int(v); }},
      {"model.hash_partitions", [](RunSettings& s, std::string_view v) { s.model.hash_partitions = parse_double(v); }},
      {"model.endurance", [](RunSettings& s, std::string_view v) { s.model.endurance = parse_double(v); }},
      {"model.query_rate", [](RunSettings& s, std::string_view v) { s.model.query_rate = parse_double(v); }},
      {"model.wear_per_search", [](RunSettings& s, std::string_view v) { s.model.wear_per_search = parse_double(v); }},
      {"grid.structures", [](RunSettings& s, std::string_view v) {
         s.grid.structures.clear();
         for (auto item : split(v, ',')) {
           s.grid.structures.push_back(rethrow_as_config([&] { return parse_structure(item); }));
         }
       }},
      {"grid.n_records", [](RunSettings& s, std::string_view v) { s.grid.n_records = parse_axis(v); }},
      {"grid.t_access_ns", [](RunSettings& s, std::string_view v) { s.grid.t_access_ns = parse_axis(v); }},
      {"grid.key_bits", [](RunSettings& s, std::string_view v) {
         s.grid.key_bits.clear();
         for (double d : parse_axis(v)) {
           if (d < 1 || d != std::floor(d)) throw ConfigError("key_bits must be a positive integer");
           s.grid.key_bits.push_back(static_cast<std::uint64_t>(d));
         }
       }},
  };
  return table;
}

} // namespace

RunSettings default_settings() {
  RunSettings s;
  s.grid.structures = sweep_structures();
  s.grid.n_records = {1e9};
  for (int t = 10; t <= 120; t += 10) s.grid.t_access_ns.push_back(t);
  s.grid.key_bits = {64};
  return s;
}

std::vector<double> parse_axis(std::string_view text) {
  text = trim(text);
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    for (auto item : split(text, ',')) {
      if (!item.empty()) out.push_back(parse_double(item));
    }
    return out;
  }
  const double lo = parse_double(text.substr(0, dots));
  const std::string_view rest = text.substr(dots + 2);
  const auto op = rest.find_first_of("*+");
  if (op == std::string_view::npos) throw ConfigError("range '" + std::string(text) + "' needs *factor or +step");
  const double hi = parse_double(rest.substr(0, op));
  const double by = parse_double(rest.substr(op + 1));
  const bool geometric = rest[op] == '*';
  if (geometric ? by <= 1 : by <= 0) throw ConfigError("range '" + std::string(text) + "' does not advance");
  const double slack = 1e-9 * std::max(std::abs(hi), 1.0);
  if (geometric) {
    // Index-based stepping keeps values like 1e20 exact.
    for (int i = 0;; ++i) {
      const double v = lo * std::pow(by, i);
      if (v > hi + slack) break;
      out.push_back(v);
    }
  } else {
    for (int i = 0;; ++i) {
      const double v = lo + by * i;
      if (v > hi + slack) break;
      out.push_back(v);
    }
  }
  return out;
}

void apply_setting(RunSettings& s, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      try {
        set(s, value);
      } catch (const ConfigError& e) {
        throw ConfigError("key '" + std::string(key) + "': " + e.what());
      }
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

void apply_override(RunSettings& s, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  apply_setting(s, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config(RunSettings& s, std::istream& in, const std::string& source) {
  std::string raw;
  std::string section;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    std::string key(trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    try {
      apply_setting(s, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& entry : setters()) k.push_back(entry.first);
    return k;
  }();
  return keys;
}

} // namespace memcam
