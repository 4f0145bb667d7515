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
 * @file config.hpp
 * @brief Run settings and the `key = value` config file format.
 *
 * Keys are dotted (`index.T`) or grouped under `[section]` headers. Lines
 * starting with `#` are comments. Grid axes take comma lists, geometric
 * ranges `a..b*f` or arithmetic ranges `a..b+s`.
 */

#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "memcam/error.hpp"
#include "memcam/hybrid.hpp"
#include "memcam/model.hpp"

namespace memcam {

class ConfigError : public Error {
public:
  using Error::Error;
};

struct BenchConfig {
  std::size_t n_keys = 10000;
  std::size_t n_ops = 10000;
  double point_weight = 4;
  double range_weight = 2;
  double insert_weight = 2;
  double delete_weight = 2;
  std::uint64_t range_width = 0; // 0 picks a width covering ~16 keys
  std::size_t rotate_every = 0;  // 0 disables rotation
  double query_rate = 1e6;
};

struct RunSettings {
  HybridIndexConfig index;
  BenchConfig bench;
  ModelParams model;
  SweepGrid grid;
};

/// Bench defaults plus the T_access sweep grid at N_R = 1e9.
RunSettings default_settings();

/// Throws ConfigError naming the key on unknown keys or bad values.
void apply_setting(RunSettings& s, std::string_view key, std::string_view value);

/// `key=value` form used by `--set`.
void apply_override(RunSettings& s, std::string_view assignment);

/// Errors carry `<source>:<line>: key '<k>': ...`.
void load_config(RunSettings& s, std::istream& in, const std::string& source);

/// Documented keys, in a stable order.
const std::vector<std::string>& config_keys();

std::vector<double> parse_axis(std::string_view text);

} // namespace memcam
