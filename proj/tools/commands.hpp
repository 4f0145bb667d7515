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

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "memcam/config.hpp"

namespace memcam::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Mutation hooks corrupt one program before the checks run.
const std::vector<std::string>& mutation_names();

/// Throws InvalidArgument for an unknown mutation.
std::vector<CheckResult> run_checks(const std::string& mutation = "");
const std::vector<std::string>& check_names();

int cmd_verify(std::ostream& out, const std::string& mutation = "");

struct BenchResult {
  bool oracle_match = true;
  std::string csv;
};

struct BenchOptions {
  std::uint64_t seed = 1;
  std::ostream* stats_out = nullptr;
  std::ostream* wear_out = nullptr;
};

int cmd_bench(std::ostream& out, const RunSettings& s, const BenchOptions& opt);
int cmd_sweep(std::ostream& out, const RunSettings& s);

struct TraceOptions {
  std::optional<std::string> stored;
  std::optional<std::string> key;
};

const std::vector<std::string>& trace_programs();
/// Throws InvalidArgument for an unknown program. Exemplar notes go to note.
int cmd_trace(std::ostream& out, std::ostream& note, const std::string& program,
              const TraceOptions& opt);

} // namespace memcam::cli
