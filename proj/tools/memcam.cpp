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

#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "commands.hpp"
#include "memcam/error.hpp"

namespace {

using memcam::cli::kUsage;

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "config file (key = value lines)");
  cmd->add_option("--out", c.out, "output path (default stdout)");
  cmd->add_option("--seed", c.seed, "seed for generated keys and traces");
  cmd->add_option("--set", c.sets, "override a config key, key=value (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
}

memcam::RunSettings load(const Common& c) {
  memcam::RunSettings s = memcam::default_settings();
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    if (!in) throw memcam::ConfigError("cannot open config file '" + c.config + "'");
    memcam::load_config(s, in, c.config);
  }
  for (const auto& kv : c.sets) memcam::apply_override(s, kv);
  return s;
}

class Output {
public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw memcam::ConfigError("cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
  std::unique_ptr<std::ofstream> file_;
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"memristor CAM simulator and hybrid index harness"};
  app.require_subcommand(1);
  Common common;
  std::string mutation;
  std::string stats_path, wear_path;
  std::string program;
  memcam::cli::TraceOptions trace_opt;

  auto* verify = app.add_subcommand("verify", "truth tables, combination law, step counts, energy");
  add_common(verify, common);
  verify->add_option("--mutate", mutation)->group("");

  auto* bench = app.add_subcommand("bench", "run a seeded operation trace against an ordered-map oracle");
  add_common(bench, common);
  bench->add_option("--stats", stats_path, "write accumulated simulator stats CSV");
  bench->add_option("--wear-out", wear_path, "write per-partition wear CSV");

  auto* sweep = app.add_subcommand("sweep", "analytic model sweep CSV");
  add_common(sweep, common);

  auto* trace = app.add_subcommand("trace", "step trace of a compiled program");
  add_common(trace, common);
  trace->add_option("program", program, "tcam-compare | cam-compare | combine-round | tcam-search | cam-search")
      ->required();
  trace->add_option("--stored", trace_opt.stored, "stored word, e.g. 1X01");
  trace->add_option("--key", trace_opt.key, "search key, e.g. 1011");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    const memcam::RunSettings s = load(common);
    Output out(common.out);
    if (verify->parsed()) return memcam::cli::cmd_verify(out.stream(), mutation);
    if (bench->parsed()) {
      Output stats(stats_path), wear(wear_path);
      memcam::cli::BenchOptions opt;
      opt.seed = common.seed;
      if (!stats_path.empty()) opt.stats_out = &stats.stream();
      if (!wear_path.empty()) opt.wear_out = &wear.stream();
      return memcam::cli::cmd_bench(out.stream(), s, opt);
    }
    if (sweep->parsed()) return memcam::cli::cmd_sweep(out.stream(), s);
    return memcam::cli::cmd_trace(out.stream(), std::cerr, program, trace_opt);
  } catch (const memcam::CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const memcam::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
