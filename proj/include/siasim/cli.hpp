/*
 * Copyright 2026 The siasim Authors
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
#include <string>
#include <vector>

#include <json.hpp>

#include "siasim/dense_matrix.hpp"
#include "siasim/precoding.hpp"
#include "siasim/ring.hpp"

namespace siasim::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kMemoryBudgetEnv = "SIASIM_MEMORY_BUDGET";

enum class Command { kParams, kVerifySia, kVerifyAlignment, kVerifyRank, kDofTable, kSimulate };
enum class OutputFormat { kJson, kCsv };

const char* to_string(Command command);

struct RunConfig {
  Command command = Command::kParams;
  int K = 3;
  int M = 1;
  int n = 1;
  RingKind ring = RingKind::kPrimeField;
  std::uint64_t seed = 0;
  int trials = 1;
  RankPolicy policy = RankPolicy::kExact;
  double tau = 1e-10;
  std::uint64_t memory_budget = kDefaultMemoryBudget;
  std::vector<double> snr_db{40, 45, 50, 55, 60};
  int realizations = 20;
  double slope_tolerance = 0.1;
  std::uint64_t link_bound = 1024;
  std::string output;  // empty: standard output
  OutputFormat format = OutputFormat::kJson;
  int workers = 0;     // 0: available parallelism
  int n_min = 1;
  int n_max = 10;
  std::optional<std::size_t> lambda;  // verify-sia extension length override
  std::optional<int> decoder;         // verify-rank: a single decoder
  bool full_matrix = false;           // verify-rank: also the stacked decoder matrix
  bool identity_channels = false;
  std::optional<GeneratorId> ablate;
  bool timings = false;
};

struct ParseOutcome {
  std::optional<RunConfig> config;
  int exit_code = 0;    // meaningful when config is empty
  std::string message;  // help text or error
};

// Parses and validates the command line. `environment_budget` stands in for
// the memory-budget environment variable.
ParseOutcome parse_config(int argc, const char* const* argv,
                          std::optional<std::string> environment_budget = std::nullopt);

struct ExecutionResult {
  int exit_code = 0;
  Json report;
  std::string rendered;  // exact bytes written to the output
};

ExecutionResult execute(const RunConfig& config);

// Reads SIASIM_MEMORY_BUDGET, parses, executes and writes the report.
int run_main(int argc, const char* const* argv);

Json config_json(const RunConfig& config);
std::optional<GeneratorId> parse_generator(const std::string& text);
std::uint64_t parse_bytes(const std::string& text);
std::string format_double(double x);

}  // namespace siasim::cli
