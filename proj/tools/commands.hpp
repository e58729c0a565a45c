// Copyright 2026 The EdgeDRNN-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "edrnn/perfmodel.hpp"

namespace edrnn::cli {

enum ExitCode : int {
  kOk = 0,
  kModelError = 2,
  kConfigError = 3,
  kDataError = 4,
};

/// Everything one inference/benchmark invocation needs.
struct RunSpec {
  std::filesystem::path model_path;
  std::filesystem::path feature_path;
  std::optional<std::int32_t> theta_raw;
  perf::HwConfig hw;
  std::optional<std::size_t> max_steps;
  std::optional<std::filesystem::path> logits_out;
  std::optional<std::filesystem::path> trace_out;
  std::optional<std::filesystem::path> summary_out;
};

/// Parses "0x40" (hex) or "64" (decimal) into a raw Q8.8 threshold.
std::int32_t parse_theta(const std::string& text);

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edrnn::cli
