// Copyright (C) 2026 The dgate Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dgate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs one invocation. args excludes the program name. Failures print a
// single "error[<kind>]: <message>" line on err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses "key=value" lines; blank lines and lines starting with '#' are
// skipped. Keys may carry a leading "--". Throws std::runtime_error with the
// offending line number on malformed input.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

// "a:b:step" (inclusive of b when it lies on the step) or "a,b,c".
std::vector<double> parse_bounds(const std::string& text);

}  // namespace dgate::cli
