// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vixml {

inline constexpr const char* kToolVersion = "1.0.0";

/// Entry point of the `vixml` executable. args excludes the program name.
/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Slot listings of the built-in three-token, two-image fixture for `mode`.
std::string golden_fixture_listing(const std::string& mode, std::size_t max_len, std::size_t image_cap);

}  // namespace vixml
