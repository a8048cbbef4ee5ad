// Copyright 2026 The vixml Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

namespace vixml {

/// Flat key=value configuration. Lines are "key = value"; '#' starts a
/// comment; blank lines are ignored. Later keys override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& context = "config");
KeyValues load_key_values(const std::string& path);
std::string format_key_values(const KeyValues& kv);

/// Typed accessors; throw usage errors naming the key on malformed values.
double kv_double(const KeyValues& kv, const std::string& key, double fallback);
std::size_t kv_size(const KeyValues& kv, const std::string& key, std::size_t fallback);
std::string kv_string(const KeyValues& kv, const std::string& key, const std::string& fallback);

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what);

}  // namespace vixml
