// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aladin {

// Flat key=value configuration. Lines starting with '#' are comments; keys
// and values are trimmed. Later assignments override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text,
                              const std::string& origin = "<memory>");
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // Throws InvalidArgument naming the first key not in `known`.
  void require_known(const std::vector<std::string_view>& known) const;

  // Canonical text form: sorted keys, one "key=value" per line.
  std::string dump() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Every key any component understands; used to reject typos early.
const std::vector<std::string_view>& all_config_keys();

}  // namespace aladin
