// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace aladin {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

InvalidArgument bad_value(const std::string& key, const std::string& value,
                          const char* expected) {
  return InvalidArgument("config key '" + key + "': expected " + expected +
                         ", got '" + value + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text,
                                     const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(origin + ":" + std::to_string(line_no) +
                            ": expected key=value, got '" + t + "'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw InvalidArgument(origin + ":" + std::to_string(line_no) +
                            ": empty key");
    }
    cfg.entries_[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  return parse(io::read_file(path), path);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const char* end = v->data() + v->size();
  auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw bad_value(key, *v, "an unsigned integer");
  }
  return out;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  // libstdc++ 11 lacks floating from_chars.
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(*v, &used);
  } catch (const std::exception&) {
    throw bad_value(key, *v, "a number");
  }
  if (used != v->size() || !std::isfinite(out)) {
    throw bad_value(key, *v, "a finite number");
  }
  return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes") return true;
  if (*v == "0" || *v == "false" || *v == "no") return false;
  throw bad_value(key, *v, "a boolean");
}

void KeyValueConfig::require_known(
    const std::vector<std::string_view>& known) const {
  for (const auto& [key, value] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidArgument("unknown config key '" + key + "'");
    }
  }
}

std::string KeyValueConfig::dump() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

const std::vector<std::string_view>& all_config_keys() {
  static const std::vector<std::string_view> keys = {
      // run
      "seed",
      // corpus
      "n_images", "captions_per_image", "concepts", "d_v", "d_c",
      "regions_min", "regions_max", "words_min", "words_max", "concepts_min",
      "concepts_max", "filler_words", "noise_sigma", "split_train",
      "split_val", "split_test",
      // model
      "hidden_d", "layers", "heads", "vocab", "ff_mult",
      // training
      "epochs", "max_steps", "batch_size", "margin", "temperature",
      "lr_head", "lr_backbone", "beta1", "beta2", "adam_eps",
      "weight_triplet", "weight_distill", "validate",
      // bench / eval
      "bench_n", "bench_reps", "bench_warmup",
      "eval_folds", "k1"};
  return keys;
}

}  // namespace aladin
