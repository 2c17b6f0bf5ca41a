// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace aladin {
namespace {

std::atomic<std::uint64_t> g_warnings{0};
std::atomic<bool> g_silenced{false};
std::mutex g_stderr_mutex;

}  // namespace

void log_warning(std::string_view message) {
  g_warnings.fetch_add(1, std::memory_order_relaxed);
  if (g_silenced.load(std::memory_order_relaxed)) return;
  std::lock_guard<std::mutex> lock(g_stderr_mutex);
  std::cerr << "warning: " << message << '\n';
}

std::uint64_t warning_count() {
  return g_warnings.load(std::memory_order_relaxed);
}

void set_warnings_silenced(bool silenced) {
  g_silenced.store(silenced, std::memory_order_relaxed);
}

}  // namespace aladin
