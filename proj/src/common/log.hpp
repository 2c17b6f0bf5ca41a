// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace aladin {

// Warnings go to stderr unless silenced; the counter is always maintained.
void log_warning(std::string_view message);
std::uint64_t warning_count();
void set_warnings_silenced(bool silenced);

}  // namespace aladin
