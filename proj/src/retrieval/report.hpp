// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "retrieval/bench.hpp"
#include "retrieval/metrics.hpp"

namespace aladin::retrieval {

// Single-line JSON records with fixed field names.
std::string to_json_line(const RecallReport& report);
std::string to_json_line(const PipelineTiming& timing);

RecallReport parse_recall_line(const std::string& line);
PipelineTiming parse_timing_line(const std::string& line);

}  // namespace aladin::retrieval
