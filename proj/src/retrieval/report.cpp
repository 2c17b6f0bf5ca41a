// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "retrieval/report.hpp"

#include <json.hpp>

#include "common/error.hpp"

namespace aladin::retrieval {
namespace {

nlohmann::json parse(const std::string& line) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report line: ") + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw FormatError(std::string("report line: missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("report line: bad field '") + name + "'");
  }
}

}  // namespace

std::string to_json_line(const RecallReport& r) {
  nlohmann::ordered_json j;
  j["direction"] = r.direction;
  j["r1"] = r.r1;
  j["r5"] = r.r5;
  j["r10"] = r.r10;
  j["rsum"] = r.rsum;
  j["n_queries"] = r.n_queries;
  j["median_ms"] = r.median_ms;
  return j.dump();
}

std::string to_json_line(const PipelineTiming& t) {
  nlohmann::ordered_json j;
  j["pipeline"] = t.pipeline;
  j["n"] = t.n;
  j["r"] = t.r;
  j["repetitions"] = t.repetitions;
  j["median_ms"] = t.median_ms;
  j["item_forwards_per_query"] = t.item_forwards_per_query;
  j["query_forwards_per_query"] = t.query_forwards_per_query;
  j["cache_forwards"] = t.cache_forwards;
  return j.dump();
}

RecallReport parse_recall_line(const std::string& line) {
  const auto j = parse(line);
  RecallReport r;
  r.direction = field<std::string>(j, "direction");
  r.r1 = field<double>(j, "r1");
  r.r5 = field<double>(j, "r5");
  r.r10 = field<double>(j, "r10");
  r.rsum = field<double>(j, "rsum");
  r.n_queries = field<std::uint64_t>(j, "n_queries");
  r.median_ms = field<double>(j, "median_ms");
  return r;
}

PipelineTiming parse_timing_line(const std::string& line) {
  const auto j = parse(line);
  PipelineTiming t;
  t.pipeline = field<std::string>(j, "pipeline");
  t.n = field<std::uint64_t>(j, "n");
  t.r = field<std::uint64_t>(j, "r");
  t.repetitions = field<std::uint64_t>(j, "repetitions");
  t.median_ms = field<double>(j, "median_ms");
  t.item_forwards_per_query = field<std::uint64_t>(j, "item_forwards_per_query");
  t.query_forwards_per_query = field<std::uint64_t>(j, "query_forwards_per_query");
  t.cache_forwards = field<std::uint64_t>(j, "cache_forwards");
  return t;
}

}  // namespace aladin::retrieval
