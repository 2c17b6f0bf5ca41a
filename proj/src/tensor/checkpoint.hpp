// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tensor/tensor.hpp"

namespace aladin::checkpoint {

inline constexpr char kMagic[] = "ALDN";
inline constexpr std::uint32_t kVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// Layout: "ALDN", u32 version, u64 count, then per tensor: u32 name length,
// UTF-8 name, u32 rank, u64 dims[rank], f64 payload. All little-endian.
std::string serialize(const NamedTensors& tensors);
NamedTensors deserialize(const std::string& bytes,
                         const std::string& context = "checkpoint");

void save(const std::string& path, const NamedTensors& tensors);
NamedTensors load(const std::string& path);

}  // namespace aladin::checkpoint
