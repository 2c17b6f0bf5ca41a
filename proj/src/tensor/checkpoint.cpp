// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "tensor/checkpoint.hpp"

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace aladin::checkpoint {

std::string serialize(const NamedTensors& tensors) {
  io::Writer w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u64(tensors.size());
  for (const auto& [name, t] : tensors) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.u64(d);
    w.f64s(t.data());
  }
  return w.take();
}

NamedTensors deserialize(const std::string& bytes, const std::string& context) {
  io::Reader r(bytes, context);
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError(context + ": unsupported version " +
                      std::to_string(version));
  }
  const std::uint64_t count = r.u64();
  NamedTensors out;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    r.need(static_cast<std::size_t>(rank) * 8);
    Shape shape(rank);
    for (auto& d : shape) d = r.u64();
    const std::size_t numel = shape_numel(shape);
    r.need(numel * 8);
    std::vector<double> data(numel);
    r.f64s(data);
    out.emplace_back(std::move(name), Tensor::from_data(shape, std::move(data)));
  }
  if (!r.at_end()) throw FormatError(context + ": trailing bytes");
  return out;
}

void save(const std::string& path, const NamedTensors& tensors) {
  io::write_file(path, serialize(tensors));
}

NamedTensors load(const std::string& path) {
  return deserialize(io::read_file(path), path);
}

}  // namespace aladin::checkpoint
