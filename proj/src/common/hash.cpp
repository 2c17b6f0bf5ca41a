// Copyright 2026 The Aladin Authors.
// SPDX-License-Identifier: Apache-2.0

#include "common/hash.hpp"

#include <openssl/evp.h>

#include <array>

#include "common/binary_io.hpp"
#include "common/error.hpp"

namespace aladin {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kInternal, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string file_sha256_hex(const std::string& path) {
  return sha256_hex(io::read_file(path));
}

}  // namespace aladin
