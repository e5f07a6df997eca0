// rnntep/checkpoint.cc
//
// Copyright 2026  The rnntep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rnntep/checkpoint.h"

#include <algorithm>
#include <fstream>

#include "binary_io.h"

namespace rnntep {

namespace {
constexpr char kMagic[8] = {'R', 'N', 'T', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorKind::kIo, "checkpoint", "cannot write " + path.string());
  os.write(kMagic, sizeof(kMagic));
  binio::Put<std::uint32_t>(os, kVersion);
  binio::Put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto &[key, value] : ckpt.meta) {
    binio::PutString(os, key);
    binio::PutString(os, value);
  }
  binio::Put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.params.size()));
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const MatrixXd &a = ckpt.params.array(i);
    binio::PutString(os, ckpt.params.name(i));
    binio::Put<std::uint64_t>(os, static_cast<std::uint64_t>(a.rows()));
    binio::Put<std::uint64_t>(os, static_cast<std::uint64_t>(a.cols()));
    binio::PutDoubles(os, a.data(), static_cast<std::size_t>(a.size()));
  }
  if (!os) Fail(ErrorKind::kIo, "checkpoint", "write failed: " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "checkpoint", "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kMagic))
    Fail(ErrorKind::kIo, "checkpoint", "not a checkpoint: " + path.string());
  const auto version = binio::Get<std::uint32_t>(is, "version");
  if (version != kVersion)
    Fail(ErrorKind::kIo, "checkpoint",
         "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  const auto num_meta = binio::Get<std::uint32_t>(is, "meta count");
  for (std::uint32_t i = 0; i < num_meta; ++i) {
    std::string key = binio::GetString(is, "meta key");
    ckpt.meta[key] = binio::GetString(is, "meta value");
  }
  const auto num_arrays = binio::Get<std::uint32_t>(is, "array count");
  for (std::uint32_t i = 0; i < num_arrays; ++i) {
    const std::string name = binio::GetString(is, "array name");
    const auto rows = binio::Get<std::uint64_t>(is, "rows");
    const auto cols = binio::Get<std::uint64_t>(is, "cols");
    if (rows > (1u << 24) || cols > (1u << 24))
      Fail(ErrorKind::kIo, "checkpoint", "implausible shape for " + name);
    MatrixXd &a = ckpt.params.Add(name, static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(cols));
    binio::GetDoubles(is, a.data(), static_cast<std::size_t>(a.size()), "array");
  }
  return ckpt;
}

}  // namespace rnntep
