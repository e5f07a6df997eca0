// rnntep/checkpoint.h
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

#ifndef RNNTEP_CHECKPOINT_H_
#define RNNTEP_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>

#include "rnntep/params.h"

namespace rnntep {

// Versioned header, string metadata, then named float64 arrays. Transducer
// arrays live under enc./pred./joint., rescorer arrays under las.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  ParamSet params;
};

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path &path);

}  // namespace rnntep

#endif  // RNNTEP_CHECKPOINT_H_
