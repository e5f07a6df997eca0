// rnntep/training.h
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

// Minibatch SGD loops for the training stages. Per-utterance gradients are
// computed in parallel and summed in batch order, so results do not depend
// on the number of worker threads.

#ifndef RNNTEP_TRAINING_H_
#define RNNTEP_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rnntep/config.h"
#include "rnntep/eval.h"

namespace rnntep {

struct TrainLogEntry {
  int step = 0;
  double loss = 0;  // mean training loss since the previous entry
  std::optional<double> dev_wer;
};

using TrainLog = std::vector<TrainLogEntry>;

// Held-out evaluation used for the periodic log lines.
struct DevEval {
  std::span<const Utterance> utterances;
  DecodeConfig decode;
  const PrototypeTable *endpointer = nullptr;
  double frame_ms = 60;
};

struct RunOptions {
  int jobs = 1;
  std::uint64_t seed = 1;  // shuffling
};

// Transducer cross-entropy (with the penalty when given).
TrainLog TrainRnnt(ParamSet &params, const ModelConfig &mcfg,
                   std::span<const Utterance> train, const TrainConfig &cfg,
                   const PenaltyConfig *penalty, const DevEval *dev,
                   const RunOptions &opts);

// Teacher-forced cross-entropy of the rescorer on reference sequences; the
// first-pass model is only read.
TrainLog TrainLas(ParamSet &las, const LasConfig &lcfg, const ParamSet &rnnt,
                  const ModelConfig &mcfg, std::span<const Utterance> train,
                  const LasTrainConfig &cfg, const RunOptions &opts);

struct MwerStageStats {
  int steps = 0;
  int utterances = 0;
  int skipped = 0;
};

TrainLog TrainMwer(const MwerModel &model, std::span<const Utterance> train,
                   const DecodeConfig &dcfg, const PenaltyConfig &penalty,
                   const MwerStageConfig &cfg, const RunOptions &opts,
                   MwerStageStats *stats = nullptr);

// One line per entry: step, loss, dev WER (empty when not evaluated).
void WriteTrainLog(const std::filesystem::path &path, const TrainLog &log);

}  // namespace rnntep

#endif  // RNNTEP_TRAINING_H_
