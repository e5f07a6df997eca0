// rnntep/config.h
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

// Experiment configuration. Text format:
//
//   # comment
//   [section]
//   key = value
//
// Every key must be known; see docs/config.md for the full list.

#ifndef RNNTEP_CONFIG_H_
#define RNNTEP_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rnntep/datagen.h"
#include "rnntep/decoder.h"
#include "rnntep/model.h"
#include "rnntep/mwer.h"
#include "rnntep/rescorer.h"
#include "rnntep/transducer.h"

namespace rnntep {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 8;
  double learning_rate = 0.05;
  double clip_norm = 5.0;
  int eval_every = 0;        // steps between held-out evaluations; 0 = per epoch
  int eval_utterances = 100; // held-out subset size used for those evaluations
};

struct MwerStageConfig {
  MwerConfig mwer;
  int epochs = 1;
  int batch_size = 4;
  int max_utterances = 0;  // 0 = whole training set
};

struct LasTrainConfig {
  int epochs = 4;
  int batch_size = 8;
  double learning_rate = 0.05;
  double clip_norm = 5.0;
};

struct SweepConfig {
  std::vector<double> alpha_grid{0.5, 1.0, 2.0};
  std::vector<double> beta_grid{0.2, 0.4, 0.6, 0.8};
  // Offsets tried when the RNN-T EOS score is left out of rescoring.
  std::vector<double> eos_offset_grid{-2.0, -1.0, 0.0, 1.0, 2.0};
};

// Penalty settings of the comparison ladder.
struct LadderConfig {
  double early_alpha = 0.1;
  double late_alpha = 1.0;
  int late_buffer = 3;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;  // component seeds derive from this
  double train_fraction = 0.9;
  std::string output_dir = "out";
  std::vector<std::string> stages{"rnnt_ce", "mwer", "las_ce", "las_mwer"};
  int jobs = 1;

  CorpusSpec corpus;
  ModelConfig model;
  PenaltyConfig penalty;
  DecodeConfig decode;
  LasConfig las;
  RescoreConfig rescore;
  TrainConfig train;
  MwerStageConfig mwer;
  LasTrainConfig las_train;
  SweepConfig sweep;
  LadderConfig ladder;
};

inline const std::vector<std::string> &KnownStages() {
  static const std::vector<std::string> stages{"rnnt_ce", "mwer", "las_ce",
                                               "las_mwer"};
  return stages;
}

// Sets the master seed and every derived component seed.
void ApplySeed(ExperimentConfig &cfg, std::uint64_t seed);

// Fills in fields implied by others (vocab and dimensions shared across
// sections) and runs every validator.
void FinalizeConfig(ExperimentConfig &cfg);

ExperimentConfig ParseConfig(const std::string &text,
                             const std::string &source = "<string>");
ExperimentConfig LoadConfig(const std::filesystem::path &path);

// Canonical text of every key; parses back to an equal config.
std::string FormatConfig(const ExperimentConfig &cfg);

}  // namespace rnntep

#endif  // RNNTEP_CONFIG_H_
