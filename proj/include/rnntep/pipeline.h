// rnntep/pipeline.h
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

// Command implementations and the full comparison ladder:
//
//   B1  no end-of-query token, fallback detector only
//   B2  end-of-query token, no penalty
//   E1  + early penalty
//   E2  + early and late penalty
//   E5  E2 + expected-error fine-tuning (late penalty only)
//   E6  E2 + rescorer trained by cross-entropy (first pass frozen)
//   E7  E6 + expected-error training of the rescorer
//   E8  E6 + expected-error training of both models

#ifndef RNNTEP_PIPELINE_H_
#define RNNTEP_PIPELINE_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rnntep/checkpoint.h"
#include "rnntep/config.h"
#include "rnntep/eval.h"
#include "rnntep/training.h"

namespace rnntep {

using Logger = std::function<void(const std::string &)>;
void LogToStderr(const std::string &line);

struct CorpusSplit {
  std::vector<Utterance> train;
  std::vector<Utterance> test;
};

CorpusSplit GenerateSplit(const ExperimentConfig &cfg);
void WriteSplit(const std::filesystem::path &dir, const CorpusSplit &split);
CorpusSplit ReadSplit(const std::filesystem::path &dir);
// Reads the split from dir, generating and writing it first when absent.
CorpusSplit LoadOrGenerateSplit(const ExperimentConfig &cfg,
                                const std::filesystem::path &dir);

// First-pass arrays (enc.*, pred.*, joint.*) and rescorer arrays (las.*).
struct ModelBundle {
  ParamSet rnnt;
  std::optional<ParamSet> las;
};

Checkpoint MakeCheckpoint(const ExperimentConfig &cfg, const std::string &stage,
                          const ModelBundle &bundle);
// Loads and checks array shapes against the configuration.
ModelBundle LoadBundle(const ExperimentConfig &cfg,
                       const std::filesystem::path &path);

// Decode settings for a model trained without the end-of-query token.
DecodeConfig NoEosDecode(DecodeConfig cfg);

// ---------------------------------------------------------------------------
// Commands. Each writes its artifacts under out and returns normally or
// throws Error.

struct CommandContext {
  ExperimentConfig cfg;
  std::filesystem::path out;
  int jobs = 1;
  Logger log = LogToStderr;
};

void CmdGenerate(const CommandContext &ctx);
// Writes <out>/<stage>.ckpt and <out>/<stage>.metrics.tsv.
std::filesystem::path CmdTrain(const CommandContext &ctx, const std::string &stage,
                               const std::optional<std::filesystem::path> &base);
// Writes <out>/decode.tsv; returns the evaluation of the test split.
CorpusEvaluation CmdDecode(const CommandContext &ctx,
                           const std::filesystem::path &checkpoint);
// Writes <out>/sweep.csv.
SweepReport CmdSweep(const CommandContext &ctx,
                     const std::filesystem::path &checkpoint);

// ---------------------------------------------------------------------------

struct SystemMetrics {
  std::string name;
  double wer = 0;
  double first_pass_wer = 0;
  LatencySummary latency;
};

struct TrendResult {
  std::string id;  // "8a" .. "8f"
  std::string description;
  bool passed = false;
  std::string detail;
};

struct LadderReport {
  std::vector<SystemMetrics> systems;
  std::vector<TrendResult> trends;
  std::vector<std::string> sweep_files;  // relative to the output directory

  const SystemMetrics &system(const std::string &name) const;
  bool all_passed() const;
};

// Runs everything and writes corpus/, checkpoints, sweep_*.csv, summary.csv
// and trends.json under ctx.out.
LadderReport CmdRunAll(const CommandContext &ctx);

std::string FormatSummaryCsv(const std::vector<SystemMetrics> &systems);
std::string TrendsJson(const LadderReport &report);

}  // namespace rnntep

#endif  // RNNTEP_PIPELINE_H_
