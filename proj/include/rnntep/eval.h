// rnntep/eval.h
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

// Token error rate, endpoint latency percentiles and operating-point sweeps.

#ifndef RNNTEP_EVAL_H_
#define RNNTEP_EVAL_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rnntep/decoder.h"
#include "rnntep/rescorer.h"

namespace rnntep {

struct EditCounts {
  int sub = 0;
  int ins = 0;
  int del = 0;
  int total() const { return sub + ins + del; }
  bool operator==(const EditCounts &) const = default;
};

// Unit-cost Levenshtein alignment; among minimal scripts, substitutions are
// preferred over insertion+deletion pairs.
EditCounts EditDistance(std::span<const int> ref, std::span<const int> hyp);

struct UtteranceResult {
  std::string id;
  std::vector<int> ref;  // EOS stripped
  std::vector<int> hyp;  // EOS stripped
  EditCounts errors;
  std::optional<int> endpoint_frame;
  std::optional<double> latency_ms;
  EndpointSource source = EndpointSource::kNone;
};

double CorpusWer(std::span<const UtteranceResult> results);

struct LatencySummary {
  std::optional<double> ep50_ms;
  std::optional<double> ep90_ms;
  double eou_pct = 0;
};

// Nearest-rank: the ceil(pct/100 * n)-th smallest value.
double NearestRankPercentile(std::vector<double> values, int pct);

LatencySummary SummarizeLatency(std::span<const std::optional<double>> latencies,
                                int total);
LatencySummary SummarizeLatency(std::span<const UtteranceResult> results);

// Everything needed to decode and optionally rescore a corpus.
struct EvalSystem {
  const ParamSet *rnnt = nullptr;
  const ModelConfig *model = nullptr;
  const PrototypeTable *endpointer = nullptr;  // fallback detector
  double frame_ms = 60;
  const ParamSet *las = nullptr;  // rescoring needs both las and las_cfg
  const LasConfig *las_cfg = nullptr;
  int jobs = 1;
};

struct CorpusEvaluation {
  std::vector<UtteranceResult> first_pass;
  std::vector<UtteranceResult> rescored;  // empty without rescoring
  std::vector<DecodeResult> decodes;
  double first_pass_wer = 0;
  double wer = 0;  // rescored when rescoring ran
  LatencySummary latency;

  const std::vector<UtteranceResult> &final_results() const {
    return rescored.empty() ? first_pass : rescored;
  }
};

UtteranceResult MakeResult(const Utterance &utt, const std::vector<int> &tokens,
                           const DecodeResult &decode, int eos, double frame_ms);

CorpusEvaluation EvaluateCorpus(const EvalSystem &system,
                                std::span<const Utterance> corpus,
                                const DecodeConfig &dcfg,
                                const RescoreConfig *rescore);

struct SweepRow {
  double alpha_eos = 0;
  double beta = 0;
  std::optional<double> wer_pct;
  LatencySummary latency;
  std::string error;  // non-empty when the point failed
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

// Grid in alpha-major order. Failing points are recorded, not thrown.
SweepReport RocSweep(const EvalSystem &system, std::span<const Utterance> corpus,
                     std::span<const double> alpha_grid,
                     std::span<const double> beta_grid,
                     const DecodeConfig &dcfg, const RescoreConfig *rescore);

std::string FormatSweepCsv(const SweepReport &report);
void WriteSweepCsv(const std::filesystem::path &path, const SweepReport &report);

}  // namespace rnntep

#endif  // RNNTEP_EVAL_H_
